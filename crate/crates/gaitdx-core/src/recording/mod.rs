//! Pressure recordings: the data model, the `.ppr` text format, validation,
//! and the synthetic gait generator.

mod ppr;
pub(crate) mod synth;

pub use ppr::{load_recording, parse_recording, save_recording, write_recording, PprError};
pub use synth::{
    generate_each, generate_recording, generate_synthetic_dataset, subject_profile, AffectedSide,
    GeneratorConfig, GeneratorError, SubjectProfile, SyntheticDataset,
};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::fmt;

/// One instantaneous pressure sample over the sensor grid, row-major,
/// `grid_height` rows by `grid_width` columns.
pub type Frame = Array2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    pub fn as_str(self) -> &'static str {
        match self {
            Foot::Left => "left",
            Foot::Right => "right",
        }
    }

    /// +1 when the medial side of this foot lies toward +x (columns),
    /// -1 when it lies toward -x. Declared convention used throughout.
    pub fn medial_sign(self) -> f64 {
        match self {
            Foot::Left => 1.0,
            Foot::Right => -1.0,
        }
    }
}

impl fmt::Display for Foot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Foot {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(Foot::Left),
            "right" => Ok(Foot::Right),
            other => Err(format!("unknown foot {other:?}, expected left|right")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
            Label::Unknown => "unknown",
        }
    }

    /// Class index used by the classifiers: Negative = 0, Positive = 1.
    pub fn class_index(self) -> Option<usize> {
        match self {
            Label::Negative => Some(0),
            Label::Positive => Some(1),
            Label::Unknown => None,
        }
    }

    pub fn from_class_index(idx: usize) -> Label {
        if idx == 1 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Label::Positive),
            "negative" => Ok(Label::Negative),
            "unknown" => Ok(Label::Unknown),
            other => Err(format!(
                "unknown label {other:?}, expected positive|negative|unknown"
            )),
        }
    }
}

/// A time-ordered sequence of pressure frames on a fixed sensor grid,
/// together with subject and label metadata. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub grid_width: usize,
    pub grid_height: usize,
    pub sample_rate_hz: f64,
    pub frames: Vec<Frame>,
    pub subject_id: String,
    pub foot: Foot,
    pub label: Label,
}

impl Recording {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Seconds between consecutive frames.
    pub fn frame_interval(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }
}

/// Per-subject bookkeeping emitted alongside generated datasets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectMeta {
    pub subject_id: String,
    pub label: Label,
    pub walk_count: usize,
}

/// One invariant violation found by [`validate`]. Violations are data, not
/// errors: an invalid recording still loads and can be inspected.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyFrameSequence,
    NonPositiveGrid,
    NonPositiveSampleRate { value: f64 },
    EmptySubjectId,
    FrameShapeMismatch { frame: usize, rows: usize, cols: usize },
    NegativeCell { frame: usize, row: usize, col: usize, value: f64 },
    NonFiniteCell { frame: usize, row: usize, col: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyFrameSequence => write!(f, "empty frame sequence"),
            Violation::NonPositiveGrid => write!(f, "grid dimensions must be positive"),
            Violation::NonPositiveSampleRate { value } => {
                write!(f, "sample rate must be positive, got {value}")
            }
            Violation::EmptySubjectId => write!(f, "subject_id is empty"),
            Violation::FrameShapeMismatch { frame, rows, cols } => write!(
                f,
                "frame {frame} has shape {rows}x{cols}, expected the recording grid"
            ),
            Violation::NegativeCell { frame, row, col, value } => write!(
                f,
                "negative pressure {value} at frame {frame}, row {row}, col {col}"
            ),
            Violation::NonFiniteCell { frame, row, col } => {
                write!(f, "non-finite pressure at frame {frame}, row {row}, col {col}")
            }
        }
    }
}

/// Checks every type invariant and returns the full list of violations.
/// An empty list means the recording is valid.
pub fn validate(r: &Recording) -> Vec<Violation> {
    let mut out = Vec::new();
    if r.grid_width == 0 || r.grid_height == 0 {
        out.push(Violation::NonPositiveGrid);
    }
    if !(r.sample_rate_hz > 0.0) {
        out.push(Violation::NonPositiveSampleRate { value: r.sample_rate_hz });
    }
    if r.subject_id.is_empty() {
        out.push(Violation::EmptySubjectId);
    }
    if r.frames.is_empty() {
        out.push(Violation::EmptyFrameSequence);
    }
    for (k, frame) in r.frames.iter().enumerate() {
        let (rows, cols) = frame.dim();
        if rows != r.grid_height || cols != r.grid_width {
            out.push(Violation::FrameShapeMismatch { frame: k, rows, cols });
            continue;
        }
        for ((i, j), &v) in frame.indexed_iter() {
            if !v.is_finite() {
                out.push(Violation::NonFiniteCell { frame: k, row: i, col: j });
            } else if v < 0.0 {
                out.push(Violation::NegativeCell { frame: k, row: i, col: j, value: v });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn small_recording() -> Recording {
        Recording {
            grid_width: 2,
            grid_height: 2,
            sample_rate_hz: 100.0,
            frames: vec![arr2(&[[1.0, 0.0], [2.0, 5.0]])],
            subject_id: "S1".into(),
            foot: Foot::Left,
            label: Label::Positive,
        }
    }

    #[test]
    fn valid_recording_has_no_violations() {
        assert!(validate(&small_recording()).is_empty());
    }

    #[test]
    fn negative_cell_is_reported_with_coordinates() {
        let mut r = small_recording();
        r.frames = vec![
            r.frames[0].clone(),
            r.frames[0].clone(),
            r.frames[0].clone(),
            r.frames[0].clone(),
        ];
        r.frames[3][[1, 0]] = -0.5;
        let violations = validate(&r);
        assert_eq!(violations.len(), 1);
        assert_eq!(
            violations[0],
            Violation::NegativeCell { frame: 3, row: 1, col: 0, value: -0.5 }
        );
    }

    #[test]
    fn empty_frame_sequence_is_a_violation() {
        let mut r = small_recording();
        r.frames.clear();
        let violations = validate(&r);
        assert!(violations.contains(&Violation::EmptyFrameSequence));
        assert_eq!(violations[0].to_string(), "empty frame sequence");
    }

    #[test]
    fn frame_shape_mismatch_names_the_frame() {
        let mut r = small_recording();
        r.frames.push(arr2(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]));
        let violations = validate(&r);
        assert_eq!(
            violations,
            vec![Violation::FrameShapeMismatch { frame: 1, rows: 2, cols: 3 }]
        );
    }
}
