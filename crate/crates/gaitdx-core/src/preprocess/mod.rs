//! Frame aggregation, orientation and size normalization, grayscale output.
//!
//! A recording collapses to three pressure images: the per-cell maximum over
//! frames, the per-cell sum, and the per-cell average over the frames where
//! the cell was active. Images are then cropped, scaled to a square canvas
//! and mapped to 8-bit grayscale where the hottest cell is white.

pub mod interp;
pub mod pgm;

use crate::features;
use crate::recording::{Foot, Label, Recording};
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("footprint is empty: no cell exceeds the critical value")]
    EmptyFootprint,
    #[error("grayscale side must be at least 8, got {0}")]
    SideTooSmall(usize),
    #[error("case feet must be one Left and one Right, got {0} and {1}")]
    FeetMismatch(Foot, Foot),
    #[error("case recordings belong to different subjects: {0:?} vs {1:?}")]
    SubjectMismatch(String, String),
    #[error("case recordings carry different labels: {0} vs {1}")]
    LabelMismatch(Label, Label),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
}

/// How a pressure image was aggregated from the frame sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationKind {
    Max,
    Sum,
    Average,
}

impl AggregationKind {
    pub const ALL: [AggregationKind; 3] =
        [AggregationKind::Max, AggregationKind::Sum, AggregationKind::Average];

    pub fn as_str(self) -> &'static str {
        match self {
            AggregationKind::Max => "max",
            AggregationKind::Sum => "sum",
            AggregationKind::Average => "average",
        }
    }
}

impl std::fmt::Display for AggregationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AggregationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(AggregationKind::Max),
            "sum" => Ok(AggregationKind::Sum),
            "average" | "avg" => Ok(AggregationKind::Average),
            other => Err(format!("unknown aggregation kind {other:?}")),
        }
    }
}

/// A single aggregated pressure image with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureImage {
    pub kind: AggregationKind,
    pub cells: Array2<f64>,
    pub subject_id: String,
    pub foot: Foot,
}

impl PressureImage {
    pub fn max_value(&self) -> f64 {
        self.cells.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-cell count of frames in which the cell was nonzero (the divisor of
/// the average aggregation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonzeroCount {
    pub counts: Array2<u32>,
}

/// An 8-bit square grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayscaleImage {
    pub side: usize,
    /// Row-major, `side * side` values.
    pub pixels: Vec<u8>,
}

impl GrayscaleImage {
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.side + col]
    }
}

/// Per-cell maximum over frames.
pub fn aggregate_max(r: &Recording) -> PressureImage {
    let mut cells = Array2::<f64>::zeros((r.grid_height, r.grid_width));
    for frame in &r.frames {
        for ((i, j), &v) in frame.indexed_iter() {
            if v > cells[[i, j]] {
                cells[[i, j]] = v;
            }
        }
    }
    PressureImage {
        kind: AggregationKind::Max,
        cells,
        subject_id: r.subject_id.clone(),
        foot: r.foot,
    }
}

/// Per-cell sum over frames.
pub fn aggregate_sum(r: &Recording) -> PressureImage {
    let mut cells = Array2::<f64>::zeros((r.grid_height, r.grid_width));
    for frame in &r.frames {
        cells += frame;
    }
    PressureImage {
        kind: AggregationKind::Sum,
        cells,
        subject_id: r.subject_id.clone(),
        foot: r.foot,
    }
}

/// Frames in which each cell was nonzero.
pub fn nonzero_counts(r: &Recording) -> NonzeroCount {
    let mut counts = Array2::<u32>::zeros((r.grid_height, r.grid_width));
    for frame in &r.frames {
        for ((i, j), &v) in frame.indexed_iter() {
            if v != 0.0 {
                counts[[i, j]] += 1;
            }
        }
    }
    NonzeroCount { counts }
}

/// Per-cell mean over the frames where the cell was nonzero; cells that are
/// zero in every frame stay zero (no contact means no pressure).
pub fn aggregate_average(r: &Recording) -> PressureImage {
    let sums = aggregate_sum(r);
    let counts = nonzero_counts(r);
    let mut cells = sums.cells;
    for ((i, j), v) in cells.indexed_iter_mut() {
        let k = counts.counts[[i, j]];
        if k > 0 {
            *v /= k as f64;
        } else {
            *v = 0.0;
        }
    }
    PressureImage {
        kind: AggregationKind::Average,
        cells,
        subject_id: r.subject_id.clone(),
        foot: r.foot,
    }
}

pub fn aggregate(r: &Recording, kind: AggregationKind) -> PressureImage {
    match kind {
        AggregationKind::Max => aggregate_max(r),
        AggregationKind::Sum => aggregate_sum(r),
        AggregationKind::Average => aggregate_average(r),
    }
}

/// Tight bounding box of strictly positive cells: (row0, col0, rows, cols).
fn nonzero_bounding_box(cells: &Array2<f64>) -> Option<(usize, usize, usize, usize)> {
    let (h, w) = cells.dim();
    let mut r0 = h;
    let mut r1 = 0usize;
    let mut c0 = w;
    let mut c1 = 0usize;
    let mut any = false;
    for ((i, j), &v) in cells.indexed_iter() {
        if v > 0.0 {
            any = true;
            r0 = r0.min(i);
            r1 = r1.max(i);
            c0 = c0.min(j);
            c1 = c1.max(j);
        }
    }
    any.then(|| (r0, c0, r1 - r0 + 1, c1 - c0 + 1))
}

/// Converts a pressure image to `side x side` grayscale: crop to the tight
/// nonzero bounding box, fit into the canvas preserving aspect ratio with
/// zero padding, then map values so the post-resize maximum becomes 255.
/// An all-zero image maps to all-zero pixels.
pub fn to_grayscale(img: &PressureImage, side: usize) -> Result<GrayscaleImage, PreprocessError> {
    if side < 8 {
        return Err(PreprocessError::SideTooSmall(side));
    }
    let mut canvas = Array2::<f64>::zeros((side, side));
    if let Some((r0, c0, rows, cols)) = nonzero_bounding_box(&img.cells) {
        let crop = img.cells.slice(ndarray::s![r0..r0 + rows, c0..c0 + cols]).to_owned();
        let scale = (side as f64 / rows as f64).min(side as f64 / cols as f64);
        let target_rows = ((rows as f64 * scale).round() as usize).clamp(1, side);
        let target_cols = ((cols as f64 * scale).round() as usize).clamp(1, side);
        let resized = interp::resize_bilinear(&crop, target_rows, target_cols);
        let off_r = (side - target_rows) / 2;
        let off_c = (side - target_cols) / 2;
        canvas
            .slice_mut(ndarray::s![off_r..off_r + target_rows, off_c..off_c + target_cols])
            .assign(&resized);
    }
    let max = canvas.iter().copied().fold(0.0, f64::max);
    let pixels = if max > 0.0 {
        canvas.iter().map(|&v| (255.0 * v / max).round() as u8).collect()
    } else {
        vec![0u8; side * side]
    };
    Ok(GrayscaleImage { side, pixels })
}

/// Rotates every frame about the footprint centroid so the measured foot
/// progression angle becomes zero. The footprint and its angle come from the
/// sum image; values are resampled bilinearly and clipped at zero.
pub fn normalize_orientation(
    r: &Recording,
    critical_fraction: f64,
) -> Result<Recording, PreprocessError> {
    let sum = aggregate_sum(r);
    let mask = features::footprint_mask(&sum, critical_fraction);
    if mask.is_empty() {
        return Err(PreprocessError::EmptyFootprint);
    }
    let fpa = features::compute_fpa(&sum, critical_fraction)?;
    let centroid = mask.centroid().expect("nonempty mask has a centroid");
    let frames = r
        .frames
        .iter()
        .map(|frame| interp::rotate_about(frame, -fpa, centroid))
        .collect();
    Ok(Recording { frames, ..r.clone() })
}

/// One measurement case: six grayscale images (three aggregation kinds for
/// each foot) plus the ground-truth label.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseBundle {
    pub subject_id: String,
    pub label: Label,
    pub side: usize,
    images: [GrayscaleImage; 6],
}

fn image_slot(kind: AggregationKind, foot: Foot) -> usize {
    let k = match kind {
        AggregationKind::Max => 0,
        AggregationKind::Sum => 1,
        AggregationKind::Average => 2,
    };
    let f = match foot {
        Foot::Left => 0,
        Foot::Right => 1,
    };
    k * 2 + f
}

impl CaseBundle {
    /// Assembles a bundle from six images; every image must share one side.
    pub fn from_images(
        subject_id: String,
        label: Label,
        images: [(AggregationKind, Foot, GrayscaleImage); 6],
    ) -> Result<CaseBundle, String> {
        let side = images[0].2.side;
        let mut slots: [Option<GrayscaleImage>; 6] = Default::default();
        for (kind, foot, img) in images {
            if img.side != side {
                return Err(format!(
                    "image sides differ: {} vs {} for {kind} {foot}",
                    img.side, side
                ));
            }
            let slot = image_slot(kind, foot);
            if slots[slot].is_some() {
                return Err(format!("duplicate image for {kind} {foot}"));
            }
            slots[slot] = Some(img);
        }
        let images = slots.map(|s| s.expect("all six slots filled"));
        Ok(CaseBundle { subject_id, label, side, images })
    }

    pub fn image(&self, kind: AggregationKind, foot: Foot) -> &GrayscaleImage {
        &self.images[image_slot(kind, foot)]
    }
}

/// Builds the six normalized images of one case. The pipeline per foot is
/// orientation normalization, aggregation, then grayscale conversion.
pub fn build_case(
    left: &Recording,
    right: &Recording,
    side: usize,
) -> Result<CaseBundle, PreprocessError> {
    build_case_with(left, right, side, true, crate::DEFAULT_CRITICAL_FRACTION)
}

pub fn build_case_with(
    left: &Recording,
    right: &Recording,
    side: usize,
    normalize_fpa: bool,
    critical_fraction: f64,
) -> Result<CaseBundle, PreprocessError> {
    if left.foot != Foot::Left || right.foot != Foot::Right {
        return Err(PreprocessError::FeetMismatch(left.foot, right.foot));
    }
    if left.subject_id != right.subject_id {
        return Err(PreprocessError::SubjectMismatch(
            left.subject_id.clone(),
            right.subject_id.clone(),
        ));
    }
    if left.label != right.label {
        return Err(PreprocessError::LabelMismatch(left.label, right.label));
    }

    let mut images = Vec::with_capacity(6);
    for recording in [left, right] {
        let normalized;
        let source = if normalize_fpa {
            normalized = normalize_orientation(recording, critical_fraction)?;
            &normalized
        } else {
            recording
        };
        for kind in AggregationKind::ALL {
            let img = aggregate(source, kind);
            images.push((kind, recording.foot, to_grayscale(&img, side)?));
        }
    }
    let images: [(AggregationKind, Foot, GrayscaleImage); 6] =
        images.try_into().expect("exactly six images");
    CaseBundle::from_images(left.subject_id.clone(), left.label, images)
        .map_err(|_| unreachable!("slots are unique by construction"))
}
