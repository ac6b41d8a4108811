//! The `.ppr` recording file format.
//!
//! Plain UTF-8 text with LF line endings:
//!
//! ```text
//! ppr 1
//! W H K sample_rate_hz
//! subject_id foot label
//! <K blocks of H lines, each W space-separated nonnegative numbers>
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so
//! save → load reproduces the exact bit pattern of every cell.

use super::{Foot, Label, Recording};
use ndarray::Array2;
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PprError {
    #[error("line {line}: expected magic header `ppr 1`, got {found:?}")]
    BadMagic { line: usize, found: String },
    #[error("line {line}: malformed dimensions header ({reason})")]
    BadDimensions { line: usize, reason: String },
    #[error("line {line}: malformed metadata header ({reason})")]
    BadMetadata { line: usize, reason: String },
    #[error("line {line}: expected {expected} values in frame row, got {got}")]
    DimensionMismatch { line: usize, expected: usize, got: usize },
    #[error("line {line}: negative pressure value {value}")]
    NegativeValue { line: usize, value: f64 },
    #[error("line {line}: unparseable number {token:?}")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: truncated frame data (frame {frame}, row {row} missing)")]
    TruncatedFrame { line: usize, frame: usize, row: usize },
    #[error("recording is invalid: {0}")]
    InvalidRecording(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses a `.ppr` file into a [`Recording`].
pub fn load_recording(path: impl AsRef<Path>) -> Result<Recording, PprError> {
    let text = fs::read_to_string(path)?;
    parse_recording(&text)
}

/// Parses `.ppr` text. Line numbers in errors are 1-based.
pub fn parse_recording(text: &str) -> Result<Recording, PprError> {
    let mut lines = text.lines().enumerate();

    let (idx, magic) = lines
        .next()
        .ok_or(PprError::BadMagic { line: 1, found: String::new() })?;
    if magic.trim_end() != "ppr 1" {
        return Err(PprError::BadMagic { line: idx + 1, found: magic.to_string() });
    }

    let (idx, dims) = lines.next().ok_or(PprError::BadDimensions {
        line: 2,
        reason: "missing line".into(),
    })?;
    let dims_line = idx + 1;
    let parts: Vec<&str> = dims.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(PprError::BadDimensions {
            line: dims_line,
            reason: format!("expected `W H K sample_rate_hz`, got {} fields", parts.len()),
        });
    }
    let parse_usize = |tok: &str, what: &str| -> Result<usize, PprError> {
        tok.parse::<usize>().map_err(|_| PprError::BadDimensions {
            line: dims_line,
            reason: format!("{what} {tok:?} is not a positive integer"),
        })
    };
    let width = parse_usize(parts[0], "width")?;
    let height = parse_usize(parts[1], "height")?;
    let frame_count = parse_usize(parts[2], "frame count")?;
    let sample_rate: f64 = parts[3].parse().map_err(|_| PprError::BadDimensions {
        line: dims_line,
        reason: format!("sample rate {:?} is not a number", parts[3]),
    })?;
    if width == 0 || height == 0 || frame_count == 0 || !(sample_rate > 0.0) {
        return Err(PprError::BadDimensions {
            line: dims_line,
            reason: "dimensions, frame count and sample rate must be positive".into(),
        });
    }

    let (idx, meta) = lines.next().ok_or(PprError::BadMetadata {
        line: 3,
        reason: "missing line".into(),
    })?;
    let meta_line = idx + 1;
    let parts: Vec<&str> = meta.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(PprError::BadMetadata {
            line: meta_line,
            reason: format!("expected `subject_id foot label`, got {} fields", parts.len()),
        });
    }
    let subject_id = parts[0].to_string();
    let foot: Foot = parts[1]
        .parse()
        .map_err(|e| PprError::BadMetadata { line: meta_line, reason: e })?;
    let label: Label = parts[2]
        .parse()
        .map_err(|e| PprError::BadMetadata { line: meta_line, reason: e })?;

    let mut frames = Vec::with_capacity(frame_count);
    for frame_idx in 0..frame_count {
        let mut frame = Array2::<f64>::zeros((height, width));
        for row in 0..height {
            let (idx, data_line) = match lines.next() {
                Some(pair) if !pair.1.trim().is_empty() => pair,
                // A blank line or EOF inside a frame block is truncation.
                Some((idx, _)) => {
                    return Err(PprError::TruncatedFrame {
                        line: idx + 1,
                        frame: frame_idx,
                        row,
                    })
                }
                None => {
                    return Err(PprError::TruncatedFrame {
                        line: text.lines().count() + 1,
                        frame: frame_idx,
                        row,
                    })
                }
            };
            let line_no = idx + 1;
            let mut count = 0usize;
            for (col, tok) in data_line.split_whitespace().enumerate() {
                if col >= width {
                    count += 1;
                    continue;
                }
                let value: f64 = tok
                    .parse()
                    .map_err(|_| PprError::BadNumber { line: line_no, token: tok.to_string() })?;
                if value < 0.0 {
                    return Err(PprError::NegativeValue { line: line_no, value });
                }
                frame[[row, col]] = value;
                count += 1;
            }
            if count != width {
                return Err(PprError::DimensionMismatch {
                    line: line_no,
                    expected: width,
                    got: count,
                });
            }
        }
        frames.push(frame);
    }

    Ok(Recording {
        grid_width: width,
        grid_height: height,
        sample_rate_hz: sample_rate,
        frames,
        subject_id,
        foot,
        label,
    })
}

/// Serializes a recording to `.ppr` text.
pub fn write_recording(r: &Recording) -> Result<String, PprError> {
    let violations = super::validate(r);
    if let Some(first) = violations.first() {
        return Err(PprError::InvalidRecording(first.to_string()));
    }
    if r.subject_id.contains(char::is_whitespace) {
        return Err(PprError::InvalidRecording(
            "subject_id must not contain whitespace".into(),
        ));
    }

    let mut out = String::new();
    out.push_str("ppr 1\n");
    out.push_str(&format!(
        "{} {} {} {}\n",
        r.grid_width,
        r.grid_height,
        r.frames.len(),
        r.sample_rate_hz
    ));
    out.push_str(&format!("{} {} {}\n", r.subject_id, r.foot, r.label));
    for frame in &r.frames {
        for row in frame.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(' ');
                }
                out.push_str(&format!("{v}"));
                first = false;
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Writes a recording to disk in the `.ppr` format.
pub fn save_recording(r: &Recording, path: impl AsRef<Path>) -> Result<(), PprError> {
    let text = write_recording(r)?;
    let mut file = fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn parses_single_zero_frame() {
        let text = "ppr 1\n4 4 1 100.0\nS1 left positive\n0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n";
        let r = parse_recording(text).unwrap();
        assert_eq!(r.frame_count(), 1);
        assert_eq!((r.grid_height, r.grid_width), (4, 4));
        assert_eq!(r.sample_rate_hz, 100.0);
        assert_eq!(r.subject_id, "S1");
        assert_eq!(r.foot, Foot::Left);
        assert_eq!(r.label, Label::Positive);
        assert!(r.frames[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn round_trips_exactly() {
        let r = Recording {
            grid_width: 3,
            grid_height: 2,
            sample_rate_hz: 97.5,
            frames: vec![
                arr2(&[[0.1, 0.0, 3.25], [7.0, 1e-12, 2.5]]),
                arr2(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]),
            ],
            subject_id: "subj-42".into(),
            foot: Foot::Right,
            label: Label::Unknown,
        };
        let text = write_recording(&r).unwrap();
        assert!(text.contains("subj-42 right unknown"));
        let back = parse_recording(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn truncated_frame_is_reported_at_the_right_line() {
        // H=4 but only 3 data rows.
        let text = "ppr 1\n4 4 1 100.0\nS1 left positive\n0 0 0 0\n0 0 0 0\n0 0 0 0\n";
        match parse_recording(text) {
            Err(PprError::TruncatedFrame { line, frame: 0, row: 3 }) => assert_eq!(line, 7),
            other => panic!("expected TruncatedFrame, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_names_line_one() {
        match parse_recording("ppr 2\n1 1 1 10\nS1 left negative\n0\n") {
            Err(PprError::BadMagic { line: 1, .. }) => {}
            other => panic!("expected BadMagic, got {other:?}"),
        }
    }

    #[test]
    fn negative_value_names_its_line() {
        let text = "ppr 1\n2 1 1 10\nS1 left negative\n1 -3\n";
        match parse_recording(text) {
            Err(PprError::NegativeValue { line: 4, value }) => assert_eq!(value, -3.0),
            other => panic!("expected NegativeValue, got {other:?}"),
        }
    }

    #[test]
    fn row_width_mismatch_names_its_line() {
        let text = "ppr 1\n3 1 1 10\nS1 left negative\n1 2\n";
        match parse_recording(text) {
            Err(PprError::DimensionMismatch { line: 4, expected: 3, got: 2 }) => {}
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }
    }

    #[test]
    fn unparseable_number_is_distinct() {
        let text = "ppr 1\n2 1 1 10\nS1 left negative\n1 abc\n";
        match parse_recording(text) {
            Err(PprError::BadNumber { line: 4, token }) => assert_eq!(token, "abc"),
            other => panic!("expected BadNumber, got {other:?}"),
        }
    }

    #[test]
    fn emitted_line_count_matches_header_plus_frames() {
        let r = Recording {
            grid_width: 32,
            grid_height: 32,
            sample_rate_hz: 100.0,
            frames: vec![Array2::zeros((32, 32)); 160],
            subject_id: "S1".into(),
            foot: Foot::Left,
            label: Label::Negative,
        };
        let text = write_recording(&r).unwrap();
        assert_eq!(text.lines().count(), 3 + 160 * 32);
    }
}
