//! Plantar-pressure gait diagnosis pipeline.
//!
//! The crate covers the full path from raw pressure recordings to a
//! diagnostic label:
//!
//! * [`recording`] — the `.ppr` recording format, validation, and a seeded
//!   synthetic gait generator that stands in for clinical data.
//! * [`preprocess`] — per-cell max/sum/average aggregation over frames,
//!   foot-angle normalization, and grayscale image emission (PGM).
//! * [`features`] — classical gait characteristics: foot progression angle,
//!   arch index, regional division, percent medial impulse, center-of-pressure
//!   trajectory, and peak/mean/integrated pressure summaries.
//! * [`neuralnet`] — a small CPU tensor engine with convolution, fully
//!   connected layers, softmax cross-entropy, SGD with momentum, gradient
//!   checking hooks, and a binary weight format.
//! * [`classifier`] — the per-aggregation CNN models, the three-model
//!   majority-vote ensemble, and a linear SVM baseline over hand-built
//!   features.
//! * [`harness`] — subject-level stratified splits, evaluation reports, and
//!   the end-to-end experiment driver.

pub mod classifier;
pub mod features;
pub mod harness;
pub mod neuralnet;
mod parallel;
pub mod preprocess;
pub mod recording;

pub use recording::{Foot, Label, Recording};

/// Mask threshold used by every feature when the caller does not pick one:
/// a cell belongs to the footprint when it exceeds this fraction of the
/// image maximum.
pub const DEFAULT_CRITICAL_FRACTION: f64 = 0.05;
