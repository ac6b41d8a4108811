//! Seeded synthetic gait generator.
//!
//! Each recording simulates one barefoot step over the sensor plate: a
//! pressure wave travels from the heel to the toes across a per-subject
//! footprint built from anisotropic Gaussian blobs (heel pad, midfoot
//! column, medial/lateral ball, hallux, lesser toes). Positive subjects
//! carry a class signal: their center-of-pressure path is displaced toward
//! one configurable side and the forefoot blobs on that side are attenuated.
//!
//! All randomness flows from one 64-bit master seed through ChaCha8
//! (`rand_chacha::ChaCha8Rng`), which has a stable, portable stream; the
//! per-subject and per-walk streams are derived by seed mixing, so any
//! recording can be regenerated independently of the others.

use super::{Foot, Frame, Label, Recording, SubjectMeta};
use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("subject_count must be at least 2, got {0}")]
    TooFewSubjects(usize),
    #[error("walks_per_subject must be at least 1")]
    NoWalks,
    #[error("positive_fraction must lie in [0, 1], got {0}")]
    BadFraction(f64),
}

/// Which side of the forefoot positive subjects unload. The
/// center-of-pressure path shifts toward the opposite side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AffectedSide {
    #[default]
    Medial,
    Lateral,
}

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub grid_width: usize,
    pub grid_height: usize,
    /// Frames per recording; the default 160 covers a full step at 100 Hz.
    pub frame_count: usize,
    pub sample_rate_hz: f64,
    pub affected_side: AffectedSide,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            grid_width: 32,
            grid_height: 32,
            frame_count: 160,
            sample_rate_hz: 100.0,
            affected_side: AffectedSide::Lateral,
        }
    }
}

/// One footprint blob in foot-local coordinates: `w` runs across the foot
/// (medial positive), `v` along it (heel 0, toes `foot_length`).
#[derive(Debug, Clone)]
struct Blob {
    w: f64,
    v: f64,
    sigma_w: f64,
    sigma_v: f64,
    weight: f64,
}

/// All per-subject draw results. Walk-level jitter and noise are drawn
/// separately inside [`generate_recording`], so profiles can be shared
/// across walks and feet.
#[derive(Debug, Clone)]
pub struct SubjectProfile {
    pub subject_id: String,
    pub label: Label,
    master_seed: u64,
    subject_index: usize,
    foot_length: f64,
    base_row: f64,
    center_col: f64,
    progression_deg: f64,
    peak_pressure: f64,
    /// Mid-stance lateral bow of the center-of-pressure path, cells.
    cop_bow: f64,
    /// Class signal: constant path displacement toward the affected side.
    cop_shift: f64,
    blobs: Vec<Blob>,
}

pub(crate) fn mix_seed(master: u64, salt: &[u64]) -> u64 {
    // splitmix64 over the master seed and salts; stable across platforms.
    let mut state = master;
    let mut out = 0u64;
    for &s in std::iter::once(&0x9E37_79B9_7F4A_7C15u64).chain(salt.iter()) {
        state = state.wrapping_add(s).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        state ^= state >> 27;
        state = state.wrapping_mul(0x94D0_49BB_1331_11EB);
        state ^= state >> 31;
        out ^= state.rotate_left(17);
    }
    out
}

/// Draws the per-subject footprint and gait parameters. Deterministic in
/// `(master_seed, subject_index)`; the label only switches the class signal
/// on, it does not consume extra draws from the shared stream.
pub fn subject_profile(
    master_seed: u64,
    subject_index: usize,
    label: Label,
    config: &GeneratorConfig,
) -> SubjectProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(master_seed, &[1, subject_index as u64]));

    let foot_length = rng.gen_range(20.0..24.0);
    let base_row = rng.gen_range(3.0..4.5);
    let center_col = rng.gen_range(-1.0..1.0) + config.grid_width as f64 / 2.0;
    let progression_deg = rng.gen_range(-8.0..8.0);
    let peak_pressure = rng.gen_range(80.0..120.0);
    let width_scale = rng.gen_range(0.9..1.1);
    let arch_weight = rng.gen_range(0.35..0.80);
    let cop_bow = rng.gen_range(-0.4..1.8);
    // Label-independent side balance: some healthy gaits already load the
    // medial forefoot lightly, so the class attenuation is not a giveaway.
    let medial_balance = rng.gen_range(0.85..1.12);

    // (w, v-fraction, sigma_w, sigma_v, weight); w medial-positive.
    let spec: [(f64, f64, f64, f64, f64); 6] = [
        (0.0, 0.12, 2.6, 2.6, 1.0),           // heel pad
        (-1.8, 0.40, 1.7, 3.8, arch_weight),  // midfoot column, lateral
        (1.8, 0.70, 2.5, 2.3, 1.05),          // medial ball
        (-2.7, 0.68, 2.3, 2.1, 0.85),         // lateral ball
        (2.0, 0.90, 1.5, 1.6, 0.80),          // hallux
        (-2.3, 0.89, 2.3, 1.2, 0.50),         // lesser toes
    ];
    let mut blobs = Vec::with_capacity(spec.len());
    for (w, v_frac, sw, sv, weight) in spec {
        let jitter_w = rng.gen_range(-0.3..0.3);
        let jitter_v = rng.gen_range(-0.02..0.02);
        let jitter_weight = rng.gen_range(0.90..1.10);
        let balance = if w > 0.0 && v_frac > 0.55 { medial_balance } else { 1.0 };
        blobs.push(Blob {
            w: w * width_scale + jitter_w,
            v: (v_frac + jitter_v) * foot_length,
            sigma_w: sw * width_scale,
            sigma_v: sv,
            weight: weight * jitter_weight * balance,
        });
    }

    let cop_shift = if label == Label::Positive {
        let shift = rng.gen_range(1.5..3.0);
        let factor = rng.gen_range(0.6..0.8);
        // The path moves away from the unloaded side.
        let signed = match config.affected_side {
            AffectedSide::Medial => -shift,
            AffectedSide::Lateral => shift,
        };
        // Attenuate forefoot blobs on the affected side.
        for blob in blobs.iter_mut() {
            let on_side = match config.affected_side {
                AffectedSide::Medial => blob.w > 0.0,
                AffectedSide::Lateral => blob.w < 0.0,
            };
            if on_side && blob.v > 0.55 * foot_length {
                blob.weight *= factor;
            }
        }
        signed
    } else {
        0.0
    };

    SubjectProfile {
        subject_id: format!("S{:04}", subject_index + 1),
        label,
        master_seed,
        subject_index,
        foot_length,
        base_row,
        center_col,
        progression_deg,
        peak_pressure,
        cop_bow,
        cop_shift,
        blobs,
    }
}

/// Generates one walk of one foot for the given subject profile.
pub fn generate_recording(
    profile: &SubjectProfile,
    walk: usize,
    foot: Foot,
    config: &GeneratorConfig,
) -> Recording {
    let foot_salt = match foot {
        Foot::Left => 0u64,
        Foot::Right => 1u64,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(
        profile.master_seed,
        &[2, profile.subject_index as u64, walk as u64, foot_salt],
    ));

    let phi_deg = profile.progression_deg + rng.gen_range(-1.5..1.5);
    let speed_exponent = rng.gen_range(0.88..1.12);
    let intensity = profile.peak_pressure * rng.gen_range(0.95..1.05);
    let bow = profile.cop_bow + rng.gen_range(-0.2..0.2);

    let (height, width) = (config.grid_height, config.grid_width);
    let medial = foot.medial_sign();
    let phi = phi_deg.to_radians();
    // Foot axis points anterior (toward the toes, increasing rows at phi=0);
    // `perp` spans the across-foot direction with +x at phi=0.
    let axis = (phi.sin(), phi.cos());
    let perp = (phi.cos(), -phi.sin());
    let base = (profile.center_col, profile.base_row);

    // Static per-cell geometry: along-foot v, medial-positive w, template.
    let mut template = Array2::<f64>::zeros((height, width));
    let mut v_coord = Array2::<f64>::zeros((height, width));
    let mut w_coord = Array2::<f64>::zeros((height, width));
    for i in 0..height {
        for j in 0..width {
            let dx = j as f64 - base.0;
            let dy = i as f64 - base.1;
            let v = dx * axis.0 + dy * axis.1;
            let w = medial * (dx * perp.0 + dy * perp.1);
            v_coord[[i, j]] = v;
            w_coord[[i, j]] = w;
            let mut value = 0.0;
            for blob in &profile.blobs {
                let du = (w - blob.w) / blob.sigma_w;
                let dv = (v - blob.v) / blob.sigma_v;
                value += blob.weight * (-0.5 * (du * du + dv * dv)).exp();
            }
            template[[i, j]] = value;
        }
    }

    const ROLL_SIGMA: f64 = 4.2;
    const GATE_SIGMA: f64 = 3.5;
    const ADDITIVE_RANGE: f64 = 0.4;
    const SENSOR_FLOOR: f64 = 1.2;

    let frame_count = config.frame_count;
    let mut frames: Vec<Frame> = Vec::with_capacity(frame_count);
    for k in 0..frame_count {
        let t = if frame_count > 1 {
            k as f64 / (frame_count - 1) as f64
        } else {
            0.5
        };
        // Stance intensity: zero at contact and lift-off, mild double hump.
        let envelope =
            (std::f64::consts::PI * t).sin().powf(0.75) * (1.0 + 0.12 * (2.0 * std::f64::consts::PI * t).cos());
        // Monotone heel-to-toe progression of the pressure wave.
        let center_v = profile.foot_length * (0.04 + 0.92 * t.powf(speed_exponent));
        // Across-foot path: lateral bow mid-stance, medial push-off, plus the
        // constant class displacement.
        let center_w = -bow * (std::f64::consts::PI * t).sin() + 1.2 * t * t + profile.cop_shift;

        let mut frame = Array2::<f64>::zeros((height, width));
        for i in 0..height {
            for j in 0..width {
                let dv = (v_coord[[i, j]] - center_v) / ROLL_SIGMA;
                let dw = (w_coord[[i, j]] - center_w) / GATE_SIGMA;
                let activation = (-0.5 * (dv * dv + dw * dw)).exp();
                let signal = intensity * envelope * activation * template[[i, j]];
                let scaled = signal * rng.gen_range(0.9..1.1) + rng.gen_range(0.0..ADDITIVE_RANGE);
                frame[[i, j]] = if scaled >= SENSOR_FLOOR { scaled } else { 0.0 };
            }
        }
        frames.push(frame);
    }

    Recording {
        grid_width: width,
        grid_height: height,
        sample_rate_hz: config.sample_rate_hz,
        frames,
        subject_id: profile.subject_id.clone(),
        foot: foot,
        label: profile.label,
    }
}

/// A fully materialized synthetic dataset. Recordings appear in
/// (subject, walk, foot) order with feet interleaved Left, Right.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub recordings: Vec<Recording>,
    pub subjects: Vec<SubjectMeta>,
}

/// Streams every generated recording through `visit` without holding the
/// whole dataset in memory. Visit order matches [`generate_synthetic_dataset`].
pub fn generate_each<F>(
    subject_count: usize,
    positive_fraction: f64,
    walks_per_subject: usize,
    seed: u64,
    config: &GeneratorConfig,
    mut visit: F,
) -> Result<Vec<SubjectMeta>, GeneratorError>
where
    F: FnMut(Recording, &SubjectMeta, usize),
{
    if subject_count < 2 {
        return Err(GeneratorError::TooFewSubjects(subject_count));
    }
    if walks_per_subject == 0 {
        return Err(GeneratorError::NoWalks);
    }
    if !(0.0..=1.0).contains(&positive_fraction) {
        return Err(GeneratorError::BadFraction(positive_fraction));
    }

    let positive_count = (subject_count as f64 * positive_fraction).round() as usize;
    let mut subjects = Vec::with_capacity(subject_count);
    for subject_index in 0..subject_count {
        let label = if subject_index < positive_count {
            Label::Positive
        } else {
            Label::Negative
        };
        let profile = subject_profile(seed, subject_index, label, config);
        let meta = SubjectMeta {
            subject_id: profile.subject_id.clone(),
            label,
            walk_count: walks_per_subject,
        };
        for walk in 0..walks_per_subject {
            for foot in [Foot::Left, Foot::Right] {
                let recording = generate_recording(&profile, walk, foot, config);
                visit(recording, &meta, walk);
            }
        }
        subjects.push(meta);
    }
    Ok(subjects)
}

/// Generates `walks_per_subject` recordings per foot for every subject.
/// Deterministic: equal arguments produce byte-identical datasets.
pub fn generate_synthetic_dataset(
    subject_count: usize,
    positive_fraction: f64,
    walks_per_subject: usize,
    seed: u64,
    config: &GeneratorConfig,
) -> Result<SyntheticDataset, GeneratorError> {
    let mut recordings =
        Vec::with_capacity(subject_count * walks_per_subject * 2);
    let subjects = generate_each(
        subject_count,
        positive_fraction,
        walks_per_subject,
        seed,
        config,
        |recording, _, _| recordings.push(recording),
    )?;
    Ok(SyntheticDataset { recordings, subjects })
}
