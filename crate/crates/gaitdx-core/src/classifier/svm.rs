//! Linear SVM baseline trained with the Pegasos primal subgradient schedule
//! (step size 1/(lambda * t), ball projection, averaged iterate).

use crate::recording::synth::mix_seed;
use crate::recording::Label;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("training set is empty")]
    Empty,
    #[error("need both classes present to train")]
    SingleClass,
    #[error("vector {index} has {got} entries, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("labels and vectors differ in length: {labels} vs {vectors}")]
    LengthMismatch { labels: usize, vectors: usize },
    #[error("unlabeled vector at index {0}")]
    Unlabeled(usize),
    #[error("lambda must be positive, got {0}")]
    BadLambda(f64),
}

/// A trained linear classifier over standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_means: Vec<f64>,
    pub feature_stddevs: Vec<f64>,
    /// Zero-variance dimensions found during training; their standardized
    /// value is zero and their weight stays zero.
    pub dropped_features: Vec<usize>,
}

impl SvmModel {
    fn standardize(&self, vector: &[f64]) -> Vec<f64> {
        vector
            .iter()
            .enumerate()
            .map(|(d, &v)| {
                if self.dropped_features.contains(&d) {
                    0.0
                } else {
                    (v - self.feature_means[d]) / self.feature_stddevs[d]
                }
            })
            .collect()
    }

    pub fn score(&self, vector: &[f64]) -> f64 {
        let x = self.standardize(vector);
        self.weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

#[derive(Debug, Clone)]
pub struct SvmTrainResult {
    pub model: SvmModel,
    /// Primal objective of the averaged iterate at the end of each epoch.
    pub objective_curve: Vec<f64>,
}

fn objective(lambda: f64, w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
    let norm: f64 = w.iter().map(|v| v * v).sum();
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let margin = y * (w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b);
            (1.0 - margin).max(0.0)
        })
        .sum::<f64>()
        / xs.len() as f64;
    lambda / 2.0 * norm + hinge
}

/// Trains the baseline on 40-dimensional case vectors. Features are
/// standardized with training statistics; zero-variance dimensions are
/// dropped and reported on the model.
pub fn train_svm(
    vectors: &[Vec<f64>],
    labels: &[Label],
    lambda: f64,
    epochs: usize,
    seed: u64,
) -> Result<SvmTrainResult, SvmError> {
    if vectors.is_empty() {
        return Err(SvmError::Empty);
    }
    if labels.len() != vectors.len() {
        return Err(SvmError::LengthMismatch { labels: labels.len(), vectors: vectors.len() });
    }
    if !(lambda > 0.0) {
        return Err(SvmError::BadLambda(lambda));
    }
    let dim = vectors[0].len();
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(SvmError::DimensionMismatch { index, expected: dim, got: v.len() });
        }
    }
    let mut ys = Vec::with_capacity(labels.len());
    for (index, label) in labels.iter().enumerate() {
        match label {
            Label::Positive => ys.push(1.0),
            Label::Negative => ys.push(-1.0),
            Label::Unknown => return Err(SvmError::Unlabeled(index)),
        }
    }
    if ys.iter().all(|&y| y > 0.0) || ys.iter().all(|&y| y < 0.0) {
        return Err(SvmError::SingleClass);
    }

    let n = vectors.len() as f64;
    let mut means = vec![0.0; dim];
    for v in vectors {
        for (m, &x) in means.iter_mut().zip(v) {
            *m += x / n;
        }
    }
    let mut stds = vec![0.0; dim];
    for v in vectors {
        for (s, (&x, &m)) in stds.iter_mut().zip(v.iter().zip(&means)) {
            *s += (x - m) * (x - m) / n;
        }
    }
    let mut dropped = Vec::new();
    for (d, s) in stds.iter_mut().enumerate() {
        *s = s.sqrt();
        if *s < 1e-12 {
            dropped.push(d);
            *s = 1.0;
        }
    }

    let xs: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .map(|(d, &x)| {
                    if dropped.contains(&d) {
                        0.0
                    } else {
                        (x - means[d]) / stds[d]
                    }
                })
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[20]));
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut w_avg = vec![0.0; dim];
    let mut b_avg = 0.0;
    let radius = 1.0 / lambda.sqrt();

    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut t = 0usize;
    let mut objective_curve = Vec::with_capacity(epochs);
    for _epoch in 0..epochs {
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for &idx in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = &xs[idx];
            let y = ys[idx];
            let margin = y * (w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b);
            let shrink = 1.0 - eta * lambda;
            if margin < 1.0 {
                for (wd, &xd) in w.iter_mut().zip(x) {
                    *wd = shrink * *wd + eta * y * xd;
                }
                b += eta * y;
            } else {
                for wd in w.iter_mut() {
                    *wd *= shrink;
                }
            }
            // Project onto the ball of radius 1/sqrt(lambda).
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let scale = radius / norm;
                for wd in w.iter_mut() {
                    *wd *= scale;
                }
            }
            let k = t as f64;
            for (a, &wd) in w_avg.iter_mut().zip(w.iter()) {
                *a += (wd - *a) / k;
            }
            b_avg += (b - b_avg) / k;
        }
        objective_curve.push(objective(lambda, &w_avg, b_avg, &xs, &ys));
    }

    Ok(SvmTrainResult {
        model: SvmModel {
            weights: w_avg,
            bias: b_avg,
            feature_means: means,
            feature_stddevs: stds,
            dropped_features: dropped,
        },
        objective_curve,
    })
}

/// Thresholds the standardized score at zero; ties go to Negative.
pub fn svm_predict(model: &SvmModel, vector: &[f64]) -> Label {
    if model.score(vector) > 0.0 {
        Label::Positive
    } else {
        Label::Negative
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two Gaussian-ish clouds separated along a diagonal direction.
    fn separable_set(n: usize, dim: usize, gap: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vectors = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let positive = i % 2 == 0;
            let offset = if positive { gap } else { -gap };
            let v: Vec<f64> = (0..dim)
                .map(|d| rng.gen_range(-1.0..1.0) + if d < 3 { offset } else { 0.0 })
                .collect();
            vectors.push(v);
            labels.push(if positive { Label::Positive } else { Label::Negative });
        }
        (vectors, labels)
    }

    #[test]
    fn separable_data_trains_to_perfect_accuracy() {
        let (vectors, labels) = separable_set(40, 8, 3.0, 1);
        let result = train_svm(&vectors, &labels, 1e-3, 200, 7).unwrap();
        let correct = vectors
            .iter()
            .zip(&labels)
            .filter(|(v, &l)| svm_predict(&result.model, v) == l)
            .count();
        assert_eq!(correct, vectors.len());
    }

    #[test]
    fn scaling_the_score_does_not_change_labels() {
        let (vectors, labels) = separable_set(30, 6, 2.0, 3);
        let result = train_svm(&vectors, &labels, 1e-3, 100, 5).unwrap();
        let mut scaled = result.model.clone();
        for w in scaled.weights.iter_mut() {
            *w *= 4.0;
        }
        scaled.bias *= 4.0;
        for v in &vectors {
            assert_eq!(svm_predict(&result.model, v), svm_predict(&scaled, v));
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (vectors, labels) = separable_set(24, 5, 1.0, 9);
        let a = train_svm(&vectors, &labels, 1e-2, 50, 11).unwrap();
        let b = train_svm(&vectors, &labels, 1e-2, 50, 11).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.objective_curve, b.objective_curve);
    }

    #[test]
    fn zero_variance_features_are_dropped() {
        let (mut vectors, labels) = separable_set(20, 4, 2.0, 2);
        for v in vectors.iter_mut() {
            v.push(7.5); // constant dimension
        }
        let result = train_svm(&vectors, &labels, 1e-3, 50, 3).unwrap();
        assert_eq!(result.model.dropped_features, vec![4]);
        assert_eq!(result.model.weights[4], 0.0);
    }

    #[test]
    fn objective_on_averaged_iterate_is_non_increasing() {
        let (vectors, labels) = separable_set(30, 10, 1.5, 6);
        let result = train_svm(&vectors, &labels, 1e-2, 80, 13).unwrap();
        for pair in result.objective_curve.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-6,
                "objective went up: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn rejects_single_class_and_bad_shapes() {
        let vectors = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(matches!(
            train_svm(&vectors, &[Label::Positive, Label::Positive], 1e-3, 5, 0),
            Err(SvmError::SingleClass)
        ));
        let ragged = vec![vec![1.0, 2.0], vec![2.0]];
        assert!(matches!(
            train_svm(&ragged, &[Label::Positive, Label::Negative], 1e-3, 5, 0),
            Err(SvmError::DimensionMismatch { index: 1, .. })
        ));
        assert!(matches!(
            train_svm(&vectors, &[Label::Positive, Label::Unknown], 1e-3, 5, 0),
            Err(SvmError::Unlabeled(1))
        ));
        assert!(matches!(
            train_svm(&vectors, &[Label::Positive, Label::Negative], 0.0, 5, 0),
            Err(SvmError::BadLambda(_))
        ));
    }
}
