//! The diagnostic models: one CNN per aggregation kind, the three-model
//! majority-vote ensemble, and the linear SVM baseline.

mod svm;

pub use svm::{svm_predict, train_svm, SvmError, SvmModel, SvmTrainResult};

use crate::neuralnet::{
    Conv2d, Dense, Layer, NetError, Network, SgdOptimizer, Tensor,
};
use crate::preprocess::{AggregationKind, CaseBundle};
use crate::recording::synth::mix_seed;
use crate::recording::{Foot, Label};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("case for subject {0} is unlabeled")]
    UnlabeledCase(String),
    #[error("training set has a single class; both labels are required")]
    SingleClass,
    #[error("need at least 2 cases per class, got {negative} negative / {positive} positive")]
    TooFewCases { negative: usize, positive: usize },
    #[error("cases mix image sides: {0} vs {1}")]
    MixedSides(usize, usize),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Seed used by [`build_default_cnn`] for its weight draw. Training always
/// re-seeds from its own config.
pub const DEFAULT_INIT_SEED: u64 = 42;

/// Builds the seven-layer diagnostic CNN for `side`-pixel square inputs with
/// two channels (left and right foot images of one aggregation kind):
/// normalize, four convolutions with ReLU, and two fully connected layers.
/// At the default side of 64 the stack holds 937,024 parameters.
pub fn build_default_cnn(side: usize) -> Result<Network, NetError> {
    build_default_cnn_seeded(side, DEFAULT_INIT_SEED)
}

pub fn build_default_cnn_seeded(side: usize, seed: u64) -> Result<Network, NetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let conv_plan = [(2usize, 16usize, 5usize, 2usize), (16, 32, 5, 2), (32, 48, 3, 1), (48, 64, 3, 1)];

    let mut layers = vec![Layer::FixedNormalize];
    let mut hw = (side, side);
    let mut channels = 2usize;
    for (index, &(inp, out, kernel, stride)) in conv_plan.iter().enumerate() {
        let conv = Conv2d::new(inp, out, kernel, stride, &mut rng);
        hw = conv.output_hw(hw.0, hw.1).ok_or(NetError::ShapeMismatch {
            layer: 1 + 2 * index,
            kind: "conv",
            detail: format!("side {side} is too small for the default layer chain"),
        })?;
        channels = out;
        layers.push(Layer::Conv(conv));
        layers.push(Layer::ReLU);
    }
    let flat = channels * hw.0 * hw.1;
    layers.push(Layer::Flatten);
    layers.push(Layer::FullyConnected(Dense::new(flat, 170, &mut rng)));
    layers.push(Layer::ReLU);
    layers.push(Layer::FullyConnected(Dense::new(170, 2, &mut rng)));

    Network::new((2, side, side), layers)
}

/// Training hyperparameters. The defaults are the shipped configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 16,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub network: Network,
    /// Mean training loss per epoch, indexed by epoch.
    pub loss_curve: Vec<f64>,
}

/// Flattens one case into the (2, side, side) input of the given kind:
/// the left image then the right image, raw 0..255 pixel values.
fn case_input(case: &CaseBundle, kind: AggregationKind) -> Vec<f64> {
    let mut data = Vec::with_capacity(2 * case.side * case.side);
    for foot in [Foot::Left, Foot::Right] {
        data.extend(case.image(kind, foot).pixels.iter().map(|&p| p as f64));
    }
    data
}

/// Trains one CNN on the images of the given aggregation kind. Deterministic
/// for a fixed config; the weight draw and the epoch shuffles depend on both
/// the seed and the kind, so the three ensemble members differ.
pub fn train_model(
    kind: AggregationKind,
    cases: &[CaseBundle],
    config: &TrainConfig,
) -> Result<TrainedModel, TrainError> {
    let mut negative = 0usize;
    let mut positive = 0usize;
    for case in cases {
        match case.label {
            Label::Negative => negative += 1,
            Label::Positive => positive += 1,
            Label::Unknown => return Err(TrainError::UnlabeledCase(case.subject_id.clone())),
        }
    }
    if negative == 0 || positive == 0 {
        return Err(TrainError::SingleClass);
    }
    if negative < 2 || positive < 2 {
        return Err(TrainError::TooFewCases { negative, positive });
    }
    let side = cases[0].side;
    if let Some(other) = cases.iter().find(|c| c.side != side) {
        return Err(TrainError::MixedSides(side, other.side));
    }

    let kind_salt = match kind {
        AggregationKind::Max => 1u64,
        AggregationKind::Sum => 2,
        AggregationKind::Average => 3,
    };
    let mut net = build_default_cnn_seeded(side, mix_seed(config.seed, &[10, kind_salt]))?;
    let mut sgd = SgdOptimizer::new(config.learning_rate, config.momentum);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, &[11, kind_salt]));

    let inputs: Vec<Vec<f64>> = cases.iter().map(|c| case_input(c, kind)).collect();
    let labels: Vec<usize> = cases
        .iter()
        .map(|c| c.label.class_index().expect("validated above"))
        .collect();
    let input_len = 2 * side * side;
    let batch_size = config.batch_size.max(1);

    let mut order: Vec<usize> = (0..cases.len()).collect();
    let mut loss_curve = Vec::with_capacity(config.epochs);
    for _epoch in 0..config.epochs {
        // Fisher-Yates from the dedicated stream keeps runs reproducible.
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch_size) {
            let mut data = Vec::with_capacity(chunk.len() * input_len);
            let mut batch_labels = Vec::with_capacity(chunk.len());
            for &idx in chunk {
                data.extend_from_slice(&inputs[idx]);
                batch_labels.push(labels[idx]);
            }
            let batch = Tensor::from_vec(&[chunk.len(), 2, side, side], data);
            let (_, cache) = net.forward(&batch)?;
            let (grads, loss) = net.backward(&cache, &batch_labels)?;
            sgd.step(&mut net, &grads)?;
            epoch_loss += loss * chunk.len() as f64;
        }
        loss_curve.push(epoch_loss / cases.len() as f64);
    }

    Ok(TrainedModel { network: net, loss_curve })
}

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("case side {case} does not match the network input {net}")]
    SideMismatch { case: usize, net: usize },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Classifies one case with one model. Returns the label (logit ties break
/// to Negative) and the softmax probabilities (negative, positive).
pub fn predict(
    net: &Network,
    case: &CaseBundle,
    kind: AggregationKind,
) -> Result<(Label, [f64; 2]), PredictError> {
    let (_, side, _) = net.input_shape;
    if case.side != side {
        return Err(PredictError::SideMismatch { case: case.side, net: side });
    }
    let batch = Tensor::from_vec(&[1, 2, side, side], case_input(case, kind));
    let (logits, _) = net.forward(&batch)?;
    let (neg, pos) = (logits.data()[0], logits.data()[1]);
    let max = neg.max(pos);
    let exp_neg = (neg - max).exp();
    let exp_pos = (pos - max).exp();
    let total = exp_neg + exp_pos;
    let label = if pos > neg { Label::Positive } else { Label::Negative };
    Ok((label, [exp_neg / total, exp_pos / total]))
}

/// Three CNNs with one shared architecture, one per aggregation kind.
#[derive(Debug, Clone)]
pub struct EnsembleModel {
    pub max_model: Network,
    pub sum_model: Network,
    pub average_model: Network,
}

impl EnsembleModel {
    pub fn model_for(&self, kind: AggregationKind) -> &Network {
        match kind {
            AggregationKind::Max => &self.max_model,
            AggregationKind::Sum => &self.sum_model,
            AggregationKind::Average => &self.average_model,
        }
    }
}

/// Majority of three binary votes; a strict majority always exists.
pub fn majority(votes: [Label; 3]) -> Label {
    let positives = votes.iter().filter(|&&v| v == Label::Positive).count();
    if positives >= 2 {
        Label::Positive
    } else {
        Label::Negative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoteOutcome {
    pub final_label: Label,
    /// Per-kind votes in [max, sum, average] order.
    pub votes: [Label; 3],
}

/// Runs all three models on their image kinds and takes the majority.
pub fn vote(ensemble: &EnsembleModel, case: &CaseBundle) -> Result<VoteOutcome, PredictError> {
    let mut votes = [Label::Negative; 3];
    for (slot, kind) in AggregationKind::ALL.iter().enumerate() {
        let (label, _) = predict(ensemble.model_for(*kind), case, *kind)?;
        votes[slot] = label;
    }
    Ok(VoteOutcome { final_label: majority(votes), votes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::GrayscaleImage;

    #[test]
    fn default_cnn_hits_the_parameter_budget() {
        let net = build_default_cnn(64).unwrap();
        assert_eq!(net.param_count(), 937_024);
        assert!((850_000..=950_000).contains(&net.param_count()));
    }

    #[test]
    fn default_cnn_layer_census() {
        let net = build_default_cnn(64).unwrap();
        let norm = net
            .layers
            .iter()
            .filter(|l| matches!(l, Layer::FixedNormalize))
            .count();
        let conv = net.layers.iter().filter(|l| matches!(l, Layer::Conv(_))).count();
        let fc = net
            .layers
            .iter()
            .filter(|l| matches!(l, Layer::FullyConnected(_)))
            .count();
        assert_eq!((norm, conv, fc), (1, 4, 2));
    }

    #[test]
    fn default_cnn_forward_shape() {
        let net = build_default_cnn(64).unwrap();
        let batch = Tensor::zeros(&[1, 2, 64, 64]);
        let (logits, _) = net.forward(&batch).unwrap();
        assert_eq!(logits.shape(), &[1, 2]);
    }

    #[test]
    fn default_cnn_rejects_tiny_sides() {
        assert!(build_default_cnn(8).is_err());
    }

    fn flat_case(subject: &str, label: Label, fill: u8, side: usize) -> CaseBundle {
        let img = || GrayscaleImage { side, pixels: vec![fill; side * side] };
        CaseBundle::from_images(
            subject.to_string(),
            label,
            [
                (AggregationKind::Max, Foot::Left, img()),
                (AggregationKind::Max, Foot::Right, img()),
                (AggregationKind::Sum, Foot::Left, img()),
                (AggregationKind::Sum, Foot::Right, img()),
                (AggregationKind::Average, Foot::Left, img()),
                (AggregationKind::Average, Foot::Right, img()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_final_layer_gives_even_probabilities_and_negative_tie() {
        let mut net = build_default_cnn(64).unwrap();
        let last = net.layers.len() - 1;
        if let Layer::FullyConnected(dense) = &mut net.layers[last] {
            dense.weights = Tensor::zeros(&[2, 170]);
            dense.bias = Tensor::zeros(&[2]);
        }
        let case = flat_case("S1", Label::Unknown, 128, 64);
        let (label, probs) = predict(&net, &case, AggregationKind::Max).unwrap();
        assert_eq!(label, Label::Negative);
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn probabilities_are_normalized_and_labels_shift_invariant() {
        let net = build_default_cnn_seeded(64, 9).unwrap();
        let case = flat_case("S1", Label::Unknown, 77, 64);
        let (label, probs) = predict(&net, &case, AggregationKind::Sum).unwrap();
        assert!(probs[0] >= 0.0 && probs[1] >= 0.0);
        assert!((probs[0] + probs[1] - 1.0).abs() < 1e-9);

        // Adding one shared constant to the final bias leaves the argmax
        // unchanged.
        let mut shifted = net.clone();
        let last = shifted.layers.len() - 1;
        if let Layer::FullyConnected(dense) = &mut shifted.layers[last] {
            for b in dense.bias.data_mut() {
                *b += 3.5;
            }
        }
        let (label2, _) = predict(&shifted, &case, AggregationKind::Sum).unwrap();
        assert_eq!(label, label2);
    }

    #[test]
    fn majority_matches_the_truth_table() {
        use Label::{Negative as N, Positive as P};
        let table = [
            ([N, N, N], N),
            ([N, N, P], N),
            ([N, P, N], N),
            ([P, N, N], N),
            ([N, P, P], P),
            ([P, N, P], P),
            ([P, P, N], P),
            ([P, P, P], P),
        ];
        for (votes, expected) in table {
            assert_eq!(majority(votes), expected, "votes {votes:?}");
            // Independent count-based oracle.
            let count = votes.iter().filter(|&&v| v == P).count();
            let oracle = if count > 3 - count { P } else { N };
            assert_eq!(majority(votes), oracle);
        }
    }

    #[test]
    fn train_rejects_degenerate_inputs() {
        let config = TrainConfig { epochs: 1, ..TrainConfig::default() };
        let unlabeled = vec![flat_case("S1", Label::Unknown, 1, 16)];
        assert!(matches!(
            train_model(AggregationKind::Max, &unlabeled, &config),
            Err(TrainError::UnlabeledCase(_))
        ));
        let single = vec![
            flat_case("S1", Label::Positive, 1, 16),
            flat_case("S2", Label::Positive, 2, 16),
        ];
        assert!(matches!(
            train_model(AggregationKind::Max, &single, &config),
            Err(TrainError::SingleClass)
        ));
        let thin = vec![
            flat_case("S1", Label::Positive, 1, 16),
            flat_case("S2", Label::Negative, 2, 16),
        ];
        assert!(matches!(
            train_model(AggregationKind::Max, &thin, &config),
            Err(TrainError::TooFewCases { .. })
        ));
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let cases: Vec<CaseBundle> = (0..8)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
                flat_case(&format!("S{i}"), label, (i * 20) as u8, 32)
            })
            .collect();
        let config = TrainConfig {
            epochs: 2,
            learning_rate: 0.0,
            momentum: 0.9,
            batch_size: 4,
            seed: 5,
        };
        let trained = train_model(AggregationKind::Max, &cases, &config).unwrap();
        let fresh = build_default_cnn_seeded(32, mix_seed(5, &[10, 1])).unwrap();
        assert_eq!(trained.network, fresh);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let cases: Vec<CaseBundle> = (0..8)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
                flat_case(&format!("S{i}"), label, (i * 25 + 10) as u8, 32)
            })
            .collect();
        let config = TrainConfig {
            epochs: 3,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 4,
            seed: 7,
        };
        let a = train_model(AggregationKind::Sum, &cases, &config).unwrap();
        let b = train_model(AggregationKind::Sum, &cases, &config).unwrap();
        assert_eq!(a.loss_curve, b.loss_curve);
        assert_eq!(a.network, b.network);
    }
}
