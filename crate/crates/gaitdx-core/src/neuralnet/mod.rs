//! A minimal differentiable-layer engine: forward, backward, SGD with
//! momentum, parameter counting, and binary weight serialization.

mod io;
mod layers;
mod tensor;

pub use io::{load_weights, save_weights, write_weights};
pub use layers::{Conv2d, Dense, Layer, NORMALIZE_SCALE, NORMALIZE_SHIFT};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("layer {layer} ({kind}): {detail}")]
    ShapeMismatch { layer: usize, kind: &'static str, detail: String },
    #[error("network must end with 2 logits, got {got}")]
    WrongLogitCount { got: usize },
    #[error("batch shape {got:?} does not match network input {expected:?}")]
    BadBatch { expected: Vec<usize>, got: Vec<usize> },
    #[error("stale or mismatched cache: {0}")]
    StaleCache(String),
    #[error("labels must be 0 or 1 and match the batch: {0}")]
    BadLabels(String),
    #[error("non-finite gradient in layer {layer} ({kind})")]
    NonFiniteGradient { layer: usize, kind: &'static str },
    #[error("weight file: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Gradients for one parameterized layer, same shapes as the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad {
    pub weights: Tensor,
    pub bias: Tensor,
}

/// Parameter gradients for a whole network; `None` for parameterless layers.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<Option<ParamGrad>>,
}

/// An ordered stack of layers with a fixed input shape (channels, height,
/// width). Construction validates that consecutive layers compose and that
/// the stack ends in exactly two logits.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
    pub input_shape: (usize, usize, usize),
}

impl Network {
    pub fn new(input_shape: (usize, usize, usize), layers: Vec<Layer>) -> Result<Network, NetError> {
        let net = Network { layers, input_shape };
        let out = net.output_shape()?;
        if out.last() != Some(&2) {
            return Err(NetError::WrongLogitCount { got: *out.last().unwrap_or(&0) });
        }
        Ok(net)
    }

    /// Shape of the final output for a batch of one, validating every layer
    /// transition.
    pub fn output_shape(&self) -> Result<Vec<usize>, NetError> {
        let (c, h, w) = self.input_shape;
        let mut shape = vec![1, c, h, w];
        for (index, layer) in self.layers.iter().enumerate() {
            shape = layer.output_shape(index, &shape)?;
        }
        Ok(shape)
    }

    /// Total number of learnable parameters (weights plus biases).
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Runs the stack on a batch shaped (N, C, H, W); returns the logits
    /// (N, 2) and the cache needed by [`Network::backward`].
    pub fn forward(&self, batch: &Tensor) -> Result<(Tensor, ForwardCache), NetError> {
        let (c, h, w) = self.input_shape;
        let shape = batch.shape();
        if shape.len() != 4 || shape[1] != c || shape[2] != h || shape[3] != w {
            return Err(NetError::BadBatch {
                expected: vec![shape.first().copied().unwrap_or(0), c, h, w],
                got: shape.to_vec(),
            });
        }

        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut current = batch.clone();
        for layer in &self.layers {
            let next = layer.forward(&current);
            inputs.push(current);
            current = next;
        }
        let logits = current;
        let cache = ForwardCache { inputs, logits: logits.clone(), layer_count: self.layers.len() };
        Ok((logits, cache))
    }

    /// Mean softmax cross-entropy over the batch plus gradients for every
    /// parameter tensor. Labels are class indices (0 negative, 1 positive).
    pub fn backward(
        &self,
        cache: &ForwardCache,
        labels: &[usize],
    ) -> Result<(Gradients, f64), NetError> {
        if cache.layer_count != self.layers.len() || cache.inputs.len() != self.layers.len() {
            return Err(NetError::StaleCache(format!(
                "cache built for {} layers, network has {}",
                cache.layer_count,
                self.layers.len()
            )));
        }
        let batch = cache.logits.shape()[0];
        if labels.len() != batch {
            return Err(NetError::BadLabels(format!(
                "{} labels for a batch of {batch}",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(NetError::BadLabels(format!("label {bad} out of range")));
        }
        for (index, (layer, input)) in self.layers.iter().zip(&cache.inputs).enumerate() {
            let expected = layer.output_shape(index, input.shape())?;
            let actual = cache
                .inputs
                .get(index + 1)
                .map(|t| t.shape().to_vec())
                .unwrap_or_else(|| cache.logits.shape().to_vec());
            if expected != actual {
                return Err(NetError::StaleCache(format!(
                    "layer {index} output {expected:?} does not match cached {actual:?}"
                )));
            }
        }

        let (loss, mut grad) = softmax_cross_entropy(&cache.logits, labels);
        let mut layer_grads: Vec<Option<ParamGrad>> = Vec::with_capacity(self.layers.len());
        for (layer, input) in self.layers.iter().zip(&cache.inputs).rev() {
            let (params, d_input) = layer.backward(input, &grad);
            layer_grads.push(params);
            grad = d_input;
        }
        layer_grads.reverse();
        Ok((Gradients { layers: layer_grads }, loss))
    }
}

/// Per-layer inputs captured during a forward pass, plus the final logits.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Tensor>,
    logits: Tensor,
    layer_count: usize,
}

impl ForwardCache {
    pub fn logits(&self) -> &Tensor {
        &self.logits
    }
}

/// Mean softmax cross-entropy loss and its gradient w.r.t. the logits.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> (f64, Tensor) {
    let [n, classes]: [usize; 2] = logits.shape().try_into().expect("logits are 2-d");
    assert_eq!(labels.len(), n, "one label per example");
    let mut grad = vec![0.0; n * classes];
    let mut loss = 0.0;
    for e in 0..n {
        let row = &logits.data()[e * classes..(e + 1) * classes];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        for c in 0..classes {
            let p = exp[c] / total;
            grad[e * classes + c] = (p - if labels[e] == c { 1.0 } else { 0.0 }) / n as f64;
            if labels[e] == c {
                loss -= (p.max(f64::MIN_POSITIVE)).ln();
            }
        }
    }
    (loss / n as f64, Tensor::from_vec(&[n, classes], grad))
}

/// SGD with classical momentum: v = momentum * v - lr * g; p += v.
/// Velocities persist across steps.
#[derive(Debug, Clone)]
pub struct SgdOptimizer {
    pub learning_rate: f64,
    pub momentum: f64,
    velocities: Vec<Option<ParamGrad>>,
}

impl SgdOptimizer {
    pub fn new(learning_rate: f64, momentum: f64) -> SgdOptimizer {
        // A zero learning rate is allowed and freezes the parameters.
        assert!(learning_rate >= 0.0, "learning rate must be nonnegative");
        assert!((0.0..1.0).contains(&momentum), "momentum must lie in [0, 1)");
        SgdOptimizer { learning_rate, momentum, velocities: Vec::new() }
    }

    pub fn step(&mut self, net: &mut Network, grads: &Gradients) -> Result<(), NetError> {
        if self.velocities.is_empty() {
            self.velocities = net
                .layers
                .iter()
                .map(|layer| {
                    layer.params().map(|(w, b)| ParamGrad {
                        weights: Tensor::zeros(w.shape()),
                        bias: Tensor::zeros(b.shape()),
                    })
                })
                .collect();
        }
        if grads.layers.len() != net.layers.len() {
            return Err(NetError::StaleCache(format!(
                "gradients cover {} layers, network has {}",
                grads.layers.len(),
                net.layers.len()
            )));
        }

        for (index, layer) in net.layers.iter_mut().enumerate() {
            let (Some(params), Some(grad), Some(velocity)) = (
                layer.params_mut(),
                grads.layers[index].as_ref(),
                self.velocities[index].as_mut(),
            ) else {
                continue;
            };
            if grad.weights.iter().chain(grad.bias.iter()).any(|v| !v.is_finite()) {
                return Err(NetError::NonFiniteGradient {
                    layer: index,
                    kind: match index {
                        _ if grad.weights.shape().len() == 4 => "conv",
                        _ => "fully_connected",
                    },
                });
            }
            let (weights, bias) = params;
            for ((p, v), g) in weights
                .data_mut()
                .iter_mut()
                .zip(velocity.weights.data_mut())
                .zip(grad.weights.data())
            {
                *v = self.momentum * *v - self.learning_rate * g;
                *p += *v;
            }
            for ((p, v), g) in bias
                .data_mut()
                .iter_mut()
                .zip(velocity.bias.data_mut())
                .zip(grad.bias.data())
            {
                *v = self.momentum * *v - self.learning_rate * g;
                *p += *v;
            }
        }
        Ok(())
    }
}
