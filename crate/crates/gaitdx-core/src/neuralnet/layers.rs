//! Layer implementations: fixed input normalization, valid (unpadded)
//! convolution, ReLU, flatten, and fully connected.

use super::{NetError, ParamGrad, Tensor};
use crate::parallel;
use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Pixel scaling applied by the normalization layer: p/255 - 0.5.
pub const NORMALIZE_SCALE: f64 = 1.0 / 255.0;
pub const NORMALIZE_SHIFT: f64 = -0.5;

fn xavier_uniform(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize, len: usize) -> Vec<f64> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..len).map(|_| rng.gen_range(-bound..bound)).collect()
}

/// Valid convolution with square kernels and a stride hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    /// Shape (out_channels, in_channels, kernel, kernel).
    pub weights: Tensor,
    /// Shape (out_channels,).
    pub bias: Tensor,
}

impl Conv2d {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        rng: &mut ChaCha8Rng,
    ) -> Conv2d {
        assert!(stride >= 1, "stride must be at least 1");
        let fan_in = in_channels * kernel * kernel;
        let fan_out = out_channels * kernel * kernel;
        let len = out_channels * fan_in;
        Conv2d {
            in_channels,
            out_channels,
            kernel,
            stride,
            weights: Tensor::from_vec(
                &[out_channels, in_channels, kernel, kernel],
                xavier_uniform(rng, fan_in, fan_out, len),
            ),
            bias: Tensor::zeros(&[out_channels]),
        }
    }

    /// Output spatial size: floor((in - kernel)/stride) + 1, if it fits.
    pub fn output_hw(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        if h < self.kernel || w < self.kernel {
            return None;
        }
        Some(((h - self.kernel) / self.stride + 1, (w - self.kernel) / self.stride + 1))
    }

    fn weight_matrix(&self) -> Array2<f64> {
        let cols = self.in_channels * self.kernel * self.kernel;
        Array2::from_shape_vec((self.out_channels, cols), self.weights.data().to_vec())
            .expect("weight tensor matches its declared shape")
    }

    fn im2col(&self, example: &[f64], h: usize, w: usize, oh: usize, ow: usize) -> Array2<f64> {
        let k = self.kernel;
        let s = self.stride;
        let mut cols = Array2::<f64>::zeros((self.in_channels * k * k, oh * ow));
        let mut row = 0;
        for c in 0..self.in_channels {
            let plane = &example[c * h * w..(c + 1) * h * w];
            for ki in 0..k {
                for kj in 0..k {
                    let mut col = 0;
                    for oi in 0..oh {
                        let ii = oi * s + ki;
                        for oj in 0..ow {
                            cols[[row, col]] = plane[ii * w + oj * s + kj];
                            col += 1;
                        }
                    }
                    row += 1;
                }
            }
        }
        cols
    }

    pub(super) fn forward(&self, input: &Tensor) -> Tensor {
        let [n, _, h, w]: [usize; 4] = input.shape().try_into().expect("conv input is 4-d");
        let (oh, ow) = self.output_hw(h, w).expect("validated by the network");
        let w_mat = self.weight_matrix();
        let example_len = self.in_channels * h * w;
        let examples: Vec<&[f64]> = (0..n)
            .map(|e| &input.data()[e * example_len..(e + 1) * example_len])
            .collect();

        let outputs = parallel::map_indexed(&examples, |_, example| {
            let cols = self.im2col(example, h, w, oh, ow);
            let mut out = w_mat.dot(&cols);
            for (o, mut row) in out.rows_mut().into_iter().enumerate() {
                row += self.bias.data()[o];
            }
            out.into_raw_vec_and_offset().0
        });

        let mut data = Vec::with_capacity(n * self.out_channels * oh * ow);
        for out in outputs {
            data.extend_from_slice(&out);
        }
        Tensor::from_vec(&[n, self.out_channels, oh, ow], data)
    }

    pub(super) fn backward(&self, input: &Tensor, grad_out: &Tensor) -> (ParamGrad, Tensor) {
        let [n, _, h, w]: [usize; 4] = input.shape().try_into().expect("conv input is 4-d");
        let (oh, ow) = self.output_hw(h, w).expect("validated by the network");
        let k = self.kernel;
        let s = self.stride;
        let w_mat = self.weight_matrix();
        let example_len = self.in_channels * h * w;
        let grad_len = self.out_channels * oh * ow;
        let examples: Vec<usize> = (0..n).collect();

        let parts = parallel::map_indexed(&examples, |_, &e| {
            let example = &input.data()[e * example_len..(e + 1) * example_len];
            let grad = &grad_out.data()[e * grad_len..(e + 1) * grad_len];
            let cols = self.im2col(example, h, w, oh, ow);
            let grad_mat =
                ArrayView2::from_shape((self.out_channels, oh * ow), grad).expect("contiguous");

            let d_weights = grad_mat.dot(&cols.t());
            let d_bias: Vec<f64> = grad_mat.rows().into_iter().map(|r| r.sum()).collect();

            // Scatter column gradients back onto the input plane.
            let d_cols = w_mat.t().dot(&grad_mat);
            let mut d_input = vec![0.0; example_len];
            let mut row = 0;
            for c in 0..self.in_channels {
                for ki in 0..k {
                    for kj in 0..k {
                        let mut col = 0;
                        for oi in 0..oh {
                            let ii = oi * s + ki;
                            for oj in 0..ow {
                                d_input[c * h * w + ii * w + oj * s + kj] += d_cols[[row, col]];
                                col += 1;
                            }
                        }
                        row += 1;
                    }
                }
            }
            (d_weights, d_bias, d_input)
        });

        let mut d_weights = Tensor::zeros(self.weights.shape());
        let mut d_bias = Tensor::zeros(self.bias.shape());
        let mut d_input = Vec::with_capacity(n * example_len);
        for (dw, db, dx) in parts {
            let (dw_vec, _) = dw.into_raw_vec_and_offset();
            for (acc, v) in d_weights.data_mut().iter_mut().zip(dw_vec) {
                *acc += v;
            }
            for (acc, v) in d_bias.data_mut().iter_mut().zip(db) {
                *acc += v;
            }
            d_input.extend_from_slice(&dx);
        }
        (
            ParamGrad { weights: d_weights, bias: d_bias },
            Tensor::from_vec(input.shape(), d_input),
        )
    }
}

/// Fully connected layer: y = x W^T + b.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_features: usize,
    pub out_features: usize,
    /// Shape (out_features, in_features).
    pub weights: Tensor,
    /// Shape (out_features,).
    pub bias: Tensor,
}

impl Dense {
    pub fn new(in_features: usize, out_features: usize, rng: &mut ChaCha8Rng) -> Dense {
        Dense {
            in_features,
            out_features,
            weights: Tensor::from_vec(
                &[out_features, in_features],
                xavier_uniform(rng, in_features, out_features, in_features * out_features),
            ),
            bias: Tensor::zeros(&[out_features]),
        }
    }

    fn weight_matrix(&self) -> Array2<f64> {
        Array2::from_shape_vec(
            (self.out_features, self.in_features),
            self.weights.data().to_vec(),
        )
        .expect("weight tensor matches its declared shape")
    }

    pub(super) fn forward(&self, input: &Tensor) -> Tensor {
        let [n, _]: [usize; 2] = input.shape().try_into().expect("dense input is 2-d");
        let x = ArrayView2::from_shape((n, self.in_features), input.data()).expect("contiguous");
        let mut y = x.dot(&self.weight_matrix().t());
        for (o, mut col) in y.columns_mut().into_iter().enumerate() {
            col += self.bias.data()[o];
        }
        Tensor::from_vec(&[n, self.out_features], y.into_raw_vec_and_offset().0)
    }

    pub(super) fn backward(&self, input: &Tensor, grad_out: &Tensor) -> (ParamGrad, Tensor) {
        let [n, _]: [usize; 2] = input.shape().try_into().expect("dense input is 2-d");
        let x = ArrayView2::from_shape((n, self.in_features), input.data()).expect("contiguous");
        let dy =
            ArrayView2::from_shape((n, self.out_features), grad_out.data()).expect("contiguous");

        let d_weights = dy.t().dot(&x);
        let d_bias: Vec<f64> = dy.columns().into_iter().map(|c| c.sum()).collect();
        let d_input = dy.dot(&self.weight_matrix());

        (
            ParamGrad {
                weights: Tensor::from_vec(
                    self.weights.shape(),
                    d_weights.into_raw_vec_and_offset().0,
                ),
                bias: Tensor::from_vec(self.bias.shape(), d_bias),
            },
            Tensor::from_vec(input.shape(), d_input.into_raw_vec_and_offset().0),
        )
    }
}

/// One network layer. The stack is an ordered list of these.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    /// Non-learned input scaling: p/255 - 0.5.
    FixedNormalize,
    Conv(Conv2d),
    ReLU,
    Flatten,
    FullyConnected(Dense),
}

impl Layer {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Layer::FixedNormalize => "fixed_normalize",
            Layer::Conv(_) => "conv",
            Layer::ReLU => "relu",
            Layer::Flatten => "flatten",
            Layer::FullyConnected(_) => "fully_connected",
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Layer::Conv(c) => c.weights.len() + c.bias.len(),
            Layer::FullyConnected(d) => d.weights.len() + d.bias.len(),
            _ => 0,
        }
    }

    pub fn params(&self) -> Option<(&Tensor, &Tensor)> {
        match self {
            Layer::Conv(c) => Some((&c.weights, &c.bias)),
            Layer::FullyConnected(d) => Some((&d.weights, &d.bias)),
            _ => None,
        }
    }

    pub fn params_mut(&mut self) -> Option<(&mut Tensor, &mut Tensor)> {
        match self {
            Layer::Conv(c) => Some((&mut c.weights, &mut c.bias)),
            Layer::FullyConnected(d) => Some((&mut d.weights, &mut d.bias)),
            _ => None,
        }
    }

    /// Output shape for a given input shape, or a shape error naming this
    /// layer's kind.
    pub fn output_shape(&self, index: usize, input: &[usize]) -> Result<Vec<usize>, NetError> {
        let mismatch = |detail: String| NetError::ShapeMismatch {
            layer: index,
            kind: self.kind_name(),
            detail,
        };
        match self {
            Layer::FixedNormalize | Layer::ReLU => Ok(input.to_vec()),
            Layer::Conv(c) => {
                let [n, ch, h, w]: [usize; 4] = input
                    .try_into()
                    .map_err(|_| mismatch(format!("expected 4-d input, got {input:?}")))?;
                if ch != c.in_channels {
                    return Err(mismatch(format!(
                        "expected {} input channels, got {ch}",
                        c.in_channels
                    )));
                }
                let (oh, ow) = c.output_hw(h, w).ok_or_else(|| {
                    mismatch(format!("kernel {} does not fit input {h}x{w}", c.kernel))
                })?;
                Ok(vec![n, c.out_channels, oh, ow])
            }
            Layer::Flatten => {
                if input.len() < 2 {
                    return Err(mismatch(format!("expected batched input, got {input:?}")));
                }
                Ok(vec![input[0], input[1..].iter().product()])
            }
            Layer::FullyConnected(d) => {
                let [n, f]: [usize; 2] = input
                    .try_into()
                    .map_err(|_| mismatch(format!("expected 2-d input, got {input:?}")))?;
                if f != d.in_features {
                    return Err(mismatch(format!(
                        "expected {} input features, got {f}",
                        d.in_features
                    )));
                }
                Ok(vec![n, d.out_features])
            }
        }
    }

    pub(super) fn forward(&self, input: &Tensor) -> Tensor {
        match self {
            Layer::FixedNormalize => {
                let data = input
                    .data()
                    .iter()
                    .map(|&v| v * NORMALIZE_SCALE + NORMALIZE_SHIFT)
                    .collect();
                Tensor::from_vec(input.shape(), data)
            }
            Layer::ReLU => {
                let data = input.data().iter().map(|&v| v.max(0.0)).collect();
                Tensor::from_vec(input.shape(), data)
            }
            Layer::Flatten => {
                let n = input.shape()[0];
                let rest: usize = input.shape()[1..].iter().product();
                input.clone().reshaped(&[n, rest])
            }
            Layer::Conv(c) => c.forward(input),
            Layer::FullyConnected(d) => d.forward(input),
        }
    }

    pub(super) fn backward(
        &self,
        input: &Tensor,
        grad_out: &Tensor,
    ) -> (Option<ParamGrad>, Tensor) {
        match self {
            Layer::FixedNormalize => {
                let data = grad_out.data().iter().map(|&g| g * NORMALIZE_SCALE).collect();
                (None, Tensor::from_vec(input.shape(), data))
            }
            Layer::ReLU => {
                let data = input
                    .data()
                    .iter()
                    .zip(grad_out.data())
                    .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
                    .collect();
                (None, Tensor::from_vec(input.shape(), data))
            }
            Layer::Flatten => (None, grad_out.clone().reshaped(input.shape())),
            Layer::Conv(c) => {
                let (grads, d_input) = c.backward(input, grad_out);
                (Some(grads), d_input)
            }
            Layer::FullyConnected(d) => {
                let (grads, d_input) = d.backward(input, grad_out);
                (Some(grads), d_input)
            }
        }
    }
}
