//! Binary weight files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   b"GDXW"
//! u32     version (1)
//! u32x3   input shape: channels, height, width
//! u32     layer count
//! per layer:
//!   u8    kind tag: 0 normalize, 1 conv, 2 relu, 3 flatten, 4 fully connected
//!   u32   rank, then u32 dims…
//!           conv: [out, in, kernel, kernel, stride]
//!           fully connected: [out, in]
//!           others: rank 0
//!   f32…  weights then biases (conv and fully connected only)
//! ```
//!
//! The shape descriptor doubles as the architecture record: loading rebuilds
//! the network and re-runs the layer-chain validation, so a file whose
//! tensors do not compose fails with an error naming the offending layer.

use super::{Conv2d, Dense, Layer, NetError, Network, Tensor};
use std::fs;
use std::io::Write;
use std::path::Path;

const MAGIC: &[u8; 4] = b"GDXW";
const VERSION: u32 = 1;

const TAG_NORMALIZE: u8 = 0;
const TAG_CONV: u8 = 1;
const TAG_RELU: u8 = 2;
const TAG_FLATTEN: u8 = 3;
const TAG_FULLY_CONNECTED: u8 = 4;

/// Serializes the network to the weight-file byte format.
pub fn write_weights(net: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let (c, h, w) = net.input_shape;
    for dim in [c, h, w] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    out.extend_from_slice(&(net.layers.len() as u32).to_le_bytes());

    for layer in &net.layers {
        match layer {
            Layer::FixedNormalize => {
                out.push(TAG_NORMALIZE);
                out.extend_from_slice(&0u32.to_le_bytes());
            }
            Layer::ReLU => {
                out.push(TAG_RELU);
                out.extend_from_slice(&0u32.to_le_bytes());
            }
            Layer::Flatten => {
                out.push(TAG_FLATTEN);
                out.extend_from_slice(&0u32.to_le_bytes());
            }
            Layer::Conv(conv) => {
                out.push(TAG_CONV);
                let dims = [
                    conv.out_channels,
                    conv.in_channels,
                    conv.kernel,
                    conv.kernel,
                    conv.stride,
                ];
                out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
                for d in dims {
                    out.extend_from_slice(&(d as u32).to_le_bytes());
                }
                for &v in conv.weights.data().iter().chain(conv.bias.data()) {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
            Layer::FullyConnected(dense) => {
                out.push(TAG_FULLY_CONNECTED);
                let dims = [dense.out_features, dense.in_features];
                out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
                for d in dims {
                    out.extend_from_slice(&(d as u32).to_le_bytes());
                }
                for &v in dense.weights.data().iter().chain(dense.bias.data()) {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
        }
    }
    out
}

pub fn save_weights(net: &Network, path: impl AsRef<Path>) -> Result<(), NetError> {
    let bytes = write_weights(net);
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], NetError> {
        if self.pos + n > self.bytes.len() {
            return Err(NetError::Format(format!(
                "truncated file: expected {n} bytes for {what} at offset {}",
                self.pos
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self, what: &str) -> Result<u8, NetError> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32, NetError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32(&mut self, what: &str) -> Result<f32, NetError> {
        let b = self.take(4, what)?;
        Ok(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Parses a weight file back into a network, validating the layer chain.
pub fn read_weights(bytes: &[u8]) -> Result<Network, NetError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(NetError::Format(format!(
            "bad magic {:?}, expected {:?}",
            &magic,
            &MAGIC
        )));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(NetError::Format(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let c = cur.u32("input channels")? as usize;
    let h = cur.u32("input height")? as usize;
    let w = cur.u32("input width")? as usize;
    let layer_count = cur.u32("layer count")? as usize;

    let mut layers = Vec::with_capacity(layer_count);
    for index in 0..layer_count {
        let tag = cur.u8("layer tag")?;
        let rank = cur.u32("rank")? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(cur.u32("dim")? as usize);
        }
        let layer = match tag {
            TAG_NORMALIZE => Layer::FixedNormalize,
            TAG_RELU => Layer::ReLU,
            TAG_FLATTEN => Layer::Flatten,
            TAG_CONV => {
                let [out, inp, kh, kw, stride]: [usize; 5] =
                    dims.as_slice().try_into().map_err(|_| {
                        NetError::Format(format!(
                            "layer {index}: conv expects 5 dims, got {}",
                            dims.len()
                        ))
                    })?;
                if kh != kw {
                    return Err(NetError::Format(format!(
                        "layer {index}: only square kernels are supported, got {kh}x{kw}"
                    )));
                }
                let mut weights = vec![0.0f64; out * inp * kh * kw];
                for v in weights.iter_mut() {
                    *v = cur.f32("conv weight")? as f64;
                }
                let mut bias = vec![0.0f64; out];
                for v in bias.iter_mut() {
                    *v = cur.f32("conv bias")? as f64;
                }
                Layer::Conv(Conv2d {
                    in_channels: inp,
                    out_channels: out,
                    kernel: kh,
                    stride,
                    weights: Tensor::from_vec(&[out, inp, kh, kw], weights),
                    bias: Tensor::from_vec(&[out], bias),
                })
            }
            TAG_FULLY_CONNECTED => {
                let [out, inp]: [usize; 2] = dims.as_slice().try_into().map_err(|_| {
                    NetError::Format(format!(
                        "layer {index}: fully connected expects 2 dims, got {}",
                        dims.len()
                    ))
                })?;
                let mut weights = vec![0.0f64; out * inp];
                for v in weights.iter_mut() {
                    *v = cur.f32("fc weight")? as f64;
                }
                let mut bias = vec![0.0f64; out];
                for v in bias.iter_mut() {
                    *v = cur.f32("fc bias")? as f64;
                }
                Layer::FullyConnected(Dense {
                    in_features: inp,
                    out_features: out,
                    weights: Tensor::from_vec(&[out, inp], weights),
                    bias: Tensor::from_vec(&[out], bias),
                })
            }
            other => {
                return Err(NetError::Format(format!(
                    "layer {index}: unknown layer tag {other}"
                )))
            }
        };
        layers.push(layer);
    }
    if cur.pos != bytes.len() {
        return Err(NetError::Format(format!(
            "{} trailing bytes after the last layer",
            bytes.len() - cur.pos
        )));
    }
    // Re-runs the shape-chain validation; a descriptor whose layers do not
    // compose fails here with the layer index.
    Network::new((c, h, w), layers)
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<Network, NetError> {
    let bytes = fs::read(path)?;
    read_weights(&bytes)
}
