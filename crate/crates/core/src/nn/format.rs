//! `AEID` model files.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! "AEID" | u32 version = 1 | u32 layer_count | u32 rows | u32 cols | u32 channels
//! per layer:
//!   u8 kind      0 conv2d, 1 batchnorm, 2 maxpool2x2, 3 dense, 4 relu, 5 sigmoid, 6 flatten
//!   u8 storage   0 dense f32, 1 int8, 2 sparse f32 (dense layout, explicit zeros)
//!   u32 rank, rank × u32 dims
//!   storage = 1: f32 weight scale, i32 weight zero point,
//!                f32 input scale,  i32 input zero point
//!   payload:
//!     conv2d     kernel [kh, kw, cin, cout] (f32 or i8), bias cout × f32
//!     dense      kernel [in, out] (f32 or i8), bias out × f32
//!     batchnorm  dims [c]; gamma, beta, moving mean, moving var (c × f32 each),
//!                epsilon f32 (NaN means unset, read as 1e-3)
//!     others     rank 0, no payload
//! ```
//!
//! Model names are not stored; loaded models are named by the caller.

use super::layer::{Layer, LayerKind, BN_EPSILON};
use super::model::Model;
use super::tensor::{QuantParams, Storage, Tensor};
use super::NnError;

pub const MODEL_MAGIC: &[u8; 4] = b"AEID";
pub const MODEL_VERSION: u32 = 1;
const MAX_RANK: usize = 8;

pub fn save_model(model: &Model) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    put_u32(&mut out, MODEL_VERSION);
    put_u32(&mut out, model.layers().len() as u32);
    for d in model.input_shape() {
        put_u32(&mut out, d as u32);
    }
    for layer in model.layers() {
        out.push(layer.kind() as u8);
        match layer {
            Layer::Conv2d {
                weights,
                bias,
                input_quant,
            }
            | Layer::Dense {
                weights,
                bias,
                input_quant,
            } => {
                out.push(weights.storage.code());
                put_dims(&mut out, &weights.shape);
                match &weights.storage {
                    Storage::Int8 { values, params } => {
                        let x = input_quant.unwrap_or(QuantParams {
                            scale: f32::NAN,
                            zero_point: 0,
                        });
                        put_f32(&mut out, params.scale);
                        out.extend_from_slice(&params.zero_point.to_le_bytes());
                        put_f32(&mut out, x.scale);
                        out.extend_from_slice(&x.zero_point.to_le_bytes());
                        out.extend(values.iter().map(|&q| q as u8));
                    }
                    Storage::DenseF32(v) | Storage::SparseF32(v) => put_f32s(&mut out, v),
                }
                put_f32s(&mut out, bias);
            }
            Layer::BatchNorm {
                gamma,
                beta,
                mean,
                var,
                epsilon,
            } => {
                out.push(0);
                put_dims(&mut out, &[gamma.len()]);
                for v in [gamma, beta, mean, var] {
                    put_f32s(&mut out, v);
                }
                put_f32(&mut out, *epsilon);
            }
            Layer::MaxPool2x2 | Layer::Relu | Layer::Sigmoid | Layer::Flatten => {
                out.push(0);
                put_u32(&mut out, 0);
            }
        }
    }
    out
}

/// Parses and validates a model file. `name` labels the result.
pub fn load_model(bytes: &[u8], name: &str) -> Result<Model, NnError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4).map_err(|_| NnError::BadMagic)?;
    if magic != MODEL_MAGIC {
        return Err(NnError::BadMagic);
    }
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return Err(NnError::UnsupportedVersion(version));
    }
    let count = r.u32()? as usize;
    let input = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];

    let mut layers = Vec::with_capacity(count.min(1024));
    for i in 0..count {
        let code = r.u8()?;
        let kind = LayerKind::from_code(code).ok_or(NnError::UnknownLayerKind(code))?;
        let storage = r.u8()?;
        let rank = r.u32()? as usize;
        if rank > MAX_RANK {
            return Err(corrupt(i, format!("rank {rank}")));
        }
        let dims = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let elements = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| corrupt(i, format!("dims {dims:?} overflow")))?;

        let layer = match kind {
            LayerKind::Conv2d | LayerKind::Dense => {
                let want_rank = if kind == LayerKind::Conv2d { 4 } else { 2 };
                if rank != want_rank {
                    return Err(NnError::ShapeMismatch {
                        layer: i,
                        detail: format!("{kind:?} kernel rank {rank}, want {want_rank}"),
                    });
                }
                let (weights, input_quant) = match storage {
                    0 | 2 => {
                        let v = r.f32s(elements).map_err(|_| truncated(i, "kernel"))?;
                        let s = if storage == 0 {
                            Storage::DenseF32(v)
                        } else {
                            Storage::SparseF32(v)
                        };
                        (Tensor::new(dims.clone(), s)?, None)
                    }
                    1 => {
                        let wp = QuantParams::new(r.f32()?, r.i32()?)
                            .map_err(|e| corrupt(i, e.to_string()))?;
                        let (xs, xz) = (r.f32()?, r.i32()?);
                        let xp = if xs.is_nan() {
                            None
                        } else {
                            Some(QuantParams::new(xs, xz).map_err(|e| corrupt(i, e.to_string()))?)
                        };
                        let raw = r.take(elements).map_err(|_| truncated(i, "kernel"))?;
                        let values = raw.iter().map(|&b| b as i8).collect();
                        (Tensor::new(dims.clone(), Storage::Int8 { values, params: wp })?, xp)
                    }
                    s => return Err(NnError::UnknownStorage(s)),
                };
                let n_out = *dims.last().unwrap();
                let bias = r.f32s(n_out).map_err(|_| truncated(i, "bias"))?;
                if kind == LayerKind::Conv2d {
                    Layer::Conv2d {
                        weights,
                        bias,
                        input_quant,
                    }
                } else {
                    Layer::Dense {
                        weights,
                        bias,
                        input_quant,
                    }
                }
            }
            LayerKind::BatchNorm => {
                if storage != 0 || rank != 1 {
                    return Err(corrupt(i, format!("batchnorm storage {storage} rank {rank}")));
                }
                let c = dims[0];
                let mut v = (0..4)
                    .map(|_| r.f32s(c).map_err(|_| truncated(i, "batchnorm")))
                    .collect::<Result<Vec<_>, _>>()?;
                let eps = r.f32().map_err(|_| truncated(i, "epsilon"))?;
                let (var, mean, beta, gamma) = (v.pop(), v.pop(), v.pop(), v.pop());
                Layer::BatchNorm {
                    gamma: gamma.unwrap(),
                    beta: beta.unwrap(),
                    mean: mean.unwrap(),
                    var: var.unwrap(),
                    epsilon: if eps.is_nan() { BN_EPSILON } else { eps },
                }
            }
            LayerKind::MaxPool2x2 | LayerKind::Relu | LayerKind::Sigmoid | LayerKind::Flatten => {
                if rank != 0 {
                    return Err(corrupt(i, format!("{kind:?} with rank {rank}")));
                }
                match kind {
                    LayerKind::MaxPool2x2 => Layer::MaxPool2x2,
                    LayerKind::Relu => Layer::Relu,
                    LayerKind::Sigmoid => Layer::Sigmoid,
                    _ => Layer::Flatten,
                }
            }
        };
        layers.push(layer);
    }
    if r.pos != bytes.len() {
        return Err(NnError::CorruptTensor(format!(
            "{} trailing bytes after last layer",
            bytes.len() - r.pos
        )));
    }
    Model::new(name, input, layers)
}

fn corrupt(layer: usize, detail: String) -> NnError {
    NnError::CorruptTensor(format!("layer {layer}: {detail}"))
}

fn truncated(layer: usize, what: &str) -> NnError {
    corrupt(layer, format!("{what} payload truncated"))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f32(out: &mut Vec<u8>, v: f32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f32s(out: &mut Vec<u8>, v: &[f32]) {
    for x in v {
        put_f32(out, *x);
    }
}

fn put_dims(out: &mut Vec<u8>, dims: &[usize]) {
    put_u32(out, dims.len() as u32);
    for &d in dims {
        put_u32(out, d as u32);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| {
            NnError::CorruptTensor(format!(
                "needed {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            ))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, NnError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i32(&mut self) -> Result<i32, NnError> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, NnError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, NnError> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| {
            NnError::CorruptTensor(format!("{n} floats overflow"))
        })?)?;
        Ok(raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect())
    }
}
