//! Forward-pass engine for small 2-D CNN detectors.
//!
//! Kernels can be held as dense f32, pruned f32 (dense layout with explicit
//! zeros) or int8 with affine quantization parameters. Models travel in the
//! `AEID` format described in [`format`].

mod arch;
pub mod compress;
pub mod format;
mod forward;
mod layer;
mod model;
mod tensor;

use thiserror::Error;

pub use arch::{random_batchnorm, random_conv, random_dense, Architecture};
pub use format::{load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use forward::{sigmoid, Scratch};
pub use layer::{Layer, LayerKind, Shape, BN_EPSILON};
pub use model::{Model, DEFAULT_INPUT};
pub use tensor::{quantize_tensor, QuantParams, Storage, Tensor, SCALE_FLOOR};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("not an AEID model file")]
    BadMagic,
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("layer {layer}: {detail}")]
    ShapeMismatch { layer: usize, detail: String },
    #[error("corrupt tensor: {0}")]
    CorruptTensor(String),
    #[error("unknown layer kind {0}")]
    UnknownLayerKind(u8),
    #[error("unknown tensor storage {0}")]
    UnknownStorage(u8),
    #[error("layer {layer} has no int8 kernel or activation range")]
    MissingQuantParams { layer: usize },
    #[error("invalid quantization parameters: {0}")]
    BadQuantParams(String),
    #[error("input is {got:?}, model expects {expected:?}")]
    InputShape { expected: [usize; 3], got: [usize; 3] },
    #[error("input has {got} values, model expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("model has no conv or dense kernels")]
    NoPrunableTensors,
    #[error("sparsity {0} outside [0, 1]")]
    BadSparsity(f64),
    #[error("calibration set is empty")]
    EmptyCalibration,
    #[error("unknown architecture {0:?}")]
    UnknownArchitecture(String),
}
