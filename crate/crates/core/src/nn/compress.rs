//! Post-training transforms over a float model: one-shot magnitude
//! pruning, storage flag changes and static int8 quantization.

use super::forward::Scratch;
use super::layer::Layer;
use super::model::Model;
use super::tensor::{quantize_tensor, QuantParams, Storage, Tensor};
use super::NnError;
use crate::features::FeatureMatrix;

/// Zeroes the smallest-magnitude weights of every conv/dense kernel until
/// each holds at least `sparsity` zeros, and marks the kernels sparse.
pub fn prune_magnitude(model: &Model, sparsity: f64) -> Result<Model, NnError> {
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(NnError::BadSparsity(sparsity));
    }
    model.map_layers(|layers| {
        for w in layers.iter_mut().filter_map(Layer::weights_mut) {
            let mut v = w.to_f32().into_owned();
            let k = (sparsity * v.len() as f64).ceil() as usize;
            if k > 0 {
                let mut order: Vec<usize> = (0..v.len()).collect();
                order.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(a.cmp(&b)));
                for &i in &order[..k.min(v.len())] {
                    v[i] = 0.0;
                }
            }
            w.storage = Storage::SparseF32(v);
        }
    })
}

/// Same weights with sparse kernels re-flagged as ordinary dense storage.
pub fn densify(model: &Model) -> Model {
    model
        .map_layers(|layers| {
            for w in layers.iter_mut().filter_map(Layer::weights_mut) {
                if matches!(w.storage, Storage::SparseF32(_)) {
                    *w = w.with_storage_kind(false);
                }
            }
        })
        .expect("storage change keeps shapes")
}

/// Per-layer input ranges seen while running `calibration` through the
/// float model. Entry `i` is `None` for layers without a kernel.
pub fn calibrate(
    model: &Model,
    calibration: &[FeatureMatrix],
) -> Result<Vec<Option<(f32, f32)>>, NnError> {
    if calibration.is_empty() {
        return Err(NnError::EmptyCalibration);
    }
    let mut ranges: Vec<Option<(f32, f32)>> = vec![None; model.layers().len()];
    let has_kernel: Vec<bool> = model.layers().iter().map(|l| l.weights().is_some()).collect();
    let mut scratch = Scratch::new();
    for x in calibration {
        let [rows, cols, _] = model.input_shape();
        if x.rows() != rows || x.cols() != cols {
            return Err(NnError::InputShape {
                expected: model.input_shape(),
                got: [x.rows(), x.cols(), 1],
            });
        }
        model.forward_traced(x.values(), &mut scratch, &mut |i, act| {
            if !has_kernel[i] {
                return;
            }
            let (lo, hi) = act
                .iter()
                .fold((f32::INFINITY, f32::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            let r = ranges[i].get_or_insert((lo, hi));
            r.0 = r.0.min(lo);
            r.1 = r.1.max(hi);
        })?;
    }
    Ok(ranges)
}

/// Static post-training quantization: symmetric per-tensor int8 kernels
/// and affine int8 activation ranges taken from `calibration`.
pub fn quantize_model(model: &Model, calibration: &[FeatureMatrix]) -> Result<Model, NnError> {
    let ranges = calibrate(model, calibration)?;
    let mut quantized = Vec::with_capacity(model.layers().len());
    for (layer, range) in model.layers().iter().zip(&ranges) {
        let q = match layer {
            Layer::Conv2d { weights, bias, .. } => Layer::Conv2d {
                weights: quantize_weights(weights)?,
                bias: bias.clone(),
                input_quant: range.map(|(lo, hi)| QuantParams::affine(lo, hi)),
            },
            Layer::Dense { weights, bias, .. } => Layer::Dense {
                weights: quantize_weights(weights)?,
                bias: bias.clone(),
                input_quant: range.map(|(lo, hi)| QuantParams::affine(lo, hi)),
            },
            other => other.clone(),
        };
        quantized.push(q);
    }
    Model::new(model.name(), model.input_shape(), quantized)
}

fn quantize_weights(t: &Tensor) -> Result<Tensor, NnError> {
    quantize_tensor(t, true)
}
