use super::forward::{self, ConvGeom, Scratch};
use super::layer::{Layer, Shape};
use super::tensor::Storage;
use super::NnError;
use crate::features::{FeatureMatrix, COLS, DEFAULT_WINDOW};

/// Default `[rows, cols, channels]` input.
pub const DEFAULT_INPUT: [usize; 3] = [DEFAULT_WINDOW, COLS, 1];

// Largest int8 fan-in whose worst-case accumulation fits in an i32.
const MAX_INT8_FAN_IN: usize = i32::MAX as usize / (255 * 255);

/// A validated stack of inference layers ending in one sigmoid unit.
///
/// Immutable once built; share it across threads and give each thread its
/// own [`Scratch`].
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    name: String,
    input_shape: [usize; 3],
    layers: Vec<Layer>,
    shapes: Vec<Shape>,
    // Int8 kernels widened to `q − zero_point`; empty for other layers.
    centered: Vec<Vec<i16>>,
}

impl Model {
    pub fn new(
        name: impl Into<String>,
        input_shape: [usize; 3],
        layers: Vec<Layer>,
    ) -> Result<Self, NnError> {
        let [h, w, c] = input_shape;
        let mut shapes = vec![Shape::Map { h, w, c }];
        if input_shape.contains(&0) {
            return Err(NnError::ShapeMismatch {
                layer: 0,
                detail: format!("empty input shape {input_shape:?}"),
            });
        }
        for (i, layer) in layers.iter().enumerate() {
            check_params(i, layer)?;
            let next = layer
                .output_shape(*shapes.last().unwrap())
                .map_err(|detail| NnError::ShapeMismatch { layer: i, detail })?;
            shapes.push(next);
        }
        match (layers.last(), shapes.last()) {
            (Some(Layer::Sigmoid), Some(Shape::Flat(1))) => {}
            _ => {
                return Err(NnError::ShapeMismatch {
                    layer: layers.len().saturating_sub(1),
                    detail: format!(
                        "model must end in a sigmoid over one unit, ends in {:?} with output {}",
                        layers.last().map(|l| l.kind()),
                        shapes.last().unwrap()
                    ),
                })
            }
        }
        let centered = layers
            .iter()
            .map(|l| match l.weights().map(|t| &t.storage) {
                Some(Storage::Int8 { values, params }) => {
                    let mut k = Vec::new();
                    forward::center_kernel(values, params.zero_point, &mut k);
                    k
                }
                _ => Vec::new(),
            })
            .collect();
        Ok(Model {
            name: name.into(),
            input_shape,
            layers,
            shapes,
            centered,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input_shape
    }

    pub fn input_len(&self) -> usize {
        self.input_shape.iter().product()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Activation shape entering each layer, plus the final output.
    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    /// Rebuilds the model after `f` edits its layers, revalidating the chain.
    pub fn map_layers(&self, f: impl FnOnce(&mut Vec<Layer>)) -> Result<Model, NnError> {
        let mut layers = self.layers.clone();
        f(&mut layers);
        Model::new(self.name.clone(), self.input_shape, layers)
    }

    /// Number of trainable scalars (kernels, biases, batch-norm affine).
    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Conv2d { weights, bias, .. } | Layer::Dense { weights, bias, .. } => {
                    weights.len() + bias.len()
                }
                Layer::BatchNorm { gamma, .. } => 2 * gamma.len(),
                _ => 0,
            })
            .sum()
    }

    /// True when every conv/dense kernel is int8 with an activation range.
    pub fn is_quantized(&self) -> bool {
        let mut kernels = self.layers.iter().filter(|l| l.weights().is_some()).peekable();
        kernels.peek().is_some() && kernels.all(|l| l.is_int8() && l.input_quant().is_some())
    }

    /// Fraction of conv/dense kernel weights that are exactly zero.
    /// Biases and batch-norm parameters do not count.
    pub fn sparsity(&self) -> Result<f64, NnError> {
        let (zeros, total) = self
            .layers
            .iter()
            .filter_map(|l| l.weights())
            .fold((0usize, 0usize), |(z, t), w| (z + w.zero_count(), t + w.len()));
        if total == 0 {
            return Err(NnError::NoPrunableTensors);
        }
        Ok(zeros as f64 / total as f64)
    }

    fn check_input(&self, x: &FeatureMatrix) -> Result<(), NnError> {
        let [rows, cols, ch] = self.input_shape;
        if x.rows() != rows || x.cols() != cols || ch != 1 {
            return Err(NnError::InputShape {
                expected: self.input_shape,
                got: [x.rows(), x.cols(), 1],
            });
        }
        Ok(())
    }

    /// Float forward pass. Int8 kernels, if any, are dequantized first.
    pub fn forward(&self, x: &FeatureMatrix) -> Result<f32, NnError> {
        self.check_input(x)?;
        self.forward_slice(x.values(), &mut Scratch::new())
    }

    pub fn forward_with(&self, x: &FeatureMatrix, scratch: &mut Scratch) -> Result<f32, NnError> {
        self.check_input(x)?;
        self.forward_slice(x.values(), scratch)
    }

    /// Float forward pass over a raw `h × w × c` input.
    pub fn forward_slice(&self, x: &[f32], scratch: &mut Scratch) -> Result<f32, NnError> {
        self.run(x, scratch, false, &mut |_, _| {})
    }

    /// Integer forward pass: conv and dense layers quantize their input
    /// with the stored activation range and accumulate in i32.
    pub fn forward_int8(&self, x: &FeatureMatrix) -> Result<f32, NnError> {
        self.check_input(x)?;
        self.forward_int8_slice(x.values(), &mut Scratch::new())
    }

    pub fn forward_int8_with(
        &self,
        x: &FeatureMatrix,
        scratch: &mut Scratch,
    ) -> Result<f32, NnError> {
        self.check_input(x)?;
        self.forward_int8_slice(x.values(), scratch)
    }

    pub fn forward_int8_slice(&self, x: &[f32], scratch: &mut Scratch) -> Result<f32, NnError> {
        self.run(x, scratch, true, &mut |_, _| {})
    }

    /// Integer path for quantized models, float path otherwise.
    pub fn infer(&self, x: &FeatureMatrix, scratch: &mut Scratch) -> Result<f32, NnError> {
        if self.is_quantized() {
            self.forward_int8_with(x, scratch)
        } else {
            self.forward_with(x, scratch)
        }
    }

    /// Float forward pass that shows `observe(layer_index, input)` the
    /// activation entering every layer.
    pub fn forward_traced(
        &self,
        x: &[f32],
        scratch: &mut Scratch,
        observe: &mut dyn FnMut(usize, &[f32]),
    ) -> Result<f32, NnError> {
        self.run(x, scratch, false, observe)
    }

    fn run(
        &self,
        x: &[f32],
        scratch: &mut Scratch,
        int8: bool,
        observe: &mut dyn FnMut(usize, &[f32]),
    ) -> Result<f32, NnError> {
        if x.len() != self.input_len() {
            return Err(NnError::InputLength {
                expected: self.input_len(),
                got: x.len(),
            });
        }
        let Scratch { a, b, q, acc } = scratch;
        a.clear();
        a.extend_from_slice(x);

        for (i, layer) in self.layers.iter().enumerate() {
            let (input, output) = (self.shapes[i], self.shapes[i + 1]);
            observe(i, a);
            match layer {
                Layer::Conv2d {
                    weights,
                    bias,
                    input_quant,
                } => {
                    let Shape::Map { h, w, c } = input else { unreachable!() };
                    let g = ConvGeom {
                        h,
                        w,
                        cin: c,
                        kh: weights.shape[0],
                        kw: weights.shape[1],
                        cout: weights.shape[3],
                    };
                    b.clear();
                    b.resize(output.len(), 0.0);
                    if int8 {
                        let (wp, xp) = int8_parts(i, &weights.storage, *input_quant)?;
                        forward::quantize_centered(a, xp, q);
                        let scale = xp.scale * wp.scale;
                        forward::conv_i8(q, &g, &self.centered[i], bias, scale, acc, b);
                    } else {
                        forward::conv_f32(a, &g, &weights.to_f32(), bias, b);
                    }
                    std::mem::swap(a, b);
                }
                Layer::Dense {
                    weights,
                    bias,
                    input_quant,
                } => {
                    b.clear();
                    b.resize(output.len(), 0.0);
                    if int8 {
                        let (wp, xp) = int8_parts(i, &weights.storage, *input_quant)?;
                        forward::quantize_centered(a, xp, q);
                        let scale = xp.scale * wp.scale;
                        forward::dense_i8(q, &self.centered[i], bias, scale, acc, b);
                    } else {
                        forward::dense_f32(a, &weights.to_f32(), bias, b);
                    }
                    std::mem::swap(a, b);
                }
                Layer::BatchNorm {
                    gamma,
                    beta,
                    mean,
                    var,
                    epsilon,
                } => forward::batchnorm(a, gamma, beta, mean, var, *epsilon),
                Layer::MaxPool2x2 => {
                    let Shape::Map { h, w, c } = input else { unreachable!() };
                    b.clear();
                    b.resize(output.len(), 0.0);
                    forward::maxpool2x2(a, h, w, c, b);
                    std::mem::swap(a, b);
                }
                Layer::Relu => forward::relu(a),
                Layer::Sigmoid => forward::sigmoid_inplace(a),
                Layer::Flatten => {}
            }
        }
        Ok(a[0])
    }
}

fn int8_parts(
    layer: usize,
    storage: &Storage,
    input_quant: Option<super::QuantParams>,
) -> Result<(super::QuantParams, super::QuantParams), NnError> {
    match (storage, input_quant) {
        (Storage::Int8 { params, .. }, Some(xp)) => Ok((*params, xp)),
        _ => Err(NnError::MissingQuantParams { layer }),
    }
}

fn check_params(i: usize, layer: &Layer) -> Result<(), NnError> {
    let corrupt = |detail: String| NnError::CorruptTensor(format!("layer {i}: {detail}"));
    match layer {
        Layer::Conv2d { weights, bias, input_quant } | Layer::Dense { weights, bias, input_quant } => {
            if let Some(p) = weights.quant_params() {
                super::QuantParams::new(p.scale, p.zero_point).map_err(|e| corrupt(e.to_string()))?;
                let fan_in = weights.len() / weights.shape.last().copied().unwrap_or(1).max(1);
                if fan_in > MAX_INT8_FAN_IN {
                    return Err(corrupt(format!("int8 fan-in {fan_in} overflows i32 accumulation")));
                }
            }
            if let Some(p) = input_quant {
                super::QuantParams::new(p.scale, p.zero_point).map_err(|e| corrupt(e.to_string()))?;
            }
            if let Some(bad) = bias.iter().find(|v| !v.is_finite()) {
                return Err(corrupt(format!("non-finite bias {bad}")));
            }
            if weights.to_f32().iter().any(|v| !v.is_finite()) {
                return Err(corrupt("non-finite weight".into()));
            }
        }
        Layer::BatchNorm { var, epsilon, .. } => {
            if !(epsilon.is_finite() && *epsilon > 0.0) {
                return Err(corrupt(format!("batchnorm epsilon {epsilon}")));
            }
            if let Some(v) = var.iter().find(|v| !(**v >= 0.0)) {
                return Err(corrupt(format!("batchnorm variance {v}")));
            }
        }
        _ => {}
    }
    Ok(())
}
