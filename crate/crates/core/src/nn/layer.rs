use super::tensor::{QuantParams, Storage, Tensor};

/// Default batch-norm epsilon when a model file leaves it unset.
pub const BN_EPSILON: f32 = 1e-3;

/// Activation shape: `[h, w, c]` feature maps or `[n]` vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Map { h: usize, w: usize, c: usize },
    Flat(usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Map { h, w, c } => h * w * c,
            Shape::Flat(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> usize {
        match *self {
            Shape::Map { c, .. } => c,
            Shape::Flat(n) => n,
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shape::Map { h, w, c } => write!(f, "{h}x{w}x{c}"),
            Shape::Flat(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum LayerKind {
    Conv2d = 0,
    BatchNorm = 1,
    MaxPool2x2 = 2,
    Dense = 3,
    Relu = 4,
    Sigmoid = 5,
    Flatten = 6,
}

impl LayerKind {
    pub fn from_code(code: u8) -> Option<Self> {
        use LayerKind::*;
        [Conv2d, BatchNorm, MaxPool2x2, Dense, Relu, Sigmoid, Flatten]
            .into_iter()
            .find(|k| *k as u8 == code)
    }
}

/// One inference-time layer.
///
/// Convolutions use stride 1 and "same" padding with kernel layout
/// `[kh, kw, cin, cout]`. Dense kernels are `[in, out]`. `input_quant`
/// holds the calibrated activation range used when the kernel is int8.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv2d {
        weights: Tensor,
        bias: Vec<f32>,
        input_quant: Option<QuantParams>,
    },
    BatchNorm {
        gamma: Vec<f32>,
        beta: Vec<f32>,
        mean: Vec<f32>,
        var: Vec<f32>,
        epsilon: f32,
    },
    MaxPool2x2,
    Dense {
        weights: Tensor,
        bias: Vec<f32>,
        input_quant: Option<QuantParams>,
    },
    Relu,
    Sigmoid,
    Flatten,
}

impl Layer {
    pub fn kind(&self) -> LayerKind {
        match self {
            Layer::Conv2d { .. } => LayerKind::Conv2d,
            Layer::BatchNorm { .. } => LayerKind::BatchNorm,
            Layer::MaxPool2x2 => LayerKind::MaxPool2x2,
            Layer::Dense { .. } => LayerKind::Dense,
            Layer::Relu => LayerKind::Relu,
            Layer::Sigmoid => LayerKind::Sigmoid,
            Layer::Flatten => LayerKind::Flatten,
        }
    }

    /// Kernel tensor of a conv or dense layer.
    pub fn weights(&self) -> Option<&Tensor> {
        match self {
            Layer::Conv2d { weights, .. } | Layer::Dense { weights, .. } => Some(weights),
            _ => None,
        }
    }

    pub fn weights_mut(&mut self) -> Option<&mut Tensor> {
        match self {
            Layer::Conv2d { weights, .. } | Layer::Dense { weights, .. } => Some(weights),
            _ => None,
        }
    }

    pub fn input_quant(&self) -> Option<QuantParams> {
        match self {
            Layer::Conv2d { input_quant, .. } | Layer::Dense { input_quant, .. } => *input_quant,
            _ => None,
        }
    }

    pub fn is_int8(&self) -> bool {
        matches!(
            self.weights().map(|w| &w.storage),
            Some(Storage::Int8 { .. })
        )
    }

    /// Output shape for `input`, or why the layer cannot follow it.
    pub fn output_shape(&self, input: Shape) -> Result<Shape, String> {
        match (self, input) {
            (Layer::Conv2d { weights, bias, .. }, Shape::Map { h, w, c }) => {
                let &[kh, kw, cin, cout] = weights.shape.as_slice() else {
                    return Err(format!("conv kernel rank {} (want 4)", weights.shape.len()));
                };
                if kh == 0 || kw == 0 {
                    return Err("empty conv kernel".into());
                }
                if cin != c {
                    return Err(format!("conv expects {cin} input channels, got {input}"));
                }
                if bias.len() != cout {
                    return Err(format!("conv bias {} for {cout} filters", bias.len()));
                }
                Ok(Shape::Map { h, w, c: cout })
            }
            (Layer::Conv2d { .. }, Shape::Flat(_)) => Err(format!("conv after flat input {input}")),
            (
                Layer::BatchNorm {
                    gamma,
                    beta,
                    mean,
                    var,
                    ..
                },
                _,
            ) => {
                let c = input.channels();
                if [gamma, beta, mean, var].iter().any(|v| v.len() != c) {
                    return Err(format!("batchnorm size {} for input {input}", gamma.len()));
                }
                Ok(input)
            }
            (Layer::MaxPool2x2, Shape::Map { h, w, c }) => {
                if h < 2 || w < 2 {
                    return Err(format!("2x2 pool over {input}"));
                }
                Ok(Shape::Map {
                    h: h / 2,
                    w: w / 2,
                    c,
                })
            }
            (Layer::MaxPool2x2, Shape::Flat(_)) => Err(format!("pool after flat input {input}")),
            (Layer::Dense { weights, bias, .. }, Shape::Flat(n)) => {
                let &[inp, out] = weights.shape.as_slice() else {
                    return Err(format!("dense kernel rank {} (want 2)", weights.shape.len()));
                };
                if inp != n {
                    return Err(format!("dense expects {inp} inputs, got {n}"));
                }
                if bias.len() != out {
                    return Err(format!("dense bias {} for {out} units", bias.len()));
                }
                Ok(Shape::Flat(out))
            }
            (Layer::Dense { .. }, Shape::Map { .. }) => {
                Err(format!("dense over unflattened {input}"))
            }
            (Layer::Relu | Layer::Sigmoid, s) => Ok(s),
            (Layer::Flatten, s) => Ok(Shape::Flat(s.len())),
        }
    }
}
