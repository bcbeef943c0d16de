use std::borrow::Cow;

use super::NnError;

/// Smallest scale handed out for a degenerate (constant) range.
pub const SCALE_FLOOR: f32 = 1e-8;

/// Affine map `real = scale · (q − zero_point)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantParams {
    pub scale: f32,
    pub zero_point: i32,
}

impl QuantParams {
    pub fn new(scale: f32, zero_point: i32) -> Result<Self, NnError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(NnError::BadQuantParams(format!("scale {scale}")));
        }
        if !(-128..=127).contains(&zero_point) {
            return Err(NnError::BadQuantParams(format!("zero point {zero_point}")));
        }
        Ok(QuantParams { scale, zero_point })
    }

    /// Symmetric range `[-max_abs, max_abs]`, zero point 0.
    pub fn symmetric(max_abs: f32) -> Self {
        let scale = (max_abs / 127.0).max(SCALE_FLOOR);
        QuantParams {
            scale,
            zero_point: 0,
        }
    }

    /// Range `[min, max]` mapped onto `[-128, 127]` with `min → -128`.
    ///
    /// The range is first widened to contain zero, which keeps the zero
    /// point inside the int8 range and makes zero padding exact.
    pub fn affine(min: f32, max: f32) -> Self {
        let (min, max) = (min.min(0.0), max.max(0.0));
        let scale = ((max - min) / 255.0).max(SCALE_FLOOR);
        let zero_point = (-128.0 - (min / scale).round()).clamp(-128.0, 127.0) as i32;
        QuantParams { scale, zero_point }
    }

    #[inline]
    pub fn quantize(&self, x: f32) -> i8 {
        ((x / self.scale).round() + self.zero_point as f32).clamp(-128.0, 127.0) as i8
    }

    #[inline]
    pub fn dequantize(&self, q: i8) -> f32 {
        self.scale * (q as i32 - self.zero_point) as f32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    DenseF32(Vec<f32>),
    /// Dense layout with explicit zeros left behind by pruning.
    SparseF32(Vec<f32>),
    Int8 { values: Vec<i8>, params: QuantParams },
}

impl Storage {
    pub fn code(&self) -> u8 {
        match self {
            Storage::DenseF32(_) => 0,
            Storage::Int8 { .. } => 1,
            Storage::SparseF32(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Storage::DenseF32(v) | Storage::SparseF32(v) => v.len(),
            Storage::Int8 { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub storage: Storage,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, storage: Storage) -> Result<Self, NnError> {
        let n: usize = shape.iter().product();
        if n != storage.len() {
            return Err(NnError::CorruptTensor(format!(
                "shape {shape:?} holds {n} elements, storage has {}",
                storage.len()
            )));
        }
        Ok(Tensor { shape, storage })
    }

    pub fn dense(shape: Vec<usize>, values: Vec<f32>) -> Result<Self, NnError> {
        Self::new(shape, Storage::DenseF32(values))
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn quant_params(&self) -> Option<QuantParams> {
        match self.storage {
            Storage::Int8 { params, .. } => Some(params),
            _ => None,
        }
    }

    /// Real values; int8 storage is dequantized into a fresh buffer.
    pub fn to_f32(&self) -> Cow<'_, [f32]> {
        match &self.storage {
            Storage::DenseF32(v) | Storage::SparseF32(v) => Cow::Borrowed(v),
            Storage::Int8 { values, params } => {
                Cow::Owned(values.iter().map(|&q| params.dequantize(q)).collect())
            }
        }
    }

    /// Elements whose real value is exactly zero.
    pub fn zero_count(&self) -> usize {
        match &self.storage {
            Storage::DenseF32(v) | Storage::SparseF32(v) => v.iter().filter(|x| **x == 0.0).count(),
            Storage::Int8 { values, params } => values
                .iter()
                .filter(|&&q| q as i32 == params.zero_point)
                .count(),
        }
    }

    pub fn with_storage_kind(&self, sparse: bool) -> Tensor {
        let v = self.to_f32().into_owned();
        Tensor {
            shape: self.shape.clone(),
            storage: if sparse {
                Storage::SparseF32(v)
            } else {
                Storage::DenseF32(v)
            },
        }
    }
}

/// Quantizes a float tensor to int8.
///
/// Symmetric mode uses `scale = max|x| / 127` and zero point 0; affine mode
/// maps `[min, max]` onto `[-128, 127]`. A constant tensor gets the
/// [`SCALE_FLOOR`] scale instead of an error.
pub fn quantize_tensor(t: &Tensor, symmetric: bool) -> Result<Tensor, NnError> {
    let values = t.to_f32();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(NnError::CorruptTensor(format!("non-finite value {bad}")));
    }
    let params = if symmetric {
        let max_abs = values.iter().fold(0f32, |m, v| m.max(v.abs()));
        QuantParams::symmetric(max_abs)
    } else {
        let (min, max) = values
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if values.is_empty() {
            QuantParams::affine(0.0, 0.0)
        } else {
            QuantParams::affine(min, max)
        }
    };
    let q = values.iter().map(|&v| params.quantize(v)).collect();
    Tensor::new(t.shape.clone(), Storage::Int8 { values: q, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_get_floor_scale() {
        let t = Tensor::dense(vec![4], vec![0.0; 4]).unwrap();
        for sym in [true, false] {
            let q = quantize_tensor(&t, sym).unwrap();
            let p = q.quant_params().unwrap();
            assert_eq!(p.scale, SCALE_FLOOR);
            let Storage::Int8 { values, .. } = &q.storage else { panic!() };
            assert!(values.iter().all(|&v| v as i32 == p.zero_point));
            assert!(q.to_f32().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn symmetric_unit_range() {
        let t = Tensor::dense(vec![3], vec![-1.0, 0.0, 1.0]).unwrap();
        let q = quantize_tensor(&t, true).unwrap();
        let Storage::Int8 { values, params } = &q.storage else { panic!() };
        assert_eq!(params.scale, 1.0 / 127.0);
        assert_eq!(params.zero_point, 0);
        assert_eq!(values, &vec![-127, 0, 127]);
    }

    #[test]
    fn affine_min_maps_to_bottom() {
        let t = Tensor::dense(vec![3], vec![-0.5, 0.25, 2.0]).unwrap();
        let q = quantize_tensor(&t, false).unwrap();
        let Storage::Int8 { values, params } = &q.storage else { panic!() };
        assert_eq!(values[0], -128);
        assert_eq!(values[2], 127);
        for (x, d) in [-0.5f32, 0.25, 2.0].iter().zip(q.to_f32().iter()) {
            assert!((x - d).abs() <= params.scale / 2.0 + 1e-7);
        }
    }

    #[test]
    fn rejects_bad_params_and_shapes() {
        assert!(QuantParams::new(0.0, 0).is_err());
        assert!(QuantParams::new(0.1, 128).is_err());
        assert!(QuantParams::new(0.1, -128).is_ok());
        assert!(Tensor::dense(vec![2, 2], vec![0.0; 3]).is_err());
        let t = Tensor::dense(vec![1], vec![f32::NAN]).unwrap();
        assert!(quantize_tensor(&t, true).is_err());
    }
}
