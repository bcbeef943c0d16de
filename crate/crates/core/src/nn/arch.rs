//! The three detector topologies with seeded random weights.
//!
//! | name        | feature extractor                         | head             |
//! |-------------|-------------------------------------------|------------------|
//! | baseline    | conv32-relu-bn-pool, conv64-relu-bn-pool   | dense128, dense1 |
//! | student     | conv16-relu-bn-pool, conv16-relu-bn-pool   | dense32, dense1  |
//! | ultra-light | conv8-relu-pool                           | dense16, dense1  |
//!
//! All convolutions are 3×3. Weights are He-uniform; batch-norm statistics
//! are drawn near identity so that untrained models still exercise every
//! parameter.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layer::{Layer, BN_EPSILON};
use super::model::Model;
use super::tensor::Tensor;
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    Baseline,
    Student,
    UltraLight,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [
        Architecture::Baseline,
        Architecture::Student,
        Architecture::UltraLight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Baseline => "baseline",
            Architecture::Student => "student",
            Architecture::UltraLight => "ultra-light",
        }
    }

    /// `(filters, batch_norm)` per conv block and the hidden dense width.
    fn plan(self) -> (&'static [(usize, bool)], usize) {
        match self {
            Architecture::Baseline => (&[(32, true), (64, true)], 128),
            Architecture::Student => (&[(16, true), (16, true)], 32),
            Architecture::UltraLight => (&[(8, false)], 16),
        }
    }

    /// Builds the topology over a `[rows, cols, 1]` input.
    pub fn build(self, input_shape: [usize; 3], seed: u64) -> Result<Model, NnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (blocks, hidden) = self.plan();
        let [mut h, mut w, mut c] = input_shape;
        let mut layers = Vec::new();
        for &(filters, bn) in blocks {
            layers.push(random_conv(&mut rng, 3, c, filters)?);
            layers.push(Layer::Relu);
            if bn {
                layers.push(random_batchnorm(&mut rng, filters));
            }
            layers.push(Layer::MaxPool2x2);
            c = filters;
            h /= 2;
            w /= 2;
        }
        layers.push(Layer::Flatten);
        layers.push(random_dense(&mut rng, h * w * c, hidden)?);
        layers.push(Layer::Relu);
        layers.push(random_dense(&mut rng, hidden, 1)?);
        layers.push(Layer::Sigmoid);
        Model::new(self.name(), input_shape, layers)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = NnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "baseline" | "teacher" | "full" => Ok(Architecture::Baseline),
            "student" | "distilled" => Ok(Architecture::Student),
            "ultra-light" | "ultralight" => Ok(Architecture::UltraLight),
            other => Err(NnError::UnknownArchitecture(other.to_string())),
        }
    }
}

fn he_uniform(rng: &mut ChaCha8Rng, n: usize, fan_in: usize) -> Vec<f32> {
    let limit = (6.0 / fan_in as f32).sqrt();
    (0..n).map(|_| rng.gen_range(-limit..limit)).collect()
}

pub fn random_conv(
    rng: &mut ChaCha8Rng,
    k: usize,
    cin: usize,
    cout: usize,
) -> Result<Layer, NnError> {
    let weights = Tensor::dense(
        vec![k, k, cin, cout],
        he_uniform(rng, k * k * cin * cout, k * k * cin),
    )?;
    let bias = (0..cout).map(|_| rng.gen_range(-0.05..0.05)).collect();
    Ok(Layer::Conv2d {
        weights,
        bias,
        input_quant: None,
    })
}

pub fn random_dense(rng: &mut ChaCha8Rng, inp: usize, out: usize) -> Result<Layer, NnError> {
    let weights = Tensor::dense(vec![inp, out], he_uniform(rng, inp * out, inp))?;
    let bias = (0..out).map(|_| rng.gen_range(-0.05..0.05)).collect();
    Ok(Layer::Dense {
        weights,
        bias,
        input_quant: None,
    })
}

pub fn random_batchnorm(rng: &mut ChaCha8Rng, c: usize) -> Layer {
    let mut draw = |lo: f32, hi: f32| (0..c).map(|_| rng.gen_range(lo..hi)).collect::<Vec<_>>();
    Layer::BatchNorm {
        gamma: draw(0.8, 1.2),
        beta: draw(-0.1, 0.1),
        mean: draw(-0.1, 0.1),
        var: draw(0.5, 1.5),
        epsilon: BN_EPSILON,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Shape, DEFAULT_INPUT};

    #[test]
    fn default_shape_chain() {
        let m = Architecture::Baseline.build(DEFAULT_INPUT, 1).unwrap();
        let s = m.shapes();
        assert_eq!(s[0], Shape::Map { h: 44, w: 116, c: 1 });
        assert!(s.contains(&Shape::Map { h: 22, w: 58, c: 32 }));
        assert!(s.contains(&Shape::Map { h: 11, w: 29, c: 64 }));
        assert!(s.contains(&Shape::Flat(11 * 29 * 64)));
        assert_eq!(*s.last().unwrap(), Shape::Flat(1));
    }

    #[test]
    fn sizes_are_ordered() {
        let p: Vec<usize> = Architecture::ALL
            .iter()
            .map(|a| a.build(DEFAULT_INPUT, 0).unwrap().parameter_count())
            .collect();
        assert!(p[0] > p[1] && p[1] > p[2], "{p:?}");
    }

    #[test]
    fn parse_names() {
        for a in Architecture::ALL {
            assert_eq!(a.name().parse::<Architecture>().unwrap(), a);
        }
        assert_eq!("ultra_light".parse::<Architecture>().unwrap(), Architecture::UltraLight);
        assert!("resnet".parse::<Architecture>().is_err());
    }

    #[test]
    fn seeded() {
        let a = Architecture::Student.build(DEFAULT_INPUT, 5).unwrap();
        assert_eq!(a, Architecture::Student.build(DEFAULT_INPUT, 5).unwrap());
        assert_ne!(a, Architecture::Student.build(DEFAULT_INPUT, 6).unwrap());
    }
}
