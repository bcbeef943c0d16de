//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use avtp_ids::ingest::Label;
use avtp_ids::metrics::Confusion;
use avtp_ids::nn::{random_batchnorm, random_conv, random_dense, Layer, Model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Activation as nested `[y][x][c]` for the map stage, or a flat vector.
#[derive(Clone, Debug)]
pub enum Act {
    Map(Vec<Vec<Vec<f64>>>),
    Flat(Vec<f64>),
}

/// Scalar-loop forward pass in f64, written directly from the layer
/// definitions. Int8 kernels are read dequantized.
pub fn reference_forward(model: &Model, x: &[f32]) -> f64 {
    let [h, w, c] = model.input_shape();
    let mut map = vec![vec![vec![0.0; c]; w]; h];
    for y in 0..h {
        for xx in 0..w {
            for ch in 0..c {
                map[y][xx][ch] = x[(y * w + xx) * c + ch] as f64;
            }
        }
    }
    let mut act = Act::Map(map);
    for layer in model.layers() {
        act = match (layer, act) {
            (Layer::Conv2d { weights, bias, .. }, Act::Map(m)) => {
                let k = weights.to_f32();
                let (kh, kw, cin, cout) = (
                    weights.shape[0],
                    weights.shape[1],
                    weights.shape[2],
                    weights.shape[3],
                );
                let (h, w) = (m.len(), m[0].len());
                let (ph, pw) = ((kh - 1) / 2, (kw - 1) / 2);
                let mut out = vec![vec![vec![0.0; cout]; w]; h];
                for oy in 0..h {
                    for ox in 0..w {
                        for co in 0..cout {
                            let mut s = bias[co] as f64;
                            for ky in 0..kh {
                                for kx in 0..kw {
                                    let iy = oy as isize + ky as isize - ph as isize;
                                    let ix = ox as isize + kx as isize - pw as isize;
                                    if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                        continue;
                                    }
                                    for ci in 0..cin {
                                        let kv = k[((ky * kw + kx) * cin + ci) * cout + co] as f64;
                                        s += m[iy as usize][ix as usize][ci] * kv;
                                    }
                                }
                            }
                            out[oy][ox][co] = s;
                        }
                    }
                }
                Act::Map(out)
            }
            (
                Layer::BatchNorm {
                    gamma,
                    beta,
                    mean,
                    var,
                    epsilon,
                },
                Act::Map(mut m),
            ) => {
                for row in &mut m {
                    for px in row {
                        for (ch, v) in px.iter_mut().enumerate() {
                            let d = (var[ch] as f64 + *epsilon as f64).sqrt();
                            *v = gamma[ch] as f64 * (*v - mean[ch] as f64) / d + beta[ch] as f64;
                        }
                    }
                }
                Act::Map(m)
            }
            (Layer::MaxPool2x2, Act::Map(m)) => {
                let (oh, ow, c) = (m.len() / 2, m[0].len() / 2, m[0][0].len());
                let mut out = vec![vec![vec![f64::NEG_INFINITY; c]; ow]; oh];
                for oy in 0..oh {
                    for ox in 0..ow {
                        for ch in 0..c {
                            for dy in 0..2 {
                                for dx in 0..2 {
                                    let v = m[2 * oy + dy][2 * ox + dx][ch];
                                    if v > out[oy][ox][ch] {
                                        out[oy][ox][ch] = v;
                                    }
                                }
                            }
                        }
                    }
                }
                Act::Map(out)
            }
            (Layer::Flatten, Act::Map(m)) => {
                Act::Flat(m.into_iter().flatten().flatten().collect())
            }
            (Layer::Dense { weights, bias, .. }, Act::Flat(v)) => {
                let k = weights.to_f32();
                let out_n = bias.len();
                let out = (0..out_n)
                    .map(|j| {
                        let mut s = bias[j] as f64;
                        for (i, xv) in v.iter().enumerate() {
                            s += xv * k[i * out_n + j] as f64;
                        }
                        s
                    })
                    .collect();
                Act::Flat(out)
            }
            (Layer::Relu, Act::Map(mut m)) => {
                for v in m.iter_mut().flatten().flatten() {
                    *v = v.max(0.0);
                }
                Act::Map(m)
            }
            (Layer::Relu, Act::Flat(mut v)) => {
                for e in &mut v {
                    *e = e.max(0.0);
                }
                Act::Flat(v)
            }
            (Layer::Sigmoid, Act::Flat(v)) => {
                Act::Flat(v.iter().map(|z| 1.0 / (1.0 + (-z).exp())).collect())
            }
            (l, _) => panic!("reference forward cannot apply {:?} here", l.kind()),
        };
    }
    match act {
        Act::Flat(v) if v.len() == 1 => v[0],
        _ => panic!("model did not end in one unit"),
    }
}

/// A random small CNN: one or two conv blocks with optional relu, batch
/// norm and pooling, then flatten, a hidden dense layer and a sigmoid unit.
pub fn random_small_model(seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = rng.gen_range(2..=9);
    let w = rng.gen_range(2..=9);
    let cin = rng.gen_range(1..=3);
    let mut c = cin;
    let (mut ch, mut cw) = (h, w);
    let mut layers = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let k = [1, 3, 5][rng.gen_range(0..3)];
        let cout = rng.gen_range(1..=4);
        layers.push(random_conv(&mut rng, k, c, cout).unwrap());
        c = cout;
        if rng.gen_bool(0.7) {
            layers.push(Layer::Relu);
        }
        if rng.gen_bool(0.5) {
            layers.push(random_batchnorm(&mut rng, c));
        }
        if ch >= 2 && cw >= 2 && rng.gen_bool(0.6) {
            layers.push(Layer::MaxPool2x2);
            ch /= 2;
            cw /= 2;
        }
    }
    layers.push(Layer::Flatten);
    let hidden = rng.gen_range(1..=6);
    layers.push(random_dense(&mut rng, ch * cw * c, hidden).unwrap());
    layers.push(Layer::Relu);
    layers.push(random_dense(&mut rng, hidden, 1).unwrap());
    layers.push(Layer::Sigmoid);
    Model::new(format!("small-{seed}"), [h, w, cin], layers).unwrap()
}

pub fn random_input(len: usize, rng: &mut impl Rng) -> Vec<f32> {
    (0..len).map(|_| rng.gen_range(0.0..=1.0)).collect()
}

/// Pairwise Mann-Whitney AUROC: P(score+ > score-) + ½ P(tie).
pub fn pairwise_auroc(labels: &[Label], scores: &[f64]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, li) in labels.iter().enumerate() {
        if *li != Label::Injected {
            continue;
        }
        for (j, lj) in labels.iter().enumerate() {
            if *lj != Label::Benign {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Per-sample tally.
pub fn brute_confusion(labels: &[Label], scores: &[f64], threshold: f64) -> Confusion {
    let mut c = Confusion::default();
    for (l, s) in labels.iter().zip(scores) {
        match (*l == Label::Injected, *s >= threshold) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    c
}

/// Labels and scores with deliberate ties (scores on a coarse grid) and
/// both classes present.
pub fn random_scored(n: usize, seed: u64) -> (Vec<Label>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.gen_bool(0.4) { Label::Injected } else { Label::Benign })
            .collect();
        let scores: Vec<f64> = labels
            .iter()
            .map(|l| {
                let shift = if *l == Label::Injected { 0.2 } else { 0.0 };
                ((rng.gen_range(0.0..0.8) + shift) * 20.0_f64).round() / 20.0
            })
            .collect();
        if labels.contains(&Label::Injected) && labels.contains(&Label::Benign) {
            return (labels, scores);
        }
    }
}
