//! Scalar kernels. Activations are row-major `h × w × c`.

use super::tensor::QuantParams;

/// Largest value strictly below 1.0 in f32.
const ONE_BELOW: f32 = 1.0 - f32::EPSILON / 2.0;

/// Reusable activation buffers for one inference thread.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    pub(crate) a: Vec<f32>,
    pub(crate) b: Vec<f32>,
    pub(crate) q: Vec<i16>,
    pub(crate) acc: Vec<i32>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }
}

pub(crate) struct ConvGeom {
    pub h: usize,
    pub w: usize,
    pub cin: usize,
    pub kh: usize,
    pub kw: usize,
    pub cout: usize,
}

impl ConvGeom {
    /// Visits every in-bounds kernel tap under "same" padding as runs of
    /// horizontally adjacent pixels: `f(first_out_pixel, first_in_pixel,
    /// run_len, tap)`. Each output pixel sees its taps in kernel order.
    #[inline]
    fn for_each_run(&self, mut f: impl FnMut(usize, usize, usize, usize)) {
        let (ph, pw) = ((self.kh - 1) / 2, (self.kw - 1) / 2);
        for oy in 0..self.h {
            for ky in 0..self.kh {
                let Some(iy) = (oy + ky).checked_sub(ph).filter(|&y| y < self.h) else {
                    continue;
                };
                for kx in 0..self.kw {
                    // ix = ox + kx - pw must land in [0, w)
                    let lo = pw.saturating_sub(kx);
                    let hi = (self.w + pw).saturating_sub(kx).min(self.w);
                    if lo >= hi {
                        continue;
                    }
                    f(
                        oy * self.w + lo,
                        iy * self.w + lo + kx - pw,
                        hi - lo,
                        ky * self.kw + kx,
                    );
                }
            }
        }
    }
}

pub(crate) fn conv_f32(x: &[f32], g: &ConvGeom, kernel: &[f32], bias: &[f32], out: &mut [f32]) {
    let (cin, cout) = (g.cin, g.cout);
    for o in out.chunks_exact_mut(cout) {
        o.copy_from_slice(bias);
    }
    g.for_each_run(|opix, ipix, n, tap| {
        let kt = &kernel[tap * cin * cout..(tap + 1) * cin * cout];
        let os = out[opix * cout..(opix + n) * cout].chunks_exact_mut(cout);
        let xs = x[ipix * cin..(ipix + n) * cin].chunks_exact(cin);
        for (o, xp) in os.zip(xs) {
            mac_f32(o, xp, kt);
        }
    });
}

/// `o[j] += Σ_i xp[i] · kt[i·cout + j]`, summed in `i` order, with the
/// partial sums held in blocks of 16 outputs.
#[inline]
fn mac_f32(o: &mut [f32], xp: &[f32], kt: &[f32]) {
    if let [xv] = *xp {
        if xv != 0.0 {
            for (ov, &kv) in o.iter_mut().zip(kt) {
                *ov += xv * kv;
            }
        }
        return;
    }
    let cout = o.len();
    let mut c = 0;
    while c + 16 <= cout {
        mac_f32_block::<16>(&mut o[c..c + 16], xp, kt, cout, c);
        c += 16;
    }
    if c + 8 <= cout {
        mac_f32_block::<8>(&mut o[c..c + 8], xp, kt, cout, c);
        c += 8;
    }
    while c + 4 <= cout {
        mac_f32_block::<4>(&mut o[c..c + 4], xp, kt, cout, c);
        c += 4;
    }
    while c < cout {
        mac_f32_block::<1>(&mut o[c..c + 1], xp, kt, cout, c);
        c += 1;
    }
}

#[inline(always)]
fn mac_f32_block<const N: usize>(o: &mut [f32], xp: &[f32], kt: &[f32], cout: usize, c: usize) {
    let mut acc: [f32; N] = o.try_into().unwrap();
    for (&xv, kr) in xp.iter().zip(kt.chunks_exact(cout)) {
        if xv == 0.0 {
            continue;
        }
        let kr: &[f32; N] = kr[c..c + N].try_into().unwrap();
        for j in 0..N {
            acc[j] += xv * kr[j];
        }
    }
    o.copy_from_slice(&acc);
}

#[inline]
fn mac_i16(a: &mut [i32], xp: &[i16], kt: &[i16]) {
    if let [xv] = *xp {
        if xv != 0 {
            for (av, &kv) in a.iter_mut().zip(kt) {
                *av += xv as i32 * kv as i32;
            }
        }
        return;
    }
    let cout = a.len();
    let mut c = 0;
    while c + 16 <= cout {
        mac_i16_block::<16>(&mut a[c..c + 16], xp, kt, cout, c);
        c += 16;
    }
    if c + 8 <= cout {
        mac_i16_block::<8>(&mut a[c..c + 8], xp, kt, cout, c);
        c += 8;
    }
    while c + 4 <= cout {
        mac_i16_block::<4>(&mut a[c..c + 4], xp, kt, cout, c);
        c += 4;
    }
    while c < cout {
        mac_i16_block::<1>(&mut a[c..c + 1], xp, kt, cout, c);
        c += 1;
    }
}

#[inline(always)]
fn mac_i16_block<const N: usize>(a: &mut [i32], xp: &[i16], kt: &[i16], cout: usize, c: usize) {
    let mut acc: [i32; N] = a.try_into().unwrap();
    for (&xv, kr) in xp.iter().zip(kt.chunks_exact(cout)) {
        if xv == 0 {
            continue;
        }
        let xv = xv as i32;
        let kr: &[i16; N] = kr[c..c + N].try_into().unwrap();
        for j in 0..N {
            acc[j] += xv * kr[j] as i32;
        }
    }
    a.copy_from_slice(&acc);
}

/// Quantizes `x` with `params` and stores `q − zero_point`, which always
/// fits in an i16.
pub(crate) fn quantize_centered(x: &[f32], params: QuantParams, out: &mut Vec<i16>) {
    out.clear();
    out.extend(x.iter().map(|&v| (params.quantize(v) as i32 - params.zero_point) as i16));
}

/// Widens an int8 kernel to `q − zero_point`.
pub(crate) fn center_kernel(kernel: &[i8], zero_point: i32, out: &mut Vec<i16>) {
    out.clear();
    out.extend(kernel.iter().map(|&k| (k as i32 - zero_point) as i16));
}

pub(crate) fn conv_i8(
    xq: &[i16],
    g: &ConvGeom,
    kernel: &[i16],
    bias: &[f32],
    scale: f32,
    acc: &mut Vec<i32>,
    out: &mut [f32],
) {
    let (cin, cout) = (g.cin, g.cout);
    acc.clear();
    acc.resize(out.len(), 0);
    g.for_each_run(|opix, ipix, n, tap| {
        let kt = &kernel[tap * cin * cout..(tap + 1) * cin * cout];
        let accs = acc[opix * cout..(opix + n) * cout].chunks_exact_mut(cout);
        let xs = xq[ipix * cin..(ipix + n) * cin].chunks_exact(cin);
        for (a, xp) in accs.zip(xs) {
            mac_i16(a, xp, kt);
        }
    });
    for (o, (a, b)) in out
        .chunks_exact_mut(cout)
        .zip(acc.chunks_exact(cout))
        .flat_map(|(o, a)| o.iter_mut().zip(a.iter().zip(bias)))
    {
        *o = *a as f32 * scale + *b;
    }
}

pub(crate) fn dense_f32(x: &[f32], kernel: &[f32], bias: &[f32], out: &mut [f32]) {
    let n_out = bias.len();
    out.copy_from_slice(bias);
    for (&xv, row) in x.iter().zip(kernel.chunks_exact(n_out)) {
        if xv == 0.0 {
            continue;
        }
        for (ov, &kv) in out.iter_mut().zip(row) {
            *ov += xv * kv;
        }
    }
}

pub(crate) fn dense_i8(
    xq: &[i16],
    kernel: &[i16],
    bias: &[f32],
    scale: f32,
    acc: &mut Vec<i32>,
    out: &mut [f32],
) {
    let n_out = bias.len();
    acc.clear();
    acc.resize(n_out, 0);
    for (&xv, row) in xq.iter().zip(kernel.chunks_exact(n_out)) {
        if xv == 0 {
            continue;
        }
        let xv = xv as i32;
        for (av, &kv) in acc.iter_mut().zip(row) {
            *av += xv * kv as i32;
        }
    }
    for ((o, &a), &b) in out.iter_mut().zip(acc.iter()).zip(bias) {
        *o = a as f32 * scale + b;
    }
}

pub(crate) fn batchnorm(
    x: &mut [f32],
    gamma: &[f32],
    beta: &[f32],
    mean: &[f32],
    var: &[f32],
    epsilon: f32,
) {
    let c = gamma.len();
    let inv_std: Vec<f32> = var.iter().map(|v| 1.0 / (v + epsilon).sqrt()).collect();
    for px in x.chunks_exact_mut(c) {
        for (k, v) in px.iter_mut().enumerate() {
            *v = gamma[k] * (*v - mean[k]) * inv_std[k] + beta[k];
        }
    }
}

pub(crate) fn maxpool2x2(x: &[f32], h: usize, w: usize, c: usize, out: &mut [f32]) {
    let (oh, ow) = (h / 2, w / 2);
    for oy in 0..oh {
        for ox in 0..ow {
            let o = &mut out[(oy * ow + ox) * c..][..c];
            let p = |y: usize, x_: usize| &x[(y * w + x_) * c..][..c];
            let (a, b, d, e) = (
                p(2 * oy, 2 * ox),
                p(2 * oy, 2 * ox + 1),
                p(2 * oy + 1, 2 * ox),
                p(2 * oy + 1, 2 * ox + 1),
            );
            for k in 0..c {
                o[k] = a[k].max(b[k]).max(d[k]).max(e[k]);
            }
        }
    }
}

pub(crate) fn relu(x: &mut [f32]) {
    for v in x {
        *v = v.max(0.0);
    }
}

/// Logistic function, kept strictly inside `(0, 1)`.
pub fn sigmoid(z: f32) -> f32 {
    let s = 1.0 / (1.0 + (-(z as f64)).exp());
    (s as f32).clamp(f32::MIN_POSITIVE, ONE_BELOW)
}

pub(crate) fn sigmoid_inplace(x: &mut [f32]) {
    for v in x {
        *v = sigmoid(*v);
    }
}
