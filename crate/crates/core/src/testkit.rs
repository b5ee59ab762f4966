//! Reference implementations and helpers for the test suites.
//!
//! Everything here is written as a straightforward, separate transcription of
//! the definitions, independent of the library's production code paths, so
//! the tests can compare the two routes. Not intended for production use.

use crate::comms::MimoSample;
use crate::numkit::Tensor;

/// Output of one reference AMP linear pass.
pub struct AmpStepReference {
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    pub sigma: Vec<f64>,
    pub r: Vec<f64>,
}

/// Direct, unoptimized transcription of the four linear-step updates.
pub fn amp_step_transcription(
    h: &Tensor,
    y: &[f64],
    sigma2: f64,
    x_hat: &[f64],
    v_hat: &[f64],
    z_prev: &[f64],
    v_prev: &[f64],
) -> AmpStepReference {
    let rx = h.rows();
    let tx = h.cols();

    let mut v = vec![0.0; rx];
    for m in 0..rx {
        for n in 0..tx {
            v[m] += h.get2(m, n) * h.get2(m, n) * v_hat[n];
        }
    }

    let mut z = vec![0.0; rx];
    for m in 0..rx {
        let mut acc = 0.0;
        for n in 0..tx {
            acc += h.get2(m, n) * x_hat[n];
        }
        z[m] = acc - v[m] * (y[m] - z_prev[m]) / (sigma2 + v_prev[m]);
    }

    let mut sigma = vec![0.0; tx];
    for n in 0..tx {
        let mut acc = 0.0;
        for m in 0..rx {
            acc += h.get2(m, n) * h.get2(m, n) / (sigma2 + v[m]);
        }
        sigma[n] = 1.0 / acc;
    }

    let mut r = vec![0.0; tx];
    for n in 0..tx {
        let mut acc = 0.0;
        for m in 0..rx {
            acc += h.get2(m, n) * (y[m] - z[m]) / (sigma2 + v[m]);
        }
        r[n] = x_hat[n] + sigma[n] * acc;
    }

    AmpStepReference { v, z, sigma, r }
}

/// Naive exponential-weight posterior moments. Returns `None` when every
/// weight underflows to zero (the regime the log-domain path exists for).
pub fn naive_denoise(r: f64, sigma: f64, levels: &[f64], prior: &[f64]) -> Option<(f64, f64)> {
    let mut norm = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (i, &s) in levels.iter().enumerate() {
        let w = (-(r - s) * (r - s) / (2.0 * sigma)).exp() * prior[i];
        norm += w;
        mean += s * w;
        second += s * s * w;
    }
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let m = mean / norm;
    Some((m, second / norm - m * m))
}

/// Apply a user permutation to a sample: column `perm[k]` of the original
/// channel becomes column `k`, and the symbols move with it. The received
/// vector is unchanged.
pub fn permute_users(sample: &MimoSample, perm: &[usize]) -> MimoSample {
    let (m, n) = (sample.m, sample.n);
    assert_eq!(perm.len(), n);
    let mut h = sample.h.clone();
    for r in 0..m {
        for (to, &from) in perm.iter().enumerate() {
            h[r * n + to] = sample.h[r * n + from];
        }
    }
    let x = perm.iter().map(|&from| sample.x[from]).collect();
    let indices = perm.iter().map(|&from| sample.indices[from]).collect();
    MimoSample {
        h,
        m,
        n,
        x,
        y: sample.y.clone(),
        indices,
        sigma2: sample.sigma2,
    }
}

/// Hand evaluation of an affine chain with ReLU between layers (identity on
/// the last layer), used as the MLP oracle.
pub fn reference_mlp(layers: &[(Tensor, Tensor)], input: &[f64]) -> Vec<f64> {
    let mut x = input.to_vec();
    for (li, (w, b)) in layers.iter().enumerate() {
        let mut y = vec![0.0; w.rows()];
        for (o, yo) in y.iter_mut().enumerate() {
            let mut acc = b.data()[o];
            for (i, &xi) in x.iter().enumerate() {
                acc += w.get2(o, i) * xi;
            }
            *yo = acc;
        }
        if li + 1 < layers.len() {
            for v in y.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        x = y;
    }
    x
}

/// Hand evaluation of the three-gate GRU equations:
/// `z = sig(Wz x + Uz h + bz)`, `r = sig(Wr x + Ur h + br)`,
/// `c = tanh(Wh x + Uh (r .* h) + bh)`, `h' = z .* h + (1 - z) .* c`.
pub fn reference_gru(p: &crate::numkit::GruParams, h_prev: &[f64], x: &[f64]) -> Vec<f64> {
    let h = p.hidden_dim();
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let mat = |w: &Tensor, v: &[f64], i: usize| -> f64 {
        let mut acc = 0.0;
        for (j, &vj) in v.iter().enumerate() {
            acc += w.get2(i, j) * vj;
        }
        acc
    };
    let mut reset_gated = vec![0.0; h];
    for (j, slot) in reset_gated.iter_mut().enumerate() {
        let rj = sig(mat(&p.wr, x, j) + mat(&p.ur, h_prev, j) + p.br.data()[j]);
        *slot = rj * h_prev[j];
    }
    let mut out = vec![0.0; h];
    for i in 0..h {
        let z = sig(mat(&p.wz, x, i) + mat(&p.uz, h_prev, i) + p.bz.data()[i]);
        let cand = (mat(&p.wh, x, i) + mat(&p.uh, &reset_gated, i) + p.bh.data()[i]).tanh();
        out[i] = z * h_prev[i] + (1.0 - z) * cand;
    }
    out
}

/// Central finite difference of `f` at `x0`, step `1e-5`.
pub fn central_difference(mut f: impl FnMut(f64) -> f64, x0: f64) -> f64 {
    let h = 1e-5;
    (f(x0 + h) - f(x0 - h)) / (2.0 * h)
}

/// Relative gradient error with an absolute floor so near-zero pairs compare
/// sanely: `|a - b| / max(|a|, |b|, 1e-6)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}
