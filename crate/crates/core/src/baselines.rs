//! Reference detectors: regularized-inverse MMSE and an exact enumeration
//! oracle (MAP decisions and true posterior marginals) for small systems.

use crate::comms::RealSystem;
use crate::error::{Error, Result};
use crate::numkit::Tensor;

/// Hypothesis-count guard for the enumeration oracle.
pub const MAX_HYPOTHESES: u64 = 1 << 20;

/// Exact per-entry posterior over the levels, with the joint MAP
/// configuration and per-entry MMSE moments.
#[derive(Debug, Clone)]
pub struct MarginalTable {
    /// `probs[n][i]` = posterior probability of level `i` at entry `n`.
    pub probs: Vec<Vec<f64>>,
    pub mmse_mean: Vec<f64>,
    pub mmse_var: Vec<f64>,
    /// Level indices of the jointly most likely configuration.
    pub map_indices: Vec<usize>,
}

/// Solve `(H^T H + reg I) x = H^T y` by Cholesky factorization.
///
/// The regularizer is the per-real-dimension noise-to-signal variance ratio:
/// with unit-energy complex symbols each real dimension carries variance 1/2,
/// so `reg = noise_var / (1/2)`.
pub fn mmse_detect(h: &Tensor, y: &[f64], noise_var: f64) -> Result<Vec<f64>> {
    if noise_var <= 0.0 {
        return Err(Error::Config("mmse needs noise_var > 0".into()));
    }
    mmse_detect_regularized(h, y, noise_var / 0.5)
}

/// MMSE solve with an explicit ridge term.
pub fn mmse_detect_regularized(h: &Tensor, y: &[f64], reg: f64) -> Result<Vec<f64>> {
    let (rows, cols) = (h.rows(), h.cols());
    if y.len() != rows {
        return Err(Error::Usage(format!(
            "mmse: y has {} entries, channel has {} rows",
            y.len(),
            rows
        )));
    }
    // normal matrix H^T H + reg I and right-hand side H^T y
    let mut a = vec![0.0; cols * cols];
    let mut b = vec![0.0; cols];
    for i in 0..cols {
        for j in i..cols {
            let mut acc = 0.0;
            for m in 0..rows {
                acc += h.get2(m, i) * h.get2(m, j);
            }
            a[i * cols + j] = acc;
            a[j * cols + i] = acc;
        }
        a[i * cols + i] += reg;
        let mut acc = 0.0;
        for m in 0..rows {
            acc += h.get2(m, i) * y[m];
        }
        b[i] = acc;
    }
    cholesky_solve(&mut a, &mut b, cols)?;
    Ok(b)
}

/// In-place Cholesky factorization and solve of a symmetric positive-definite
/// system. `a` is destroyed; `b` becomes the solution.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::Numerical {
                        what: format!("cholesky pivot {sum} at row {i}"),
                        iteration: 0,
                    });
                }
                a[i * n + j] = sum.sqrt();
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    // forward: L u = b
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= a[i * n + k] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
    // backward: L^T x = u
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in i + 1..n {
            sum -= a[k * n + i] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
    Ok(())
}

/// Exact posterior by brute-force enumeration of every level assignment, in
/// the log domain. The likelihood is `exp(-||y - Hx||^2 / (2 noise_var))`
/// times the level priors; the scalar AMP denoiser is the one-entry special
/// case of the same rule.
pub fn enumerate_posterior(
    h: &Tensor,
    y: &[f64],
    noise_var: f64,
    levels: &[f64],
    prior: &[f64],
) -> Result<MarginalTable> {
    let (rows, dim) = (h.rows(), h.cols());
    let k = levels.len();
    let hypotheses = (k as u64).checked_pow(dim as u32).unwrap_or(u64::MAX);
    if hypotheses > MAX_HYPOTHESES {
        return Err(Error::Capacity(format!(
            "{k}^{dim} hypotheses exceed the {MAX_HYPOTHESES} enumeration guard"
        )));
    }
    let log_prior: Vec<f64> = prior.iter().map(|p| p.ln()).collect();
    let inv = 1.0 / (2.0 * noise_var);

    let mut assignment = vec![0usize; dim];
    let mut log_joint = Vec::with_capacity(hypotheses as usize);
    let mut best = f64::NEG_INFINITY;
    let mut map_indices = vec![0usize; dim];
    for hyp in 0..hypotheses {
        let mut rem = hyp;
        for slot in assignment.iter_mut() {
            *slot = (rem % k as u64) as usize;
            rem /= k as u64;
        }
        let mut ll = 0.0;
        for m in 0..rows {
            let mut acc = 0.0;
            for n in 0..dim {
                acc += h.get2(m, n) * levels[assignment[n]];
            }
            let resid = y[m] - acc;
            ll -= resid * resid * inv;
        }
        for &idx in &assignment {
            ll += log_prior[idx];
        }
        if ll > best {
            best = ll;
            map_indices.copy_from_slice(&assignment);
        }
        log_joint.push(ll);
    }

    // marginalize per entry with max-subtraction
    let mut probs = vec![vec![0.0f64; k]; dim];
    for (hyp, ll) in log_joint.iter().enumerate() {
        let w = (ll - best).exp();
        let mut rem = hyp as u64;
        for row in probs.iter_mut() {
            row[(rem % k as u64) as usize] += w;
            rem /= k as u64;
        }
    }
    let mut mmse_mean = vec![0.0; dim];
    let mut mmse_var = vec![0.0; dim];
    for n in 0..dim {
        let norm: f64 = probs[n].iter().sum();
        let mut mean = 0.0;
        let mut second = 0.0;
        for i in 0..k {
            probs[n][i] /= norm;
            mean += levels[i] * probs[n][i];
            second += levels[i] * levels[i] * probs[n][i];
        }
        mmse_mean[n] = mean;
        mmse_var[n] = (second - mean * mean).max(0.0);
    }
    Ok(MarginalTable {
        probs,
        mmse_mean,
        mmse_var,
        map_indices,
    })
}

/// Convenience wrapper over a real-equivalent system.
pub fn enumerate_real(real: &RealSystem) -> Result<MarginalTable> {
    enumerate_posterior(
        &real.h,
        &real.y,
        real.noise_var,
        &real.levels,
        &real.level_prior,
    )
}

/// Symbol error rate over complex symbol indices.
pub fn ser(decisions: &[usize], truth: &[usize]) -> Result<f64> {
    if decisions.len() != truth.len() {
        return Err(Error::Usage(format!(
            "ser: {} decisions vs {} truth symbols",
            decisions.len(),
            truth.len()
        )));
    }
    if decisions.is_empty() {
        return Ok(0.0);
    }
    let errors = decisions.iter().zip(truth).filter(|(d, t)| d != t).count();
    Ok(errors as f64 / decisions.len() as f64)
}
