//! Iterative AMP detection: linear/Onsager step, equivalent AWGN observation,
//! and the discrete-prior posterior denoiser, all over the real-equivalent
//! system.
//!
//! Per iteration, with `h` the `2M x 2N` real channel and `sigma2` the noise
//! variance per real dimension:
//!
//! ```text
//! V_m = sum_n h_mn^2 vhat_n
//! Z_m = sum_n h_mn xhat_n - V_m (y_m - Z_m_prev) / (sigma2 + V_m_prev)
//! S_n = [ sum_m h_mn^2 / (sigma2 + V_m) ]^-1
//! r_n = xhat_n + S_n sum_m h_mn (y_m - Z_m) / (sigma2 + V_m)
//! ```
//!
//! followed by the posterior mean/variance of each entry under the scalar
//! model `r = x + w`, `w ~ N(0, S)`, with the discrete level prior.

use crate::comms::RealSystem;
use crate::error::{Error, Result};
use crate::numkit::Tensor;

/// Denominators and variances are floored here before any division. The
/// floor only engages in degenerate cases (exactly zero variance inputs).
pub const VAR_FLOOR: f64 = 1e-13;

/// Initial posterior variance choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitVariance {
    /// `N/M` per entry.
    #[default]
    RatioNOverM,
    /// Prior variance of the real alphabet.
    PriorVariance,
}

#[derive(Debug, Clone)]
pub struct AmpOptions {
    /// Iteration count `T`.
    pub iterations: usize,
    pub init_variance: InitVariance,
}

impl Default for AmpOptions {
    fn default() -> Self {
        AmpOptions {
            iterations: 10,
            init_variance: InitVariance::default(),
        }
    }
}

/// Per-iteration detector state.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpState {
    /// Posterior means, length `2N`.
    pub x_hat: Vec<f64>,
    /// Posterior variances, length `2N`.
    pub v_hat: Vec<f64>,
    /// Onsager-corrected residual means `Z_m` from the last linear step.
    pub z: Vec<f64>,
    /// Residual variances `V_m` from the last linear step.
    pub v: Vec<f64>,
    /// 1-based iteration index of the next linear step.
    pub t: usize,
}

/// Equivalent AWGN observation: `r_n = x_n + w_n`, `Var(w_n) = sigma[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivObservation {
    pub r: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Initialization: `xhat = 0`, `vhat = N/M` (or the prior variance), `Z = y`.
///
/// `V` starts at 1; its first use multiplies `y - Z = 0`, so any positive
/// value yields the same first iteration.
pub fn amp_init(real: &RealSystem, opts: &AmpOptions) -> AmpState {
    let (rx, tx) = (real.rx_dim(), real.tx_dim());
    let v0 = match opts.init_variance {
        InitVariance::RatioNOverM => tx as f64 / rx as f64,
        InitVariance::PriorVariance => real
            .levels
            .iter()
            .zip(&real.level_prior)
            .map(|(s, p)| s * s * p)
            .sum(),
    };
    AmpState {
        x_hat: vec![0.0; tx],
        v_hat: vec![v0; tx],
        z: real.y.clone(),
        v: vec![1.0; rx],
        t: 1,
    }
}

/// One linear/Onsager pass. Updates `state.z`, `state.v`, advances `t`, and
/// returns the equivalent AWGN observation for the denoiser.
pub fn amp_linear_step(
    state: &mut AmpState,
    h: &Tensor,
    y: &[f64],
    sigma2: f64,
) -> Result<EquivObservation> {
    let h2 = h.squared();
    amp_linear_step_with(state, h, &h2, y, sigma2)
}

/// Same as [`amp_linear_step`] with the elementwise-squared channel supplied
/// by the caller (it is iteration-invariant).
pub fn amp_linear_step_with(
    state: &mut AmpState,
    h: &Tensor,
    h2: &Tensor,
    y: &[f64],
    sigma2: f64,
) -> Result<EquivObservation> {
    let (rx, tx) = (h.rows(), h.cols());
    let iteration = state.t;

    // V_m = sum_n h_mn^2 vhat_n ; Z_m = (H xhat)_m - Onsager correction
    let mut v_new = vec![0.0; rx];
    let mut z_new = vec![0.0; rx];
    for m in 0..rx {
        let h2_row = h2.row(m);
        let h_row = h.row(m);
        let mut v_acc = 0.0;
        let mut z_acc = 0.0;
        for n in 0..tx {
            v_acc += h2_row[n] * state.v_hat[n];
            z_acc += h_row[n] * state.x_hat[n];
        }
        let denom_prev = (sigma2 + state.v[m]).max(VAR_FLOOR);
        v_new[m] = v_acc;
        z_new[m] = z_acc - v_acc * (y[m] - state.z[m]) / denom_prev;
    }

    // S_n and r_n from the updated residuals
    let mut scaled = vec![0.0; rx]; // (y - Z) / (sigma2 + V)
    let mut inv_denom = vec![0.0; rx];
    for m in 0..rx {
        let denom = (sigma2 + v_new[m]).max(VAR_FLOOR);
        inv_denom[m] = 1.0 / denom;
        scaled[m] = (y[m] - z_new[m]) * inv_denom[m];
    }
    let mut r = vec![0.0; tx];
    let mut sigma = vec![0.0; tx];
    for n in 0..tx {
        let mut gain = 0.0;
        let mut corr = 0.0;
        for m in 0..rx {
            gain += h2.get2(m, n) * inv_denom[m];
            corr += h.get2(m, n) * scaled[m];
        }
        let s = (1.0 / gain.max(VAR_FLOOR)).max(VAR_FLOOR);
        sigma[n] = s;
        r[n] = state.x_hat[n] + s * corr;
    }

    for value in v_new.iter().chain(&z_new).chain(&r).chain(&sigma) {
        if !value.is_finite() {
            return Err(Error::Numerical {
                what: "non-finite value in AMP linear step".into(),
                iteration,
            });
        }
    }

    state.z = z_new;
    state.v = v_new;
    state.t += 1;
    Ok(EquivObservation { r, sigma })
}

/// Posterior categorical over the levels for a single equivalent observation,
/// computed in the log domain with max subtraction.
pub fn denoise_weights_into(r: f64, sigma: f64, levels: &[f64], prior: &[f64], out: &mut [f64]) {
    let inv = 1.0 / (2.0 * sigma.max(VAR_FLOOR));
    let mut max_log = f64::NEG_INFINITY;
    for (i, &s) in levels.iter().enumerate() {
        let d = r - s;
        let lw = -d * d * inv + prior[i].ln();
        out[i] = lw;
        if lw > max_log {
            max_log = lw;
        }
    }
    let mut sum = 0.0;
    for w in out.iter_mut() {
        *w = (*w - max_log).exp();
        sum += *w;
    }
    for w in out.iter_mut() {
        *w /= sum;
    }
}

/// Posterior mean and variance of one entry.
pub fn denoise_entry(r: f64, sigma: f64, levels: &[f64], prior: &[f64]) -> (f64, f64) {
    debug_assert!(levels.len() <= 16);
    let mut w = [0.0f64; 16];
    let w = &mut w[..levels.len()];
    denoise_weights_into(r, sigma, levels, prior, w);
    let mut mean = 0.0;
    let mut second = 0.0;
    for (i, &s) in levels.iter().enumerate() {
        mean += s * w[i];
        second += s * s * w[i];
    }
    (mean, (second - mean * mean).max(0.0))
}

/// Posterior means/variances for a whole observation vector.
pub fn denoise(obs: &EquivObservation, levels: &[f64], prior: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut x_hat = vec![0.0; obs.r.len()];
    let mut v_hat = vec![0.0; obs.r.len()];
    for n in 0..obs.r.len() {
        let (m, v) = denoise_entry(obs.r[n], obs.sigma[n], levels, prior);
        x_hat[n] = m;
        v_hat[n] = v;
    }
    (x_hat, v_hat)
}

/// Outputs of one AMP iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpLayer {
    pub r: Vec<f64>,
    pub sigma: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub v_hat: Vec<f64>,
}

/// Full trajectory of a detection run.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpRun {
    pub layers: Vec<AmpLayer>,
}

impl AmpRun {
    pub fn x_hat(&self) -> &[f64] {
        &self.layers.last().expect("at least one iteration").x_hat
    }

    /// Trajectory as named tensors ("layer3.r", "layer3.x_hat", ...), for
    /// file dumps while debugging.
    pub fn to_container(&self) -> crate::container::Container {
        let mut c = crate::container::Container::new();
        c.push_scalar("layers", self.layers.len() as f64);
        for (t, layer) in self.layers.iter().enumerate() {
            c.push(&format!("layer{t}.r"), Tensor::vector(&layer.r));
            c.push(&format!("layer{t}.sigma"), Tensor::vector(&layer.sigma));
            c.push(&format!("layer{t}.x_hat"), Tensor::vector(&layer.x_hat));
            c.push(&format!("layer{t}.v_hat"), Tensor::vector(&layer.v_hat));
        }
        c
    }
}

fn run_iterations(real: &RealSystem, opts: &AmpOptions) -> Result<(Vec<AmpLayer>, Option<usize>)> {
    if opts.iterations == 0 {
        return Err(Error::Config("AMP needs at least one iteration".into()));
    }
    let h2 = real.h.squared();
    let mut state = amp_init(real, opts);
    let mut layers = Vec::with_capacity(opts.iterations);
    for _ in 0..opts.iterations {
        let iteration = state.t;
        let obs = match amp_linear_step_with(&mut state, &real.h, &h2, &real.y, real.noise_var) {
            Ok(obs) => obs,
            Err(_) => return Ok((layers, Some(iteration))),
        };
        let (x_hat, v_hat) = denoise(&obs, &real.levels, &real.level_prior);
        if x_hat.iter().chain(&v_hat).any(|v| !v.is_finite()) {
            return Ok((layers, Some(iteration)));
        }
        state.x_hat = x_hat.clone();
        state.v_hat = v_hat.clone();
        layers.push(AmpLayer {
            r: obs.r,
            sigma: obs.sigma,
            x_hat,
            v_hat,
        });
    }
    Ok((layers, None))
}

/// Run `T` iterations of init + linear step + denoise, keeping every layer's
/// outputs. Divergence aborts with the failing iteration index.
pub fn amp_detect(real: &RealSystem, opts: &AmpOptions) -> Result<AmpRun> {
    let (layers, diverged_at) = run_iterations(real, opts)?;
    if let Some(iteration) = diverged_at {
        return Err(Error::Numerical {
            what: "non-finite AMP iterate".into(),
            iteration,
        });
    }
    Ok(AmpRun { layers })
}

/// Like [`amp_detect`], but a divergent run truncates to the last finite
/// iterate and reports the failing iteration instead of erroring. Errors
/// only when not even the first iteration is finite.
pub fn amp_detect_lenient(real: &RealSystem, opts: &AmpOptions) -> Result<(AmpRun, Option<usize>)> {
    let (layers, diverged_at) = run_iterations(real, opts)?;
    if layers.is_empty() {
        return Err(Error::Numerical {
            what: "no finite AMP iterate".into(),
            iteration: diverged_at.unwrap_or(1),
        });
    }
    Ok((AmpRun { layers }, diverged_at))
}

/// Nearest level per entry; ties resolve to the lower index.
pub fn hard_decision(x_hat: &[f64], levels: &[f64]) -> Vec<usize> {
    x_hat
        .iter()
        .map(|&x| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, &s) in levels.iter().enumerate() {
                let d = (x - s).abs();
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comms::{dataset_sample, make_qam, to_real, MimoScenario};
    use crate::testkit;

    fn toy_system(levels: Vec<f64>, h: Tensor, y: Vec<f64>, noise_var: f64) -> RealSystem {
        let k = levels.len();
        RealSystem {
            h,
            y,
            x: vec![0.0; 0],
            noise_var,
            level_prior: vec![1.0 / k as f64; k],
            levels,
        }
    }

    #[test]
    fn init_matches_stated_values() {
        let c = make_qam(4).unwrap();
        let scenario = MimoScenario::new(4, 4, 0.1, c.clone()).unwrap();
        let real = to_real(&dataset_sample(&scenario, 1, 0), &c);
        let state = amp_init(&real, &AmpOptions::default());
        assert!(state.x_hat.iter().all(|v| *v == 0.0));
        assert!(state.v_hat.iter().all(|v| *v == 1.0)); // N/M = 1
        assert_eq!(state.z, real.y);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn init_prior_variance_switch() {
        let c = make_qam(4).unwrap();
        let scenario = MimoScenario::new(8, 2, 0.1, c.clone()).unwrap();
        let real = to_real(&dataset_sample(&scenario, 1, 0), &c);
        let opts = AmpOptions {
            init_variance: InitVariance::PriorVariance,
            ..AmpOptions::default()
        };
        let state = amp_init(&real, &opts);
        // unit-energy constellation: prior variance per real dimension is 1/2
        assert!((state.v_hat[0] - 0.5).abs() < 1e-12);
        let default_state = amp_init(&real, &AmpOptions::default());
        assert!((default_state.v_hat[0] - 0.25).abs() < 1e-12); // N/M
    }

    #[test]
    fn zero_variance_orthonormal_reduces_to_matched_filter() {
        // vhat = 0 and Z_prev = y give V = 0, Z = H xhat and, for orthonormal
        // columns, r = xhat + H^T (y - H xhat).
        let h = Tensor::matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let y = vec![0.7, -0.3];
        let sigma2 = 0.05;
        let mut state = AmpState {
            x_hat: vec![0.2, 0.4],
            v_hat: vec![0.0, 0.0],
            z: y.clone(),
            v: vec![1.0, 1.0],
            t: 1,
        };
        let obs = amp_linear_step(&mut state, &h, &y, sigma2).unwrap();
        assert_eq!(state.v, vec![0.0, 0.0]);
        assert_eq!(state.z, vec![0.2, 0.4]); // H xhat
        for n in 0..2 {
            let expect = state.x_hat[n] + (y[n] - state.x_hat[n]);
            assert!((obs.r[n] - expect).abs() < 1e-12);
            assert!((obs.sigma[n] - sigma2).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_system_hand_evaluation() {
        let h = Tensor::matrix(1, 1, &[1.0]).unwrap();
        let y = vec![0.9];
        let sigma2 = 0.1;
        let (x_hat, v_hat, z_prev, v_prev) = (0.3, 0.2, 0.5, 0.4);
        let mut state = AmpState {
            x_hat: vec![x_hat],
            v_hat: vec![v_hat],
            z: vec![z_prev],
            v: vec![v_prev],
            t: 1,
        };
        let obs = amp_linear_step(&mut state, &h, &y, sigma2).unwrap();
        let v = v_hat;
        let z = x_hat - v * (y[0] - z_prev) / (sigma2 + v_prev);
        let s = sigma2 + v;
        let r = x_hat + s * (y[0] - z) / (sigma2 + v);
        assert!((state.v[0] - v).abs() < 1e-15);
        assert!((state.z[0] - z).abs() < 1e-15);
        assert!((obs.sigma[0] - s).abs() < 1e-15);
        assert!((obs.r[0] - r).abs() < 1e-15);
    }

    #[test]
    fn linear_step_matches_direct_transcription() {
        let c = make_qam(4).unwrap();
        for trial in 0..50 {
            let scenario = MimoScenario::new(4, 4, 0.08, c.clone()).unwrap();
            let real = to_real(&dataset_sample(&scenario, 100 + trial, 0), &c);
            let mut state = amp_init(&real, &AmpOptions::default());
            // advance a couple of iterations so the Onsager path is exercised
            for _ in 0..2 {
                let reference = testkit::amp_step_transcription(
                    &real.h,
                    &real.y,
                    real.noise_var,
                    &state.x_hat,
                    &state.v_hat,
                    &state.z,
                    &state.v,
                );
                let obs = amp_linear_step(&mut state, &real.h, &real.y, real.noise_var).unwrap();
                for m in 0..real.rx_dim() {
                    assert!((state.v[m] - reference.v[m]).abs() < 1e-12);
                    assert!((state.z[m] - reference.z[m]).abs() < 1e-12);
                }
                for n in 0..real.tx_dim() {
                    assert!((obs.sigma[n] - reference.sigma[n]).abs() < 1e-12);
                    assert!((obs.r[n] - reference.r[n]).abs() < 1e-12);
                }
                let (x_hat, v_hat) = denoise(&obs, &real.levels, &real.level_prior);
                state.x_hat = x_hat;
                state.v_hat = v_hat;
            }
        }
    }

    #[test]
    fn denoiser_limits() {
        let levels = [-1.0, 1.0];
        let prior = [0.5, 0.5];
        // vanishing noise pins the nearest level
        let (m, v) = denoise_entry(1.0, 1e-12, &levels, &prior);
        assert!((m - 1.0).abs() < 1e-9);
        assert!(v < 1e-9);
        // uninformative limit returns the prior moments
        let (m, v) = denoise_entry(0.3, 1e12, &levels, &prior);
        assert!(m.abs() < 1e-9);
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn denoiser_binary_is_tanh() {
        // for levels {-1, +1}: E[x | r, S] = tanh(r / S)
        let levels = [-1.0, 1.0];
        let prior = [0.5, 0.5];
        let (r, sigma) = (0.5, 1.0);
        let (m, _) = denoise_entry(r, sigma, &levels, &prior);
        // direct enumeration of the two-term sum
        let wp = (-(r - 1.0) * (r - 1.0) / (2.0 * sigma)).exp() * 0.5;
        let wm = (-(r + 1.0) * (r + 1.0) / (2.0 * sigma)).exp() * 0.5;
        let direct = (wp - wm) / (wp + wm);
        assert!((m - direct).abs() < 1e-15);
        assert!((m - (r / sigma).tanh()).abs() < 1e-12);
    }

    #[test]
    fn denoiser_matches_naive_formula() {
        let c = make_qam(16).unwrap();
        let levels = c.levels();
        let prior = c.level_prior();
        let mut rng = crate::seeds::rng(3, &[1]);
        use rand::Rng;
        for _ in 0..500 {
            let r = rng.gen_range(-2.0..2.0);
            let sigma = rng.gen_range(0.01..10.0);
            if let Some((nm, nv)) = testkit::naive_denoise(r, sigma, levels, prior) {
                let (m, v) = denoise_entry(r, sigma, levels, prior);
                assert!((m - nm).abs() < 1e-12, "mean {m} vs naive {nm}");
                assert!((v - nv).abs() < 1e-12, "var {v} vs naive {nv}");
            }
        }
    }

    #[test]
    fn denoiser_moment_identity_and_range() {
        let c = make_qam(64).unwrap();
        let levels = c.levels();
        let prior = c.level_prior();
        let max_sq = levels.iter().fold(0.0f64, |a, s| a.max(s * s));
        let mut rng = crate::seeds::rng(4, &[2]);
        use rand::Rng;
        let mut w = vec![0.0; levels.len()];
        for _ in 0..1000 {
            let r = rng.gen_range(-3.0..3.0);
            let sigma = rng.gen_range(1e-6..1e3);
            let (m, v) = denoise_entry(r, sigma, levels, prior);
            denoise_weights_into(r, sigma, levels, prior, &mut w);
            let spread: f64 = levels
                .iter()
                .zip(&w)
                .map(|(s, wi)| (s - m) * (s - m) * wi)
                .sum();
            assert!((v - spread).abs() < 1e-10, "identity: {v} vs {spread}");
            assert!((0.0..=max_sq + 1e-12).contains(&v));
            assert!(m >= levels[0] - 1e-12 && m <= levels[levels.len() - 1] + 1e-12);
        }
    }

    #[test]
    fn noiseless_orthogonal_recovery() {
        // identity channel, essentially no noise: two iterations pin x
        let levels = vec![-1.0, 1.0];
        let truth = [1.0, -1.0, -1.0, 1.0];
        let h = {
            let mut t = Tensor::zeros(&[4, 4]);
            for i in 0..4 {
                t.set2(i, i, 1.0);
            }
            t
        };
        let real = toy_system(levels.clone(), h, truth.to_vec(), 1e-12);
        let run = amp_detect(
            &real,
            &AmpOptions {
                iterations: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let decided = hard_decision(run.x_hat(), &levels);
        let expect: Vec<usize> = truth.iter().map(|&v| usize::from(v > 0.0)).collect();
        assert_eq!(decided, expect);
    }

    #[test]
    fn single_iteration_is_init_step_denoise() {
        let c = make_qam(4).unwrap();
        let scenario = MimoScenario::new(3, 3, 0.2, c.clone()).unwrap();
        let real = to_real(&dataset_sample(&scenario, 55, 1), &c);
        let run = amp_detect(
            &real,
            &AmpOptions {
                iterations: 1,
                ..Default::default()
            },
        )
        .unwrap();

        let mut state = amp_init(&real, &AmpOptions::default());
        let obs = amp_linear_step(&mut state, &real.h, &real.y, real.noise_var).unwrap();
        let (x_hat, v_hat) = denoise(&obs, &real.levels, &real.level_prior);
        assert_eq!(run.layers.len(), 1);
        assert_eq!(run.layers[0].x_hat, x_hat);
        assert_eq!(run.layers[0].v_hat, v_hat);
        assert_eq!(run.layers[0].r, obs.r);
    }

    #[test]
    fn user_permutation_equivariance() {
        let c = make_qam(4).unwrap();
        let scenario = MimoScenario::new(6, 4, 0.05, c.clone()).unwrap();
        let sample = dataset_sample(&scenario, 21, 3);
        let perm = [2usize, 0, 3, 1];
        let permuted = testkit::permute_users(&sample, &perm);
        let run = amp_detect(&to_real(&sample, &c), &AmpOptions::default()).unwrap();
        let run_p = amp_detect(&to_real(&permuted, &c), &AmpOptions::default()).unwrap();
        let n = sample.n;
        for (layer, layer_p) in run.layers.iter().zip(&run_p.layers) {
            for (to, &from) in perm.iter().enumerate() {
                // user `from` of the original appears at position `to`
                assert!((layer.x_hat[from] - layer_p.x_hat[to]).abs() < 1e-12);
                assert!((layer.x_hat[from + n] - layer_p.x_hat[to + n]).abs() < 1e-12);
                assert!((layer.v_hat[from] - layer_p.v_hat[to]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lenient_detect_matches_strict_on_finite_runs() {
        let c = make_qam(4).unwrap();
        let scenario = MimoScenario::new(4, 3, 0.1, c.clone()).unwrap();
        let real = to_real(&dataset_sample(&scenario, 91, 0), &c);
        let strict = amp_detect(&real, &AmpOptions::default()).unwrap();
        let (lenient, diverged) = amp_detect_lenient(&real, &AmpOptions::default()).unwrap();
        assert_eq!(diverged, None);
        assert_eq!(strict, lenient);
    }

    #[test]
    fn non_finite_input_is_reported_with_iteration() {
        let levels = vec![-1.0, 1.0];
        let h = Tensor::matrix(2, 2, &[1.0, 0.2, -0.1, 0.8]).unwrap();
        let real = toy_system(levels, h, vec![f64::INFINITY, 0.0], 0.1);
        let err = amp_detect(&real, &AmpOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Numerical { iteration: 1, .. }));
        assert!(amp_detect_lenient(&real, &AmpOptions::default()).is_err());
    }

    #[test]
    fn hard_decision_rules() {
        let levels = [-3.0, -1.0, 1.0, 3.0];
        assert_eq!(hard_decision(&[1.0], &levels), vec![2]);
        // midpoint ties resolve to the lower index
        assert_eq!(hard_decision(&[0.0], &levels), vec![1]);
        assert_eq!(hard_decision(&[-2.0], &levels), vec![0]);
        // random values agree with a linear scan
        let mut rng = crate::seeds::rng(9, &[4]);
        use rand::Rng;
        for _ in 0..200 {
            let x = rng.gen_range(-4.0..4.0);
            let got = hard_decision(&[x], &levels)[0];
            let scan = levels
                .iter()
                .enumerate()
                .min_by(|a, b| (x - a.1).abs().partial_cmp(&(x - b.1).abs()).unwrap())
                .unwrap()
                .0;
            assert_eq!(got, scan);
        }
    }
}
