//! System model: constellations, Rayleigh channels, AWGN, SNR accounting,
//! complex/real-equivalent transforms, and dataset generation.
//!
//! Conventions, fixed across the library:
//! - Channel entries are i.i.d. circularly-symmetric complex Gaussian with
//!   per-entry variance `1/M`, so the received signal power `E||Hx||^2 = N`
//!   does not depend on the antenna count.
//! - `sigma2` is the noise variance per complex receive entry; each real
//!   dimension then carries `sigma2 / 2`.

use crate::container::Container;
use crate::error::{Error, Result};
use crate::numkit::Tensor;
use crate::seeds::{self, tag};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Square QAM constellation with unit average energy and uniform prior.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    points: Vec<Complex64>,
    levels: Vec<f64>,
    level_prior: Vec<f64>,
    prior: Vec<f64>,
    labels: Vec<u64>,
}

fn gray_sequence(k: usize) -> Vec<u64> {
    (0..k as u64).map(|i| i ^ (i >> 1)).collect()
}

/// Build the `Q`-QAM constellation. Supported orders: 4, 16, 64.
pub fn make_qam(q: usize) -> Result<Constellation> {
    if !matches!(q, 4 | 16 | 64) {
        return Err(Error::Config(format!(
            "unsupported constellation order {q} (use 4, 16 or 64)"
        )));
    }
    let k = (q as f64).sqrt().round() as usize;
    // PAM levels +-1, +-3, ... scaled for unit complex symbol energy
    let scale = (2.0 * (k * k - 1) as f64 / 3.0).sqrt();
    let levels: Vec<f64> = (0..k)
        .map(|i| (2.0 * i as f64 - (k as f64 - 1.0)) / scale)
        .collect();
    let gray = gray_sequence(k);
    let mut points = Vec::with_capacity(q);
    let mut labels = Vec::with_capacity(q);
    for (i, &re) in levels.iter().enumerate() {
        for (j, &im) in levels.iter().enumerate() {
            points.push(Complex64::new(re, im));
            labels.push((gray[i] << k.trailing_zeros()) | gray[j]);
        }
    }
    Ok(Constellation {
        order: q,
        points,
        levels,
        level_prior: vec![1.0 / k as f64; k],
        prior: vec![1.0 / q as f64; q],
        labels,
    })
}

impl Constellation {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of per-dimension levels, `sqrt(Q)`.
    pub fn levels_len(&self) -> usize {
        self.levels.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Ascending per-dimension PAM levels.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Uniform prior over the complex points.
    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// Uniform prior over the per-dimension levels.
    pub fn level_prior(&self) -> &[f64] {
        &self.level_prior
    }

    /// Gray bit labels, indexed like `points`.
    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Split a point index into (re level index, im level index).
    pub fn split_index(&self, index: usize) -> (usize, usize) {
        let k = self.levels.len();
        (index / k, index % k)
    }

    /// Combine per-dimension level indices into a point index.
    pub fn join_index(&self, re_idx: usize, im_idx: usize) -> usize {
        re_idx * self.levels.len() + im_idx
    }

    /// Prior variance of one real dimension, `E[s_r^2]`.
    pub fn level_variance(&self) -> f64 {
        self.levels
            .iter()
            .zip(&self.level_prior)
            .map(|(s, p)| s * s * p)
            .sum()
    }
}

/// One MIMO configuration: `M` BS antennas, `N` users, noise variance per
/// complex dimension, constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoScenario {
    pub m: usize,
    pub n: usize,
    pub sigma2: f64,
    pub constellation: Constellation,
}

impl MimoScenario {
    pub fn new(m: usize, n: usize, sigma2: f64, constellation: Constellation) -> Result<Self> {
        if m == 0 || n == 0 || sigma2 <= 0.0 {
            return Err(Error::Config(format!(
                "scenario wants M >= 1, N >= 1, sigma2 > 0; got {m}, {n}, {sigma2}"
            )));
        }
        Ok(MimoScenario {
            m,
            n,
            sigma2,
            constellation,
        })
    }

    pub fn with_snr_db(
        m: usize,
        n: usize,
        snr_db: f64,
        constellation: Constellation,
    ) -> Result<Self> {
        MimoScenario::new(m, n, snr_to_sigma2(snr_db, m, n), constellation)
    }
}

/// Noise variance per complex entry for a target SNR in dB.
///
/// With per-entry channel variance `1/M`, the received signal power is
/// `E||Hx||^2 = N` and `SNR = N / (M sigma2)`.
pub fn snr_to_sigma2(snr_db: f64, m: usize, n: usize) -> f64 {
    n as f64 / (m as f64 * 10f64.powf(snr_db / 10.0))
}

/// One channel use: `y = Hx + n` with the true symbol indices retained.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoSample {
    /// Row-major complex `M x N` channel.
    pub h: Vec<Complex64>,
    pub m: usize,
    pub n: usize,
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub indices: Vec<usize>,
    pub sigma2: f64,
}

/// Real-equivalent form: `[[Re H, -Im H], [Im H, Re H]]` acting on
/// `[Re x; Im x]`, with noise variance `sigma2 / 2` per real dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSystem {
    /// `2M x 2N` stacked channel.
    pub h: Tensor,
    pub y: Vec<f64>,
    /// True transmitted vector `[Re x; Im x]` (length `2N`).
    pub x: Vec<f64>,
    /// Noise variance per real dimension.
    pub noise_var: f64,
    pub levels: Vec<f64>,
    pub level_prior: Vec<f64>,
}

impl RealSystem {
    pub fn rx_dim(&self) -> usize {
        self.h.shape()[0]
    }

    pub fn tx_dim(&self) -> usize {
        self.h.shape()[1]
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// i.i.d. `CN(0, 1/M)` channel matrix, row-major `M x N`.
pub fn sample_channel(m: usize, n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let std = (0.5 / m as f64).sqrt();
    (0..m * n)
        .map(|_| Complex64::new(std * standard_normal(rng), std * standard_normal(rng)))
        .collect()
}

/// Draw one sample from the scenario: uniform symbols, Rayleigh channel,
/// AWGN at the scenario noise level.
pub fn make_sample(scenario: &MimoScenario, rng: &mut impl Rng) -> MimoSample {
    let (m, n) = (scenario.m, scenario.n);
    let h = sample_channel(m, n, rng);
    let q = scenario.constellation.order();
    let indices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..q)).collect();
    let x: Vec<Complex64> = indices
        .iter()
        .map(|&i| scenario.constellation.point(i))
        .collect();
    let noise_std = (scenario.sigma2 / 2.0).sqrt();
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    for r in 0..m {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..n {
            acc += h[r * n + c] * x[c];
        }
        y[r] = acc
            + Complex64::new(
                noise_std * standard_normal(rng),
                noise_std * standard_normal(rng),
            );
    }
    MimoSample {
        h,
        m,
        n,
        x,
        y,
        indices,
        sigma2: scenario.sigma2,
    }
}

/// Stack a complex matrix into its `2M x 2N` real-equivalent form.
pub fn real_channel(h: &[Complex64], m: usize, n: usize) -> Tensor {
    let mut out = Tensor::zeros(&[2 * m, 2 * n]);
    for r in 0..m {
        for c in 0..n {
            let v = h[r * n + c];
            out.set2(r, c, v.re);
            out.set2(r, c + n, -v.im);
            out.set2(r + m, c, v.im);
            out.set2(r + m, c + n, v.re);
        }
    }
    out
}

/// Stack a complex vector as `[Re; Im]`.
pub fn stack_complex(v: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.len());
    out.extend(v.iter().map(|c| c.re));
    out.extend(v.iter().map(|c| c.im));
    out
}

/// Inverse of [`stack_complex`].
pub fn from_real(x_r: &[f64]) -> Vec<Complex64> {
    let n = x_r.len() / 2;
    (0..n).map(|i| Complex64::new(x_r[i], x_r[i + n])).collect()
}

/// Real-equivalent view of a sample, used by all real-domain detectors.
pub fn to_real(sample: &MimoSample, constellation: &Constellation) -> RealSystem {
    RealSystem {
        h: real_channel(&sample.h, sample.m, sample.n),
        y: stack_complex(&sample.y),
        x: stack_complex(&sample.x),
        noise_var: sample.sigma2 / 2.0,
        levels: constellation.levels().to_vec(),
        level_prior: constellation.level_prior().to_vec(),
    }
}

/// i.i.d. sample stream. Each sample draws from its own derived seed, so the
/// stream can be sharded by index without changing its contents.
pub struct DatasetIter {
    scenario: MimoScenario,
    seed: u64,
    next: u64,
    count: u64,
}

impl Iterator for DatasetIter {
    type Item = MimoSample;

    fn next(&mut self) -> Option<MimoSample> {
        if self.next >= self.count {
            return None;
        }
        let sample = dataset_sample(&self.scenario, self.seed, self.next);
        self.next += 1;
        Some(sample)
    }
}

/// The `index`-th sample of the seeded stream.
pub fn dataset_sample(scenario: &MimoScenario, seed: u64, index: u64) -> MimoSample {
    let mut rng = seeds::rng(seed, &[tag::DATASET, index]);
    make_sample(scenario, &mut rng)
}

pub fn generate_dataset(scenario: &MimoScenario, count: u64, seed: u64) -> DatasetIter {
    DatasetIter {
        scenario: scenario.clone(),
        seed,
        next: 0,
        count,
    }
}

/// Write a dataset cache file in the named-tensor container format.
pub fn save_dataset(
    path: &std::path::Path,
    scenario: &MimoScenario,
    samples: &[MimoSample],
    seed: u64,
) -> Result<()> {
    let (m, n) = (scenario.m, scenario.n);
    let count = samples.len();
    let mut h_re = Vec::with_capacity(count * m * n);
    let mut h_im = Vec::with_capacity(count * m * n);
    let mut y_re = Vec::with_capacity(count * m);
    let mut y_im = Vec::with_capacity(count * m);
    let mut x_idx = Vec::with_capacity(count * n);
    for s in samples {
        h_re.extend(s.h.iter().map(|c| c.re));
        h_im.extend(s.h.iter().map(|c| c.im));
        y_re.extend(s.y.iter().map(|c| c.re));
        y_im.extend(s.y.iter().map(|c| c.im));
        x_idx.extend(s.indices.iter().map(|&i| i as f64));
    }
    let mut c = Container::new();
    c.push("H_real", Tensor::new(vec![count, m, n], h_re)?);
    c.push("H_imag", Tensor::new(vec![count, m, n], h_im)?);
    c.push("x_idx", Tensor::new(vec![count, n], x_idx)?);
    c.push("y_real", Tensor::new(vec![count, m], y_re)?);
    c.push("y_imag", Tensor::new(vec![count, m], y_im)?);
    c.push_scalar("M", m as f64);
    c.push_scalar("N", n as f64);
    c.push_scalar("sigma2", scenario.sigma2);
    c.push_scalar("seed", seed as f64);
    c.save(path)
}

/// Read a dataset cache written by [`save_dataset`].
pub fn load_dataset(
    path: &std::path::Path,
    constellation: &Constellation,
) -> Result<Vec<MimoSample>> {
    let c = Container::load(path)?;
    let m = c.require_scalar("M")? as usize;
    let n = c.require_scalar("N")? as usize;
    let sigma2 = c.require_scalar("sigma2")?;
    let h_re = c.require("H_real")?;
    let h_im = c.require("H_imag")?;
    let y_re = c.require("y_real")?;
    let y_im = c.require("y_imag")?;
    let x_idx = c.require("x_idx")?;
    let count = h_re.shape()[0];
    let mut out = Vec::with_capacity(count);
    for s in 0..count {
        let h: Vec<Complex64> = (0..m * n)
            .map(|i| Complex64::new(h_re.data()[s * m * n + i], h_im.data()[s * m * n + i]))
            .collect();
        let y: Vec<Complex64> = (0..m)
            .map(|i| Complex64::new(y_re.data()[s * m + i], y_im.data()[s * m + i]))
            .collect();
        let indices: Vec<usize> = (0..n).map(|i| x_idx.data()[s * n + i] as usize).collect();
        let x: Vec<Complex64> = indices.iter().map(|&i| constellation.point(i)).collect();
        out.push(MimoSample {
            h,
            m,
            n,
            x,
            y,
            indices,
            sigma2,
        });
    }
    Ok(out)
}
