//! Paired Monte-Carlo SER evaluation.
//!
//! Every detector at a given (SNR, sample index) sees the identical channel,
//! symbols, and noise realization: samples are generated from per-index
//! derived seeds and shared across the detector list. Workers map over
//! sample indices and the error counts reduce in index order, so the output
//! is identical for any thread count.

use crate::amp::{self, AmpOptions};
use crate::baselines;
use crate::comms::{make_qam, to_real, Constellation, MimoSample, MimoScenario};
use crate::error::{Error, Result};
use crate::net::{self, AmpGnnConfig, DenoiserSource, DivergencePolicy, ModelWeights};
use crate::report::{SerReport, SerRow};
use crate::seeds::{self, tag};
use rand::Rng;
use rayon::prelude::*;

/// A detector participating in a sweep.
#[derive(Debug, Clone)]
pub enum DetectorKind {
    Amp(AmpOptions),
    Mmse,
    AmpGnn {
        weights: ModelWeights,
        cfg: AmpGnnConfig,
    },
    /// Test stub: always decides the true symbols.
    Perfect,
    /// Test stub: uniform random decisions.
    RandomGuess,
}

/// A labelled detector.
#[derive(Debug, Clone)]
pub struct DetectorEntry {
    pub label: String,
    pub kind: DetectorKind,
}

impl DetectorEntry {
    pub fn new(label: impl Into<String>, kind: DetectorKind) -> Self {
        DetectorEntry {
            label: label.into(),
            kind,
        }
    }
}

/// Sweep definition.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub q: usize,
    pub snr_grid_db: Vec<f64>,
    /// Complex symbols evaluated per grid point (rounded up to full channel
    /// uses).
    pub symbols_per_point: u64,
    pub seed: u64,
}

/// Report plus one realization digest per grid point.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub report: SerReport,
    /// `(snr_db, digest)` per point; a fingerprint of every realization the
    /// point consumed, for paired-comparison audits.
    pub digests: Vec<(f64, u64)>,
}

/// FNV-1a over the bit patterns of a sample's contents.
pub fn realization_digest(sample: &MimoSample) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    let mut eat = |bits: u64| {
        for byte in bits.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    };
    for c in sample.h.iter().chain(&sample.y) {
        eat(c.re.to_bits());
        eat(c.im.to_bits());
    }
    for &i in &sample.indices {
        eat(i as u64);
    }
    hash
}

fn decide_sample(
    kind: &DetectorKind,
    sample: &MimoSample,
    constellation: &Constellation,
    guess_rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    let real = to_real(sample, constellation);
    match kind {
        DetectorKind::Amp(opts) => {
            let (run, _diverged) = amp::amp_detect_lenient(&real, opts)?;
            let levels = amp::hard_decision(run.x_hat(), &real.levels);
            Ok(pair_levels(&levels, constellation))
        }
        DetectorKind::Mmse => {
            let x = baselines::mmse_detect(&real.h, &real.y, real.noise_var)?;
            let levels = amp::hard_decision(&x, &real.levels);
            Ok(pair_levels(&levels, constellation))
        }
        DetectorKind::AmpGnn { weights, cfg } => {
            let mut eval_cfg = cfg.clone();
            eval_cfg.divergence = DivergencePolicy::Truncate;
            let out = net::forward(&real, weights, &eval_cfg, DenoiserSource::Gnn, false)?;
            Ok(net::decide(&out.probs, constellation))
        }
        DetectorKind::Perfect => Ok(sample.indices.clone()),
        DetectorKind::RandomGuess => Ok((0..sample.n)
            .map(|_| guess_rng.gen_range(0..constellation.order()))
            .collect()),
    }
}

/// Per-dimension level decisions -> complex symbol indices.
pub fn pair_levels(levels: &[usize], constellation: &Constellation) -> Vec<usize> {
    let n = levels.len() / 2;
    (0..n)
        .map(|u| constellation.join_index(levels[u], levels[u + n]))
        .collect()
}

/// Run the paired sweep. Returns one row per (detector, SNR point).
pub fn run_sweep(detectors: &[DetectorEntry], cfg: &SweepConfig) -> Result<SweepOutput> {
    if cfg.snr_grid_db.is_empty() {
        return Err(Error::Usage("sweep needs a nonempty SNR grid".into()));
    }
    if detectors.is_empty() {
        return Err(Error::Usage("sweep needs at least one detector".into()));
    }
    let constellation = make_qam(cfg.q)?;
    let samples_per_point = cfg.symbols_per_point.div_ceil(cfg.n as u64);
    if samples_per_point == 0 {
        return Ok(SweepOutput {
            report: SerReport::default(),
            digests: Vec::new(),
        });
    }

    let mut report = SerReport::default();
    let mut digests = Vec::new();
    for (snr_idx, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let scenario = MimoScenario::with_snr_db(cfg.m, cfg.n, snr_db, constellation.clone())?;
        // (digest, per-detector errors) per sample, reduced in index order
        let per_sample: Vec<Result<(u64, Vec<u64>)>> = (0..samples_per_point)
            .into_par_iter()
            .map(|i| {
                let mut rng = seeds::rng(cfg.seed, &[tag::EVAL, snr_idx as u64, i]);
                let sample = crate::comms::make_sample(&scenario, &mut rng);
                let mut guess_rng = seeds::rng(cfg.seed, &[tag::EVAL, snr_idx as u64, i, u64::MAX]);
                let mut errors = Vec::with_capacity(detectors.len());
                for d in detectors {
                    let decisions =
                        decide_sample(&d.kind, &sample, &constellation, &mut guess_rng)?;
                    let wrong = decisions
                        .iter()
                        .zip(&sample.indices)
                        .filter(|(a, b)| a != b)
                        .count() as u64;
                    errors.push(wrong);
                }
                Ok((realization_digest(&sample), errors))
            })
            .collect();

        let mut point_digest = 0xcbf29ce484222325u64;
        let mut totals = vec![0u64; detectors.len()];
        for item in per_sample {
            let (digest, errors) = item?;
            for byte in digest.to_le_bytes() {
                point_digest ^= byte as u64;
                point_digest = point_digest.wrapping_mul(0x100000001b3);
            }
            for (t, e) in totals.iter_mut().zip(&errors) {
                *t += e;
            }
        }
        digests.push((snr_db, point_digest));
        for (d, &errors) in detectors.iter().zip(&totals) {
            report.rows.push(SerRow {
                detector: d.label.clone(),
                snr_db,
                symbols: samples_per_point * cfg.n as u64,
                errors,
            });
        }
    }
    Ok(SweepOutput { report, digests })
}

/// Grid point where `detector`'s SER is closest to `target` on a log scale.
pub fn snr_where_ser_near(report: &SerReport, detector: &str, target: f64) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for row in report.rows.iter().filter(|r| r.detector == detector) {
        let ser = row.ser();
        let distance = if ser > 0.0 {
            (ser.log10() - target.log10()).abs()
        } else {
            f64::INFINITY
        };
        if best.map(|(d, _)| distance < d).unwrap_or(true) {
            best = Some((distance, row.snr_db));
        }
    }
    best.map(|(_, snr)| snr)
}
