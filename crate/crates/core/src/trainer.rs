//! Training loop: fresh seeded data every epoch, Adam on the end-to-end L2
//! loss, validation-based model selection, resumable checkpoints.
//!
//! All randomness derives from the config seed: epoch `e`, batch `b`, sample
//! `k` draws from the `[TRAIN, e, b, k]` stream and validation sample `i`
//! from `[VALIDATION, i]`, so a run is reproducible bitwise and a resumed run
//! continues exactly where the interrupted one would have gone.

use crate::comms::{make_qam, make_sample, to_real, Constellation, MimoScenario, RealSystem};
use crate::container::Container;
use crate::error::{Error, Result};
use crate::net::{self, AmpGnnConfig, DenoiserSource, DivergencePolicy, ModelWeights};
use crate::numkit::{adam_step, AdamState, Tensor};
use crate::report::{format_loss, format_rate, SerReport};
use crate::seeds::{self, tag};
use rayon::prelude::*;
use std::path::Path;
use std::time::Instant;

/// One (M, N) system in the training mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioDims {
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub samples_per_epoch: usize,
    pub val_samples: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Training SNR, drawn uniformly per sample from this dB range.
    pub snr_range_db: (f64, f64),
    pub seed: u64,
    pub q: usize,
    /// One or more systems; each training sample picks one uniformly.
    pub scenarios: Vec<ScenarioDims>,
    pub net: AmpGnnConfig,
}

impl TrainConfig {
    /// Reference protocol: 100 epochs of 100k samples, 5k validation
    /// samples, batch 64, learning rate 1e-3.
    pub fn paper_scale(m: usize, n: usize, q: usize) -> Self {
        TrainConfig {
            epochs: 100,
            samples_per_epoch: 100_000,
            val_samples: 5_000,
            batch_size: 64,
            learning_rate: 1e-3,
            snr_range_db: (0.0, 14.0),
            seed: 1,
            q,
            scenarios: vec![ScenarioDims { m, n }],
            net: AmpGnnConfig::new((q as f64).sqrt().round() as usize),
        }
    }

    /// Laptop-sized defaults: 20 epochs of 2000 samples, 500 validation
    /// samples, same optimizer settings.
    pub fn desk_scale(m: usize, n: usize, q: usize) -> Self {
        TrainConfig {
            epochs: 20,
            samples_per_epoch: 2_000,
            val_samples: 500,
            ..TrainConfig::paper_scale(m, n, q)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0
            || self.samples_per_epoch == 0
            || self.val_samples == 0
            || self.batch_size == 0
        {
            return Err(Error::Config("training sizes must be positive".into()));
        }
        if self.batch_size > self.samples_per_epoch {
            return Err(Error::Config(format!(
                "batch size {} exceeds samples per epoch {}",
                self.batch_size, self.samples_per_epoch
            )));
        }
        if self.learning_rate < 0.0 {
            return Err(Error::Config("learning rate must be nonnegative".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("at least one scenario is required".into()));
        }
        if self.snr_range_db.0 > self.snr_range_db.1 {
            return Err(Error::Config("snr range is reversed".into()));
        }
        self.net.validate()?;
        let levels = (self.q as f64).sqrt().round() as usize;
        if levels != self.net.gnn.levels {
            return Err(Error::Config(format!(
                "constellation order {} implies {} levels, net has {}",
                self.q, levels, self.net.gnn.levels
            )));
        }
        Ok(())
    }
}

/// One history row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_ser: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    /// Weights with the lowest validation loss seen.
    pub best: ModelWeights,
    pub best_val_loss: f64,
    /// Validation loss of the untrained model.
    pub initial_val_loss: f64,
    pub history: Vec<EpochStats>,
    pub final_weights: ModelWeights,
    /// Batches dropped after non-finite losses or gradients.
    pub skipped_batches: usize,
}

pub const HISTORY_CSV_HEADER: &str = "epoch,train_loss,val_loss,val_ser,wall_seconds";

pub fn history_csv(history: &[EpochStats]) -> String {
    let mut out = String::from(HISTORY_CSV_HEADER);
    out.push('\n');
    for row in history {
        out.push_str(&format!(
            "{},{},{},{},{:.3}\n",
            row.epoch,
            format_loss(row.train_loss),
            format_loss(row.val_loss),
            format_rate(row.val_ser),
            row.wall_seconds
        ));
    }
    out
}

struct TrainerState {
    weights: ModelWeights,
    adam: AdamState,
    best: ModelWeights,
    best_val: f64,
    initial_val: f64,
    next_epoch: usize,
    history: Vec<EpochStats>,
    skipped_batches: usize,
}

fn draw_real_sample(
    cfg: &TrainConfig,
    constellation: &Constellation,
    path: &[u64],
) -> Result<(RealSystem, Vec<usize>)> {
    let mut rng = seeds::rng(cfg.seed, path);
    use rand::Rng;
    let dims = cfg.scenarios[rng.gen_range(0..cfg.scenarios.len())];
    let snr = if cfg.snr_range_db.0 == cfg.snr_range_db.1 {
        cfg.snr_range_db.0
    } else {
        rng.gen_range(cfg.snr_range_db.0..cfg.snr_range_db.1)
    };
    let scenario = MimoScenario::with_snr_db(dims.m, dims.n, snr, constellation.clone())?;
    let sample = make_sample(&scenario, &mut rng);
    let indices = sample.indices.clone();
    Ok((to_real(&sample, constellation), indices))
}

/// Mean validation loss and SER of one weight set.
fn validation_pass(
    cfg: &TrainConfig,
    constellation: &Constellation,
    weights: &ModelWeights,
) -> Result<(f64, f64)> {
    let mut eval_cfg = cfg.net.clone();
    eval_cfg.divergence = DivergencePolicy::Truncate;
    let results: Vec<Result<(f64, u64, u64)>> = (0..cfg.val_samples as u64)
        .into_par_iter()
        .map(|i| {
            let (real, indices) = draw_real_sample(cfg, constellation, &[tag::VALIDATION, i])?;
            match net::forward(&real, weights, &eval_cfg, DenoiserSource::Gnn, false) {
                Ok(out) => {
                    let loss = net::l2_loss(&out.x_hat, &real.x)?;
                    let decisions = net::decide(&out.probs, constellation);
                    let errors = decisions
                        .iter()
                        .zip(&indices)
                        .filter(|(a, b)| a != b)
                        .count() as u64;
                    Ok((loss, errors, indices.len() as u64))
                }
                // a sample the detector cannot finish counts fully wrong
                Err(Error::Numerical { .. }) => Ok((
                    net::l2_loss(&vec![0.0; real.x.len()], &real.x)?,
                    indices.len() as u64,
                    indices.len() as u64,
                )),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut loss_sum = 0.0;
    let mut errors = 0u64;
    let mut symbols = 0u64;
    for r in results {
        let (l, e, s) = r?;
        loss_sum += l;
        errors += e;
        symbols += s;
    }
    Ok((
        loss_sum / cfg.val_samples as f64,
        errors as f64 / symbols.max(1) as f64,
    ))
}

fn run_epochs(
    cfg: &TrainConfig,
    constellation: &Constellation,
    state: &mut TrainerState,
    checkpoint_path: Option<&Path>,
) -> Result<()> {
    let mut consecutive_failures = 0usize;
    while state.next_epoch <= cfg.epochs {
        let epoch = state.next_epoch;
        let started = Instant::now();
        let batches = cfg.samples_per_epoch / cfg.batch_size;
        let mut loss_acc = 0.0;
        let mut loss_batches = 0usize;
        for b in 0..batches.max(1) {
            let batch_len = cfg.batch_size.min(cfg.samples_per_epoch);
            let per_sample: Vec<Result<(f64, Vec<Tensor>)>> = (0..batch_len as u64)
                .into_par_iter()
                .map(|k| {
                    let (real, _) = draw_real_sample(
                        cfg,
                        constellation,
                        &[tag::TRAIN, epoch as u64, b as u64, k],
                    )?;
                    net::loss_and_grads(&real, &state.weights, &cfg.net)
                })
                .collect();

            let mut batch_loss = 0.0;
            let mut grads: Option<Vec<Tensor>> = None;
            let mut failed = false;
            for item in per_sample {
                match item {
                    Ok((loss, g)) => {
                        batch_loss += loss;
                        match &mut grads {
                            None => grads = Some(g),
                            Some(acc) => {
                                for (a, gi) in acc.iter_mut().zip(&g) {
                                    for (av, gv) in a.data_mut().iter_mut().zip(gi.data()) {
                                        *av += gv;
                                    }
                                }
                            }
                        }
                    }
                    Err(Error::Training(msg)) | Err(Error::Numerical { what: msg, .. }) => {
                        eprintln!("epoch {epoch} batch {b}: skipped ({msg})");
                        failed = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if failed || grads.is_none() {
                state.skipped_batches += 1;
                consecutive_failures += 1;
                if consecutive_failures >= 10 {
                    return Err(Error::Training(format!(
                        "training diverged: {consecutive_failures} consecutive batches failed \
                         at epoch {epoch}"
                    )));
                }
                continue;
            }
            consecutive_failures = 0;
            let scale = 1.0 / batch_len as f64;
            let mut grads = grads.unwrap();
            for g in &mut grads {
                for v in g.data_mut() {
                    *v *= scale;
                }
            }
            batch_loss *= scale;
            loss_acc += batch_loss;
            loss_batches += 1;

            let mut flat = state.weights.flat_tensors();
            adam_step(&mut state.adam, &mut flat, &grads)?;
            let mut it = flat.into_iter();
            state
                .weights
                .apply_flat(|t| *t = it.next().expect("parameter count"));
        }
        if loss_batches == 0 {
            return Err(Error::Training(format!(
                "epoch {epoch} produced no usable batch"
            )));
        }

        let (val_loss, val_ser) = validation_pass(cfg, constellation, &state.weights)?;
        if val_loss < state.best_val {
            state.best_val = val_loss;
            state.best = state.weights.clone();
        }
        state.history.push(EpochStats {
            epoch,
            train_loss: loss_acc / loss_batches as f64,
            val_loss,
            val_ser,
            wall_seconds: started.elapsed().as_secs_f64(),
        });
        state.next_epoch += 1;
        if let Some(path) = checkpoint_path {
            save_checkpoint(path, cfg, state)?;
        }
    }
    Ok(())
}

fn fresh_state(cfg: &TrainConfig, constellation: &Constellation) -> Result<TrainerState> {
    let mut init_rng = seeds::rng(cfg.seed, &[tag::WEIGHT_INIT]);
    let weights = ModelWeights::init(&cfg.net, &mut init_rng);
    weights.validate(&cfg.net)?;
    let adam = AdamState::new(&weights.flat_tensors(), cfg.learning_rate);
    let (initial_val, _) = validation_pass(cfg, constellation, &weights)?;
    Ok(TrainerState {
        best: weights.clone(),
        best_val: initial_val,
        initial_val,
        weights,
        adam,
        next_epoch: 1,
        history: Vec::new(),
        skipped_batches: 0,
    })
}

fn output_from(state: TrainerState) -> TrainOutput {
    TrainOutput {
        best: state.best,
        best_val_loss: state.best_val,
        initial_val_loss: state.initial_val,
        history: state.history,
        final_weights: state.weights,
        skipped_batches: state.skipped_batches,
    }
}

/// Train from scratch.
pub fn train(cfg: &TrainConfig) -> Result<TrainOutput> {
    train_with_checkpoint(cfg, None)
}

/// Train from scratch, writing a resumable checkpoint after every epoch.
pub fn train_with_checkpoint(cfg: &TrainConfig, path: Option<&Path>) -> Result<TrainOutput> {
    cfg.validate()?;
    let constellation = make_qam(cfg.q)?;
    let mut state = fresh_state(cfg, &constellation)?;
    run_epochs(cfg, &constellation, &mut state, path)?;
    Ok(output_from(state))
}

/// Continue an interrupted run. The checkpoint carries the full config; the
/// trajectory is identical to the uninterrupted run with the same seed.
pub fn resume_training(path: &Path) -> Result<TrainOutput> {
    let (cfg, handle) = load_checkpoint(path)?;
    let mut state: TrainerState = handle.into();
    let constellation = make_qam(cfg.q)?;
    run_epochs(&cfg, &constellation, &mut state, Some(path))?;
    Ok(output_from(state))
}

/// SER of a trained model over an SNR grid (one-detector sweep).
pub fn evaluate(
    weights: &ModelWeights,
    net_cfg: &AmpGnnConfig,
    dims: ScenarioDims,
    q: usize,
    snr_grid_db: &[f64],
    symbols_per_point: u64,
    seed: u64,
) -> Result<SerReport> {
    let sweep = crate::bench::run_sweep(
        &[crate::bench::DetectorEntry::new(
            "ampgnn",
            crate::bench::DetectorKind::AmpGnn {
                weights: weights.clone(),
                cfg: net_cfg.clone(),
            },
        )],
        &crate::bench::SweepConfig {
            m: dims.m,
            n: dims.n,
            q,
            snr_grid_db: snr_grid_db.to_vec(),
            symbols_per_point,
            seed,
        },
    )?;
    Ok(sweep.report)
}

// ---- model bundle ----

/// Write weights plus the architecture record. Shared weights store under
/// the bare tensor names ("enc.W1", ...); per-layer sets prefix "l{t}.".
pub fn save_model(path: &Path, weights: &ModelWeights, cfg: &AmpGnnConfig) -> Result<()> {
    weights.validate(cfg)?;
    let mut c = Container::new();
    c.push_scalar("cfg.version", 1.0);
    c.push_scalar("cfg.T", cfg.layers as f64);
    c.push_scalar("cfg.L", cfg.gnn.rounds as f64);
    c.push_scalar("cfg.N_u", cfg.gnn.feature as f64);
    c.push_scalar("cfg.N_h1", cfg.gnn.hidden1 as f64);
    c.push_scalar("cfg.N_h2", cfg.gnn.hidden2 as f64);
    c.push_scalar("cfg.levels", cfg.gnn.levels as f64);
    c.push_scalar("cfg.shared", if cfg.shared_weights { 1.0 } else { 0.0 });
    if cfg.shared_weights {
        weights.sets[0].store(&mut c, "");
    } else {
        for (t, set) in weights.sets.iter().enumerate() {
            set.store(&mut c, &format!("l{t}."));
        }
    }
    c.save(path)
}

/// Read a bundle written by [`save_model`].
pub fn load_model(path: &Path) -> Result<(ModelWeights, AmpGnnConfig)> {
    let c = Container::load(path)?;
    let version = c.require_scalar("cfg.version")?;
    if version != 1.0 {
        return Err(Error::Io(format!("unsupported bundle version {version}")));
    }
    let mut cfg = AmpGnnConfig::new(c.require_scalar("cfg.levels")? as usize);
    cfg.layers = c.require_scalar("cfg.T")? as usize;
    cfg.gnn.rounds = c.require_scalar("cfg.L")? as usize;
    cfg.gnn.feature = c.require_scalar("cfg.N_u")? as usize;
    cfg.gnn.hidden1 = c.require_scalar("cfg.N_h1")? as usize;
    cfg.gnn.hidden2 = c.require_scalar("cfg.N_h2")? as usize;
    cfg.shared_weights = c.require_scalar("cfg.shared")? != 0.0;
    let sets = if cfg.shared_weights {
        vec![crate::gnn::GnnWeights::load(&c, "", &cfg.gnn)?]
    } else {
        (0..cfg.layers)
            .map(|t| crate::gnn::GnnWeights::load(&c, &format!("l{t}."), &cfg.gnn))
            .collect::<Result<Vec<_>>>()?
    };
    let weights = ModelWeights { sets };
    weights.validate(&cfg)?;
    Ok((weights, cfg))
}

// ---- checkpoints ----

fn save_checkpoint(path: &Path, cfg: &TrainConfig, state: &TrainerState) -> Result<()> {
    let mut c = Container::new();
    c.push_scalar("meta.version", 1.0);
    c.push_scalar("meta.next_epoch", state.next_epoch as f64);
    c.push_scalar("meta.best_val", state.best_val);
    c.push_scalar("meta.initial_val", state.initial_val);
    c.push_scalar("meta.adam_step", state.adam.step as f64);
    c.push_scalar("meta.skipped", state.skipped_batches as f64);

    c.push_scalar("cfg.epochs", cfg.epochs as f64);
    c.push_scalar("cfg.samples_per_epoch", cfg.samples_per_epoch as f64);
    c.push_scalar("cfg.val_samples", cfg.val_samples as f64);
    c.push_scalar("cfg.batch_size", cfg.batch_size as f64);
    c.push_scalar("cfg.learning_rate", cfg.learning_rate);
    c.push_scalar("cfg.snr_min", cfg.snr_range_db.0);
    c.push_scalar("cfg.snr_max", cfg.snr_range_db.1);
    // seeds round-trip exactly below 2^53; experiment seeds stay well under
    c.push_scalar("cfg.seed", cfg.seed as f64);
    c.push_scalar("cfg.q", cfg.q as f64);
    c.push_scalar("cfg.T", cfg.net.layers as f64);
    c.push_scalar("cfg.L", cfg.net.gnn.rounds as f64);
    c.push_scalar("cfg.N_u", cfg.net.gnn.feature as f64);
    c.push_scalar("cfg.N_h1", cfg.net.gnn.hidden1 as f64);
    c.push_scalar("cfg.N_h2", cfg.net.gnn.hidden2 as f64);
    c.push_scalar("cfg.levels", cfg.net.gnn.levels as f64);
    c.push_scalar("cfg.shared", if cfg.net.shared_weights { 1.0 } else { 0.0 });
    let dims: Vec<f64> = cfg
        .scenarios
        .iter()
        .flat_map(|s| [s.m as f64, s.n as f64])
        .collect();
    c.push(
        "cfg.scenarios",
        Tensor::new(vec![cfg.scenarios.len(), 2], dims)?,
    );

    for (t, set) in state.weights.sets.iter().enumerate() {
        set.store(&mut c, &format!("cur.l{t}."));
    }
    for (t, set) in state.best.sets.iter().enumerate() {
        set.store(&mut c, &format!("best.l{t}."));
    }
    for (i, m) in state.adam.m.iter().enumerate() {
        c.push(&format!("adam.m.{i}"), m.clone());
    }
    for (i, v) in state.adam.v.iter().enumerate() {
        c.push(&format!("adam.v.{i}"), v.clone());
    }

    let rows = state.history.len();
    let col = |f: fn(&EpochStats) -> f64| -> Vec<f64> { state.history.iter().map(f).collect() };
    c.push(
        "hist.epoch",
        Tensor::new(vec![rows], col(|r| r.epoch as f64))?,
    );
    c.push(
        "hist.train_loss",
        Tensor::new(vec![rows], col(|r| r.train_loss))?,
    );
    c.push(
        "hist.val_loss",
        Tensor::new(vec![rows], col(|r| r.val_loss))?,
    );
    c.push("hist.val_ser", Tensor::new(vec![rows], col(|r| r.val_ser))?);
    c.push(
        "hist.wall",
        Tensor::new(vec![rows], col(|r| r.wall_seconds))?,
    );
    c.save(path)
}

/// Read a checkpoint back into a runnable state.
pub fn load_checkpoint(path: &Path) -> Result<(TrainConfig, TrainerStateHandle)> {
    let c = Container::load(path)?;
    let version = c.require_scalar("meta.version")?;
    if version != 1.0 {
        return Err(Error::Io(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let mut net = AmpGnnConfig::new(c.require_scalar("cfg.levels")? as usize);
    net.layers = c.require_scalar("cfg.T")? as usize;
    net.gnn.rounds = c.require_scalar("cfg.L")? as usize;
    net.gnn.feature = c.require_scalar("cfg.N_u")? as usize;
    net.gnn.hidden1 = c.require_scalar("cfg.N_h1")? as usize;
    net.gnn.hidden2 = c.require_scalar("cfg.N_h2")? as usize;
    net.shared_weights = c.require_scalar("cfg.shared")? != 0.0;
    let dims = c.require("cfg.scenarios")?;
    let scenarios: Vec<ScenarioDims> = (0..dims.shape()[0])
        .map(|i| ScenarioDims {
            m: dims.data()[2 * i] as usize,
            n: dims.data()[2 * i + 1] as usize,
        })
        .collect();
    let cfg = TrainConfig {
        epochs: c.require_scalar("cfg.epochs")? as usize,
        samples_per_epoch: c.require_scalar("cfg.samples_per_epoch")? as usize,
        val_samples: c.require_scalar("cfg.val_samples")? as usize,
        batch_size: c.require_scalar("cfg.batch_size")? as usize,
        learning_rate: c.require_scalar("cfg.learning_rate")?,
        snr_range_db: (
            c.require_scalar("cfg.snr_min")?,
            c.require_scalar("cfg.snr_max")?,
        ),
        seed: c.require_scalar("cfg.seed")? as u64,
        q: c.require_scalar("cfg.q")? as usize,
        scenarios,
        net,
    };
    cfg.validate()?;

    let load_sets = |prefix: &str| -> Result<ModelWeights> {
        let sets = (0..cfg.net.weight_sets())
            .map(|t| crate::gnn::GnnWeights::load(&c, &format!("{prefix}l{t}."), &cfg.net.gnn))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelWeights { sets })
    };
    let weights = load_sets("cur.")?;
    let best = load_sets("best.")?;
    let flat = weights.flat_tensors();
    let mut adam = AdamState::new(&flat, cfg.learning_rate);
    adam.step = c.require_scalar("meta.adam_step")? as u64;
    for i in 0..flat.len() {
        adam.m[i] = c.require(&format!("adam.m.{i}"))?.clone();
        adam.v[i] = c.require(&format!("adam.v.{i}"))?.clone();
    }

    let epochs_logged = c.require("hist.epoch")?.len();
    let val = |name: &str| -> Result<Vec<f64>> { Ok(c.require(name)?.data().to_vec()) };
    let (he, ht, hv, hs, hw) = (
        val("hist.epoch")?,
        val("hist.train_loss")?,
        val("hist.val_loss")?,
        val("hist.val_ser")?,
        val("hist.wall")?,
    );
    let history = (0..epochs_logged)
        .map(|i| EpochStats {
            epoch: he[i] as usize,
            train_loss: ht[i],
            val_loss: hv[i],
            val_ser: hs[i],
            wall_seconds: hw[i],
        })
        .collect();

    let state = TrainerState {
        weights,
        adam,
        best,
        best_val: c.require_scalar("meta.best_val")?,
        initial_val: c.require_scalar("meta.initial_val")?,
        next_epoch: c.require_scalar("meta.next_epoch")? as usize,
        history,
        skipped_batches: c.require_scalar("meta.skipped")? as usize,
    };
    Ok((cfg, TrainerStateHandle(state)))
}

/// Opaque resumable state (exposed for inspection in tests via accessors).
pub struct TrainerStateHandle(TrainerState);

impl TrainerStateHandle {
    pub fn next_epoch(&self) -> usize {
        self.0.next_epoch
    }

    pub fn current_weights(&self) -> &ModelWeights {
        &self.0.weights
    }

    pub fn best_weights(&self) -> &ModelWeights {
        &self.0.best
    }
}

// resume_training needs the inner state back
impl From<TrainerStateHandle> for TrainerState {
    fn from(h: TrainerStateHandle) -> Self {
        h.0
    }
}
