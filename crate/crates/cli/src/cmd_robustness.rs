//! `robustness`: train on a user-count mixture, evaluate on an unseen count
//! against plain AMP and (optionally) a matched-count model.

use crate::cfgfile::parse_user_list;
use crate::cmd_sweep::snr_grid;
use crate::Ctx;
use ampgnn::amp::AmpOptions;
use ampgnn::bench::{run_sweep, DetectorEntry, DetectorKind, SweepConfig};
use ampgnn::net::ModelWeights;
use ampgnn::seeds;
use ampgnn::trainer::{load_model, save_model, train, ScenarioDims, TrainConfig};
use ampgnn::{Error, Result};
use clap::Args;

#[derive(Args)]
pub struct RobustnessArgs {
    /// BS antennas
    #[arg(long)]
    m: Option<usize>,
    /// Training mixture of user counts, comma list
    #[arg(long)]
    train_n: Option<String>,
    /// User count of the test system
    #[arg(long)]
    test_n: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    samples_per_epoch: Option<usize>,
    #[arg(long)]
    val_samples: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    snr_min: Option<f64>,
    #[arg(long)]
    snr_max: Option<f64>,
    #[arg(long)]
    snr_step: Option<f64>,
    /// Complex symbols per grid point
    #[arg(long)]
    symbols: Option<u64>,
    /// Reuse a mixture-trained bundle instead of training one
    #[arg(long)]
    mixture_bundle: Option<String>,
    /// Reuse a matched-count bundle instead of training one
    #[arg(long)]
    matched_bundle: Option<String>,
    /// Skip the matched-count model entirely
    #[arg(long)]
    no_matched: bool,
    /// Output CSV file name
    #[arg(long)]
    file: Option<String>,
}

fn obtain_model(
    ctx: &Ctx,
    bundle: Option<&str>,
    base: &TrainConfig,
    users: &[usize],
    m: usize,
    seed: u64,
    save_as: &str,
) -> Result<(ModelWeights, ampgnn::net::AmpGnnConfig)> {
    if let Some(name) = bundle {
        let path = if std::path::Path::new(name).exists() {
            std::path::PathBuf::from(name)
        } else {
            ctx.out_dir.join(name)
        };
        return load_model(&path);
    }
    let mut cfg = base.clone();
    cfg.seed = seed;
    cfg.scenarios = users.iter().map(|&n| ScenarioDims { m, n }).collect();
    cfg.validate()?;
    if ctx.verbose {
        eprintln!(
            "training mixture {:?} for {} epochs x {} samples (seed {seed})",
            cfg.scenarios, cfg.epochs, cfg.samples_per_epoch
        );
    }
    let out = train(&cfg)?;
    let path = ctx.out_path(save_as)?;
    save_model(&path, &out.best, &cfg.net)?;
    println!(
        "wrote {} (best val loss {:.6}, initial {:.6})",
        path.display(),
        out.best_val_loss,
        out.initial_val_loss
    );
    Ok((out.best, cfg.net))
}

pub fn run(ctx: &Ctx, args: RobustnessArgs) -> Result<()> {
    let m = ctx.cfg.resolve(args.m, "m", 16)?;
    let train_raw = ctx
        .cfg
        .resolve(args.train_n, "train-n", "8,16".to_string())?;
    let train_users = parse_user_list(&train_raw)?;
    let test_n = ctx.cfg.resolve(args.test_n, "test-n", 12)?;
    let q = ctx.cfg.resolve(args.q, "q", 4)?;
    let snr_min = ctx.cfg.resolve(args.snr_min, "snr-min", 4.0)?;
    let snr_max = ctx.cfg.resolve(args.snr_max, "snr-max", 14.0)?;
    let snr_step = ctx.cfg.resolve(args.snr_step, "snr-step", 2.0)?;
    let symbols = ctx.cfg.resolve(args.symbols, "symbols", 100_000)?;
    let file = ctx
        .cfg
        .resolve(args.file, "file", "robustness.csv".to_string())?;

    if test_n > m {
        eprintln!(
            "warning: test user count {test_n} exceeds the antenna count {m} the \
             mixture was trained under; running anyway"
        );
    }

    let mut base = TrainConfig::desk_scale(m, train_users[0], q);
    base.epochs = ctx.cfg.resolve(args.epochs, "epochs", base.epochs)?;
    base.samples_per_epoch = ctx.cfg.resolve(
        args.samples_per_epoch,
        "samples-per-epoch",
        base.samples_per_epoch,
    )?;
    base.val_samples = ctx
        .cfg
        .resolve(args.val_samples, "val-samples", base.val_samples)?;
    base.batch_size = ctx
        .cfg
        .resolve(args.batch_size, "batch-size", base.batch_size)?;
    base.learning_rate =
        ctx.cfg
            .resolve(args.learning_rate, "learning-rate", base.learning_rate)?;
    base.snr_range_db = (snr_min, snr_max);

    let (mixture, mixture_cfg) = obtain_model(
        ctx,
        args.mixture_bundle.as_deref(),
        &base,
        &train_users,
        m,
        ctx.seed,
        "robustness-mixture.agnn",
    )?;

    let mut detectors = vec![
        DetectorEntry::new("amp", DetectorKind::Amp(AmpOptions::default())),
        DetectorEntry::new(
            "ampgnn_mixture",
            DetectorKind::AmpGnn {
                weights: mixture,
                cfg: mixture_cfg,
            },
        ),
    ];
    if !args.no_matched {
        let (matched, matched_cfg) = obtain_model(
            ctx,
            args.matched_bundle.as_deref(),
            &base,
            &[test_n],
            m,
            seeds::derive(ctx.seed, &[0x6d61746368]), // independent stream
            "robustness-matched.agnn",
        )?;
        detectors.push(DetectorEntry::new(
            "ampgnn_matched",
            DetectorKind::AmpGnn {
                weights: matched,
                cfg: matched_cfg,
            },
        ));
    }

    let sweep = SweepConfig {
        m,
        n: test_n,
        q,
        snr_grid_db: snr_grid(snr_min, snr_max, snr_step)?,
        symbols_per_point: symbols,
        seed: ctx.seed,
    };
    let out = run_sweep(&detectors, &sweep)?;
    if ctx.verbose {
        for (snr, digest) in &out.digests {
            eprintln!("digest snr {snr:.2} dB: {digest:016x}");
        }
    }
    let path = ctx.out_path(&file)?;
    std::fs::write(&path, out.report.to_csv()).map_err(|e| Error::Io(e.to_string()))?;
    println!("wrote {}", path.display());
    Ok(())
}
