//! `train`: run the trainer, write the model bundle and history CSV.

use crate::cfgfile::parse_user_list;
use crate::Ctx;
use ampgnn::amp::InitVariance;
use ampgnn::net::AmpGnnConfig;
use ampgnn::trainer::{
    history_csv, resume_training, train_with_checkpoint, ScenarioDims, TrainConfig, TrainOutput,
};
use ampgnn::{Error, Result};
use clap::Args;
use std::path::PathBuf;

#[derive(Args, Clone)]
pub struct TrainArgs {
    /// BS antennas
    #[arg(long)]
    pub m: Option<usize>,
    /// Users; a comma list ("8,16") trains on the mixture
    #[arg(long)]
    pub n: Option<String>,
    /// Constellation order
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub samples_per_epoch: Option<usize>,
    #[arg(long)]
    pub val_samples: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Lower edge of the training SNR range (dB)
    #[arg(long)]
    pub snr_min: Option<f64>,
    /// Upper edge of the training SNR range (dB)
    #[arg(long)]
    pub snr_max: Option<f64>,
    /// Detector layers T
    #[arg(long)]
    pub layers: Option<usize>,
    /// Message-passing rounds L per layer
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Node feature size
    #[arg(long)]
    pub feature: Option<usize>,
    #[arg(long)]
    pub hidden1: Option<usize>,
    #[arg(long)]
    pub hidden2: Option<usize>,
    /// Learn a separate weight set per layer instead of sharing one
    #[arg(long)]
    pub per_layer_weights: bool,
    /// Initialize the posterior variance from the alphabet prior instead of N/M
    #[arg(long)]
    pub prior_variance_init: bool,
    /// Use the full-size training protocol (100 epochs of 100k samples)
    #[arg(long)]
    pub paper_scale: bool,
    /// Model bundle file name
    #[arg(long)]
    pub bundle: Option<String>,
    /// Training history CSV file name
    #[arg(long)]
    pub history: Option<String>,
    /// Write a resumable checkpoint here after every epoch
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Resume from a checkpoint written by a previous run
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

/// Build the training configuration from flags, config file, and defaults.
pub fn train_config(ctx: &Ctx, args: &TrainArgs) -> Result<TrainConfig> {
    let m = ctx.cfg.resolve(args.m, "m", 16)?;
    let users_raw = ctx.cfg.resolve(args.n.clone(), "n", "16".to_string())?;
    let users = parse_user_list(&users_raw)?;
    let q = ctx.cfg.resolve(args.q, "q", 4)?;

    let base = if args.paper_scale {
        TrainConfig::paper_scale(m, users[0], q)
    } else {
        TrainConfig::desk_scale(m, users[0], q)
    };
    let mut cfg = TrainConfig {
        epochs: ctx.cfg.resolve(args.epochs, "epochs", base.epochs)?,
        samples_per_epoch: ctx.cfg.resolve(
            args.samples_per_epoch,
            "samples-per-epoch",
            base.samples_per_epoch,
        )?,
        val_samples: ctx
            .cfg
            .resolve(args.val_samples, "val-samples", base.val_samples)?,
        batch_size: ctx
            .cfg
            .resolve(args.batch_size, "batch-size", base.batch_size)?,
        learning_rate: ctx
            .cfg
            .resolve(args.learning_rate, "learning-rate", base.learning_rate)?,
        snr_range_db: (
            ctx.cfg.resolve(args.snr_min, "snr-min", 4.0)?,
            ctx.cfg.resolve(args.snr_max, "snr-max", 14.0)?,
        ),
        seed: ctx.seed,
        q,
        scenarios: users.iter().map(|&n| ScenarioDims { m, n }).collect(),
        net: base.net,
    };
    cfg.net.layers = ctx.cfg.resolve(args.layers, "layers", cfg.net.layers)?;
    cfg.net.gnn.rounds = ctx.cfg.resolve(args.rounds, "rounds", cfg.net.gnn.rounds)?;
    cfg.net.gnn.feature = ctx
        .cfg
        .resolve(args.feature, "feature", cfg.net.gnn.feature)?;
    cfg.net.gnn.hidden1 = ctx
        .cfg
        .resolve(args.hidden1, "hidden1", cfg.net.gnn.hidden1)?;
    cfg.net.gnn.hidden2 = ctx
        .cfg
        .resolve(args.hidden2, "hidden2", cfg.net.gnn.hidden2)?;
    cfg.net.shared_weights = !args.per_layer_weights;
    if args.prior_variance_init {
        cfg.net.init_variance = InitVariance::PriorVariance;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Write the bundle + history files for a finished run.
pub fn write_outputs(
    ctx: &Ctx,
    out: &TrainOutput,
    net: &AmpGnnConfig,
    bundle_name: &str,
    history_name: &str,
) -> Result<()> {
    let bundle_path = ctx.out_path(bundle_name)?;
    ampgnn::trainer::save_model(&bundle_path, &out.best, net)?;
    let history_path = ctx.out_path(history_name)?;
    std::fs::write(&history_path, history_csv(&out.history))
        .map_err(|e| Error::Io(e.to_string()))?;
    println!(
        "wrote {} (best val loss {:.6}, initial {:.6})",
        bundle_path.display(),
        out.best_val_loss,
        out.initial_val_loss
    );
    println!("wrote {}", history_path.display());
    Ok(())
}

pub fn run(ctx: &Ctx, args: TrainArgs) -> Result<()> {
    let bundle_name = ctx
        .cfg
        .resolve(args.bundle.clone(), "bundle", "model.agnn".to_string())?;
    let history_name =
        ctx.cfg
            .resolve(args.history.clone(), "history", "history.csv".to_string())?;

    let (out, net) = if let Some(ckpt) = &args.resume {
        let (stored_cfg, _) = ampgnn::trainer::load_checkpoint(ckpt)?;
        let out = resume_training(ckpt)?;
        (out, stored_cfg.net)
    } else {
        let cfg = train_config(ctx, &args)?;
        if ctx.verbose {
            eprintln!(
                "training {:?} q{} for {} epochs x {} samples (seed {})",
                cfg.scenarios, cfg.q, cfg.epochs, cfg.samples_per_epoch, cfg.seed
            );
        }
        let out = train_with_checkpoint(&cfg, args.checkpoint.as_deref())?;
        (out, cfg.net)
    };

    for row in &out.history {
        if ctx.verbose {
            eprintln!(
                "epoch {:>3}: train {:.6} val {:.6} ser {:.6} ({:.1}s)",
                row.epoch, row.train_loss, row.val_loss, row.val_ser, row.wall_seconds
            );
        }
    }
    write_outputs(ctx, &out, &net, &bundle_name, &history_name)
}
