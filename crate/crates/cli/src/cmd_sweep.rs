//! `sweep`: paired SER curves over an SNR grid.

use crate::Ctx;
use ampgnn::amp::AmpOptions;
use ampgnn::bench::{run_sweep, DetectorEntry, DetectorKind, SweepConfig};
use ampgnn::trainer::load_model;
use ampgnn::{Error, Result};
use clap::Args;

#[derive(Args)]
pub struct SweepArgs {
    /// Comma-separated detector list: amp, mmse, ampgnn
    #[arg(long)]
    detectors: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    snr_min: Option<f64>,
    #[arg(long)]
    snr_max: Option<f64>,
    #[arg(long)]
    snr_step: Option<f64>,
    /// Complex symbols per grid point
    #[arg(long)]
    symbols: Option<u64>,
    /// AMP iteration count
    #[arg(long)]
    amp_iterations: Option<usize>,
    /// Model bundle, required when the list contains ampgnn
    #[arg(long)]
    bundle: Option<String>,
    /// Output CSV file name
    #[arg(long)]
    file: Option<String>,
}

/// Inclusive dB grid.
pub fn snr_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if step <= 0.0 || max < min {
        return Err(Error::Usage(format!(
            "bad SNR grid: min {min}, max {max}, step {step}"
        )));
    }
    let mut grid = Vec::new();
    let mut v = min;
    while v <= max + 1e-9 {
        grid.push(v);
        v += step;
    }
    Ok(grid)
}

/// Build the labelled detector list, loading bundles as needed.
pub fn detector_list(
    ctx: &Ctx,
    raw: &str,
    amp_iterations: usize,
    bundle: Option<&str>,
) -> Result<Vec<DetectorEntry>> {
    let mut out = Vec::new();
    for name in raw.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let kind = match name {
            "amp" => DetectorKind::Amp(AmpOptions {
                iterations: amp_iterations,
                ..Default::default()
            }),
            "mmse" => DetectorKind::Mmse,
            "ampgnn" => {
                let bundle_name = bundle.ok_or_else(|| {
                    Error::Usage("detector 'ampgnn' needs --bundle <model file>".into())
                })?;
                let path = if std::path::Path::new(bundle_name).exists() {
                    std::path::PathBuf::from(bundle_name)
                } else {
                    ctx.out_dir.join(bundle_name)
                };
                let (weights, cfg) = load_model(&path)?;
                DetectorKind::AmpGnn { weights, cfg }
            }
            other => {
                return Err(Error::Usage(format!(
                    "unknown detector '{other}' (use amp, mmse, ampgnn)"
                )))
            }
        };
        out.push(DetectorEntry::new(name, kind));
    }
    if out.is_empty() {
        return Err(Error::Usage("empty detector list".into()));
    }
    Ok(out)
}

pub fn run(ctx: &Ctx, args: SweepArgs) -> Result<()> {
    let detectors_raw = ctx
        .cfg
        .resolve(args.detectors, "detectors", "amp,mmse".to_string())?;
    let m = ctx.cfg.resolve(args.m, "m", 16)?;
    let n = ctx.cfg.resolve(args.n, "n", 16)?;
    let q = ctx.cfg.resolve(args.q, "q", 4)?;
    let snr_min = ctx.cfg.resolve(args.snr_min, "snr-min", 0.0)?;
    let snr_max = ctx.cfg.resolve(args.snr_max, "snr-max", 12.0)?;
    let snr_step = ctx.cfg.resolve(args.snr_step, "snr-step", 2.0)?;
    let symbols = ctx.cfg.resolve(args.symbols, "symbols", 100_000)?;
    let amp_iterations = ctx.cfg.resolve(args.amp_iterations, "amp-iterations", 10)?;
    let bundle = ctx.cfg.resolve_opt(args.bundle, "bundle")?;
    let file = ctx
        .cfg
        .resolve(args.file, "file", "sweep.csv".to_string())?;

    let detectors = detector_list(ctx, &detectors_raw, amp_iterations, bundle.as_deref())?;
    let sweep = SweepConfig {
        m,
        n,
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
