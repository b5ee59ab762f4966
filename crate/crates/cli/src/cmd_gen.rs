//! `gen`: write a dataset cache file.

use crate::Ctx;
use ampgnn::comms::{generate_dataset, make_qam, save_dataset, MimoScenario};
use ampgnn::Result;
use clap::Args;

#[derive(Args)]
pub struct GenArgs {
    /// BS antennas
    #[arg(long)]
    m: Option<usize>,
    /// Users
    #[arg(long)]
    n: Option<usize>,
    /// Constellation order (4, 16, 64)
    #[arg(long)]
    q: Option<usize>,
    /// SNR in dB
    #[arg(long)]
    snr_db: Option<f64>,
    /// Samples to generate
    #[arg(long)]
    count: Option<u64>,
    /// Output file name inside the output directory
    #[arg(long)]
    file: Option<String>,
}

pub fn run(ctx: &Ctx, args: GenArgs) -> Result<()> {
    let m = ctx.cfg.resolve(args.m, "m", 16)?;
    let n = ctx.cfg.resolve(args.n, "n", 16)?;
    let q = ctx.cfg.resolve(args.q, "q", 4)?;
    let snr_db = ctx.cfg.resolve(args.snr_db, "snr-db", 10.0)?;
    let count = ctx.cfg.resolve(args.count, "count", 1000)?;
    let file = ctx
        .cfg
        .resolve(args.file, "file", "dataset.agnn".to_string())?;

    let constellation = make_qam(q)?;
    let scenario = MimoScenario::with_snr_db(m, n, snr_db, constellation)?;
    let samples: Vec<_> = generate_dataset(&scenario, count, ctx.seed).collect();
    let path = ctx.out_path(&file)?;
    save_dataset(&path, &scenario, &samples, ctx.seed)?;
    println!(
        "wrote {} ({count} samples, {m}x{n}, {q}-QAM, {snr_db} dB, sigma2 {:.6})",
        path.display(),
        scenario.sigma2
    );
    Ok(())
}
