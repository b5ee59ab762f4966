//! `complexity`: multiplication counts per detector.

use crate::Ctx;
use ampgnn::complexity::{complexity_report, ComplexityParams};
use ampgnn::{Error, Result};
use clap::Args;

#[derive(Args)]
pub struct ComplexityArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    /// Detector layers / iterations
    #[arg(long)]
    t: Option<usize>,
    /// Message-passing rounds per layer
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    n_u: Option<usize>,
    #[arg(long)]
    n_h1: Option<usize>,
    #[arg(long)]
    n_h2: Option<usize>,
    /// Output CSV file name
    #[arg(long)]
    file: Option<String>,
}

pub fn run(ctx: &Ctx, args: ComplexityArgs) -> Result<()> {
    let m = ctx.cfg.resolve(args.m, "m", 64)?;
    let n = ctx.cfg.resolve(args.n, "n", 64)?;
    let q = ctx.cfg.resolve(args.q, "q", 4)?;
    let mut params = ComplexityParams::reference(m, n, q);
    params.t = ctx.cfg.resolve(args.t, "t", params.t)?;
    params.l = ctx.cfg.resolve(args.l, "l", params.l)?;
    params.n_u = ctx.cfg.resolve(args.n_u, "n-u", params.n_u)?;
    params.n_h1 = ctx.cfg.resolve(args.n_h1, "n-h1", params.n_h1)?;
    params.n_h2 = ctx.cfg.resolve(args.n_h2, "n-h2", params.n_h2)?;
    if m == 0 || n == 0 {
        return Err(Error::Usage("dimensions must be positive".into()));
    }
    let file = ctx
        .cfg
        .resolve(args.file, "file", "complexity.csv".to_string())?;

    let report = complexity_report(params);
    println!("counting convention: {}", report.convention);
    for row in &report.rows {
        println!(
            "{:>8}: {} multiplications",
            row.detector, row.multiplications
        );
    }
    let path = ctx.out_path(&file)?;
    std::fs::write(&path, report.to_csv()).map_err(|e| Error::Io(e.to_string()))?;
    println!("wrote {}", path.display());
    Ok(())
}
