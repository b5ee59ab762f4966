//! Benchmark harness for the AMP / AMP-GNN detectors.
//!
//! Subcommands: `gen` (dataset files), `train` (model bundles), `sweep`
//! (paired SER curves), `complexity` (multiplication counts), `robustness`
//! (mixture-trained model on an unseen user count).
//!
//! Every random stream derives from `--seed`, so one number reproduces any
//! output byte for byte, at any `--threads` setting. Exit codes: 0 success,
//! 2 usage error, 3 numerical failure.

mod cfgfile;
mod cmd_complexity;
mod cmd_gen;
mod cmd_robustness;
mod cmd_sweep;
mod cmd_train;

use ampgnn::Error;
use cfgfile::CfgFile;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "AMPGNN_OUT";

#[derive(Parser)]
#[command(
    name = "ampgnn",
    version,
    about = "MIMO detection benchmarks: AMP, MMSE, and the GNN-enhanced AMP detector"
)]
struct Cli {
    /// Root seed for all random streams
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Flat key=value config file; flags take precedence over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: $AMPGNN_OUT, then ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print extra diagnostics (per-point realization digests, timings)
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset cache file
    Gen(cmd_gen::GenArgs),
    /// Train a detector and write the model bundle plus history CSV
    Train(cmd_train::TrainArgs),
    /// Paired SER sweep over an SNR grid
    Sweep(cmd_sweep::SweepArgs),
    /// Analytic multiplication counts per detector
    Complexity(cmd_complexity::ComplexityArgs),
    /// Train on a user-count mixture, evaluate on an unseen user count
    Robustness(cmd_robustness::RobustnessArgs),
}

/// Resolved global options handed to every subcommand.
pub struct Ctx {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub cfg: CfgFile,
    pub verbose: bool,
}

impl Ctx {
    /// Output path for `name`, creating the directory if needed.
    pub fn out_path(&self, name: &str) -> ampgnn::Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| Error::Io(format!("cannot create {}: {e}", self.out_dir.display())))?;
        Ok(self.out_dir.join(name))
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Config(_) | Error::Io(_) | Error::Capacity(_) => 2,
                Error::Numerical { .. } | Error::Training(_) => 3,
            }
        }
    });
}

fn run(cli: Cli) -> ampgnn::Result<()> {
    let cfg = match &cli.config {
        Some(path) => CfgFile::load(path)?,
        None => CfgFile::default(),
    };
    let seed = cfg.resolve(cli.seed, "seed", 1)?;
    let out_dir = match cli.out {
        Some(dir) => dir,
        None => match cfg.raw("out") {
            Some(dir) => PathBuf::from(dir),
            None => std::env::var(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|_| PathBuf::from("out")),
        },
    };
    let threads = cfg.resolve(cli.threads, "threads", 0)?;
    let ctx = Ctx {
        seed,
        out_dir,
        cfg,
        verbose: cli.verbose,
    };

    let dispatch = || -> ampgnn::Result<()> {
        match cli.command {
            Command::Gen(args) => cmd_gen::run(&ctx, args),
            Command::Train(args) => cmd_train::run(&ctx, args),
            Command::Sweep(args) => cmd_sweep::run(&ctx, args),
            Command::Complexity(args) => cmd_complexity::run(&ctx, args),
            Command::Robustness(args) => cmd_robustness::run(&ctx, args),
        }
    };

    if threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Usage(format!("cannot build thread pool: {e}")))?;
        pool.install(dispatch)
    } else {
        dispatch()
    }
}
