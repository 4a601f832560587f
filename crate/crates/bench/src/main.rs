use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hcompress::hmatrix::StorageMode;
use hcompress_bench::{emit_report, run, write_report, App, ArithChoice, Bench, BenchConfig, Format};

#[derive(Parser)]
#[command(version, about = "Compression, matvec and LU benchmarks for compressed H-matrices")]
struct Cli {
    #[command(subcommand)]
    bench: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Storage size and compression time per codec.
    Compress,
    /// Matrix-vector product time and deviation per codec.
    Matvec,
    /// LU time, factor size and residual per codec and strategy.
    Lu,
}

#[derive(clap::Args)]
struct Opts {
    /// Model problem: laplace or matern.
    #[arg(long, global = true, default_value = "laplace")]
    app: App,
    /// Problem size (Laplace rounds up to 20 * 4^L).
    #[arg(long, global = true, default_value_t = 4096)]
    n: usize,
    /// Accuracy; repeat for a sweep.
    #[arg(long, global = true)]
    eps: Vec<f64>,
    /// Storage mode besides fp64; repeatable.
    #[arg(long, global = true)]
    codec: Vec<StorageMode>,
    /// LU strategy: eager, accu or both.
    #[arg(long, global = true, default_value = "accu")]
    arith: ArithChoice,
    /// Compress dense leaves as well.
    #[arg(long, global = true)]
    dense_too: bool,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Repetitions per timing; the median is reported.
    #[arg(long, global = true, default_value_t = 3)]
    reps: usize,
    /// Report file; standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    /// Leaf size of the cluster tree.
    #[arg(long, global = true, default_value_t = 64)]
    nmin: usize,
    /// Standard admissibility parameter.
    #[arg(long, global = true, default_value_t = 2.0)]
    eta: f64,
    /// Diagonal shift of the Matérn covariance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    jitter: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let o = cli.opts;
    let bench = match cli.bench {
        Cmd::Compress => Bench::Compress,
        Cmd::Matvec => Bench::Matvec,
        Cmd::Lu => Bench::Lu,
    };
    let mut cfg = BenchConfig::new(o.app, bench, o.n);
    if !o.eps.is_empty() {
        cfg.eps = o.eps;
    }
    cfg.codecs = o.codec;
    cfg.arith = o.arith;
    cfg.dense_too = o.dense_too;
    cfg.seed = o.seed;
    cfg.reps = o.reps;
    cfg.n_min = o.nmin;
    cfg.eta = o.eta;
    cfg.jitter = o.jitter;

    let result = run(&cfg).and_then(|report| match &o.out {
        Some(path) => emit_report(&report, o.format, path),
        None => write_report(&report, o.format, std::io::stdout().lock()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
