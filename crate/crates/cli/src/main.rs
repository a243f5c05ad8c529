//! `bench`: time and verify the blocked single-precision multiply.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sgemm_cli::pin::pin_to_cpu;
use sgemm_cli::record::{emit_report, ReportFormat, SweepSpec};
use sgemm_cli::timing::{run_sweep, time_gemm, Protocol};
use sgemm_cli::verify::run_verify;
use sgemm_cli::{Error, Result};
use sgemm_core::config::HostGeometry;
use sgemm_core::gemm::KernelVariant;
use sgemm_core::matrix::Dims;

#[derive(Parser)]
#[command(
    name = "bench",
    version,
    about = "Benchmark and verification harness for the blocked SGEMM library"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time kernels across a range of square sizes.
    Sweep(SweepArgs),
    /// Time one problem shape.
    Single(SingleArgs),
    /// Run the randomized correctness suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Smallest square size.
    #[arg(long, default_value_t = 16)]
    min: usize,
    /// Largest square size.
    #[arg(long, default_value_t = 700)]
    max: usize,
    /// Size increment.
    #[arg(long, default_value_t = 4)]
    step: usize,
    /// Fixed row stride for every operand; omit to use the size itself.
    #[arg(long)]
    stride: Option<usize>,
    /// Permit a fixed stride below the largest size (such cells fall
    /// back to stride = size).
    #[arg(long)]
    allow_short_stride: bool,
    /// Comma-separated kernels: naive, scalar, vector.
    #[arg(long, value_delimiter = ',', default_value = "naive,scalar,vector")]
    variants: Vec<KernelVariant>,
    /// Timed repetitions per cell; the median is reported.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Flush caches before every repetition.
    #[arg(long)]
    flush: bool,
    /// Seed for the operand data.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output format: csv, plotdata or summary.
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Cache geometry file (key=value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SingleArgs {
    /// Rows of A and C.
    #[arg(long)]
    m: usize,
    /// Columns of B and C.
    #[arg(long)]
    n: usize,
    /// Columns of A, rows of B.
    #[arg(long)]
    k: usize,
    /// Row stride for every operand; omit to use max(N, K).
    #[arg(long)]
    stride: Option<usize>,
    /// Kernel: naive, scalar or vector.
    #[arg(long, default_value = "vector")]
    variant: KernelVariant,
    /// Timed repetitions; the median is reported.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Flush caches before every repetition.
    #[arg(long)]
    flush: bool,
    /// Seed for the operand data.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Cache geometry file (key=value lines).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest dimension of the random problems.
    #[arg(long, default_value_t = 48)]
    max_size: usize,
    /// Seed for case generation.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Sweep(args) => sweep(args),
        Command::Single(args) => single(args),
        Command::Verify(args) => verify(args),
    }
}

fn load_geometry(path: Option<&Path>) -> Result<HostGeometry> {
    match path {
        None => Ok(HostGeometry::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(HostGeometry::parse(&text)?)
        }
    }
}

fn report_pinning() {
    if pin_to_cpu(0) {
        eprintln!("pinned to cpu 0");
    } else {
        eprintln!("cpu pinning unavailable; timings may be noisier");
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep(args: SweepArgs) -> Result<()> {
    let geometry = load_geometry(args.config.as_deref())?;
    let protocol = Protocol::from_geometry(geometry, args.flush, args.seed)?;
    let spec = SweepSpec {
        size_min: args.min,
        size_max: args.max,
        size_step: args.step,
        stride: args.stride,
        allow_short_stride: args.allow_short_stride,
        variants: args.variants,
        reps: args.reps,
        flush: args.flush,
        seed: args.seed,
    };
    spec.validate()?;
    report_pinning();
    let total = spec.sizes().count() * spec.variants.len();
    let mut done = 0usize;
    let (records, failures) = run_sweep(&spec, &protocol, |r| {
        done += 1;
        eprintln!("[{done}/{total}] {:>6} {:>4}  {:>9.1} mflops", r.variant.to_string(), r.m, r.mflops);
    })?;
    for f in &failures {
        eprintln!("failed: {} at size {}: {}", f.variant, f.size, f.error);
    }
    write_out(args.out.as_deref(), &emit_report(&records, args.format)?)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Report(format!(
            "{} of {} sweep cells failed",
            failures.len(),
            total
        )))
    }
}

fn single(args: SingleArgs) -> Result<()> {
    let geometry = load_geometry(args.config.as_deref())?;
    let protocol = Protocol::from_geometry(geometry, args.flush, args.seed)?;
    let dims = Dims::new(args.m, args.n, args.k);
    let stride = args.stride.unwrap_or(dims.n.max(dims.k));
    report_pinning();
    let record = time_gemm(args.variant, dims, stride, args.reps, &protocol)?;
    print!("{}", emit_report(&[record], ReportFormat::Csv)?);
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let report = run_verify(args.max_size, args.seed)?;
    println!("{report}");
    println!("ok");
    Ok(())
}
