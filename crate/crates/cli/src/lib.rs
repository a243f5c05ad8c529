//! Measurement harness behind the `bench` binary.
//!
//! The protocol follows the library's benchmarking conventions: square
//! sizes swept at a fixed large stride, caches flushed between calls,
//! wall-clock timing of single calls with the median over repetitions,
//! and MFLOPS derived from the exact `2*M*N*K` flop count.

pub mod flush;
pub mod pin;
pub mod record;
pub mod timing;
pub mod verify;

pub use record::{emit_report, parse_csv, BenchRecord, ReportFormat, SweepSpec};
pub use timing::{run_sweep, time_gemm, Protocol, SweepFailure};

/// Harness-level failures: library errors plus I/O and reporting.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] sgemm_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Report(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
