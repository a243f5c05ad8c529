//! Wall-clock timing of multiply calls.

use std::hint::black_box;
use std::time::Instant;

use sgemm_core::config::{BlockingConfig, HostGeometry};
use sgemm_core::gemm::{sgemm_with, KernelVariant};
use sgemm_core::matrix::{Dims, Matrix};

use crate::flush::{default_flush_bytes, flush_caches};
use crate::record::{BenchRecord, SweepSpec};
use crate::{Error, Result};

/// Everything a timed run needs beyond the problem itself.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub config: BlockingConfig,
    pub geometry: HostGeometry,
    pub flush: bool,
    pub seed: u64,
}

impl Protocol {
    /// Blocking parameters derived from the given cache geometry.
    pub fn from_geometry(geometry: HostGeometry, flush: bool, seed: u64) -> Result<Protocol> {
        let config = BlockingConfig::for_host(&geometry)?;
        Ok(Protocol {
            config,
            geometry,
            flush,
            seed,
        })
    }

    pub fn flush_bytes(&self) -> usize {
        default_flush_bytes(self.geometry.l2_capacity_bytes)
    }
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            config: BlockingConfig::default(),
            geometry: HostGeometry::default(),
            flush: false,
            seed: 42,
        }
    }
}

/// Time `reps` multiply calls at the given shape and report the median.
///
/// A and B get seeded uniform [-1, 1] data laid out at `stride`; the
/// stride must cover both row lengths (N and K). Caches are optionally
/// flushed before every rep so no operand starts warm.
pub fn time_gemm(
    variant: KernelVariant,
    dims: Dims,
    stride: usize,
    reps: usize,
    protocol: &Protocol,
) -> Result<BenchRecord> {
    if stride < dims.n.max(dims.k) {
        return Err(Error::Core(sgemm_core::Error::InvalidStride {
            stride,
            min: dims.n.max(dims.k),
            what: "benchmark stride must cover the row length of A, B and C",
        }));
    }
    if reps == 0 {
        return Err(Error::Report("reps must be at least 1".into()));
    }

    let a = Matrix::uniform(dims.m, dims.k, stride, protocol.seed)?;
    let b = Matrix::uniform(dims.k, dims.n, stride, protocol.seed ^ 0x5bd1_e995)?;
    let mut c = Matrix::zeros(dims.m, dims.n, stride)?;

    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        if protocol.flush {
            flush_caches(protocol.flush_bytes(), protocol.geometry.l2_capacity_bytes)?;
        }
        let start = Instant::now();
        sgemm_with(
            1.0,
            &a.view(),
            &b.view(),
            0.0,
            &mut c.view_mut(),
            &protocol.config,
            variant,
        )?;
        times.push(start.elapsed().as_secs_f64());
        black_box(&c);
    }
    times.sort_by(f64::total_cmp);
    let seconds = times[(times.len() - 1) / 2];
    BenchRecord::new(variant, dims, stride, reps, seconds)
}

/// A sweep entry that could not be measured.
#[derive(Debug)]
pub struct SweepFailure {
    pub size: usize,
    pub variant: KernelVariant,
    pub error: Error,
}

/// Run every (size, variant) cell of the sweep. Failed cells are
/// collected rather than aborting the remaining measurements;
/// `on_record` fires after each successful one (progress reporting).
pub fn run_sweep(
    spec: &SweepSpec,
    protocol: &Protocol,
    mut on_record: impl FnMut(&BenchRecord),
) -> Result<(Vec<BenchRecord>, Vec<SweepFailure>)> {
    spec.validate()?;
    let protocol = Protocol {
        flush: spec.flush,
        seed: spec.seed,
        ..protocol.clone()
    };
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for size in spec.sizes() {
        for &variant in &spec.variants {
            match time_gemm(
                variant,
                Dims::square(size),
                spec.stride_for(size),
                spec.reps,
                &protocol,
            ) {
                Ok(record) => {
                    on_record(&record);
                    records.push(record);
                }
                Err(error) => failures.push(SweepFailure {
                    size,
                    variant,
                    error,
                }),
            }
        }
    }
    Ok((records, failures))
}
