//! Randomized correctness sweep behind the `verify` subcommand.
//!
//! Three independent references back the blocked vector path: an f64
//! oracle (true-error budget), the naive f32 triple loop (same-precision
//! budget), and the scalar kernel (bit-for-bit equality). A run covers
//! every square size up to the cap, a batch of random shapes, the full
//! alpha/beta grid, and raw kernel calls at the packing boundary sizes.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sgemm_core::config::BlockingConfig;
use sgemm_core::gemm::{sgemm_with, KernelVariant};
use sgemm_core::kernel::{microkernel, microkernel_reference, TILE_COLS};
use sgemm_core::matrix::{Matrix, MatrixView};
use sgemm_core::oracle::{accumulation_bound, gemm_oracle_f64, max_abs, max_abs_error};
use sgemm_core::pack::pack_b_panel;

use crate::{Error, Result};

const ALPHAS: [f32; 4] = [0.0, 1.0, -1.0, 0.5];
const BETAS: [f32; 3] = [0.0, 1.0, 2.0];
const KERNEL_KS: [usize; 3] = [16, 336, 352];
const KERNEL_PAIRS_PER_K: usize = 200;
const RANDOM_TRIPLES: usize = 200;

/// Totals from a completed verification run.
#[derive(Debug, Clone, Copy)]
pub struct VerifyReport {
    pub full_cases: usize,
    pub kernel_pairs: usize,
    /// Worst observed error against the f64 oracle, as a fraction of the
    /// per-case budget (1.0 would be exactly at the limit).
    pub worst_vs_oracle: f64,
    /// Same fraction against the naive f32 baseline.
    pub worst_vs_naive: f64,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "checked {} full problems and {} kernel pairs",
            self.full_cases, self.kernel_pairs
        )?;
        writeln!(
            f,
            "worst error vs f64 oracle: {:.3} of budget",
            self.worst_vs_oracle
        )?;
        write!(
            f,
            "worst error vs naive f32:  {:.3} of budget",
            self.worst_vs_naive
        )
    }
}

struct Case {
    m: usize,
    n: usize,
    k: usize,
    stride_pad: usize,
    alpha: f32,
    beta: f32,
    seed: u64,
}

/// Run one problem through the vector path and both references.
/// Returns the two error fractions on success.
fn check_case(case: &Case, config: &BlockingConfig) -> Result<(f64, f64)> {
    let Case {
        m,
        n,
        k,
        stride_pad,
        alpha,
        beta,
        seed,
    } = *case;
    let label = format!(
        "case m={m} n={n} k={k} pad={stride_pad} alpha={alpha} beta={beta} seed={seed}"
    );
    let a = Matrix::uniform(m, k, k + stride_pad, seed)?;
    let b = Matrix::uniform(k, n, n + stride_pad, seed ^ 0x9e3779b9)?;
    let c0 = Matrix::uniform(m, n, n + stride_pad, seed ^ 0x7f4a7c15)?;

    let mut c_vector = c0.clone();
    sgemm_with(
        alpha,
        &a.view(),
        &b.view(),
        beta,
        &mut c_vector.view_mut(),
        config,
        KernelVariant::BlockedVector,
    )?;

    let scale = (max_abs(&a.view()) as f64 * max_abs(&b.view()) as f64).max(1.0);
    let oracle = gemm_oracle_f64(alpha, &a.view(), &b.view(), beta, &c0.view())?;
    let err_oracle = max_abs_error(&c_vector.view(), &oracle)?;
    let budget_oracle = accumulation_bound(4.0, k, scale);
    if err_oracle > budget_oracle {
        return Err(Error::Verification(format!(
            "{label}: error {err_oracle:e} vs f64 oracle exceeds budget {budget_oracle:e}"
        )));
    }

    let mut c_naive = c0.clone();
    sgemm_with(
        alpha,
        &a.view(),
        &b.view(),
        beta,
        &mut c_naive.view_mut(),
        config,
        KernelVariant::Naive,
    )?;
    let err_naive = max_abs_diff_views(&c_vector.view(), &c_naive.view());
    let budget_naive = accumulation_bound(8.0, k, scale);
    if err_naive > budget_naive {
        return Err(Error::Verification(format!(
            "{label}: distance {err_naive:e} from naive baseline exceeds budget {budget_naive:e}"
        )));
    }

    let mut c_scalar = c0.clone();
    sgemm_with(
        alpha,
        &a.view(),
        &b.view(),
        beta,
        &mut c_scalar.view_mut(),
        config,
        KernelVariant::BlockedScalar,
    )?;
    if !bitwise_equal(&c_vector.view(), &c_scalar.view()) {
        return Err(Error::Verification(format!(
            "{label}: scalar and vector kernels disagree bitwise"
        )));
    }

    Ok((
        fraction(err_oracle, budget_oracle),
        fraction(err_naive, budget_naive),
    ))
}

fn fraction(err: f64, budget: f64) -> f64 {
    if err == 0.0 {
        0.0
    } else {
        err / budget
    }
}

fn max_abs_diff_views(x: &MatrixView<'_>, y: &MatrixView<'_>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..x.rows() {
        for (&xv, &yv) in x.row(i).iter().zip(y.row(i)) {
            let d = (xv as f64 - yv as f64).abs();
            if d.is_nan() {
                return f64::INFINITY;
            }
            worst = worst.max(d);
        }
    }
    worst
}

fn bitwise_equal(x: &MatrixView<'_>, y: &MatrixView<'_>) -> bool {
    (0..x.rows()).all(|i| {
        x.row(i)
            .iter()
            .zip(y.row(i))
            .all(|(a, b)| a.to_bits() == b.to_bits())
    })
}

/// One scalar/vector kernel pair on a random packed panel.
fn check_kernel_pair(k: usize, seed: u64, config: &BlockingConfig) -> Result<()> {
    let a = Matrix::uniform(1, k, k, seed)?;
    let b = Matrix::uniform(k, TILE_COLS, TILE_COLS, seed ^ 0x94d0_49bb)?;
    let panel = pack_b_panel(&b.view(), 0, k, 0, TILE_COLS, config)?;
    let vector = microkernel(a.view().row(0), &panel)?;
    let scalar = microkernel_reference(a.view().row(0), &panel)?;
    for (col, (v, s)) in vector.values.iter().zip(scalar.values.iter()).enumerate() {
        if v.to_bits() != s.to_bits() {
            return Err(Error::Verification(format!(
                "kernel pair k={k} seed={seed} col={col}: vector {v:?} != scalar {s:?}"
            )));
        }
    }
    Ok(())
}

/// Run the whole suite with shapes capped at `max_size`.
pub fn run_verify(max_size: usize, seed: u64) -> Result<VerifyReport> {
    if max_size == 0 {
        return Err(Error::Report("max size must be at least 1".into()));
    }
    let config = BlockingConfig::default();
    config.validate()?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut report = VerifyReport {
        full_cases: 0,
        kernel_pairs: 0,
        worst_vs_oracle: 0.0,
        worst_vs_naive: 0.0,
    };
    let record = |report: &mut VerifyReport, fractions: (f64, f64)| {
        report.full_cases += 1;
        report.worst_vs_oracle = report.worst_vs_oracle.max(fractions.0);
        report.worst_vs_naive = report.worst_vs_naive.max(fractions.1);
    };

    // every square size up to the cap, alternating stride padding
    for size in 1..=max_size {
        let case = Case {
            m: size,
            n: size,
            k: size,
            stride_pad: if size % 2 == 0 { 3 } else { 0 },
            alpha: 1.0,
            beta: 0.0,
            seed: rng.random(),
        };
        record(&mut report, check_case(&case, &config)?);
    }

    // random shapes, random stride padding, random scaling
    for _ in 0..RANDOM_TRIPLES {
        let case = Case {
            m: rng.random_range(1..=max_size),
            n: rng.random_range(1..=max_size),
            k: rng.random_range(1..=max_size),
            stride_pad: [0, 3, 11][rng.random_range(0..3)],
            alpha: ALPHAS[rng.random_range(0..ALPHAS.len())],
            beta: BETAS[rng.random_range(0..BETAS.len())],
            seed: rng.random(),
        };
        record(&mut report, check_case(&case, &config)?);
    }

    // the full scaling grid at one fixed awkward shape
    let (m, n, k) = (
        max_size.div_ceil(2) + 1,
        max_size.max(2) - 1,
        max_size.div_ceil(3) + 1,
    );
    for alpha in ALPHAS {
        for beta in BETAS {
            let case = Case {
                m,
                n,
                k,
                stride_pad: 3,
                alpha,
                beta,
                seed: rng.random(),
            };
            record(&mut report, check_case(&case, &config)?);
        }
    }

    // raw kernel calls at the unroll width, the derived panel length and
    // one padded step beyond it
    for k in KERNEL_KS {
        for _ in 0..KERNEL_PAIRS_PER_K {
            check_kernel_pair(k, rng.random(), &config)?;
            report.kernel_pairs += 1;
        }
    }

    Ok(report)
}
