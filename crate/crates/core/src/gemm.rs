//! SGEMM entry points: `C <- alpha * A * B + beta * C`.
//!
//! Three interchangeable variants. `Naive` is the textbook triple loop
//! and exists as a baseline and oracle. The blocked variants share one
//! driver: the L2 level walks column blocks of B (outer), row blocks of A
//! (middle) and the common dimension (inner) in `l2_n x l2_m x l2_k`
//! steps; inside a block, the L1 level packs five columns of B at a time
//! into an aligned panel and runs the microkernel over each row of A.
//! `BlockedScalar` and `BlockedVector` differ only in the microkernel
//! body and produce bit-identical output.
//!
//! The common dimension is zero-padded (packed panels pad themselves; the
//! matching A row segment is copied to a zero-tailed scratch row when its
//! length is not a multiple of the unroll factor). A short final panel
//! keeps full width with ghost columns whose results are discarded, so C
//! is never written outside its bounds.

use std::fmt;
use std::str::FromStr;

use crate::config::BlockingConfig;
use crate::error::{Error, Result};
use crate::kernel::{microkernel, microkernel_reference, TILE_COLS};
use crate::matrix::{MatrixView, MatrixViewMut};
use crate::pack::{pad_to_multiple, PackedPanel};

/// Which multiply implementation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelVariant {
    /// Triple loop, strictly sequential accumulation.
    Naive,
    /// Blocked driver with the lane-emulating scalar microkernel.
    BlockedScalar,
    /// Blocked driver with the SIMD microkernel.
    BlockedVector,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 3] = [
        KernelVariant::Naive,
        KernelVariant::BlockedScalar,
        KernelVariant::BlockedVector,
    ];
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            KernelVariant::Naive => "naive",
            KernelVariant::BlockedScalar => "scalar",
            KernelVariant::BlockedVector => "vector",
        };
        f.write_str(name)
    }
}

impl FromStr for KernelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(KernelVariant::Naive),
            "scalar" => Ok(KernelVariant::BlockedScalar),
            "vector" => Ok(KernelVariant::BlockedVector),
            other => Err(Error::InvalidConfig(format!(
                "unknown variant `{}` (expected naive, scalar or vector)",
                other
            ))),
        }
    }
}

/// `C <- alpha * A * B + beta * C` with the default blocking and the SIMD
/// kernel.
pub fn sgemm(
    alpha: f32,
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    beta: f32,
    c: &mut MatrixViewMut<'_>,
) -> Result<()> {
    sgemm_with(
        alpha,
        a,
        b,
        beta,
        c,
        &BlockingConfig::default(),
        KernelVariant::BlockedVector,
    )
}

/// [`sgemm`] with explicit blocking parameters and variant choice.
///
/// Validation happens before any write: on error C is untouched.
pub fn sgemm_with(
    alpha: f32,
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    beta: f32,
    c: &mut MatrixViewMut<'_>,
    config: &BlockingConfig,
    variant: KernelVariant,
) -> Result<()> {
    check_operands(a, b, c)?;
    match variant {
        KernelVariant::Naive => {
            naive_inner(alpha, a, b, beta, c);
            Ok(())
        }
        KernelVariant::BlockedScalar => blocked_inner(alpha, a, b, beta, c, config, false),
        KernelVariant::BlockedVector => blocked_inner(alpha, a, b, beta, c, config, true),
    }
}

/// Baseline triple loop: for each output element, one strictly sequential
/// left-to-right dot product in single precision, then
/// `alpha * sum + beta * old`.
pub fn gemm_naive(
    alpha: f32,
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    beta: f32,
    c: &mut MatrixViewMut<'_>,
) -> Result<()> {
    check_operands(a, b, c)?;
    naive_inner(alpha, a, b, beta, c);
    Ok(())
}

fn check_operands(a: &MatrixView<'_>, b: &MatrixView<'_>, c: &MatrixViewMut<'_>) -> Result<()> {
    if a.rows() != c.rows() || a.cols() != b.rows() || b.cols() != c.cols() {
        return Err(Error::ShapeMismatch(format!(
            "A {}x{} * B {}x{} -> C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    if ranges_overlap(c.ptr_range(), a.ptr_range()) || ranges_overlap(c.ptr_range(), b.ptr_range())
    {
        return Err(Error::Aliasing);
    }
    Ok(())
}

fn ranges_overlap(x: (usize, usize), y: (usize, usize)) -> bool {
    x.0 < y.1 && y.0 < x.1
}

/// `beta == 0` treats C as zero without reading it, so stale NaN or Inf
/// in the output buffer cannot leak through.
fn scale_c(c: &mut MatrixViewMut<'_>, beta: f32) {
    for i in 0..c.rows() {
        for slot in c.row_mut(i) {
            *slot = if beta == 0.0 { 0.0 } else { beta * *slot };
        }
    }
}

fn naive_inner(
    alpha: f32,
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    beta: f32,
    c: &mut MatrixViewMut<'_>,
) {
    if alpha == 0.0 || a.cols() == 0 {
        scale_c(c, beta);
        return;
    }
    let n = c.cols();
    for i in 0..c.rows() {
        let a_row = a.row(i);
        for j in 0..n {
            let mut acc = 0.0f32;
            for (z, &av) in a_row.iter().enumerate() {
                acc += av * b.get(z, j);
            }
            let value = if beta == 0.0 {
                alpha * acc
            } else {
                alpha * acc + beta * c.get(i, j)
            };
            c.set(i, j, value);
        }
    }
}

fn blocked_inner(
    alpha: f32,
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    beta: f32,
    c: &mut MatrixViewMut<'_>,
    config: &BlockingConfig,
    vector: bool,
) -> Result<()> {
    config.validate()?;
    if config.l1_n != TILE_COLS {
        return Err(Error::UnsupportedConfig(format!(
            "l1_n {} (the microkernel computes {} dot products)",
            config.l1_n, TILE_COLS
        )));
    }
    let documented = BlockingConfig::default();
    if config.l2_loop_order != documented.l2_loop_order
        || config.l1_loop_order != documented.l1_loop_order
    {
        return Err(Error::UnsupportedConfig(
            "only the documented loop orders are implemented \
             (L2: cols-of-B over common-K, L1: cols-of-B over rows-of-A)"
                .into(),
        ));
    }

    let m = c.rows();
    let n = c.cols();
    let k = a.cols();
    if alpha == 0.0 || k == 0 {
        scale_c(c, beta);
        return Ok(());
    }

    let kernel = if vector {
        microkernel
    } else {
        microkernel_reference
    };
    // First K-block: alpha * v + beta * old (old ignored when beta is 0,
    // so stale non-finite C never leaks). Later K-blocks accumulate.
    let combine = move |old: f32, value: f32, first_k_block: bool| {
        if first_k_block {
            if beta == 0.0 {
                alpha * value
            } else {
                alpha * value + beta * old
            }
        } else {
            old + alpha * value
        }
    };
    let mut panel = PackedPanel::with_capacity(pad_to_multiple(config.l2_k, config.unroll), TILE_COLS);
    let mut a_scratch = vec![0.0f32; pad_to_multiple(config.l2_k, config.unroll)];

    for nb in (0..n).step_by(config.l2_n) {
        let nb_w = config.l2_n.min(n - nb);
        for mb in (0..m).step_by(config.l2_m) {
            let mb_w = config.l2_m.min(m - mb);
            for kb in (0..k).step_by(config.l2_k) {
                let kb_w = config.l2_k.min(k - kb);
                let first_k_block = kb == 0;
                for pc in (nb..nb + nb_w).step_by(TILE_COLS) {
                    let pc_w = TILE_COLS.min(nb + nb_w - pc);
                    panel.pack(b, kb, kb_w, pc, pc_w, config)?;
                    let k_padded = panel.k_padded();
                    for i in mb..mb + mb_w {
                        let a_seg = &a.row(i)[kb..kb + kb_w];
                        let tile = if kb_w == k_padded {
                            kernel(a_seg, &panel)?
                        } else {
                            a_scratch[..kb_w].copy_from_slice(a_seg);
                            a_scratch[kb_w..k_padded].fill(0.0);
                            kernel(&a_scratch[..k_padded], &panel)?
                        };
                        let row = &mut c.row_mut(i)[pc..pc + pc_w];
                        for (slot, &value) in row.iter_mut().zip(tile.values.iter()) {
                            *slot = combine(*slot, value, first_k_block);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
