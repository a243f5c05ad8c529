//! The innermost kernel: five dot products at once.
//!
//! One row of A is multiplied against the five columns of a packed B
//! panel. Each accumulator register holds four partial sums (one per
//! vector lane); a loaded A vector is reused for all five columns, panel
//! vectors stream through two alternating registers, and five registers
//! accumulate, so the whole loop body lives in eight vector registers.
//! The body processes sixteen dot-product elements (four lane groups) per
//! fully unrolled iteration: 20 multiplies and 20 adds.
//!
//! Lanes are combined only after the loop, in a fixed pairwise order:
//! `(lane0 + lane1) + (lane2 + lane3)`. The scalar reference kernel keeps
//! the same four partial sums per column and the same reduction order, and
//! neither path uses fused multiply-add, so the two are bit-identical on
//! every input.

use crate::error::{Error, Result};
use crate::pack::PackedPanel;

/// Vector lanes per register (single precision SSE).
pub const LANES: usize = 4;

/// Simultaneous dot products per micro tile.
pub const TILE_COLS: usize = 5;

/// How many elements ahead of the current A position to prefetch.
pub const DEFAULT_PREFETCH_DISTANCE: usize = 32;

const _: () = assert!(LANES == 4, "lane reduction below is written for W = 4");

/// Four partial sums for each of the five dot products in flight.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaneAccumulators {
    pub acc: [[f32; LANES]; TILE_COLS],
}

impl LaneAccumulators {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fold in one lane group: `LANES` elements of the A row against the
    /// matching `LANES * TILE_COLS` panel slice.
    #[inline]
    pub fn accumulate_group(&mut self, a: &[f32; LANES], panel_group: &[f32]) {
        debug_assert_eq!(panel_group.len(), LANES * TILE_COLS);
        for (c, lanes) in self.acc.iter_mut().enumerate() {
            let b = &panel_group[c * LANES..(c + 1) * LANES];
            for lane in 0..LANES {
                lanes[lane] += a[lane] * b[lane];
            }
        }
    }

    /// Combine lanes pairwise: `(lane0 + lane1) + (lane2 + lane3)`.
    pub fn reduce(&self) -> MicroTile {
        let mut values = [0.0f32; TILE_COLS];
        for (value, lanes) in values.iter_mut().zip(self.acc.iter()) {
            *value = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
        }
        MicroTile { values }
    }
}

/// The five completed dot products for one row of the output tile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroTile {
    pub values: [f32; TILE_COLS],
}

/// Advisory prefetch of the cache line `distance` elements past `address`.
/// Never faults, regardless of where the resulting address points.
#[inline(always)]
pub fn prefetch_hint(address: *const f32, distance: usize) {
    #[cfg(target_arch = "x86_64")]
    unsafe {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        _mm_prefetch(address.wrapping_add(distance) as *const i8, _MM_HINT_T0);
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        let _ = (address, distance);
    }
}

fn check_kernel_inputs(a_row: &[f32], panel: &PackedPanel) -> Result<()> {
    if panel.width() != TILE_COLS {
        return Err(Error::KernelShape(format!(
            "panel width {} (kernel computes {} dot products)",
            panel.width(),
            TILE_COLS
        )));
    }
    if !panel.k_padded().is_multiple_of(LANES) {
        return Err(Error::KernelShape(format!(
            "panel length {} not a multiple of {} lanes",
            panel.k_padded(),
            LANES
        )));
    }
    if a_row.len() != panel.k_padded() {
        return Err(Error::KernelShape(format!(
            "A row of {} elements against a panel of length {}",
            a_row.len(),
            panel.k_padded()
        )));
    }
    Ok(())
}

/// Five dot products of `a_row` against the panel columns, with the
/// default prefetch distance.
///
/// `a_row` must be exactly `panel.k_padded()` long; the caller supplies
/// zeros beyond the true K so the padding contributes nothing.
pub fn microkernel(a_row: &[f32], panel: &PackedPanel) -> Result<MicroTile> {
    microkernel_with_prefetch(a_row, panel, DEFAULT_PREFETCH_DISTANCE)
}

/// [`microkernel`] with an explicit prefetch distance; 0 disables hints.
pub fn microkernel_with_prefetch(
    a_row: &[f32],
    panel: &PackedPanel,
    distance: usize,
) -> Result<MicroTile> {
    check_kernel_inputs(a_row, panel)?;
    #[cfg(target_arch = "x86_64")]
    {
        Ok(MicroTile {
            values: dot5_sse(a_row, panel.as_slice(), distance),
        })
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        let _ = distance;
        Ok(reference_tile(a_row, panel))
    }
}

/// Scalar kernel maintaining the same four partial sums per column and
/// the same reduction order as the vector path; bit-identical to
/// [`microkernel`] on every input.
pub fn microkernel_reference(a_row: &[f32], panel: &PackedPanel) -> Result<MicroTile> {
    check_kernel_inputs(a_row, panel)?;
    Ok(reference_tile(a_row, panel))
}

fn reference_tile(a_row: &[f32], panel: &PackedPanel) -> MicroTile {
    let group_stride = LANES * TILE_COLS;
    let buf = panel.as_slice();
    let mut acc = LaneAccumulators::new();
    for (g, a_group) in a_row.chunks_exact(LANES).enumerate() {
        let a: &[f32; LANES] = a_group.try_into().expect("chunk of LANES");
        acc.accumulate_group(a, &buf[g * group_stride..(g + 1) * group_stride]);
    }
    acc.reduce()
}

#[cfg(target_arch = "x86_64")]
fn dot5_sse(a_row: &[f32], panel: &[f32], prefetch: usize) -> [f32; TILE_COLS] {
    use std::arch::x86_64::*;

    debug_assert_eq!(a_row.len() % LANES, 0);
    debug_assert_eq!(panel.len(), a_row.len() * TILE_COLS);
    // Packing aligns the buffer to 64 bytes and each column group spans
    // 16 bytes, so every panel load below is 16-byte aligned.
    debug_assert_eq!(panel.as_ptr() as usize % (LANES * 4), 0);

    let groups = a_row.len() / LANES;
    unsafe {
        let mut acc0 = _mm_setzero_ps();
        let mut acc1 = _mm_setzero_ps();
        let mut acc2 = _mm_setzero_ps();
        let mut acc3 = _mm_setzero_ps();
        let mut acc4 = _mm_setzero_ps();
        let mut ap = a_row.as_ptr();
        let mut pp = panel.as_ptr();

        // One lane group: an A vector reused five times, panel loads
        // alternating through two temporaries, one multiply and one add
        // per column. No fused multiply-add.
        macro_rules! group {
            () => {{
                let a = _mm_loadu_ps(ap);
                let mut b_even = _mm_load_ps(pp);
                let mut b_odd = _mm_load_ps(pp.add(LANES));
                acc0 = _mm_add_ps(acc0, _mm_mul_ps(a, b_even));
                acc1 = _mm_add_ps(acc1, _mm_mul_ps(a, b_odd));
                b_even = _mm_load_ps(pp.add(2 * LANES));
                acc2 = _mm_add_ps(acc2, _mm_mul_ps(a, b_even));
                b_odd = _mm_load_ps(pp.add(3 * LANES));
                acc3 = _mm_add_ps(acc3, _mm_mul_ps(a, b_odd));
                b_even = _mm_load_ps(pp.add(4 * LANES));
                acc4 = _mm_add_ps(acc4, _mm_mul_ps(a, b_even));
                ap = ap.add(LANES);
                pp = pp.add(LANES * TILE_COLS);
            }};
        }

        let mut g = 0;
        while g + 4 <= groups {
            if prefetch > 0 {
                prefetch_hint(ap, prefetch);
            }
            group!();
            group!();
            group!();
            group!();
            g += 4;
        }
        while g < groups {
            group!();
            g += 1;
        }

        let accs = [acc0, acc1, acc2, acc3, acc4];
        let mut values = [0.0f32; TILE_COLS];
        for (value, acc) in values.iter_mut().zip(accs.iter()) {
            let mut lanes = [0.0f32; LANES];
            _mm_storeu_ps(lanes.as_mut_ptr(), *acc);
            *value = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
        }
        values
    }
}
