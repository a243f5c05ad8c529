//! Property tests for the kernel, packing and capacity-model invariants.

use proptest::prelude::*;

use sgemm_core::config::{derive_l1_k, BlockingConfig, CacheGeometry};
use sgemm_core::kernel::{microkernel, microkernel_reference, LANES, TILE_COLS};
use sgemm_core::matrix::{flop_count, max_abs_diff, Dims, Matrix};
use sgemm_core::oracle::{accumulation_bound, dot_f64};
use sgemm_core::pack::{pack_b_panel, pad_to_multiple, PackedPanel, PANEL_ALIGN};

fn a_row_for(k: usize, seed: u64) -> Vec<f32> {
    let m = Matrix::uniform(1, k, k, seed).unwrap();
    m.as_slice().to_vec()
}

fn panel_for(k: usize, seed: u64) -> (Matrix, PackedPanel) {
    let b = Matrix::uniform(k, TILE_COLS, TILE_COLS, seed).unwrap();
    let panel = pack_b_panel(&b.view(), 0, k, 0, TILE_COLS, &BlockingConfig::default()).unwrap();
    (b, panel)
}

fn panel_column(panel: &PackedPanel, c: usize) -> Vec<f32> {
    (0..panel.k_padded()).map(|k| panel.element(k, c)).collect()
}

/// Map float bits onto a line where adjacent representable values differ
/// by one, so ulp distance works across the sign boundary.
fn total_order_key(x: f32) -> i64 {
    let b = x.to_bits() as i32;
    (if b < 0 { i32::MIN.wrapping_sub(b) } else { b }) as i64
}

proptest! {
    // The vector kernel and its lane-emulating scalar twin never drift
    // apart, including on the padded lengths the driver produces.
    #[test]
    fn kernel_bit_exact(
        k in prop_oneof![Just(16usize), Just(336), Just(352)],
        seed in any::<u64>(),
    ) {
        let (_, panel) = panel_for(k, seed);
        let a = a_row_for(panel.k_padded(), seed ^ 0x9e37_79b9_7f4a_7c15);
        let fast = microkernel(&a, &panel).unwrap();
        let slow = microkernel_reference(&a, &panel).unwrap();
        for c in 0..TILE_COLS {
            prop_assert_eq!(fast.values[c].to_bits(), slow.values[c].to_bits());
        }
    }

    // Each dot product stays within the f32 accumulation budget of the
    // exact (double precision) answer.
    #[test]
    fn kernel_accuracy_vs_f64(
        k in prop_oneof![Just(16usize), Just(100), Just(336), Just(352)],
        seed in any::<u64>(),
    ) {
        let (_, panel) = panel_for(k, seed);
        let a = a_row_for(panel.k_padded(), seed ^ 0x5151_5151_5151_5151);
        let tile = microkernel(&a, &panel).unwrap();
        let bound = accumulation_bound(4.0, panel.k_padded(), 1.0);
        for c in 0..TILE_COLS {
            let exact = dot_f64(&a, &panel_column(&panel, c));
            prop_assert!(
                (tile.values[c] as f64 - exact).abs() <= bound,
                "col {}: {} vs {}", c, tile.values[c], exact
            );
        }
    }

    // Scaling the A row by a power of two scales every output exactly.
    #[test]
    fn kernel_linearity(
        k in prop_oneof![Just(16usize), Just(336)],
        seed in any::<u64>(),
        alpha in prop_oneof![Just(0.5f32), Just(2.0), Just(-1.0), Just(-4.0)],
    ) {
        let (_, panel) = panel_for(k, seed);
        let a = a_row_for(panel.k_padded(), seed ^ 0xabcd);
        let scaled: Vec<f32> = a.iter().map(|v| alpha * v).collect();
        let base = microkernel(&a, &panel).unwrap();
        let scaled_tile = microkernel(&scaled, &panel).unwrap();
        for c in 0..TILE_COLS {
            let expect = alpha * base.values[c];
            let got = scaled_tile.values[c];
            let ulps = (total_order_key(got) - total_order_key(expect)).abs();
            prop_assert!(ulps <= 1, "col {}: {} vs {} ({} ulps)", c, got, expect, ulps);
        }
    }

    // Appending one whole unroll block of zeros to both operands cannot
    // change a single bit of the result.
    #[test]
    fn kernel_zero_padding_safety(k_len in 1usize..80, seed in any::<u64>()) {
        let cfg = BlockingConfig::default();
        let b = Matrix::uniform(k_len, TILE_COLS, TILE_COLS, seed).unwrap();
        let panel = pack_b_panel(&b.view(), 0, k_len, 0, TILE_COLS, &cfg).unwrap();
        let mut a = a_row_for(k_len, seed ^ 0xfeed);
        a.resize(panel.k_padded(), 0.0);
        let tile = microkernel(&a, &panel).unwrap();

        let extended_rows = panel.k_padded() + cfg.unroll;
        let b_ext = Matrix::filled(extended_rows, TILE_COLS, TILE_COLS, |i, j| {
            if i < k_len { b.get(i, j) } else { 0.0 }
        })
        .unwrap();
        let panel_ext = pack_b_panel(&b_ext.view(), 0, extended_rows, 0, TILE_COLS, &cfg).unwrap();
        prop_assert_eq!(panel_ext.k_padded(), extended_rows);
        let mut a_ext = a.clone();
        a_ext.resize(extended_rows, 0.0);
        let tile_ext = microkernel(&a_ext, &panel_ext).unwrap();
        for c in 0..TILE_COLS {
            prop_assert_eq!(tile.values[c].to_bits(), tile_ext.values[c].to_bits());
        }
    }

    // Panel columns are zero beyond the source length, so whatever the A
    // row carries in its padding region is multiplied away exactly.
    #[test]
    fn kernel_ignores_a_tail_garbage(
        k_len in 1usize..48,
        seed in any::<u64>(),
        tail_a in -1000.0f32..1000.0,
        tail_b in -1000.0f32..1000.0,
    ) {
        let (_, panel) = panel_for(k_len, seed);
        let mut one = a_row_for(k_len, seed ^ 0xbeef);
        one.resize(panel.k_padded(), tail_a);
        let mut two = one[..k_len].to_vec();
        two.resize(panel.k_padded(), tail_b);
        let t1 = microkernel(&one, &panel).unwrap();
        let t2 = microkernel(&two, &panel).unwrap();
        for c in 0..TILE_COLS {
            prop_assert_eq!(t1.values[c].to_bits(), t2.values[c].to_bits());
        }
    }
}

fn slice_params() -> impl Strategy<Value = (usize, usize, usize, usize, usize, usize)> {
    (1usize..40, 1usize..12).prop_flat_map(|(rows, cols)| {
        (Just(rows), Just(cols), 0..rows, 0..cols).prop_flat_map(|(rows, cols, rs, cs)| {
            (
                Just(rows),
                Just(cols),
                Just(rs),
                Just(cs),
                1..=rows - rs,
                1..=(cols - cs).min(TILE_COLS),
            )
        })
    })
}

proptest! {
    // Unpacking reproduces the source slice exactly, zeros elsewhere, and
    // the buffer shape and alignment invariants hold.
    #[test]
    fn pack_roundtrip(
        (rows, cols, row_start, col_start, k_len, n_cols) in slice_params(),
        pad in 0usize..5,
        seed in any::<u64>(),
    ) {
        let cfg = BlockingConfig::default();
        let b = Matrix::uniform(rows, cols, cols + pad, seed).unwrap();
        let panel = pack_b_panel(&b.view(), row_start, k_len, col_start, n_cols, &cfg).unwrap();

        prop_assert_eq!(panel.k_padded(), pad_to_multiple(k_len, cfg.unroll));
        prop_assert_eq!(panel.as_slice().len(), panel.k_padded() * TILE_COLS);
        prop_assert_eq!(panel.as_slice().as_ptr() as usize % PANEL_ALIGN, 0);
        prop_assert_eq!(panel.as_slice().as_ptr() as usize % (LANES * 4), 0);

        for k in 0..panel.k_padded() {
            for c in 0..TILE_COLS {
                let expect = if k < k_len && c < n_cols {
                    b.get(row_start + k, col_start + c)
                } else {
                    0.0
                };
                prop_assert_eq!(panel.element(k, c).to_bits(), expect.to_bits());
            }
        }
    }

    #[test]
    fn pad_to_multiple_properties(x in 0usize..100_000, m in 1usize..128) {
        let padded = pad_to_multiple(x, m);
        prop_assert!(padded >= x);
        prop_assert!(padded >= m);
        prop_assert_eq!(padded % m, 0);
        prop_assert!(padded < x.max(1) + m);
        prop_assert_eq!(pad_to_multiple(padded, m), padded);
    }
}

proptest! {
    // The capacity model: output granularity, the budget ceiling, and
    // monotone response to each input.
    #[test]
    fn capacity_model_properties(
        bank_units in 1usize..65_536,
        ways in 1usize..=16,
        n_prime in 1usize..=8,
        util_lo in 0.05f64..=1.0,
        util_hi in 0.05f64..=1.0,
        unroll in prop_oneof![Just(4usize), Just(8), Just(16), Just(32)],
    ) {
        let (util_lo, util_hi) = if util_lo <= util_hi { (util_lo, util_hi) } else { (util_hi, util_lo) };
        let capacity = bank_units * ways * 4;
        let geom = CacheGeometry::new(capacity, ways, 4).unwrap();

        match derive_l1_k(geom, n_prime, util_hi, unroll) {
            Ok(k) => {
                prop_assert_eq!(k % unroll, 0);
                prop_assert!(k >= unroll);
                let budget = geom.bank_floats() as f64 * util_hi / n_prime as f64;
                prop_assert!(k as f64 <= budget);

                // more capacity never shrinks the panel
                let bigger = CacheGeometry::new(capacity * 2, ways, 4).unwrap();
                prop_assert!(derive_l1_k(bigger, n_prime, util_hi, unroll).unwrap() >= k);

                // lower utilization or more columns never grow it
                if let Ok(lo) = derive_l1_k(geom, n_prime, util_lo, unroll) {
                    prop_assert!(lo <= k);
                }
                if let Ok(crowded) = derive_l1_k(geom, n_prime + 1, util_hi, unroll) {
                    prop_assert!(crowded <= k);
                }
                // more ways split the same capacity into smaller banks
                let split = CacheGeometry::new(capacity * 2, ways * 2, 4).unwrap();
                prop_assert_eq!(split.bank_floats(), geom.bank_floats());
                prop_assert_eq!(derive_l1_k(split, n_prime, util_hi, unroll).unwrap(), k);
            }
            Err(_) => {
                let raw = (geom.bank_floats() as f64 * util_hi / n_prime as f64).floor() as usize;
                prop_assert!(raw < unroll);
            }
        }
    }

    #[test]
    fn flop_count_symmetry(m in 0usize..10_000, n in 0usize..10_000, k in 0usize..10_000) {
        let base = flop_count(Dims::new(m, n, k)).unwrap();
        for dims in [
            Dims::new(m, k, n),
            Dims::new(n, m, k),
            Dims::new(n, k, m),
            Dims::new(k, m, n),
            Dims::new(k, n, m),
        ] {
            prop_assert_eq!(flop_count(dims).unwrap(), base);
        }
        prop_assert_eq!(base, 2 * (m as u64) * (n as u64) * (k as u64));
    }

    #[test]
    fn max_abs_diff_symmetry(
        rows in 1usize..20,
        cols in 1usize..20,
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let a = Matrix::uniform(rows, cols, cols + 2, s1).unwrap();
        let b = Matrix::uniform(rows, cols, cols, s2).unwrap();
        let d_ab = max_abs_diff(&a.view(), &b.view()).unwrap();
        let d_ba = max_abs_diff(&b.view(), &a.view()).unwrap();
        prop_assert_eq!(d_ab.to_bits(), d_ba.to_bits());
        prop_assert_eq!(max_abs_diff(&a.view(), &a.view()).unwrap(), 0.0);
        prop_assert!(d_ab >= 0.0);
    }
}
