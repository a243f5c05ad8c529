//! Double-precision reference results and error bounds.
//!
//! Every accumulation path in the library is single precision; the oracle
//! recomputes the product in f64, where the worst-case rounding error of
//! any K-length f32 accumulation is invisible. Comparisons against it
//! bound the true error rather than the distance between two equally
//! rounded answers.

use crate::error::{Error, Result};
use crate::matrix::MatrixView;

/// Unit roundoff of f32 (2^-24): the relative error of one rounding.
pub const UNIT_ROUNDOFF_F32: f64 = 1.0 / 16_777_216.0;

/// `alpha * A * B + beta * C_old` accumulated in f64, returned as a dense
/// row-major M x N buffer.
pub fn gemm_oracle_f64(
    alpha: f32,
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    beta: f32,
    c_old: &MatrixView<'_>,
) -> Result<Vec<f64>> {
    if a.rows() != c_old.rows() || a.cols() != b.rows() || b.cols() != c_old.cols() {
        return Err(Error::ShapeMismatch(format!(
            "A {}x{} * B {}x{} -> C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c_old.rows(),
            c_old.cols()
        )));
    }
    let (m, n) = (c_old.rows(), c_old.cols());
    let alpha = alpha as f64;
    let beta = beta as f64;
    let mut out = vec![0.0f64; m * n];
    for i in 0..m {
        let a_row = a.row(i);
        for j in 0..n {
            let mut acc = 0.0f64;
            if alpha != 0.0 {
                for (z, &av) in a_row.iter().enumerate() {
                    acc += av as f64 * b.get(z, j) as f64;
                }
            }
            let old = if beta == 0.0 {
                0.0
            } else {
                beta * c_old.get(i, j) as f64
            };
            out[i * n + j] = alpha * acc + old;
        }
    }
    Ok(out)
}

/// Largest `|c[i][j] - oracle[i][j]|`; NaN anywhere reports as infinity.
pub fn max_abs_error(c: &MatrixView<'_>, oracle: &[f64]) -> Result<f64> {
    if oracle.len() != c.rows() * c.cols() {
        return Err(Error::ShapeMismatch(format!(
            "oracle holds {} values for a {}x{} result",
            oracle.len(),
            c.rows(),
            c.cols()
        )));
    }
    let mut worst = 0.0f64;
    for i in 0..c.rows() {
        for (j, &value) in c.row(i).iter().enumerate() {
            let d = (value as f64 - oracle[i * c.cols() + j]).abs();
            if d.is_nan() {
                return Ok(f64::INFINITY);
            }
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// Largest magnitude over in-bounds elements.
pub fn max_abs(m: &MatrixView<'_>) -> f32 {
    let mut worst = 0.0f32;
    for i in 0..m.rows() {
        for &v in m.row(i) {
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// Sequential dot product in f64 over paired f32 slices.
pub fn dot_f64(x: &[f32], y: &[f32]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y.iter())
        .map(|(&a, &b)| a as f64 * b as f64)
        .sum()
}

/// Error budget for a K-length f32 accumulation against the f64 oracle:
/// `factor * K * 2^-24 * scale`, with `scale` the product of the input
/// magnitudes.
pub fn accumulation_bound(factor: f64, k: usize, scale: f64) -> f64 {
    factor * k as f64 * UNIT_ROUNDOFF_F32 * scale
}
