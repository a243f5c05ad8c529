//! Packed B panels.
//!
//! The kernel streams a panel of `l1_n` (= 5) columns of B front-to-back.
//! Packing copies those columns out of the strided source into one aligned
//! buffer, interleaved by k-group: for group `g` (covering source rows
//! `g*W .. g*W+W`), the buffer holds W consecutive elements of column 0,
//! then W of column 1, and so on. Every per-iteration B read is therefore
//! one contiguous aligned W-vector.
//!
//! Panels are always full width: a remainder of fewer than `l1_n` source
//! columns leaves ghost columns of zeros, and the column length is padded
//! with zeros to a multiple of the unroll factor. The kernel thus has a
//! single shape, and zero padding cannot perturb a dot product.

use std::alloc::{self, Layout};
use std::fmt;
use std::ptr::NonNull;

use crate::config::BlockingConfig;
use crate::error::{Error, Result};
use crate::kernel::LANES;
use crate::matrix::MatrixView;

/// Panel buffer alignment in bytes. A cache line; also covers the 16-byte
/// vector-load requirement.
pub const PANEL_ALIGN: usize = 64;

/// Smallest multiple of `m` that is >= `x`, with the convention that
/// `x == 0` still occupies one full step.
pub fn pad_to_multiple(x: usize, m: usize) -> usize {
    assert!(m >= 1);
    if x == 0 {
        m
    } else {
        x.div_ceil(m) * m
    }
}

/// Heap allocation of `f32` with [`PANEL_ALIGN`] alignment.
struct AlignedBuf {
    ptr: NonNull<f32>,
    len: usize,
}

// Uniquely owned heap memory holding plain floats.
unsafe impl Send for AlignedBuf {}
unsafe impl Sync for AlignedBuf {}

impl AlignedBuf {
    fn layout(len: usize) -> Layout {
        Layout::array::<f32>(len)
            .and_then(|l| l.align_to(PANEL_ALIGN))
            .expect("panel buffer layout")
    }

    fn zeroed(len: usize) -> AlignedBuf {
        if len == 0 {
            return AlignedBuf {
                ptr: NonNull::dangling(),
                len: 0,
            };
        }
        let layout = Self::layout(len);
        let raw = unsafe { alloc::alloc_zeroed(layout) };
        let Some(ptr) = NonNull::new(raw as *mut f32) else {
            alloc::handle_alloc_error(layout);
        };
        debug_assert_eq!(ptr.as_ptr() as usize % PANEL_ALIGN, 0);
        AlignedBuf { ptr, len }
    }

    fn as_slice(&self) -> &[f32] {
        unsafe { std::slice::from_raw_parts(self.ptr.as_ptr(), self.len) }
    }

    fn as_mut_slice(&mut self) -> &mut [f32] {
        unsafe { std::slice::from_raw_parts_mut(self.ptr.as_ptr(), self.len) }
    }
}

impl Drop for AlignedBuf {
    fn drop(&mut self) {
        if self.len != 0 {
            unsafe { alloc::dealloc(self.ptr.as_ptr() as *mut u8, Self::layout(self.len)) };
        }
    }
}

/// An aligned, zero-padded, interleaved copy of up to `width` columns of B.
pub struct PackedPanel {
    buf: AlignedBuf,
    /// Column length including zero padding; multiple of the unroll factor.
    k_padded: usize,
    /// Real (source-backed) columns; the rest up to `width` are ghosts.
    n_cols: usize,
    /// Full panel width, `config.l1_n`.
    width: usize,
    /// Source column length before padding.
    source_k: usize,
}

impl PackedPanel {
    /// Empty panel with room for `max_k * width` elements, for reuse
    /// across many [`PackedPanel::pack`] calls.
    pub fn with_capacity(max_k: usize, width: usize) -> PackedPanel {
        PackedPanel {
            buf: AlignedBuf::zeroed(max_k * width),
            k_padded: 0,
            n_cols: 0,
            width,
            source_k: 0,
        }
    }

    /// Repack from `n_cols` columns of `b` starting at
    /// `(row_start, col_start)`, `k_len` rows long. Reuses the existing
    /// allocation when it is large enough.
    pub fn pack(
        &mut self,
        b: &MatrixView<'_>,
        row_start: usize,
        k_len: usize,
        col_start: usize,
        n_cols: usize,
        config: &BlockingConfig,
    ) -> Result<()> {
        if config.unroll == 0 || !config.unroll.is_multiple_of(LANES) {
            return Err(Error::InvalidConfig(format!(
                "unroll {} must be a positive multiple of {}",
                config.unroll, LANES
            )));
        }
        if n_cols > config.l1_n {
            return Err(Error::ShapeMismatch(format!(
                "{} panel columns exceed the panel width {}",
                n_cols, config.l1_n
            )));
        }
        if row_start + k_len > b.rows() || col_start + n_cols > b.cols() {
            return Err(Error::SliceOutOfBounds(format!(
                "rows {}..{} cols {}..{} of a {}x{} source",
                row_start,
                row_start + k_len,
                col_start,
                col_start + n_cols,
                b.rows(),
                b.cols()
            )));
        }

        let width = config.l1_n;
        let k_padded = pad_to_multiple(k_len, config.unroll);
        let needed = k_padded * width;
        if self.buf.len < needed {
            self.buf = AlignedBuf::zeroed(needed);
        }
        self.k_padded = k_padded;
        self.n_cols = n_cols;
        self.width = width;
        self.source_k = k_len;

        let group_stride = LANES * width;
        let buf = &mut self.buf.as_mut_slice()[..needed];
        buf.fill(0.0);
        for k in 0..k_len {
            let src = &b.row(row_start + k)[col_start..col_start + n_cols];
            let group = (k / LANES) * group_stride + k % LANES;
            for (c, &value) in src.iter().enumerate() {
                buf[group + c * LANES] = value;
            }
        }
        Ok(())
    }

    pub fn k_padded(&self) -> usize {
        self.k_padded
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn source_k(&self) -> usize {
        self.source_k
    }

    /// The in-use buffer prefix, `k_padded * width` elements.
    pub fn as_slice(&self) -> &[f32] {
        &self.buf.as_slice()[..self.k_padded * self.width]
    }

    /// Element at dot-product position `k` of panel column `c`, undoing
    /// the interleave.
    pub fn element(&self, k: usize, c: usize) -> f32 {
        debug_assert!(k < self.k_padded && c < self.width);
        self.as_slice()[(k / LANES) * LANES * self.width + c * LANES + k % LANES]
    }
}

impl fmt::Debug for PackedPanel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PackedPanel")
            .field("k_padded", &self.k_padded)
            .field("n_cols", &self.n_cols)
            .field("width", &self.width)
            .field("source_k", &self.source_k)
            .finish()
    }
}

/// Pack a fresh panel; see [`PackedPanel::pack`].
pub fn pack_b_panel(
    b: &MatrixView<'_>,
    row_start: usize,
    k_len: usize,
    col_start: usize,
    n_cols: usize,
    config: &BlockingConfig,
) -> Result<PackedPanel> {
    let mut panel = PackedPanel::with_capacity(0, config.l1_n);
    panel.pack(b, row_start, k_len, col_start, n_cols, config)?;
    Ok(panel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn pad_to_multiple_cases() {
        assert_eq!(pad_to_multiple(336, 16), 336);
        assert_eq!(pad_to_multiple(337, 16), 352);
        assert_eq!(pad_to_multiple(0, 16), 16);
        assert_eq!(pad_to_multiple(1, 16), 16);
        assert_eq!(pad_to_multiple(16, 1), 16);
    }

    #[test]
    fn interleaved_layout() {
        // source: b[k][c] = 10c + k over 4 rows, 5 cols
        let b = Matrix::filled(4, 5, 5, |k, c| (10 * c + k) as f32).unwrap();
        let panel = pack_b_panel(&b.view(), 0, 4, 0, 5, &BlockingConfig::default()).unwrap();
        assert_eq!(panel.k_padded(), 16);
        assert_eq!(panel.as_slice().len(), 80);
        let head: Vec<f32> = (0..5).flat_map(|c| (0..4).map(move |k| (10 * c + k) as f32)).collect();
        assert_eq!(&panel.as_slice()[..20], &head[..]);
        assert!(panel.as_slice()[20..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_source_packs_to_zero() {
        let b = Matrix::zeros(16, 5, 9).unwrap();
        let panel = pack_b_panel(&b.view(), 0, 16, 0, 5, &BlockingConfig::default()).unwrap();
        assert_eq!(panel.as_slice(), &[0.0; 80][..]);
    }

    #[test]
    fn ghost_columns_stay_zero() {
        let b = Matrix::filled(16, 2, 2, |k, c| (k + c + 1) as f32).unwrap();
        let panel = pack_b_panel(&b.view(), 0, 16, 0, 2, &BlockingConfig::default()).unwrap();
        assert_eq!(panel.n_cols(), 2);
        for k in 0..16 {
            assert_eq!(panel.element(k, 0), (k + 1) as f32);
            assert_eq!(panel.element(k, 1), (k + 2) as f32);
            for c in 2..5 {
                assert_eq!(panel.element(k, c), 0.0);
            }
        }
    }

    #[test]
    fn element_undoes_interleave_on_offset_slice() {
        let b = Matrix::filled(40, 12, 17, |k, c| (100 * k + c) as f32).unwrap();
        let cfg = BlockingConfig::default();
        let panel = pack_b_panel(&b.view(), 7, 21, 3, 5, &cfg).unwrap();
        assert_eq!(panel.k_padded(), 32);
        assert_eq!(panel.source_k(), 21);
        for k in 0..32 {
            for c in 0..5 {
                let expect = if k < 21 { (100 * (k + 7) + c + 3) as f32 } else { 0.0 };
                assert_eq!(panel.element(k, c), expect, "k={} c={}", k, c);
            }
        }
    }

    #[test]
    fn buffer_is_aligned() {
        let b = Matrix::uniform(64, 8, 8, 3).unwrap();
        let panel = pack_b_panel(&b.view(), 0, 64, 0, 5, &BlockingConfig::default()).unwrap();
        assert_eq!(panel.as_slice().as_ptr() as usize % PANEL_ALIGN, 0);
    }

    #[test]
    fn rejects_out_of_bounds_and_overwide() {
        let b = Matrix::zeros(8, 4, 4).unwrap();
        let cfg = BlockingConfig::default();
        assert!(matches!(
            pack_b_panel(&b.view(), 0, 9, 0, 4, &cfg),
            Err(Error::SliceOutOfBounds(_))
        ));
        assert!(matches!(
            pack_b_panel(&b.view(), 0, 8, 1, 4, &cfg),
            Err(Error::SliceOutOfBounds(_))
        ));
        assert!(matches!(
            pack_b_panel(&b.view(), 0, 8, 0, 6, &cfg),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn reuse_leaves_no_stale_data() {
        let big = Matrix::filled(48, 5, 5, |_, _| 7.0).unwrap();
        let small = Matrix::zeros(4, 5, 5).unwrap();
        let cfg = BlockingConfig::default();
        let mut panel = PackedPanel::with_capacity(48, 5);
        panel.pack(&big.view(), 0, 48, 0, 5, &cfg).unwrap();
        assert_eq!(panel.element(47, 4), 7.0);
        panel.pack(&small.view(), 0, 4, 0, 5, &cfg).unwrap();
        assert_eq!(panel.k_padded(), 16);
        assert!(panel.as_slice().iter().all(|&v| v == 0.0));
    }
}
