//! Strided row-major matrix storage and views.
//!
//! All operands are single precision. A matrix is `rows x cols` elements
//! laid out row-major with a `stride` >= `cols` between consecutive row
//! starts; the elements within a row are contiguous. Padding slots between
//! `cols` and `stride` are zero-initialized at construction so that the
//! storage is always safe to read, but nothing in the library depends on
//! their values.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Problem dimensions: `C (M x N) = A (M x K) * B (K x N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

impl Dims {
    pub fn new(m: usize, n: usize, k: usize) -> Self {
        Dims { m, n, k }
    }

    pub fn square(size: usize) -> Self {
        Dims::new(size, size, size)
    }
}

/// Floating point operations in a full multiply: one multiply and one add
/// per (i, j, z) triple, 2*M*N*K total.
pub fn flop_count(dims: Dims) -> Result<u64> {
    (dims.m as u64)
        .checked_mul(dims.n as u64)
        .and_then(|p| p.checked_mul(dims.k as u64))
        .and_then(|p| p.checked_mul(2))
        .ok_or(Error::Overflow("2*M*N*K flop count"))
}

/// Owning strided matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f32>,
    rows: usize,
    cols: usize,
    stride: usize,
}

impl Matrix {
    /// Allocate a `rows x cols` matrix and fill it from `generator(i, j)`.
    ///
    /// The generator is invoked exactly once per in-bounds element, in
    /// row-major order, so stateful generators (e.g. an RNG) produce a
    /// deterministic layout. Padding slots up to `stride` are zero.
    pub fn filled(
        rows: usize,
        cols: usize,
        stride: usize,
        mut generator: impl FnMut(usize, usize) -> f32,
    ) -> Result<Matrix> {
        if stride < cols {
            return Err(Error::InvalidStride {
                stride,
                min: cols,
                what: "stride must cover the row length",
            });
        }
        let len = rows
            .checked_mul(stride)
            .ok_or(Error::Overflow("matrix buffer length"))?;
        let mut data = vec![0.0f32; len];
        for i in 0..rows {
            let row = &mut data[i * stride..i * stride + cols];
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = generator(i, j);
            }
        }
        Ok(Matrix {
            data,
            rows,
            cols,
            stride,
        })
    }

    /// All-zero matrix (padding included).
    pub fn zeros(rows: usize, cols: usize, stride: usize) -> Result<Matrix> {
        Matrix::filled(rows, cols, stride, |_, _| 0.0)
    }

    /// Deterministic pseudo-random fill, uniform in [-1, 1].
    pub fn uniform(rows: usize, cols: usize, stride: usize, seed: u64) -> Result<Matrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::filled(rows, cols, stride, |_, _| rng.random_range(-1.0f32..=1.0))
    }

    /// Wrap an existing buffer. The buffer must hold at least
    /// `(rows - 1) * stride + cols` elements; any padding content is kept
    /// as-is (useful for canary tests).
    pub fn from_vec(data: Vec<f32>, rows: usize, cols: usize, stride: usize) -> Result<Matrix> {
        if stride < cols {
            return Err(Error::InvalidStride {
                stride,
                min: cols,
                what: "stride must cover the row length",
            });
        }
        let needed = if rows == 0 {
            0
        } else {
            (rows - 1) * stride + cols
        };
        if data.len() < needed {
            return Err(Error::BufferTooSmall {
                len: data.len(),
                rows,
                cols,
                stride,
            });
        }
        Ok(Matrix {
            data,
            rows,
            cols,
            stride,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn view(&self) -> MatrixView<'_> {
        MatrixView {
            data: &self.data,
            rows: self.rows,
            cols: self.cols,
            stride: self.stride,
        }
    }

    pub fn view_mut(&mut self) -> MatrixViewMut<'_> {
        MatrixViewMut {
            data: &mut self.data,
            rows: self.rows,
            cols: self.cols,
            stride: self.stride,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.view().get(i, j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: f32) {
        self.view_mut().set(i, j, value);
    }

    /// The raw backing buffer, padding included.
    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

/// Immutable borrowed view over strided matrix data.
#[derive(Debug, Clone, Copy)]
pub struct MatrixView<'a> {
    data: &'a [f32],
    rows: usize,
    cols: usize,
    stride: usize,
}

impl<'a> MatrixView<'a> {
    /// View over a caller-supplied buffer.
    pub fn new(data: &'a [f32], rows: usize, cols: usize, stride: usize) -> Result<Self> {
        check_view(data.len(), rows, cols, stride)?;
        Ok(MatrixView {
            data,
            rows,
            cols,
            stride,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f32 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.stride + j]
    }

    /// Row `i` as a contiguous slice of its in-bounds elements.
    #[inline]
    pub fn row(&self, i: usize) -> &'a [f32] {
        debug_assert!(i < self.rows);
        &self.data[i * self.stride..i * self.stride + self.cols]
    }

    /// Address range of the backing storage, for aliasing checks.
    pub(crate) fn ptr_range(&self) -> (usize, usize) {
        let start = self.data.as_ptr() as usize;
        (start, start + std::mem::size_of_val(self.data))
    }
}

/// Mutable borrowed view over strided matrix data.
#[derive(Debug)]
pub struct MatrixViewMut<'a> {
    data: &'a mut [f32],
    rows: usize,
    cols: usize,
    stride: usize,
}

impl<'a> MatrixViewMut<'a> {
    pub fn new(data: &'a mut [f32], rows: usize, cols: usize, stride: usize) -> Result<Self> {
        check_view(data.len(), rows, cols, stride)?;
        Ok(MatrixViewMut {
            data,
            rows,
            cols,
            stride,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f32 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.stride + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f32) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.stride + j] = value;
    }

    /// Row `i` as a mutable slice of its in-bounds elements.
    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        debug_assert!(i < self.rows);
        &mut self.data[i * self.stride..i * self.stride + self.cols]
    }

    /// Reborrow as an immutable view.
    pub fn as_view(&self) -> MatrixView<'_> {
        MatrixView {
            data: self.data,
            rows: self.rows,
            cols: self.cols,
            stride: self.stride,
        }
    }

    pub(crate) fn ptr_range(&self) -> (usize, usize) {
        let start = self.data.as_ptr() as usize;
        (start, start + std::mem::size_of_val(self.data))
    }
}

fn check_view(len: usize, rows: usize, cols: usize, stride: usize) -> Result<()> {
    if stride < cols {
        return Err(Error::InvalidStride {
            stride,
            min: cols,
            what: "stride must cover the row length",
        });
    }
    let needed = if rows == 0 {
        0
    } else {
        (rows - 1) * stride + cols
    };
    if len < needed {
        return Err(Error::BufferTooSmall {
            len,
            rows,
            cols,
            stride,
        });
    }
    Ok(())
}

/// Largest elementwise absolute difference over the in-bounds elements.
///
/// Shapes must agree; strides may differ. Padding is excluded. A NaN
/// difference is reported as infinity so it can never hide in a max.
pub fn max_abs_diff(a: &MatrixView<'_>, b: &MatrixView<'_>) -> Result<f32> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut worst = 0.0f32;
    for i in 0..a.rows() {
        let ra = a.row(i);
        let rb = b.row(i);
        for (x, y) in ra.iter().zip(rb.iter()) {
            let d = (x - y).abs();
            if d.is_nan() {
                return Ok(f32::INFINITY);
            }
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}
