//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix stride is smaller than the row length it has to span.
    #[error("invalid stride {stride}: must be >= {min} ({what})")]
    InvalidStride {
        stride: usize,
        min: usize,
        what: &'static str,
    },

    /// Backing storage is too small for the requested view.
    #[error("buffer of {len} elements too small for {rows}x{cols} view with stride {stride}")]
    BufferTooSmall {
        len: usize,
        rows: usize,
        cols: usize,
        stride: usize,
    },

    /// Operand dimensions do not agree.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The output matrix shares storage with an input.
    #[error("output matrix must not alias an input operand")]
    Aliasing,

    /// A count overflowed its representation.
    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),

    /// The cache cannot hold even one unrolled step of the panel.
    #[error(
        "cache too small: one bank holds {bank_floats} floats, \
         usable dot-product length {raw_max} < unroll factor {unroll}"
    )]
    CacheTooSmall {
        bank_floats: usize,
        raw_max: usize,
        unroll: usize,
    },

    /// A blocking configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A structurally valid configuration that this implementation does not support.
    #[error("unsupported configuration: {0}")]
    UnsupportedConfig(String),

    /// A requested slice falls outside its source matrix.
    #[error("slice out of bounds: {0}")]
    SliceOutOfBounds(String),

    /// Microkernel operand lengths disagree.
    #[error("kernel operand mismatch: {0}")]
    KernelShape(String),
}

pub type Result<T> = std::result::Result<T, Error>;
