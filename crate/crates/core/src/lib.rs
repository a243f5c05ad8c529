//! Cache-blocked single-precision matrix multiplication.
//!
//! `C <- alpha * A * B + beta * C` over row-major strided matrices, built
//! around three levels of blocking:
//!
//! * L0: a microkernel computing five dot products at once in eight
//!   vector registers ([`kernel`]);
//! * L1: five columns of B packed into an aligned, interleaved,
//!   zero-padded panel sized so it stays resident in one way of the L1
//!   cache ([`pack`], [`config::derive_l1_k`]);
//! * L2: 100 x 100 x 336 blocks walked column-block first ([`gemm`]).
//!
//! The default parameters ([`BlockingConfig::default`]) target a 16 KB
//! 2-way L1 and 512 KB L2; [`BlockingConfig::for_host`] rederives them
//! for other geometries. A naive triple loop and a double-precision
//! oracle ([`oracle`]) back every variant with independent references,
//! and the scalar and vector blocked variants are bit-identical by
//! construction.

pub mod config;
pub mod error;
pub mod gemm;
pub mod kernel;
pub mod matrix;
pub mod oracle;
pub mod pack;

pub use config::{derive_l1_k, Axis, BlockingConfig, CacheGeometry, HostGeometry, LoopOrder};
pub use error::{Error, Result};
pub use gemm::{gemm_naive, sgemm, sgemm_with, KernelVariant};
pub use kernel::{
    microkernel, microkernel_reference, microkernel_with_prefetch, prefetch_hint, LaneAccumulators,
    MicroTile, DEFAULT_PREFETCH_DISTANCE, LANES, TILE_COLS,
};
pub use matrix::{flop_count, max_abs_diff, Dims, Matrix, MatrixView, MatrixViewMut};
pub use pack::{pack_b_panel, pad_to_multiple, PackedPanel, PANEL_ALIGN};
