//! Cache flushing between timed calls.
//!
//! Touching a scratch buffer comfortably larger than the last-level
//! budget evicts any matrix data, so each measured multiply starts cold.
//! The buffer gets a deterministic fill and a read-modify-write pass, and
//! the checksum is returned through `black_box` so the compiler cannot
//! elide the traffic.

use std::hint::black_box;

use crate::{Error, Result};

/// Default scratch size: four times the configured L2 capacity.
pub fn default_flush_bytes(l2_capacity_bytes: usize) -> usize {
    4 * l2_capacity_bytes
}

/// Evict caches by streaming over `flush_bytes` of scratch; requires at
/// least twice the configured L2 capacity to be meaningful.
pub fn flush_caches(flush_bytes: usize, l2_capacity_bytes: usize) -> Result<u64> {
    let floor = 2 * l2_capacity_bytes;
    if flush_bytes < floor.max(8) {
        return Err(Error::Report(format!(
            "flush size {flush_bytes} B is below twice the L2 capacity ({floor} B)"
        )));
    }
    let words = flush_bytes / 8;
    let mut buf: Vec<u64> = Vec::new();
    buf.try_reserve_exact(words)
        .map_err(|e| Error::Report(format!("flush buffer allocation: {e}")))?;
    buf.extend((0..words as u64).map(|i| i ^ 0x9e37_79b9_7f4a_7c15));

    let mut checksum = 0u64;
    for word in buf.iter_mut() {
        *word = word.wrapping_mul(0x2545_f491_4f6c_dd1d).wrapping_add(1);
        checksum = checksum.wrapping_add(*word);
    }
    black_box(&buf);
    Ok(black_box(checksum))
}
