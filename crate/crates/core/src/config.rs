//! Blocking parameters and the cache-capacity model that sizes them.
//!
//! The L1 panel length is not a tuning guess: a set-associative cache of
//! `capacity_bytes` split `ways` ways gives each address one slot per way,
//! so a buffer that must survive streaming traffic gets budgeted a single
//! way. Dividing that bank across the five panel columns (with a safety
//! utilization factor, 83% by default) and rounding down to the unroll
//! granularity yields the panel length: 336 on a 16 KB 2-way L1.

use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::LANES;

/// One cache level, as the capacity model sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheGeometry {
    pub capacity_bytes: usize,
    /// Set associativity.
    pub ways: usize,
    /// 4 for single precision.
    pub element_bytes: usize,
}

impl CacheGeometry {
    pub fn new(capacity_bytes: usize, ways: usize, element_bytes: usize) -> Result<Self> {
        let geom = CacheGeometry {
            capacity_bytes,
            ways,
            element_bytes,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ways == 0 {
            return Err(Error::InvalidConfig("cache ways must be >= 1".into()));
        }
        if self.element_bytes == 0 {
            return Err(Error::InvalidConfig("element_bytes must be >= 1".into()));
        }
        if self.capacity_bytes == 0 || !self.capacity_bytes.is_multiple_of(self.ways) {
            return Err(Error::InvalidConfig(format!(
                "cache capacity {} not divisible into {} ways",
                self.capacity_bytes, self.ways
            )));
        }
        Ok(())
    }

    /// Elements one way of the cache can hold.
    pub fn bank_floats(&self) -> usize {
        self.capacity_bytes / self.ways / self.element_bytes
    }
}

/// Loop axes of the triple product: `C[i][j] += A[i][z] * B[z][j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    RowsOfA,
    ColsOfB,
    CommonK,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Axis::RowsOfA => "rows-of-A",
            Axis::ColsOfB => "cols-of-B",
            Axis::CommonK => "common-K",
        };
        f.write_str(name)
    }
}

/// Which axis a blocking level walks in its outer and inner loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopOrder {
    pub outer: Axis,
    pub inner: Axis,
}

impl LoopOrder {
    pub fn new(outer: Axis, inner: Axis) -> Result<Self> {
        let order = LoopOrder { outer, inner };
        order.validate()?;
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outer == self.inner {
            return Err(Error::InvalidConfig(format!(
                "loop order repeats axis {}",
                self.outer
            )));
        }
        Ok(())
    }
}

/// Block sizes for both cache levels plus the microkernel tile shape.
///
/// `l2_*` are the L2 block edge lengths; `l1_*` the panel tile: `l1_m`
/// rows of A against `l1_n` columns of a packed B panel of length `l1_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingConfig {
    pub l2_m: usize,
    pub l2_n: usize,
    pub l2_k: usize,
    pub l1_m: usize,
    pub l1_n: usize,
    pub l1_k: usize,
    /// Dot-product elements consumed per unrolled kernel iteration.
    pub unroll: usize,
    /// Fraction of one cache way the packed panel may occupy.
    pub utilization: f64,
    pub l2_loop_order: LoopOrder,
    pub l1_loop_order: LoopOrder,
}

impl Default for BlockingConfig {
    /// Parameters tuned for a 16 KB 2-way L1 and 512 KB L2: L2 blocks of
    /// 100x100x336, a 1x5 micro tile over panels of length 336, and a
    /// 16-element unroll.
    fn default() -> Self {
        BlockingConfig {
            l2_m: 100,
            l2_n: 100,
            l2_k: 336,
            l1_m: 1,
            l1_n: 5,
            l1_k: 336,
            unroll: 16,
            utilization: 0.83,
            l2_loop_order: LoopOrder {
                outer: Axis::ColsOfB,
                inner: Axis::CommonK,
            },
            l1_loop_order: LoopOrder {
                outer: Axis::ColsOfB,
                inner: Axis::RowsOfA,
            },
        }
    }
}

impl BlockingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l1_m != 1 {
            return Err(Error::InvalidConfig(format!(
                "l1_m must be 1 (one row of A per micro tile), got {}",
                self.l1_m
            )));
        }
        if self.l1_n == 0 || self.l2_m == 0 || self.l2_n == 0 || self.l2_k == 0 {
            return Err(Error::InvalidConfig("block sizes must be positive".into()));
        }
        if self.unroll == 0 || !self.unroll.is_multiple_of(LANES) {
            return Err(Error::InvalidConfig(format!(
                "unroll {} must be a positive multiple of the vector width {}",
                self.unroll, LANES
            )));
        }
        if self.l1_k == 0 || !self.l1_k.is_multiple_of(self.unroll) {
            return Err(Error::InvalidConfig(format!(
                "l1_k {} must be a positive multiple of unroll {}",
                self.l1_k, self.unroll
            )));
        }
        if self.l1_k > self.l2_k {
            return Err(Error::InvalidConfig(format!(
                "l1_k {} exceeds l2_k {}",
                self.l1_k, self.l2_k
            )));
        }
        if self.l1_n > self.l2_n {
            return Err(Error::InvalidConfig(format!(
                "l1_n {} exceeds l2_n {}",
                self.l1_n, self.l2_n
            )));
        }
        if !(self.utilization > 0.0 && self.utilization <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "utilization {} outside (0, 1]",
                self.utilization
            )));
        }
        self.l2_loop_order.validate()?;
        self.l1_loop_order.validate()?;
        Ok(())
    }

    /// Rebuild the block sizes for a host cache geometry. The panel length
    /// comes from [`derive_l1_k`] over the host L1; the L2 block stays
    /// square and is shrunk from 100 until an A block, a B block and a C
    /// block fit in L2 together (`m*k + k*n + m*n` elements).
    pub fn for_host(host: &HostGeometry) -> Result<BlockingConfig> {
        let l1 = CacheGeometry::new(host.l1_capacity_bytes, host.l1_ways, 4)?;
        let l1_k = derive_l1_k(l1, host.n_prime, host.utilization, host.unroll)?;

        let l2_elements = host.l2_capacity_bytes / 4;
        let mut edge = 100usize;
        while edge > 1 && 2 * edge * l1_k + edge * edge > l2_elements {
            edge -= 1;
        }
        if 2 * edge * l1_k + edge * edge > l2_elements {
            return Err(Error::InvalidConfig(format!(
                "L2 capacity {} bytes cannot hold even a 1x{} working set",
                host.l2_capacity_bytes, l1_k
            )));
        }

        let config = BlockingConfig {
            l2_m: edge,
            l2_n: edge,
            l2_k: l1_k,
            l1_n: host.n_prime,
            l1_k,
            unroll: host.unroll,
            utilization: host.utilization,
            ..BlockingConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

/// Longest packed-panel column length that keeps `n_prime` columns
/// resident in one way of the cache.
///
/// `bank_floats = capacity / ways / element_bytes` elements belong to a
/// single way; `floor(bank_floats * utilization / n_prime)` of them are
/// available per column; the result rounds that down to a multiple of
/// `unroll` so the kernel's unrolled loop needs no remainder handling.
pub fn derive_l1_k(
    geometry: CacheGeometry,
    n_prime: usize,
    utilization: f64,
    unroll: usize,
) -> Result<usize> {
    geometry.validate()?;
    if n_prime == 0 || unroll == 0 {
        return Err(Error::InvalidConfig(
            "n_prime and unroll must be positive".into(),
        ));
    }
    if !(utilization > 0.0 && utilization <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "utilization {} outside (0, 1]",
            utilization
        )));
    }
    let bank_floats = geometry.bank_floats();
    let raw_max = (bank_floats as f64 * utilization / n_prime as f64).floor() as usize;
    if raw_max < unroll {
        return Err(Error::CacheTooSmall {
            bank_floats,
            raw_max,
            unroll,
        });
    }
    Ok(raw_max - raw_max % unroll)
}

/// Host cache description, as read from a key=value config file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HostGeometry {
    pub l1_capacity_bytes: usize,
    pub l1_ways: usize,
    pub l2_capacity_bytes: usize,
    pub utilization: f64,
    pub n_prime: usize,
    pub unroll: usize,
}

impl Default for HostGeometry {
    /// The geometry the default blocking was tuned for: 16 KB 2-way L1,
    /// 512 KB L2.
    fn default() -> Self {
        HostGeometry {
            l1_capacity_bytes: 16 * 1024,
            l1_ways: 2,
            l2_capacity_bytes: 512 * 1024,
            utilization: 0.83,
            n_prime: 5,
            unroll: 16,
        }
    }
}

impl HostGeometry {
    /// Parse `key = value` lines. Blank lines and `#` comments are
    /// skipped; every key is optional and falls back to the default.
    pub fn parse(text: &str) -> Result<HostGeometry> {
        let mut geom = HostGeometry::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                Error::InvalidConfig(format!("line {}: {} `{}`", lineno + 1, what, value))
            };
            match key {
                "l1_capacity_bytes" => {
                    geom.l1_capacity_bytes = value.parse().map_err(|_| bad("bad count"))?
                }
                "l1_ways" => geom.l1_ways = value.parse().map_err(|_| bad("bad count"))?,
                "l2_capacity_bytes" => {
                    geom.l2_capacity_bytes = value.parse().map_err(|_| bad("bad count"))?
                }
                "utilization" => geom.utilization = value.parse().map_err(|_| bad("bad fraction"))?,
                "n_prime" => geom.n_prime = value.parse().map_err(|_| bad("bad count"))?,
                "unroll" => geom.unroll = value.parse().map_err(|_| bad("bad count"))?,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key `{}`",
                        lineno + 1,
                        other
                    )));
                }
            }
        }
        Ok(geom)
    }
}
