//! Criterion benchmarks for the blocked multiply live in `benches/`;
//! this crate carries no library code.
