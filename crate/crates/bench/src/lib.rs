//! Criterion benchmarks for the slmspec pipeline; see `benches/`.
