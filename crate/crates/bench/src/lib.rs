//! Criterion benchmarks for pplab; see `benches/`.
