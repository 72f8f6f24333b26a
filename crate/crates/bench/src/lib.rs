//! Criterion benchmarks for the curvature pipeline; see `benches/`.
