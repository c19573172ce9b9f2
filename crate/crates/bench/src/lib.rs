//! Criterion benchmarks for the sturm-core kernels live in `benches/`.
