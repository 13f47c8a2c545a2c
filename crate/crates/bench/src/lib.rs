//! Criterion benchmarks for the `netlocal` kernels live in `benches/`.
