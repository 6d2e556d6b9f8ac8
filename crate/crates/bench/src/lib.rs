//! Benchmarks for the counting and reconstruction kernels; see `benches/`.
