//! Criterion benchmarks for the pfkit algorithms live in `benches/`.
