//! Criterion benchmarks for batch evaluation and selection; see `benches/`.
