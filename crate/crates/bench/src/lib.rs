//! Criterion benchmarks for the hot paths: environment steps, network
//! passes, MASAC updates and surrogate fitting. See `benches/`.
