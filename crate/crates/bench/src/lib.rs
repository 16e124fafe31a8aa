//! Criterion benchmarks for the latency toolkit; see `benches/`.
