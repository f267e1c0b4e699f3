//! Criterion benchmarks for `qdel-core`; the benchmarks live in `benches/`.
