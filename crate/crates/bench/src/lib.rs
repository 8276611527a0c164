//! Criterion benchmarks for `iotpatch-core`; see `benches/`.
