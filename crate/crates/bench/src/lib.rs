//! Criterion benchmarks for `cartan-core`; run with `cargo bench -p cartan-bench`.
