//! Criterion benchmarks for the symbolic builders, the sweep and the DEC
//! oracle. Run with `cargo bench -p tractorforms-bench`.
