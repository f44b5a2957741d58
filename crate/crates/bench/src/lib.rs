//! Benchmark-only crate; the measurements live in `benches/distances.rs`.
//! Run with `cargo bench -p hs2sd-bench`.
