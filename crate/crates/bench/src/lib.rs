//! Benchmarks live in `benches/engine.rs`; this crate has no library code.
