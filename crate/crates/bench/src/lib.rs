//! This package only carries benchmarks; see `benches/pipeline.rs`.
