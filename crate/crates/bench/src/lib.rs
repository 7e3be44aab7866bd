//! Criterion benchmarks for the segmentation pipelines and their building
//! blocks. Run with `cargo bench -p tumorseg-bench`.
