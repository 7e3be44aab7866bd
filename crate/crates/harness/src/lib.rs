//! Comparison harness: manifests, synthetic phantoms, per-method runs with
//! timing, and CSV / JSON reports.

pub mod error;
pub mod manifest;
pub mod phantom;
pub mod report;
pub mod run;

pub use error::{HarnessError, Result};
pub use manifest::{Entry, Manifest, Method};
pub use phantom::{gen_phantom, Phantom, PhantomSpec};
pub use report::{write_report, MethodReport};
pub use run::{run_bench, run_method, BenchRun, Case};
