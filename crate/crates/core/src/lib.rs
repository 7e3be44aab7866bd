//! Threshold-based grayscale segmentation toolkit.
//!
//! Five tumor-extraction pipelines share the primitives in this crate:
//!
//! * seeded region growing ([`srg`]),
//! * global thresholding with morphological cleanup and region-growing
//!   refinement ([`threshold::global_threshold_pipeline`]),
//! * filtered watershed ([`watershed`]),
//! * histogram fuzzy c-means ([`fcm`]),
//! * half-image histogram symmetry ([`threshold::symmetry_threshold`]).
//!
//! [`metrics`] scores a predicted mask against ground truth.

pub mod error;
pub mod fcm;
pub mod filters;
pub mod metrics;
pub mod morphology;
pub mod raster;
pub mod srg;
pub mod threshold;
pub mod watershed;

pub use error::{Error, Result};
pub use fcm::{FcmParams, FcmState};
pub use filters::{HighPassKernel, Kernel3x3};
pub use metrics::{AreaResult, ConfusionCounts, MetricSet};
pub use morphology::StructuringElement;
pub use raster::{BinaryMask, GrayImage, Histogram, LabelMap, RgbImage};
pub use srg::Seed;
pub use threshold::{Side, SymmetryResult, ThresholdChoice, ThresholdValue};
pub use watershed::{Markers, WatershedConfig, WatershedResult};
