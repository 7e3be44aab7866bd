//! Ground-truth comparison: confusion counts, sensitivity / specificity /
//! precision / F-score, and normalized tumor area.
//!
//! A metric whose denominator is zero is `None`. Dice is not reported
//! separately since it coincides with the F-score on binary masks.

use crate::error::{Error, Result};
use crate::morphology::connected_components;
use crate::raster::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSet {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub fscore: Option<f64>,
    pub pixel_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AreaResult {
    /// Weight of one pixel, `1 / (width * height)`.
    pub p: f64,
    pub white_pixels: u64,
    /// `white_pixels / (width * height)`.
    pub area: f64,
    /// Pixel count per 4-connected component, in label order.
    pub per_component_pixels: Vec<u64>,
    pub per_component_areas: Vec<f64>,
}

pub fn confusion(gt: &BinaryMask, pred: &BinaryMask) -> Result<ConfusionCounts> {
    if gt.dims() != pred.dims() {
        return Err(Error::DimensionMismatch {
            left: gt.dims(),
            right: pred.dims(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&g, &p) in gt.bits().iter().zip(pred.bits()) {
        match (g, p) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metric_set(c: &ConfusionCounts) -> MetricSet {
    let sensitivity = ratio(c.tp, c.tp + c.fn_);
    let specificity = ratio(c.tn, c.tn + c.fp);
    let precision = ratio(c.tp, c.tp + c.fp);
    let fscore = if c.tp == 0 {
        // predictions present but none correct
        (c.fp > 0).then_some(0.0)
    } else {
        match (sensitivity, precision) {
            (Some(s), Some(p)) => Some(2.0 * s * p / (s + p)),
            _ => None,
        }
    };
    let total = c.total();
    MetricSet {
        sensitivity,
        specificity,
        precision,
        fscore,
        pixel_accuracy: if total == 0 {
            0.0
        } else {
            (c.tp + c.tn) as f64 / total as f64
        },
    }
}

/// Foreground fraction of the image, optionally split per component.
pub fn tumor_area(mask: &BinaryMask, per_component: bool) -> AreaResult {
    let n = mask.len() as f64;
    let white = mask.count() as u64;
    let per_component_pixels: Vec<u64> = if per_component {
        connected_components(mask)
            .label_sizes()
            .into_iter()
            .skip(1)
            .map(|s| s as u64)
            .collect()
    } else {
        Vec::new()
    };
    AreaResult {
        p: 1.0 / n,
        white_pixels: white,
        area: white as f64 / n,
        per_component_areas: per_component_pixels.iter().map(|&c| c as f64 / n).collect(),
        per_component_pixels,
    }
}

/// Relative-area agreement in percent: `100 * (1 - |pred - gt| / gt)`, floored at 0.
pub fn area_accuracy(pred: &AreaResult, gt: &AreaResult) -> Result<f64> {
    if gt.area.is_nan() || gt.area <= 0.0 {
        return Err(Error::ZeroGroundTruthArea);
    }
    Ok((100.0 * (1.0 - (pred.area - gt.area).abs() / gt.area)).max(0.0))
}
