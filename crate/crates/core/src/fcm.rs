//! Two-cluster fuzzy c-means on the gray-level histogram.
//!
//! Features are the 256 gray levels weighted by their histogram counts.
//! Memberships follow the usual FCM form
//! `mu_i(j) = 1 / sum_k (d(j, v_i) / d(j, v_k))^(2 / (tau - 1))` with
//! `d(j, v) = |j - v|`; centers are the `h_j * mu^tau` weighted means. The
//! bright cluster's membership crossing 0.5 gives the binarization level.

use crate::error::{Error, Result};
use crate::morphology::{largest_component, open_close_cleanup, StructuringElement};
use crate::raster::{histogram, BinaryMask, GrayImage, Histogram};
use crate::threshold::{apply_threshold, ThresholdValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcmParams {
    /// Fuzzifier, must exceed 1.
    pub tau: f64,
    pub max_iters: usize,
    /// Stop once both centers move less than this.
    pub tol: f64,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self {
            tau: 2.0,
            max_iters: 100,
            tol: 1e-6,
        }
    }
}

impl FcmParams {
    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() || self.tau <= 1.0 {
            return Err(Error::InvalidParams(format!("tau must be > 1, got {}", self.tau)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParams("max_iters must be positive".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidParams(format!("tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmState {
    /// Dark cluster center.
    pub v1: f64,
    /// Bright cluster center, `v1 <= v2`.
    pub v2: f64,
    pub tau: f64,
    /// `(mu1(j), mu2(j))` per gray level, computed from the final centers.
    pub memberships: Vec<(f64, f64)>,
    pub iterations_run: usize,
    /// Objective after every membership update, normalized by the pixel count.
    pub objective_trace: Vec<f64>,
}

impl FcmState {
    /// Final objective value.
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(0.0)
    }
}

/// Memberships of level `j` in the clusters centered at `v1` and `v2`.
/// A level sitting exactly on a center belongs to it entirely.
pub fn membership(j: f64, v1: f64, v2: f64, tau: f64) -> (f64, f64) {
    let d1 = (j - v1).abs();
    let d2 = (j - v2).abs();
    if d1 == 0.0 {
        return (1.0, 0.0);
    }
    if d2 == 0.0 {
        return (0.0, 1.0);
    }
    let p = 2.0 / (tau - 1.0);
    let mu1 = 1.0 / (1.0 + (d1 / d2).powf(p));
    (mu1, 1.0 - mu1)
}

fn memberships(v1: f64, v2: f64, tau: f64) -> Vec<(f64, f64)> {
    (0..256).map(|j| membership(j as f64, v1, v2, tau)).collect()
}

fn objective(weights: &[f64], mu: &[(f64, f64)], v1: f64, v2: f64, tau: f64) -> f64 {
    weights
        .iter()
        .zip(mu)
        .enumerate()
        .map(|(j, (&h, &(m1, m2)))| {
            let j = j as f64;
            h * (m1.powf(tau) * (j - v1).powi(2) + m2.powf(tau) * (j - v2).powi(2))
        })
        .sum()
}

/// Weighted center update; keeps the previous center if the cluster has no weight.
fn center(weights: &[f64], mu: impl Iterator<Item = f64>, tau: f64, previous: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (j, (&h, m)) in weights.iter().zip(mu).enumerate() {
        let w = h * m.powf(tau);
        num += j as f64 * w;
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        previous
    }
}

/// Fit two clusters to `hist`.
///
/// Initialization: `v2` is the brightest occupied level and `v1` is
/// `floor(v2 / 2)`, the initial threshold.
pub fn fcm_fit(hist: &Histogram, params: &FcmParams) -> Result<FcmState> {
    params.validate()?;
    if hist.occupied_levels() < 2 {
        return Err(Error::DegenerateHistogram);
    }
    let total = hist.total() as f64;
    let weights: Vec<f64> = hist.bins().iter().map(|&c| c as f64 / total).collect();
    let tau = params.tau;

    let max = hist.max_occupied().expect("occupied") as f64;
    let mut v2 = max;
    let mut v1 = (max / 2.0).floor();

    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < params.max_iters {
        let mu = memberships(v1, v2, tau);
        trace.push(objective(&weights, &mu, v1, v2, tau));
        let n1 = center(&weights, mu.iter().map(|m| m.0), tau, v1);
        let n2 = center(&weights, mu.iter().map(|m| m.1), tau, v2);
        iterations += 1;
        let moved = (n1 - v1).abs().max((n2 - v2).abs());
        (v1, v2) = if n1 <= n2 { (n1, n2) } else { (n2, n1) };
        if moved < params.tol {
            break;
        }
    }

    let mu = memberships(v1, v2, tau);
    trace.push(objective(&weights, &mu, v1, v2, tau));
    Ok(FcmState {
        v1,
        v2,
        tau,
        memberships: mu,
        iterations_run: iterations,
        objective_trace: trace,
    })
}

/// Smallest level whose bright-cluster membership reaches 0.5.
pub fn fcm_threshold(state: &FcmState) -> ThresholdValue {
    let t = state
        .memberships
        .iter()
        .position(|&(_, high)| high >= 0.5)
        .unwrap_or(255);
    ThresholdValue(t as u8)
}

/// Histogram, FCM fit, crossover threshold, cleanup and largest component.
pub fn fcm_pipeline(
    img: &GrayImage,
    params: &FcmParams,
    se: &StructuringElement,
) -> Result<BinaryMask> {
    Ok(largest_component(&fcm_mask(img, params, se)?))
}

/// As [`fcm_pipeline`] but keeping every component after cleanup.
pub fn fcm_mask(img: &GrayImage, params: &FcmParams, se: &StructuringElement) -> Result<BinaryMask> {
    let state = fcm_fit(&histogram(img), params)?;
    let th = fcm_threshold(&state);
    Ok(open_close_cleanup(&apply_threshold(img, th), se))
}
