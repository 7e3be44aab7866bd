//! Per-image, per-method pipeline execution.

use std::time::Instant;

use rayon::prelude::*;
use tumorseg_core::fcm::fcm_pipeline;
use tumorseg_core::raster::{load_image, load_mask};
use tumorseg_core::srg::grow;
use tumorseg_core::threshold::{global_threshold_pipeline, symmetry_threshold, threshold_and_clean};
use tumorseg_core::watershed::{watershed_pipeline, watershed_stages};
use tumorseg_core::{BinaryMask, GrayImage, ThresholdChoice, WatershedConfig};

use crate::error::{HarnessError, Result};
use crate::manifest::{Entry, Manifest, Method};
use crate::report::{average_rows, MethodReport, PredictedMask};

/// A manifest entry with its rasters loaded.
#[derive(Debug, Clone)]
pub struct Case {
    pub id: String,
    pub image: GrayImage,
    pub truth: Option<BinaryMask>,
    pub entry: Entry,
}

impl Case {
    pub fn load(entry: &Entry) -> Result<Self> {
        let image = load_image(&entry.image_path)?;
        let truth = match &entry.ground_truth_path {
            Some(p) => {
                let t = load_mask(p)?;
                if t.dims() != image.dims() {
                    return Err(tumorseg_core::Error::DimensionMismatch {
                        left: image.dims(),
                        right: t.dims(),
                    }
                    .into());
                }
                Some(t)
            }
            None => None,
        };
        Ok(Self {
            id: entry.image_id(),
            image,
            truth,
            entry: entry.clone(),
        })
    }
}

fn union_all(masks: impl IntoIterator<Item = tumorseg_core::Result<BinaryMask>>) -> Result<BinaryMask> {
    let mut acc: Option<BinaryMask> = None;
    for m in masks {
        let m = m?;
        acc = Some(match acc {
            Some(a) => a.union(&m)?,
            None => m,
        });
    }
    Ok(acc.expect("at least one threshold"))
}

/// Dispatch one pipeline on `image` with the entry's parameters.
///
/// With more than one threshold, global thresholding and watershed run once
/// per threshold and the union of all components is returned.
pub fn segment(image: &GrayImage, entry: &Entry, method: Method) -> Result<BinaryMask> {
    let se = entry.structuring_element()?;
    let thresholds = entry.threshold_values();
    let single = match thresholds.as_slice() {
        [] => Some(ThresholdChoice::Otsu),
        [t] => Some(ThresholdChoice::Fixed(*t)),
        _ => None,
    };
    let mask = match method {
        Method::Srg => grow(image, &entry.seeds(), entry.stop_delta)?.foreground(),
        Method::GlobalThreshold => match single {
            Some(choice) => {
                let refine = if entry.refine { entry.stop_delta } else { None };
                global_threshold_pipeline(image, choice, &se, refine)?
            }
            None => union_all(
                thresholds
                    .iter()
                    .map(|&t| threshold_and_clean(image, ThresholdChoice::Fixed(t), &se)),
            )?,
        },
        Method::Watershed => match single {
            Some(threshold) => {
                let config = WatershedConfig {
                    threshold,
                    ..Default::default()
                };
                watershed_pipeline(image, &config, &se)?
            }
            None => union_all(thresholds.iter().map(|&t| {
                let config = WatershedConfig {
                    threshold: ThresholdChoice::Fixed(t),
                    ..Default::default()
                };
                watershed_stages(image, &config, &se).map(|s| s.cleaned)
            }))?,
        },
        Method::Fcm => fcm_pipeline(image, &entry.fcm_params(), &se)?,
        Method::HistogramSymmetry => symmetry_threshold(image, &se)?.mask,
    };
    Ok(mask)
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub mask: BinaryMask,
    pub runtime_ms: f64,
}

/// Run one method on a loaded case; the clock covers the pipeline only.
pub fn run_method(case: &Case, method: Method) -> Result<MethodRun> {
    let start = Instant::now();
    let mask = segment(&case.image, &case.entry, method).map_err(|e| HarnessError::Method {
        image_id: case.id.clone(),
        method: method.name().to_string(),
        source: Box::new(e),
    })?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(MethodRun { mask, runtime_ms })
}

#[derive(Debug, Clone)]
pub struct Failure {
    pub image_id: String,
    pub method: Method,
    pub message: String,
}

/// Everything a bench run produced.
#[derive(Debug, Clone, Default)]
pub struct BenchRun {
    /// Rows sorted by (image_id, method), followed by per-method averages.
    pub reports: Vec<MethodReport>,
    pub masks: Vec<PredictedMask>,
    /// One entry per error row.
    pub failures: Vec<Failure>,
}

enum Outcome {
    Ok(MethodReport, PredictedMask),
    Err(MethodReport, Failure),
}

fn run_entry(entry: &Entry, methods: &[Method]) -> Vec<Outcome> {
    let id = entry.image_id();
    let case = match Case::load(entry) {
        Ok(c) => c,
        Err(e) => {
            return methods
                .iter()
                .map(|&m| {
                    Outcome::Err(
                        MethodReport::empty(&id, m),
                        Failure {
                            image_id: id.clone(),
                            method: m,
                            message: e.to_string(),
                        },
                    )
                })
                .collect();
        }
    };
    methods
        .iter()
        .map(|&m| {
            let scored = run_method(&case, m).and_then(|run| {
                let row = MethodReport::score(&id, m, &run.mask, case.truth.as_ref(), run.runtime_ms)?;
                Ok((row, run.mask))
            });
            match scored {
                Ok((row, mask)) => Outcome::Ok(
                    row,
                    PredictedMask {
                        image_id: id.clone(),
                        method: m,
                        mask,
                    },
                ),
                Err(e) => Outcome::Err(
                    MethodReport::empty(&id, m),
                    Failure {
                        image_id: id.clone(),
                        method: m,
                        message: e.to_string(),
                    },
                ),
            }
        })
        .collect()
}

/// Run every method on every entry. Entries run in parallel on
/// `manifest.workers` threads; a failing (entry, method) becomes a null row.
pub fn run_bench(manifest: &Manifest) -> Result<BenchRun> {
    manifest.validate()?;
    let mut methods = manifest.methods.clone();
    methods.sort_by_key(|m| m.name());
    methods.dedup();

    let work = || -> Vec<Outcome> {
        manifest
            .entries
            .par_iter()
            .flat_map_iter(|e| run_entry(e, &methods))
            .collect()
    };
    let outcomes = match manifest.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::InvalidManifest(format!("cannot start workers: {e}")))?
            .install(work),
        None => work(),
    };

    let mut run = BenchRun::default();
    for o in outcomes {
        match o {
            Outcome::Ok(row, mask) => {
                run.reports.push(row);
                run.masks.push(mask);
            }
            Outcome::Err(row, failure) => {
                run.reports.push(row);
                run.failures.push(failure);
            }
        }
    }
    run.reports
        .sort_by(|a, b| (&a.image_id, &a.method).cmp(&(&b.image_id, &b.method)));
    run.masks
        .sort_by(|a, b| (&a.image_id, a.method.name()).cmp(&(&b.image_id, b.method.name())));
    run.failures
        .sort_by(|a, b| (&a.image_id, a.method.name()).cmp(&(&b.image_id, b.method.name())));
    let averages = average_rows(&run.reports, &methods);
    run.reports.extend(averages);
    Ok(run)
}
