//! Marker-driven priority-flood watershed and the filtered-watershed
//! tumor pipeline.
//!
//! Flooding pops pixels in increasing relief order (FIFO among equal
//! values). A popped pixel whose labeled 4-neighbours all carry one label
//! joins that catchment; a pixel reached by two different labels becomes a
//! ridge pixel and does not propagate.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::filters::{correlate_abs, median3x3, HighPassKernel};
use crate::morphology::{
    connected_components, dilate, largest_component, neighbors4, open_close_cleanup,
    StructuringElement,
};
use crate::raster::{histogram, rgb_to_gray, BinaryMask, GrayImage, LabelMap, RgbImage};
use crate::threshold::{apply_above, apply_threshold, otsu_threshold, ThresholdChoice};

/// Flood sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Markers {
    /// Positive labels seed catchments with that label.
    Labels(LabelMap),
    /// One catchment per regional minimum of the relief.
    Minima,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatershedResult {
    /// Catchment labels; ridge pixels carry 0.
    pub catchments: LabelMap,
    pub ridge_mask: BinaryMask,
}

/// Label the regional minima (4-connected plateaus with no lower neighbour)
/// `1..=K` in row-major order of first appearance.
pub fn regional_minima(relief: &GrayImage) -> LabelMap {
    let (w, h) = relief.dims();
    let px = relief.pixels();
    let mut labels = vec![0u32; px.len()];
    let mut seen = vec![false; px.len()];
    let mut next = 0u32;
    let mut plateau = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..px.len() {
        if seen[start] {
            continue;
        }
        let v = px[start];
        let mut is_minimum = true;
        plateau.clear();
        seen[start] = true;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            plateau.push(p);
            for q in neighbors4(p, w, h) {
                if px[q] < v {
                    is_minimum = false;
                } else if px[q] == v && !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        if is_minimum {
            next += 1;
            for &p in &plateau {
                labels[p] = next;
            }
        }
    }
    LabelMap::new(w, h, labels).expect("same dimensions as relief")
}

const RIDGE: u32 = u32::MAX;

pub fn watershed_flood(relief: &GrayImage, markers: &Markers) -> Result<WatershedResult> {
    let (w, h) = relief.dims();
    let seeds = match markers {
        Markers::Minima => regional_minima(relief),
        Markers::Labels(m) => {
            if m.dims() != relief.dims() {
                return Err(Error::DimensionMismatch {
                    left: relief.dims(),
                    right: m.dims(),
                });
            }
            m.clone()
        }
    };
    if seeds.max_label() == 0 {
        return Err(Error::NoMarkers);
    }

    let px = relief.pixels();
    let mut labels = seeds.labels().to_vec();
    let mut queued = vec![false; px.len()];
    let mut heap = BinaryHeap::new();
    let mut counter = 0u64;
    let mut push = |heap: &mut BinaryHeap<_>, queued: &mut Vec<bool>, q: usize| {
        queued[q] = true;
        heap.push(Reverse((px[q], counter, q)));
        counter += 1;
    };

    for p in 0..px.len() {
        if labels[p] == 0 {
            continue;
        }
        for q in neighbors4(p, w, h) {
            if labels[q] == 0 && !queued[q] {
                push(&mut heap, &mut queued, q);
            }
        }
    }

    while let Some(Reverse((_, _, p))) = heap.pop() {
        let mut found = None;
        let mut contested = false;
        for q in neighbors4(p, w, h) {
            let l = labels[q];
            if l == 0 || l == RIDGE {
                continue;
            }
            match found {
                None => found = Some(l),
                Some(f) if f != l => contested = true,
                _ => {}
            }
        }
        if contested {
            labels[p] = RIDGE;
            continue;
        }
        let Some(label) = found else {
            // only reachable through ridge pixels
            labels[p] = RIDGE;
            continue;
        };
        labels[p] = label;
        for q in neighbors4(p, w, h) {
            if labels[q] == 0 && !queued[q] {
                push(&mut heap, &mut queued, q);
            }
        }
    }

    // pixels enclosed by ridges are never reached
    let ridge: Vec<bool> = labels.iter().map(|&l| l == RIDGE || l == 0).collect();
    for l in labels.iter_mut() {
        if *l == RIDGE {
            *l = 0;
        }
    }
    Ok(WatershedResult {
        catchments: LabelMap::new(w, h, labels)?,
        ridge_mask: BinaryMask::new(w, h, ridge)?,
    })
}

/// Pipeline input: grayscale or color.
#[derive(Debug, Clone, Copy)]
pub enum PipelineImage<'a> {
    Gray(&'a GrayImage),
    Rgb(&'a RgbImage),
}

impl<'a> From<&'a GrayImage> for PipelineImage<'a> {
    fn from(img: &'a GrayImage) -> Self {
        Self::Gray(img)
    }
}

impl<'a> From<&'a RgbImage> for PipelineImage<'a> {
    fn from(img: &'a RgbImage) -> Self {
        Self::Rgb(img)
    }
}

/// Surface flooded by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReliefSource {
    /// Median-filtered high-pass response (edge strength).
    #[default]
    Filtered,
    /// Median-filtered intensity.
    Intensity,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WatershedConfig {
    pub threshold: ThresholdChoice,
    pub kernel: HighPassKernel,
    pub relief: ReliefSource,
}

/// Intermediate rasters of one pipeline run, kept for inspection.
#[derive(Debug, Clone)]
pub struct WatershedStages {
    pub gray: GrayImage,
    pub highpass: GrayImage,
    pub relief: GrayImage,
    pub foreground: BinaryMask,
    pub flood: WatershedResult,
    /// Union of foreground-seeded catchments after open/close cleanup.
    pub cleaned: BinaryMask,
}

/// Marker map for the pipeline: foreground components keep labels `1..=K`;
/// label `K + 1` marks background, i.e. border pixels and every pixel
/// farther than one structuring element from the foreground. The band in
/// between is left for the flood to decide.
pub fn pipeline_markers(foreground: &BinaryMask, se: &StructuringElement) -> LabelMap {
    let (w, h) = foreground.dims();
    let components = connected_components(foreground);
    let background = components.max_label() + 1;
    let near_fg = dilate(foreground, se);
    let labels = components
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let (x, y) = (i % w, i / w);
            let border = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
            if l == 0 && (border || !near_fg.bits()[i]) {
                background
            } else {
                l
            }
        })
        .collect();
    LabelMap::new(w, h, labels).expect("same dimensions as mask")
}

/// Run the pipeline and keep every stage.
///
/// gray -> high-pass -> median gives the flooded relief; the
/// median-filtered intensity is thresholded to place foreground markers.
pub fn watershed_stages<'a>(
    img: impl Into<PipelineImage<'a>>,
    config: &WatershedConfig,
    se: &StructuringElement,
) -> Result<WatershedStages> {
    let gray = match img.into() {
        PipelineImage::Gray(g) => g.clone(),
        PipelineImage::Rgb(c) => rgb_to_gray(c),
    };
    let highpass = correlate_abs(&gray, &config.kernel.kernel());
    let edges = median3x3(&highpass);
    let smooth = median3x3(&gray);

    let foreground = match config.threshold {
        ThresholdChoice::Fixed(th) => apply_threshold(&smooth, th),
        ThresholdChoice::Otsu => apply_above(&smooth, otsu_threshold(&histogram(&smooth))?),
    };
    let relief = match config.relief {
        ReliefSource::Filtered => edges,
        ReliefSource::Intensity => smooth,
    };

    let (w, h) = gray.dims();
    let components = connected_components(&foreground);
    let fg_count = components.max_label();
    let flood = if fg_count == 0 {
        WatershedResult {
            catchments: LabelMap::zeros(w, h)?,
            ridge_mask: BinaryMask::empty(w, h)?,
        }
    } else {
        watershed_flood(&relief, &Markers::Labels(pipeline_markers(&foreground, se)))?
    };
    let tumor = BinaryMask::new(
        w,
        h,
        flood
            .catchments
            .labels()
            .iter()
            .map(|&l| l >= 1 && l <= fg_count)
            .collect(),
    )?;
    let cleaned = open_close_cleanup(&tumor, se);
    Ok(WatershedStages {
        gray,
        highpass,
        relief,
        foreground,
        flood,
        cleaned,
    })
}

pub fn watershed_pipeline<'a>(
    img: impl Into<PipelineImage<'a>>,
    config: &WatershedConfig,
    se: &StructuringElement,
) -> Result<BinaryMask> {
    Ok(largest_component(&watershed_stages(img, config, se)?.cleaned))
}
