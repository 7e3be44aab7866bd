//! Global thresholding, Otsu level selection and the half-image symmetry
//! pipeline.
//!
//! Two threshold conventions meet here. [`apply_threshold`] keeps pixels
//! `>= level`. An Otsu level `t` names the last gray level of the dark
//! class, so the bright class is `> t`; [`apply_above`] applies that form.

use std::cmp::Ordering;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::morphology::{largest_component, open_close_cleanup, StructuringElement};
use crate::raster::{histogram, histogram_of, BinaryMask, GrayImage, Histogram};
use crate::srg::{grow_single, Seed};

/// Gray level in `0..=255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThresholdValue(pub u8);

impl ThresholdValue {
    pub fn level(self) -> u8 {
        self.0
    }
}

impl From<u8> for ThresholdValue {
    fn from(v: u8) -> Self {
        Self(v)
    }
}

/// How a pipeline picks its binarization level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdChoice {
    /// Keep pixels `>= level`.
    Fixed(ThresholdValue),
    /// Otsu on the image histogram; keep pixels above the returned level.
    #[default]
    Otsu,
}

/// Keep pixels whose value is at least `th`.
pub fn apply_threshold(img: &GrayImage, th: ThresholdValue) -> BinaryMask {
    BinaryMask::from_index_fn(img.width(), img.height(), |i| img.pixels()[i] >= th.0)
}

/// Keep pixels strictly above `level`.
pub fn apply_above(img: &GrayImage, level: ThresholdValue) -> BinaryMask {
    BinaryMask::from_index_fn(img.width(), img.height(), |i| img.pixels()[i] > level.0)
}

pub fn binarize(img: &GrayImage, choice: ThresholdChoice) -> Result<BinaryMask> {
    match choice {
        ThresholdChoice::Fixed(th) => Ok(apply_threshold(img, th)),
        ThresholdChoice::Otsu => Ok(apply_above(img, otsu_threshold(&histogram(img))?)),
    }
}

/// Between-class variance of the split `[0..=t] | (t..=255]`, kept as the
/// exact fraction `(s0*N - S*n0)^2 / (n0*n1)`; it is proportional to
/// `w0*w1*(mu0 - mu1)^2` with the same factor `1/N^2` for every split.
struct SplitScore {
    num: BigUint,
    den: BigUint,
}

impl SplitScore {
    fn zero() -> Self {
        Self {
            num: BigUint::from(0u8),
            den: BigUint::from(1u8),
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

/// Otsu's level: the `t` maximizing between-class variance of
/// `[0..=t]` against `(t..=255]`.
///
/// Only splits with a non-empty dark class are candidates and a split with
/// an empty bright class scores zero. Ties go to the smallest `t`, so a
/// histogram with a single occupied level returns that level.
pub fn otsu_threshold(hist: &Histogram) -> Result<ThresholdValue> {
    let total = hist.total() as u128;
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let moment: u128 = hist
        .bins()
        .iter()
        .enumerate()
        .map(|(j, &c)| j as u128 * c as u128)
        .sum();

    let mut n0 = 0u128;
    let mut s0 = 0u128;
    let mut best: Option<(u8, SplitScore)> = None;
    for (t, &count) in hist.bins().iter().enumerate() {
        n0 += count as u128;
        s0 += t as u128 * count as u128;
        if n0 == 0 {
            continue;
        }
        let n1 = total - n0;
        let score = if n1 == 0 {
            SplitScore::zero()
        } else {
            let diff = (s0 * total).abs_diff(moment * n0);
            let diff = BigUint::from(diff);
            SplitScore {
                num: &diff * &diff,
                den: BigUint::from(n0) * BigUint::from(n1),
            }
        };
        let replace = match &best {
            None => true,
            Some((_, b)) => score.cmp(b) == Ordering::Greater,
        };
        if replace {
            best = Some((t as u8, score));
        }
    }
    Ok(ThresholdValue(best.expect("non-empty histogram has a candidate").0))
}

/// Initial threshold `floor(max / 2)`.
pub fn initial_threshold(img: &GrayImage) -> ThresholdValue {
    ThresholdValue(img.max_value() / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn mirrored(self) -> Self {
        match self {
            Self::Left => Self::Right,
            Self::Right => Self::Left,
        }
    }
}

/// Which histogram the symmetry pipeline hands to Otsu.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetrySource {
    /// Bin-wise `|h_left - h_right|`.
    #[default]
    DifferenceHistogram,
    /// The histogram of the half with the larger intensity sum.
    BrighterHalf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryResult {
    pub mask: BinaryMask,
    pub tumor_side: Side,
    /// Otsu level; the mask keeps pixels above it before cleanup.
    pub chosen_threshold: ThresholdValue,
    /// Inclusive `(x0, y0, x1, y1)`; `(0, 0, 0, 0)` for an empty mask.
    pub crop_box: (usize, usize, usize, usize),
}

/// Column ranges of the left and right halves. For odd widths the middle
/// column belongs to neither.
fn halves(width: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let half = width / 2;
    (0..half, width - half..width)
}

fn half_histogram(img: &GrayImage, cols: std::ops::Range<usize>) -> Histogram {
    histogram_of(
        (0..img.height()).flat_map(|y| cols.clone().map(move |x| (x, y))).map(|(x, y)| img.get(x, y)),
    )
}

pub fn symmetry_threshold(img: &GrayImage, se: &StructuringElement) -> Result<SymmetryResult> {
    symmetry_threshold_with(img, se, SymmetrySource::default())
}

pub fn symmetry_threshold_with(
    img: &GrayImage,
    se: &StructuringElement,
    source: SymmetrySource,
) -> Result<SymmetryResult> {
    if img.width() < 2 {
        return Err(Error::ImageTooNarrow(img.width()));
    }
    let (left_cols, right_cols) = halves(img.width());
    let left = half_histogram(img, left_cols.clone());
    let right = half_histogram(img, right_cols.clone());

    let hist = match source {
        SymmetrySource::DifferenceHistogram => left.abs_diff(&right),
        SymmetrySource::BrighterHalf => {
            let mass = |h: &Histogram| -> u128 {
                h.bins().iter().enumerate().map(|(j, &c)| j as u128 * c as u128).sum()
            };
            if mass(&right) > mass(&left) {
                right
            } else {
                left
            }
        }
    };
    let level = otsu_threshold(&hist).map_err(|e| match e {
        Error::EmptyHistogram => Error::NoAsymmetry,
        other => other,
    })?;

    let raw = apply_above(img, level);
    let mask = largest_component(&open_close_cleanup(&raw, se));

    let count_in = |cols: &std::ops::Range<usize>| {
        (0..mask.height())
            .map(|y| cols.clone().filter(|&x| mask.get(x, y)).count())
            .sum::<usize>()
    };
    let tumor_side = if count_in(&right_cols) > count_in(&left_cols) {
        Side::Right
    } else {
        Side::Left
    };
    let crop_box = mask.bounding_box().unwrap_or((0, 0, 0, 0));
    Ok(SymmetryResult {
        mask,
        tumor_side,
        chosen_threshold: level,
        crop_box,
    })
}

/// Threshold then open/close cleanup, keeping every component.
pub fn threshold_and_clean(
    img: &GrayImage,
    choice: ThresholdChoice,
    se: &StructuringElement,
) -> Result<BinaryMask> {
    Ok(open_close_cleanup(&binarize(img, choice)?, se))
}

/// Foreground pixel nearest to the mask centroid (row-major on ties).
pub fn centroid_pixel(mask: &BinaryMask) -> Option<(usize, usize)> {
    let w = mask.width();
    let fg: Vec<(usize, usize)> = mask
        .bits()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| (i % w, i / w))
        .collect();
    if fg.is_empty() {
        return None;
    }
    let n = fg.len() as f64;
    let cx = fg.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let cy = fg.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let dist = |&(x, y): &(usize, usize)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
    fg.iter()
        .copied()
        .reduce(|best, p| if dist(&p) < dist(&best) { p } else { best })
}

/// Global-threshold pipeline: threshold, cleanup, largest component, then
/// optionally region growing seeded at that component's centroid with the
/// given stop tolerance.
pub fn global_threshold_pipeline(
    img: &GrayImage,
    choice: ThresholdChoice,
    se: &StructuringElement,
    refine_stop_delta: Option<u8>,
) -> Result<BinaryMask> {
    let mask = largest_component(&threshold_and_clean(img, choice, se)?);
    match (refine_stop_delta, centroid_pixel(&mask)) {
        (Some(stop), Some((x, y))) => grow_single(img, Seed::new(x, y, 1), Some(stop)),
        _ => Ok(mask),
    }
}
