//! Seeded region growing.
//!
//! Regions start at their seed pixels. At every step the unassigned pixel
//! 4-adjacent to some region whose intensity is closest to that region's
//! running mean is absorbed into it. Growth continues until no candidate
//! remains, or, with a stop tolerance, until the best candidate deviates by
//! more than the tolerance.
//!
//! Each region keeps its boundary ordered by `(gray, pixel index)`, so the
//! best candidate of a region is found next to its mean with two range
//! lookups. Deviations are compared as exact rationals `|g*n - sum| / n`,
//! which keeps tie-breaking (pixel index, then region id) deterministic.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::morphology::neighbors4;
use crate::raster::{BinaryMask, GrayImage, LabelMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub x: usize,
    pub y: usize,
    /// Label of the grown region. Seeds sharing an id grow one region.
    pub region_id: u32,
}

impl Seed {
    pub fn new(x: usize, y: usize, region_id: u32) -> Self {
        Self { x, y, region_id }
    }
}

/// One absorbed pixel, in assignment order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowStep {
    pub pixel: usize,
    pub region_id: u32,
    /// Deviation from the region mean at the moment of assignment.
    pub delta: f64,
}

/// Deviation `num / den` of a candidate from a region mean.
#[derive(Debug, Clone, Copy)]
struct Deviation {
    num: u64,
    den: u64,
}

impl Deviation {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }

    fn exceeds(&self, tolerance: u8) -> bool {
        self.num as u128 > tolerance as u128 * self.den as u128
    }

    fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

struct Region {
    id: u32,
    sum: u64,
    count: u64,
    boundary: BTreeSet<(u8, usize)>,
}

impl Region {
    fn deviation(&self, g: u8) -> Deviation {
        Deviation {
            num: (g as u64 * self.count).abs_diff(self.sum),
            den: self.count,
        }
    }

    /// Boundary pixel closest to the running mean, smallest index on ties.
    fn best_candidate(&self) -> Option<(Deviation, usize)> {
        let floor = (self.sum / self.count).min(255) as u8;
        let first_at = |g: u8| {
            self.boundary
                .range((g, 0)..=(g, usize::MAX))
                .next()
                .map(|&(_, idx)| (self.deviation(g), idx))
        };
        let below = self
            .boundary
            .range(..=(floor, usize::MAX))
            .next_back()
            .and_then(|&(g, _)| first_at(g));
        let above = floor
            .checked_add(1)
            .and_then(|start| self.boundary.range((start, 0)..).next())
            .and_then(|&(g, _)| first_at(g));
        match (below, above) {
            (Some(a), Some(b)) => Some(match a.0.cmp(&b.0).then(a.1.cmp(&b.1)) {
                Ordering::Greater => b,
                _ => a,
            }),
            (a, b) => a.or(b),
        }
    }
}

fn validate_seeds(img: &GrayImage, seeds: &[Seed]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::NoSeeds);
    }
    let mut seen = BTreeSet::new();
    for s in seeds {
        if s.x >= img.width() || s.y >= img.height() {
            return Err(Error::SeedOutOfBounds {
                x: s.x,
                y: s.y,
                width: img.width(),
                height: img.height(),
            });
        }
        if s.region_id == 0 {
            return Err(Error::InvalidRegionId);
        }
        if !seen.insert((s.x, s.y)) {
            return Err(Error::DuplicateSeed { x: s.x, y: s.y });
        }
    }
    Ok(())
}

/// Grow regions and return the label map together with the assignment trace
/// (seed pixels are not part of the trace).
pub fn grow_traced(
    img: &GrayImage,
    seeds: &[Seed],
    stop_delta: Option<u8>,
) -> Result<(LabelMap, Vec<GrowStep>)> {
    validate_seeds(img, seeds)?;
    let (w, h) = img.dims();
    let px = img.pixels();

    let ids: BTreeSet<u32> = seeds.iter().map(|s| s.region_id).collect();
    let slot: BTreeMap<u32, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut regions: Vec<Region> = ids
        .iter()
        .map(|&id| Region {
            id,
            sum: 0,
            count: 0,
            boundary: BTreeSet::new(),
        })
        .collect();

    let mut labels = vec![0u32; w * h];
    for s in seeds {
        let idx = s.y * w + s.x;
        labels[idx] = s.region_id;
        let r = &mut regions[slot[&s.region_id]];
        r.sum += px[idx] as u64;
        r.count += 1;
    }
    for s in seeds {
        let idx = s.y * w + s.x;
        for q in neighbors4(idx, w, h) {
            if labels[q] == 0 {
                regions[slot[&s.region_id]].boundary.insert((px[q], q));
            }
        }
    }

    let mut trace = Vec::new();
    loop {
        let mut best: Option<(Deviation, usize, usize)> = None;
        for (ri, region) in regions.iter().enumerate() {
            let Some((dev, idx)) = region.best_candidate() else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((bd, bidx, _)) => dev.cmp(bd).then(idx.cmp(bidx)) == Ordering::Less,
            };
            if better {
                best = Some((dev, idx, ri));
            }
        }
        let Some((dev, idx, ri)) = best else { break };
        if stop_delta.is_some_and(|tol| dev.exceeds(tol)) {
            break;
        }

        let g = px[idx];
        for region in regions.iter_mut() {
            region.boundary.remove(&(g, idx));
        }
        let region = &mut regions[ri];
        labels[idx] = region.id;
        region.sum += g as u64;
        region.count += 1;
        for q in neighbors4(idx, w, h) {
            if labels[q] == 0 {
                region.boundary.insert((px[q], q));
            }
        }
        trace.push(GrowStep {
            pixel: idx,
            region_id: region.id,
            delta: dev.value(),
        });
    }

    Ok((LabelMap::new(w, h, labels)?, trace))
}

/// Grow regions from `seeds`; labels in the result are the seeds' region ids.
pub fn grow(img: &GrayImage, seeds: &[Seed], stop_delta: Option<u8>) -> Result<LabelMap> {
    grow_traced(img, seeds, stop_delta).map(|(labels, _)| labels)
}

/// Mask of the region grown from a single seed.
pub fn grow_single(img: &GrayImage, seed: Seed, stop_delta: Option<u8>) -> Result<BinaryMask> {
    let labels = grow(img, &[seed], stop_delta)?;
    Ok(labels.mask_of(seed.region_id))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strips() -> GrayImage {
        GrayImage::from_fn(5, 5, |x, _| if x <= 2 { 10 } else { 200 }).unwrap()
    }

    #[test]
    fn constant_image_fills() {
        let img = GrayImage::filled(6, 4, 77).unwrap();
        let m = grow_single(&img, Seed::new(2, 1, 1), None).unwrap();
        assert_eq!(m.count(), 24);
    }

    #[test]
    fn strip_with_tolerance() {
        let m = grow_single(&strips(), Seed::new(0, 0, 1), Some(50)).unwrap();
        let expect = BinaryMask::from_fn(5, 5, |x, _| x <= 2).unwrap();
        assert_eq!(m, expect);
        assert_eq!(m.count(), 15);
    }

    #[test]
    fn two_seeds_partition_strips() {
        let seeds = [Seed::new(0, 0, 1), Seed::new(4, 4, 2)];
        let labels = grow(&strips(), &seeds, None).unwrap();
        for y in 0..5 {
            for x in 0..5 {
                assert_eq!(labels.get(x, y), if x <= 2 { 1 } else { 2 });
            }
        }
    }

    #[test]
    fn bright_spot_zero_tolerance() {
        let img = GrayImage::from_fn(5, 5, |x, y| if (x, y) == (2, 2) { 250 } else { 20 }).unwrap();
        let m = grow_single(&img, Seed::new(2, 2, 1), Some(0)).unwrap();
        assert_eq!(m, BinaryMask::from_fn(5, 5, |x, y| (x, y) == (2, 2)).unwrap());
    }

    #[test]
    fn seed_errors() {
        let img = strips();
        assert!(matches!(grow(&img, &[], None), Err(Error::NoSeeds)));
        assert!(matches!(
            grow(&img, &[Seed::new(5, 0, 1)], None),
            Err(Error::SeedOutOfBounds { .. })
        ));
        assert!(matches!(
            grow(&img, &[Seed::new(1, 1, 1), Seed::new(1, 1, 2)], None),
            Err(Error::DuplicateSeed { x: 1, y: 1 })
        ));
        assert!(matches!(
            grow(&img, &[Seed::new(1, 1, 0)], None),
            Err(Error::InvalidRegionId)
        ));
    }

    #[test]
    fn running_mean_drives_order() {
        // seed 100; neighbours 104 (right) and 97 (below): 97 is closer
        let img = GrayImage::new(2, 2, vec![100, 104, 97, 255]).unwrap();
        let (_, trace) = grow_traced(&img, &[Seed::new(0, 0, 1)], None).unwrap();
        assert_eq!(trace[0].pixel, 2);
        assert_eq!(trace[0].delta, 3.0);
        // mean is now 98.5, so 104 deviates by 5.5
        assert_eq!(trace[1].pixel, 1);
        assert_eq!(trace[1].delta, 5.5);
    }

    #[test]
    fn ties_break_on_pixel_index() {
        // both neighbours deviate by 5; the lower index wins
        let img = GrayImage::new(3, 1, vec![105, 100, 95]).unwrap();
        let (_, trace) = grow_traced(&img, &[Seed::new(1, 0, 1)], None).unwrap();
        assert_eq!(trace[0].pixel, 0);
    }

    #[test]
    fn shared_region_id_grows_one_region() {
        let img = GrayImage::filled(5, 1, 50).unwrap();
        let seeds = [Seed::new(0, 0, 3), Seed::new(4, 0, 3)];
        let labels = grow(&img, &seeds, None).unwrap();
        assert!(labels.labels().iter().all(|&l| l == 3));
    }
}
