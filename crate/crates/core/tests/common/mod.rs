//! Independent reference implementations used by the property and
//! acceptance tests. Written for clarity, not speed.
#![allow(dead_code)]

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use tumorseg_core::{BinaryMask, GrayImage, LabelMap, Seed, StructuringElement};

/// Exhaustive Otsu: between-class variance `w0 * w1 * (mu0 - mu1)^2` of every
/// split `[0..=t] | (t..=255]` with a non-empty dark class, in exact
/// rational arithmetic. Empty bright class scores zero; first maximum wins.
pub fn otsu_oracle(bins: &[u64; 256]) -> u8 {
    let big = |v: u64| BigRational::from_integer(BigInt::from(v));
    let n: u64 = bins.iter().sum();
    let s: u64 = (0..256).map(|j| j as u64 * bins[j]).sum();
    let (mut n0, mut s0) = (0u64, 0u64);
    let mut best: Option<(u8, BigRational)> = None;
    for (t, &count) in bins.iter().enumerate() {
        n0 += count;
        s0 += t as u64 * count;
        if n0 == 0 {
            continue;
        }
        let n1 = n - n0;
        let score = if n1 == 0 {
            big(0)
        } else {
            let s1 = s - s0;
            let w0 = big(n0) / big(n);
            let w1 = big(n1) / big(n);
            let mu0 = big(s0) / big(n0);
            let mu1 = big(s1) / big(n1);
            let d = mu0 - mu1;
            w0 * w1 * d.clone() * d
        };
        if best.as_ref().is_none_or(|(_, b)| score > *b) {
            best = Some((t as u8, score));
        }
    }
    best.expect("non-empty histogram").0
}

pub fn neighbors(x: usize, y: usize, w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(4);
    if y > 0 {
        v.push((x, y - 1));
    }
    if x > 0 {
        v.push((x - 1, y));
    }
    if x + 1 < w {
        v.push((x + 1, y));
    }
    if y + 1 < h {
        v.push((x, y + 1));
    }
    v
}

/// Pixels 4-connected to `(sx, sy)` through pixels with
/// `|g - g(seed)| <= tol`.
pub fn flood_fill(img: &GrayImage, sx: usize, sy: usize, tol: u8) -> BinaryMask {
    let (w, h) = img.dims();
    let base = img.get(sx, sy) as i32;
    let mut bits = vec![false; w * h];
    let mut queue = VecDeque::from([(sx, sy)]);
    bits[sy * w + sx] = true;
    while let Some((x, y)) = queue.pop_front() {
        for (nx, ny) in neighbors(x, y, w, h) {
            if !bits[ny * w + nx] && (img.get(nx, ny) as i32 - base).abs() <= tol as i32 {
                bits[ny * w + nx] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    BinaryMask::new(w, h, bits).unwrap()
}

/// Pixels 4-connected to `start` inside `member`.
pub fn reach(member: &[bool], w: usize, h: usize, start: usize) -> Vec<bool> {
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(p) = queue.pop_front() {
        for (nx, ny) in neighbors(p % w, p / w, w, h) {
            let q = ny * w + nx;
            if member[q] && !seen[q] {
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }
    seen
}

/// Every positive label of `labels` forms a single 4-connected set.
pub fn labels_are_connected(labels: &LabelMap) -> bool {
    let (w, h) = labels.dims();
    let l = labels.labels();
    (1..=labels.max_label()).all(|id| {
        let member: Vec<bool> = l.iter().map(|&v| v == id).collect();
        match member.iter().position(|&b| b) {
            None => true,
            Some(start) => reach(&member, w, h, start) == member,
        }
    })
}

/// One step of the reference region grower.
#[derive(Debug, Clone, PartialEq)]
pub struct RefStep {
    pub pixel: usize,
    pub region_id: u32,
    /// Exact deviation `num / den` from the region mean.
    pub num: u64,
    pub den: u64,
}

/// Brute-force region growing: every step rescans the whole image for the
/// unassigned pixel adjacent to a region with the smallest exact deviation
/// from that region's mean (ties: pixel index, then region id).
pub fn naive_grow(img: &GrayImage, seeds: &[Seed], stop: Option<u8>) -> (Vec<u32>, Vec<RefStep>) {
    let (w, h) = img.dims();
    let px = img.pixels();
    let mut labels = vec![0u32; w * h];
    let mut stats: std::collections::BTreeMap<u32, (u64, u64)> = Default::default();
    for s in seeds {
        labels[s.y * w + s.x] = s.region_id;
        let e = stats.entry(s.region_id).or_default();
        e.0 += px[s.y * w + s.x] as u64;
        e.1 += 1;
    }
    let mut steps = Vec::new();
    loop {
        let mut best: Option<RefStep> = None;
        for p in 0..w * h {
            if labels[p] != 0 {
                continue;
            }
            let mut adjacent: Vec<u32> = neighbors(p % w, p / w, w, h)
                .into_iter()
                .map(|(x, y)| labels[y * w + x])
                .filter(|&l| l != 0)
                .collect();
            adjacent.sort_unstable();
            adjacent.dedup();
            for id in adjacent {
                let (sum, count) = stats[&id];
                let cand = RefStep {
                    pixel: p,
                    region_id: id,
                    num: (px[p] as u64 * count).abs_diff(sum),
                    den: count,
                };
                let better = match &best {
                    None => true,
                    Some(b) => {
                        let lhs = cand.num as u128 * b.den as u128;
                        let rhs = b.num as u128 * cand.den as u128;
                        lhs < rhs
                            || (lhs == rhs
                                && (cand.pixel, cand.region_id) < (b.pixel, b.region_id))
                    }
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let Some(step) = best else { break };
        if let Some(tol) = stop {
            if step.num as u128 > tol as u128 * step.den as u128 {
                break;
            }
        }
        labels[step.pixel] = step.region_id;
        let e = stats.get_mut(&step.region_id).unwrap();
        e.0 += px[step.pixel] as u64;
        e.1 += 1;
        steps.push(step);
    }
    (labels, steps)
}

/// Piecewise-constant image: a coarse random label grid upsampled by
/// `block`, each label mapped to `levels[label]`.
pub fn blocky_image(
    rng: &mut impl Rng,
    cells_w: usize,
    cells_h: usize,
    block: usize,
    levels: &[u8],
) -> GrayImage {
    let cells: Vec<u8> = (0..cells_w * cells_h)
        .map(|_| levels[rng.random_range(0..levels.len())])
        .collect();
    GrayImage::from_fn(cells_w * block, cells_h * block, |x, y| {
        cells[(y / block) * cells_w + x / block]
    })
    .unwrap()
}

/// Gray levels spaced more than `stop` apart.
pub fn spaced_levels(rng: &mut impl Rng, stop: u8, count: usize) -> Vec<u8> {
    let gap = stop as usize + 1 + rng.random_range(0..4usize);
    let start = rng.random_range(0..=255 - gap * (count - 1));
    (0..count).map(|k| (start + k * gap) as u8).collect()
}

/// Random histogram: a few random spikes plus sparse clutter.
pub fn random_histogram(rng: &mut impl Rng) -> [u64; 256] {
    let mut bins = [0u64; 256];
    let modes = rng.random_range(1..=4);
    for _ in 0..modes {
        let c = rng.random_range(0..256usize);
        let spread = rng.random_range(0..20usize);
        let mass = rng.random_range(1..5000u64);
        for _ in 0..rng.random_range(1..50) {
            let off = rng.random_range(0..=2 * spread) as isize - spread as isize;
            let j = (c as isize + off).clamp(0, 255) as usize;
            bins[j] += rng.random_range(1..=mass);
        }
    }
    bins
}

pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| rng.random_bool(density)).unwrap()
}

/// `m` embedded in background with `r` pixels of margin on every side.
pub fn pad(m: &BinaryMask, rx: usize, ry: usize) -> BinaryMask {
    let (w, h) = m.dims();
    BinaryMask::from_fn(w + 2 * rx, h + 2 * ry, |x, y| {
        x >= rx && y >= ry && x - rx < w && y - ry < h && m.get(x - rx, y - ry)
    })
    .unwrap()
}

pub fn crop(m: &BinaryMask, x0: usize, y0: usize, w: usize, h: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| m.get(x + x0, y + y0)).unwrap()
}

/// Pixels whose whole structuring-element window lies inside the image.
pub fn interior(se: &StructuringElement, x: usize, y: usize, w: usize, h: usize) -> bool {
    let (rx, ry) = (se.width() / 2, se.height() / 2);
    x >= rx && y >= ry && x + rx < w && y + ry < h
}

/// Erosion / dilation duality checked two ways: exactly on interior pixels,
/// and globally with the complement taken on a background-padded canvas.
pub fn duality_holds(m: &BinaryMask, se: &StructuringElement) -> bool {
    use tumorseg_core::morphology::{dilate, erode};
    let (w, h) = m.dims();
    let eroded = erode(m, se);
    let naive = dilate(&m.complement(), &se.reflect()).complement();
    let interior_ok = (0..h).all(|y| {
        (0..w).all(|x| !interior(se, x, y, w, h) || eroded.get(x, y) == naive.get(x, y))
    });
    let (rx, ry) = (se.width() / 2, se.height() / 2);
    let padded = pad(m, rx, ry);
    let global = crop(&dilate(&padded.complement(), &se.reflect()).complement(), rx, ry, w, h);
    interior_ok && global == eroded
}
