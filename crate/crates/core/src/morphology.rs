//! Binary morphology and 4-connected component analysis.
//!
//! Border rules: dilation ignores structuring-element cells that fall
//! outside the image, erosion treats them as background (so foreground
//! touching the border erodes).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LabelMap};

/// Binary structuring element with odd dimensions and its origin at the center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl StructuringElement {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(Error::InvalidStructuringElement("dimensions must be odd"));
        }
        if bits.len() != width * height {
            return Err(Error::InvalidStructuringElement(
                "bit count does not match dimensions",
            ));
        }
        if !bits.iter().any(|&b| b) {
            return Err(Error::InvalidStructuringElement("needs at least one set cell"));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// `size x size` all-ones square.
    pub fn square(size: usize) -> Result<Self> {
        Self::new(size, size, vec![true; size * size])
    }

    /// Digital disk of the given radius inside a `(2r+1)` square.
    pub fn disk(radius: usize) -> Self {
        let side = 2 * radius + 1;
        let r2 = (radius * radius) as isize;
        let bits = (0..side * side)
            .map(|i| {
                let dx = (i % side) as isize - radius as isize;
                let dy = (i / side) as isize - radius as isize;
                dx * dx + dy * dy <= r2
            })
            .collect();
        Self {
            width: side,
            height: side,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn origin_set(&self) -> bool {
        self.bits[(self.height / 2) * self.width + self.width / 2]
    }

    /// Point reflection through the origin.
    pub fn reflect(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().rev().copied().collect(),
        }
    }

    /// Offsets `(dx, dy)` of the set cells relative to the origin.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let (cx, cy) = ((self.width / 2) as isize, (self.height / 2) as isize);
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| {
                (
                    (i % self.width) as isize - cx,
                    (i / self.width) as isize - cy,
                )
            })
            .collect()
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square(3).expect("3x3 square is valid")
    }
}

#[inline]
fn lookup(mask: &BinaryMask, x: isize, y: isize) -> Option<bool> {
    if x < 0 || y < 0 || x >= mask.width() as isize || y >= mask.height() as isize {
        None
    } else {
        Some(mask.get(x as usize, y as usize))
    }
}

/// `z` is set iff the reflected element translated to `z` hits the foreground.
pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let offsets = se.offsets();
    let (w, h) = mask.dims();
    BinaryMask::from_index_fn(w, h, |i| {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        offsets
            .iter()
            .any(|&(dx, dy)| lookup(mask, x - dx, y - dy) == Some(true))
    })
}

/// `z` is set iff the element translated to `z` lies entirely in the foreground.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let offsets = se.offsets();
    let (w, h) = mask.dims();
    BinaryMask::from_index_fn(w, h, |i| {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        offsets
            .iter()
            .all(|&(dx, dy)| lookup(mask, x + dx, y + dy) == Some(true))
    })
}

pub fn open(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    dilate(&erode(mask, se), se)
}

/// Closing of the mask embedded in an unbounded background plane. The
/// intermediate dilation is evaluated on a canvas padded by the element's
/// reach, so foreground touching the border is not eroded away.
pub fn close(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (px, py) = (se.width() / 2, se.height() / 2);
    let padded = pad(mask, px, py);
    crop(&erode(&dilate(&padded, se), se), px, py, mask.width(), mask.height())
}

fn pad(mask: &BinaryMask, px: usize, py: usize) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w + 2 * px, h + 2 * py, |x, y| {
        x >= px && y >= py && x - px < w && y - py < h && mask.get(x - px, y - py)
    })
    .expect("padded dimensions are positive")
}

fn crop(mask: &BinaryMask, x0: usize, y0: usize, w: usize, h: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| mask.get(x + x0, y + y0)).expect("crop inside mask")
}

/// Opening followed by closing with the same element.
pub fn open_close_cleanup(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    close(&open(mask, se), se)
}

pub(crate) fn neighbors4(
    idx: usize,
    width: usize,
    height: usize,
) -> impl Iterator<Item = usize> {
    let (x, y) = (idx % width, idx / width);
    let up = (y > 0).then(|| idx - width);
    let left = (x > 0).then(|| idx - 1);
    let right = (x + 1 < width).then(|| idx + 1);
    let down = (y + 1 < height).then(|| idx + width);
    [up, left, right, down].into_iter().flatten()
}

/// Label 4-connected foreground components `1..=K` in order of their first
/// pixel in row-major scan.
pub fn connected_components(mask: &BinaryMask) -> LabelMap {
    let (w, h) = mask.dims();
    let bits = mask.bits();
    let mut labels = vec![0u32; bits.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..bits.len() {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for q in neighbors4(p, w, h) {
                if bits[q] && labels[q] == 0 {
                    labels[q] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    LabelMap::new(w, h, labels).expect("same dimensions as mask")
}

/// Keep only the component with the most pixels; ties go to the earliest one.
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let labels = connected_components(mask);
    let sizes = labels.label_sizes();
    let best = sizes
        .iter()
        .enumerate()
        .skip(1)
        .fold(None, |best: Option<(usize, usize)>, (l, &s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((l, s)),
        });
    match best {
        Some((label, _)) => labels.mask_of(label as u32),
        None => mask.clone(),
    }
}
