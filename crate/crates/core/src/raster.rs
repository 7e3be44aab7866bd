//! Raster containers, grayscale conversion, histograms and PGM/PNG I/O.
//!
//! Every image in the toolkit is an 8-bit single-channel raster stored
//! row-major. Masks hold one boolean per pixel; label maps hold one `u32`
//! per pixel with 0 reserved for background.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be at least 1",
        });
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "buffer length does not equal width * height",
        });
    }
    Ok(())
}

/// 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Pixel lookup with coordinates clamped to the image (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    pub fn max_value(&self) -> u8 {
        self.pixels.iter().copied().max().unwrap_or(0)
    }

    pub fn min_value(&self) -> u8 {
        self.pixels.iter().copied().min().unwrap_or(0)
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks(self.width) {
            pixels.extend(row.iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// 8-bit RGB raster, row-major `(r, g, b)` triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

/// Foreground/background decision per pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width.saturating_mul(height)])
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width.saturating_mul(height)])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    /// Same-shaped mask produced by a per-index predicate. Infallible because
    /// the shape is copied from an already valid raster.
    pub(crate) fn from_index_fn(
        width: usize,
        height: usize,
        f: impl FnMut(usize) -> bool,
    ) -> Self {
        Self {
            width,
            height,
            bits: (0..width * height).map(f).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn none(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self::from_index_fn(self.width, self.height, |i| {
            self.bits[i] || other.bits[i]
        }))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self::from_index_fn(self.width, self.height, |i| {
            self.bits[i] && other.bits[i]
        }))
    }

    /// `true` when every foreground pixel of `self` is foreground in `other`.
    /// Masks of different shapes are never subsets of each other.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dims() == other.dims()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut bits = Vec::with_capacity(self.bits.len());
        for row in self.bits.chunks(self.width) {
            bits.extend(row.iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            bits,
        }
    }

    /// Tight inclusive bounding box `(x0, y0, x1, y1)` of the foreground.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            let (x, y) = (i % self.width, i / self.width);
            bbox = Some(match bbox {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
        bbox
    }
}

/// Non-negative integer labels per pixel, 0 = background / unlabeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        check_dims(width, height, labels.len())?;
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, label: u32) {
        self.labels[y * self.width + x] = label;
    }

    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Mask of all pixels carrying `label`.
    pub fn mask_of(&self, label: u32) -> BinaryMask {
        BinaryMask::from_index_fn(self.width, self.height, |i| self.labels[i] == label)
    }

    /// Mask of all pixels with a positive label.
    pub fn foreground(&self) -> BinaryMask {
        BinaryMask::from_index_fn(self.width, self.height, |i| self.labels[i] > 0)
    }

    /// Pixel count per label, indexed by label value (index 0 = background).
    pub fn label_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.max_label() as usize + 1];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// 256-bin gray-level histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; 256],
}

impl Histogram {
    pub fn from_bins(bins: [u64; 256]) -> Self {
        Self { bins }
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    pub fn min_occupied(&self) -> Option<u8> {
        self.bins.iter().position(|&c| c > 0).map(|j| j as u8)
    }

    pub fn max_occupied(&self) -> Option<u8> {
        self.bins.iter().rposition(|&c| c > 0).map(|j| j as u8)
    }

    pub fn occupied_levels(&self) -> usize {
        self.bins.iter().filter(|&&c| c > 0).count()
    }

    /// Bin-wise absolute difference `|a_j - b_j|`.
    pub fn abs_diff(&self, other: &Self) -> Self {
        let mut bins = [0u64; 256];
        for (j, bin) in bins.iter_mut().enumerate() {
            *bin = self.bins[j].abs_diff(other.bins[j]);
        }
        Self { bins }
    }
}

/// Luma conversion with weights 0.299 / 0.587 / 0.114, rounded to nearest.
pub fn rgb_to_gray(img: &RgbImage) -> GrayImage {
    let pixels = img
        .pixels
        .iter()
        .map(|&[r, g, b]| {
            let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

pub fn histogram(img: &GrayImage) -> Histogram {
    histogram_of(img.pixels.iter().copied())
}

/// Histogram of an arbitrary stream of samples.
pub fn histogram_of(samples: impl IntoIterator<Item = u8>) -> Histogram {
    let mut bins = [0u64; 256];
    for v in samples {
        bins[v as usize] += 1;
    }
    Histogram { bins }
}

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Load a PGM (P2/P5, maxval <= 255) or 8-bit PNG file as grayscale.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let data = match fs::read(path) {
        Ok(d) => d,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingFile(path.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    decode_image(&data)
}

/// Decode PGM or PNG bytes; the format is sniffed from the magic number.
pub fn decode_image(data: &[u8]) -> Result<GrayImage> {
    if data.starts_with(PNG_SIGNATURE) {
        return decode_png(data);
    }
    decode_pgm(data)
}

fn decode_png(data: &[u8]) -> Result<GrayImage> {
    use image::DynamicImage;

    let img = image::load_from_memory_with_format(data, image::ImageFormat::Png)
        .map_err(|e| Error::UnsupportedFormat(format!("png decode failed: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => GrayImage::new(w, h, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => {
            let px = buf.into_raw().chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            Ok(rgb_to_gray(&RgbImage::new(w, h, px)?))
        }
        other => Err(Error::UnsupportedFormat(format!(
            "png color type {:?}; only 8-bit gray or RGB are read",
            other.color()
        ))),
    }
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read_number(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("{what} out of range")))
    }
}

/// Decode a P2 or P5 graymap. Sample values are taken as-is, without
/// rescaling to the 0..=255 range when maxval is smaller.
pub fn decode_pgm(data: &[u8]) -> Result<GrayImage> {
    if data.len() < 2 || data[0] != b'P' {
        return Err(Error::MalformedHeader("missing P-number magic".into()));
    }
    let binary = match data[1] {
        b'2' => false,
        b'5' => true,
        b'1' | b'3' | b'4' | b'6' | b'7' => {
            return Err(Error::UnsupportedFormat(format!(
                "P{} netpbm files are not grayscale maps",
                data[1] as char
            )))
        }
        _ => return Err(Error::MalformedHeader("unknown magic number".into())),
    };
    let mut cur = HeaderCursor { data, pos: 2 };
    let width = cur.read_number("width")? as usize;
    let height = cur.read_number("height")? as usize;
    let maxval = cur.read_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be at least 1",
        });
    }
    if maxval == 0 {
        return Err(Error::MalformedHeader("maxval must be positive".into()));
    }
    if maxval > 255 {
        return Err(Error::MaxvalTooLarge(maxval));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("image dimensions overflow".into()))?;

    let pixels = if binary {
        // exactly one whitespace byte separates maxval from the payload
        match data.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(Error::MalformedHeader("no whitespace after maxval".into())),
        }
        let payload = &data[cur.pos..];
        if payload.len() < expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: payload.len(),
            });
        }
        let pixels = payload[..expected].to_vec();
        if let Some(&v) = pixels.iter().find(|&&v| u32::from(v) > maxval) {
            return Err(Error::MalformedHeader(format!(
                "sample {v} exceeds maxval {maxval}"
            )));
        }
        pixels
    } else {
        let mut pixels = Vec::with_capacity(expected);
        for found in 0..expected {
            cur.skip_whitespace_and_comments();
            if cur.pos >= data.len() {
                return Err(Error::TruncatedPayload { expected, found });
            }
            let v = cur.read_number("sample")?;
            if v > maxval {
                return Err(Error::MalformedHeader(format!(
                    "sample {v} exceeds maxval {maxval}"
                )));
            }
            pixels.push(v as u8);
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}

/// Encode a grayscale image as binary PGM (P5, maxval 255).
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_pgm(img))?;
    Ok(())
}

/// Mask as a grayscale image: foreground 255, background 0.
pub fn mask_to_image(mask: &BinaryMask) -> GrayImage {
    GrayImage {
        width: mask.width,
        height: mask.height,
        pixels: mask.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
    }
}

/// Write a mask as P5 with foreground 255 and background 0.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    save_image(&mask_to_image(mask), path)
}

/// Nonzero pixels are foreground.
pub fn image_to_mask(img: &GrayImage) -> BinaryMask {
    BinaryMask {
        width: img.width,
        height: img.height,
        bits: img.pixels.iter().map(|&v| v != 0).collect(),
    }
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    Ok(image_to_mask(&load_image(path)?))
}
