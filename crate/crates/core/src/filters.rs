//! 3x3 neighbourhood filters: high-pass edge response and median denoising.
//!
//! Both filters replicate edge pixels outside the image.

use crate::raster::GrayImage;

/// Row-major 3x3 integer kernel, applied as a correlation (no flip).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kernel3x3(pub [i32; 9]);

impl Kernel3x3 {
    /// Mixed-derivative high-pass mask used by the watershed pipeline:
    /// rows `[-1, 2, -1]`, `[0, 0, 0]`, `[1, -2, 1]`.
    pub const HIGH_PASS: Self = Self([-1, 2, -1, 0, 0, 0, 1, -2, 1]);

    /// Standard 8-neighbour Laplacian, available for comparison.
    pub const LAPLACIAN_8: Self = Self([-1, -1, -1, -1, 8, -1, -1, -1, -1]);

    pub fn coefficients(&self) -> &[i32; 9] {
        &self.0
    }
}

/// Which kernel the high-pass stage uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HighPassKernel {
    #[default]
    MixedDerivative,
    Laplacian,
}

impl HighPassKernel {
    pub fn kernel(self) -> Kernel3x3 {
        match self {
            Self::MixedDerivative => Kernel3x3::HIGH_PASS,
            Self::Laplacian => Kernel3x3::LAPLACIAN_8,
        }
    }
}

/// Correlate with `kernel`, take the absolute response and clamp to 255.
pub fn correlate_abs(img: &GrayImage, kernel: &Kernel3x3) -> GrayImage {
    let (w, h) = img.dims();
    let k = kernel.coefficients();
    let mut out = Vec::with_capacity(img.len());
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0i32;
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let c = k[((dy + 1) * 3 + dx + 1) as usize];
                    acc += c * img.get_clamped(x + dx, y + dy) as i32;
                }
            }
            out.push(acc.unsigned_abs().min(255) as u8);
        }
    }
    GrayImage::new(w, h, out).expect("same dimensions as input")
}

/// Edge-strength image from the mixed-derivative high-pass mask.
pub fn convolve_highpass(img: &GrayImage) -> GrayImage {
    correlate_abs(img, &Kernel3x3::HIGH_PASS)
}

pub fn median3x3(img: &GrayImage) -> GrayImage {
    let (w, h) = img.dims();
    let mut out = Vec::with_capacity(img.len());
    let mut window = [0u8; 9];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut n = 0;
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    window[n] = img.get_clamped(x + dx, y + dy);
                    n += 1;
                }
            }
            window.sort_unstable();
            out.push(window[4]);
        }
    }
    GrayImage::new(w, h, out).expect("same dimensions as input")
}
