//! Synthetic disk phantoms with exact ground truth.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tumorseg_core::raster::{save_image, save_mask};
use tumorseg_core::{BinaryMask, GrayImage};

use crate::error::{HarnessError, Result};
use crate::manifest::{Entry, Manifest, Method, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disk {
    pub cx: usize,
    pub cy: usize,
    pub radius: usize,
    /// Overrides the phantom's foreground intensity for this disk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<u8>,
}

impl Disk {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let dx = x as i64 - self.cx as i64;
        let dy = y as i64 - self.cy as i64;
        dx * dx + dy * dy <= (self.radius * self.radius) as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhantomSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub width: usize,
    pub height: usize,
    pub disks: Vec<Disk>,
    pub foreground: u8,
    pub background: u8,
    /// Uniform integer noise in `[-noise, noise]`, added then clamped.
    #[serde(default)]
    pub noise: u8,
    /// Seed of the noise generator.
    #[serde(default)]
    pub seed: u64,
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::InvalidPhantom(msg));
        if self.width == 0 || self.height == 0 {
            return bad(format!("size {}x{} must be positive", self.width, self.height));
        }
        if self.disks.is_empty() {
            return bad("at least one disk is required".into());
        }
        for d in &self.disks {
            if d.cx < d.radius
                || d.cy < d.radius
                || d.cx + d.radius >= self.width
                || d.cy + d.radius >= self.height
            {
                return bad(format!(
                    "disk at ({}, {}) radius {} does not fit in {}x{}",
                    d.cx, d.cy, d.radius, self.width, self.height
                ));
            }
            let fg = d.intensity.unwrap_or(self.foreground);
            if fg <= self.background {
                return bad(format!(
                    "disk intensity {fg} must exceed background {}",
                    self.background
                ));
            }
        }
        Ok(())
    }

    /// Center of the first disk, a pixel guaranteed inside the tumor.
    pub fn interior_point(&self) -> Option<(usize, usize)> {
        self.disks.first().map(|d| (d.cx, d.cy))
    }
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: GrayImage,
    pub truth: BinaryMask,
    pub spec: PhantomSpec,
}

pub fn gen_phantom(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let inside = |x: usize, y: usize| spec.disks.iter().find(|d| d.contains(x, y));
    let truth = BinaryMask::from_fn(w, h, |x, y| inside(x, y).is_some())?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let amp = spec.noise as i32;
    let image = GrayImage::from_fn(w, h, |x, y| {
        let base = match inside(x, y) {
            Some(d) => d.intensity.unwrap_or(spec.foreground),
            None => spec.background,
        } as i32;
        let n = if amp > 0 { rng.random_range(-amp..=amp) } else { 0 };
        (base + n).clamp(0, 255) as u8
    })?;
    Ok(Phantom {
        image,
        truth,
        spec: spec.clone(),
    })
}

/// A phantom spec file holds one spec or a list of them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhantomFile {
    Suite { phantoms: Vec<PhantomSpec> },
    Single(PhantomSpec),
}

impl PhantomFile {
    pub fn into_specs(self) -> Vec<PhantomSpec> {
        match self {
            Self::Suite { phantoms } => phantoms,
            Self::Single(s) => vec![s],
        }
    }
}

/// Report id of the `index`-th phantom of a suite.
pub fn phantom_id(spec: &PhantomSpec, index: usize) -> String {
    spec.id.clone().unwrap_or_else(|| format!("phantom{index:02}"))
}

/// Render every phantom to `out_dir/images/<id>.pgm` and
/// `out_dir/truth/<id>.pgm`, and write `out_dir/manifest.json` running all
/// methods with an interior seed. Returns the manifest as written (paths
/// relative to `out_dir`).
pub fn write_phantom_set(specs: &[PhantomSpec], out_dir: &Path) -> Result<Manifest> {
    if specs.is_empty() {
        return Err(HarnessError::InvalidPhantom("no phantoms given".into()));
    }
    for sub in ["images", "truth"] {
        let d = out_dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| HarnessError::io(&d, e))?;
    }
    let mut entries = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let id = phantom_id(spec, i);
        let p = gen_phantom(spec)?;
        let image_path = Path::new("images").join(format!("{id}.pgm"));
        let truth_path = Path::new("truth").join(format!("{id}.pgm"));
        save_image(&p.image, out_dir.join(&image_path))?;
        save_mask(&p.truth, out_dir.join(&truth_path))?;
        let (x, y) = spec.interior_point().expect("validated phantom has a disk");
        entries.push(Entry {
            id: Some(id),
            ground_truth_path: Some(truth_path),
            seeds: vec![SeedSpec::Xy(x, y)],
            ..Entry::new(image_path)
        });
    }
    let manifest = Manifest {
        entries,
        methods: Method::ALL.to_vec(),
        output_dir: None,
        workers: None,
    };
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| HarnessError::Json {
        path: path.clone(),
        source: e,
    })?;
    fs::write(&path, json).map_err(|e| HarnessError::io(&path, e))?;
    Ok(manifest)
}
