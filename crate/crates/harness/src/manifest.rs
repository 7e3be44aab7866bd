//! JSON benchmark manifest.
//!
//! ```json
//! {
//!   "entries": [
//!     {"id": "case1", "image_path": "img.pgm", "ground_truth_path": "gt.pgm",
//!      "seeds": [[12, 20]], "thresholds": [120], "se_size": 3}
//!   ],
//!   "methods": ["srg", "global_threshold", "watershed", "fcm", "histogram_symmetry"],
//!   "output_dir": "out"
//! }
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tumorseg_core::{FcmParams, Seed, StructuringElement, ThresholdValue};

use crate::error::{HarnessError, Result};

/// Stop tolerance used when a manifest entry does not set one.
pub const DEFAULT_STOP_DELTA: u8 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Srg,
    GlobalThreshold,
    Watershed,
    Fcm,
    HistogramSymmetry,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Srg,
        Method::GlobalThreshold,
        Method::Watershed,
        Method::Fcm,
        Method::HistogramSymmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Srg => "srg",
            Method::GlobalThreshold => "global_threshold",
            Method::Watershed => "watershed",
            Method::Fcm => "fcm",
            Method::HistogramSymmetry => "histogram_symmetry",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
            format!("unknown method `{s}`, expected one of {}", names.join(", "))
        })
    }
}

/// A seed as written in JSON: `[x, y]` or `[x, y, region_id]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Xy(usize, usize),
    Labeled(usize, usize, u32),
}

impl SeedSpec {
    /// Unlabeled seeds join region 1.
    pub fn to_seed(self) -> Seed {
        match self {
            SeedSpec::Xy(x, y) => Seed::new(x, y, 1),
            SeedSpec::Labeled(x, y, id) => Seed::new(x, y, id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FcmSettings {
    pub tau: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for FcmSettings {
    fn default() -> Self {
        let p = FcmParams::default();
        Self {
            tau: p.tau,
            tol: p.tol,
            max_iters: p.max_iters,
        }
    }
}

impl From<FcmSettings> for FcmParams {
    fn from(s: FcmSettings) -> Self {
        FcmParams {
            tau: s.tau,
            max_iters: s.max_iters,
            tol: s.tol,
        }
    }
}

fn default_se_size() -> usize {
    3
}

fn default_stop_delta() -> Option<u8> {
    Some(DEFAULT_STOP_DELTA)
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    /// Report key; defaults to the image file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub image_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_path: Option<PathBuf>,
    #[serde(default)]
    pub seeds: Vec<SeedSpec>,
    /// Empty selects Otsu; more than one unions per-threshold masks.
    #[serde(default)]
    pub thresholds: Vec<u8>,
    #[serde(default)]
    pub fcm: FcmSettings,
    #[serde(default = "default_se_size")]
    pub se_size: usize,
    /// Region-growing stop tolerance; `null` grows a full partition.
    #[serde(default = "default_stop_delta")]
    pub stop_delta: Option<u8>,
    /// Region-growing refinement inside the global-threshold pipeline.
    #[serde(default = "default_true")]
    pub refine: bool,
}

impl Entry {
    pub fn new(image_path: impl Into<PathBuf>) -> Self {
        Self {
            id: None,
            image_path: image_path.into(),
            ground_truth_path: None,
            seeds: Vec::new(),
            thresholds: Vec::new(),
            fcm: FcmSettings::default(),
            se_size: default_se_size(),
            stop_delta: default_stop_delta(),
            refine: true,
        }
    }

    pub fn image_id(&self) -> String {
        match &self.id {
            Some(id) => id.clone(),
            None => self
                .image_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.image_path.display().to_string()),
        }
    }

    pub fn seeds(&self) -> Vec<Seed> {
        self.seeds.iter().map(|s| s.to_seed()).collect()
    }

    pub fn threshold_values(&self) -> Vec<ThresholdValue> {
        self.thresholds.iter().map(|&t| ThresholdValue(t)).collect()
    }

    pub fn structuring_element(&self) -> Result<StructuringElement> {
        Ok(StructuringElement::square(self.se_size)?)
    }

    pub fn fcm_params(&self) -> FcmParams {
        self.fcm.into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<Entry>,
    pub methods: Vec<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; absent means one per core.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Manifest {
    /// Read, resolve relative paths against the file's directory, validate.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut manifest: Manifest = serde_json::from_str(&text).map_err(|e| HarnessError::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        manifest.resolve_paths(base);
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        for e in &mut self.entries {
            fix(&mut e.image_path);
            if let Some(gt) = &mut e.ground_truth_path {
                fix(gt);
            }
        }
        if let Some(out) = &mut self.output_dir {
            fix(out);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::InvalidManifest(msg));
        if self.entries.is_empty() {
            return bad("at least one entry is required".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        let mut ids = std::collections::BTreeSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            if e.image_path.as_os_str().is_empty() {
                return bad(format!("entry {i}: empty image_path"));
            }
            if e.ground_truth_path.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
                return bad(format!("entry {i}: empty ground_truth_path"));
            }
            let id = e.image_id();
            if !ids.insert(id.clone()) {
                return bad(format!("duplicate image id `{id}`"));
            }
            if self.methods.contains(&Method::Srg) && e.seeds.is_empty() {
                return bad(format!("entry `{id}`: srg requires at least one seed"));
            }
            if e.se_size % 2 == 0 {
                return bad(format!("entry `{id}`: se_size must be odd, got {}", e.se_size));
            }
            e.fcm_params()
                .validate()
                .map_err(|err| HarnessError::InvalidManifest(format!("entry `{id}`: {err}")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Manifest {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn defaults_and_seed_forms() {
        let m = parse(
            r#"{"entries":[{"image_path":"a/b.pgm","seeds":[[1,2],[3,4,2]]}],"methods":["srg","fcm"]}"#,
        );
        m.validate().unwrap();
        let e = &m.entries[0];
        assert_eq!(e.image_id(), "b");
        assert_eq!(e.seeds(), vec![Seed::new(1, 2, 1), Seed::new(3, 4, 2)]);
        assert_eq!(e.se_size, 3);
        assert_eq!(e.stop_delta, Some(DEFAULT_STOP_DELTA));
        assert!(e.refine);
        assert_eq!(e.fcm_params(), FcmParams::default());
        assert_eq!(m.methods, vec![Method::Srg, Method::Fcm]);
    }

    #[test]
    fn explicit_null_stop_delta() {
        let m = parse(r#"{"entries":[{"image_path":"x.pgm","stop_delta":null}],"methods":["fcm"]}"#);
        assert_eq!(m.entries[0].stop_delta, None);
    }

    #[test]
    fn invariants() {
        let no_seed = parse(r#"{"entries":[{"image_path":"x.pgm"}],"methods":["srg"]}"#);
        assert!(no_seed.validate().is_err());
        let no_entries = parse(r#"{"entries":[],"methods":["fcm"]}"#);
        assert!(no_entries.validate().is_err());
        let no_methods = parse(r#"{"entries":[{"image_path":"x.pgm"}],"methods":[]}"#);
        assert!(no_methods.validate().is_err());
        let empty_path = parse(r#"{"entries":[{"image_path":""}],"methods":["fcm"]}"#);
        assert!(empty_path.validate().is_err());
        let dup = parse(
            r#"{"entries":[{"image_path":"a/x.pgm"},{"image_path":"b/x.pgm"}],"methods":["fcm"]}"#,
        );
        assert!(dup.validate().is_err());
        let even_se = parse(r#"{"entries":[{"image_path":"x.pgm","se_size":4}],"methods":["fcm"]}"#);
        assert!(even_se.validate().is_err());
        let bad_tau =
            parse(r#"{"entries":[{"image_path":"x.pgm","fcm":{"tau":1.0}}],"methods":["fcm"]}"#);
        assert!(bad_tau.validate().is_err());
    }

    #[test]
    fn unknown_method_rejected() {
        assert!(serde_json::from_str::<Manifest>(
            r#"{"entries":[{"image_path":"x.pgm"}],"methods":["kmeans"]}"#
        )
        .is_err());
        assert!("kmeans".parse::<Method>().is_err());
        assert_eq!("histogram_symmetry".parse::<Method>().unwrap(), Method::HistogramSymmetry);
    }

    #[test]
    fn relative_paths_resolve_against_base() {
        let mut m = parse(
            r#"{"entries":[{"image_path":"img.pgm","ground_truth_path":"/abs/gt.pgm"}],"methods":["fcm"],"output_dir":"out"}"#,
        );
        m.resolve_paths(Path::new("/data/run"));
        assert_eq!(m.entries[0].image_path, Path::new("/data/run/img.pgm"));
        assert_eq!(m.entries[0].ground_truth_path.as_deref(), Some(Path::new("/abs/gt.pgm")));
        assert_eq!(m.output_dir.as_deref(), Some(Path::new("/data/run/out")));
    }
}
