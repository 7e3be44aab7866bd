//! Report rows and their CSV / JSON / PGM output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tumorseg_core::metrics::{area_accuracy, confusion, metric_set, tumor_area};
use tumorseg_core::raster::save_mask;
use tumorseg_core::BinaryMask;

use crate::error::{HarnessError, Result};
use crate::manifest::Method;

pub const CSV_HEADER: &str = "image_id,method,tp,fp,tn,fn,sensitivity,specificity,precision,fscore,pixel_accuracy,area_accuracy,area_pred,area_gt,runtime_ms";

/// `image_id` of the per-method average rows.
pub const AVERAGE_ID: &str = "average";

/// One (image, method) row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub image_id: String,
    pub method: String,
    pub tp: Option<u64>,
    pub fp: Option<u64>,
    pub tn: Option<u64>,
    #[serde(rename = "fn")]
    pub fn_: Option<u64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub fscore: Option<f64>,
    pub pixel_accuracy: Option<f64>,
    pub area_accuracy: Option<f64>,
    pub area_pred: Option<f64>,
    pub area_gt: Option<f64>,
    pub runtime_ms: Option<f64>,
}

impl MethodReport {
    /// Row with every numeric field null.
    pub fn empty(image_id: impl Into<String>, method: Method) -> Self {
        Self {
            image_id: image_id.into(),
            method: method.name().to_string(),
            tp: None,
            fp: None,
            tn: None,
            fn_: None,
            sensitivity: None,
            specificity: None,
            precision: None,
            fscore: None,
            pixel_accuracy: None,
            area_accuracy: None,
            area_pred: None,
            area_gt: None,
            runtime_ms: None,
        }
    }

    /// Score a prediction. Without ground truth only `area_pred` and
    /// `runtime_ms` are filled.
    pub fn score(
        image_id: impl Into<String>,
        method: Method,
        pred: &BinaryMask,
        truth: Option<&BinaryMask>,
        runtime_ms: f64,
    ) -> Result<Self> {
        let mut r = Self::empty(image_id, method);
        let pred_area = tumor_area(pred, false);
        r.area_pred = Some(pred_area.area);
        r.runtime_ms = Some(runtime_ms);
        if let Some(gt) = truth {
            let c = confusion(gt, pred)?;
            let m = metric_set(&c);
            let gt_area = tumor_area(gt, false);
            r.tp = Some(c.tp);
            r.fp = Some(c.fp);
            r.tn = Some(c.tn);
            r.fn_ = Some(c.fn_);
            r.sensitivity = m.sensitivity;
            r.specificity = m.specificity;
            r.precision = m.precision;
            r.fscore = m.fscore;
            r.pixel_accuracy = Some(m.pixel_accuracy);
            r.area_accuracy = area_accuracy(&pred_area, &gt_area).ok();
            r.area_gt = Some(gt_area.area);
        }
        Ok(r)
    }

    pub fn is_average(&self) -> bool {
        self.image_id == AVERAGE_ID
    }
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-method averages over the non-null values of each metric column.
/// Count columns stay null.
pub fn average_rows(rows: &[MethodReport], methods: &[Method]) -> Vec<MethodReport> {
    let mut methods = methods.to_vec();
    methods.sort_by_key(|m| m.name());
    methods.dedup();
    methods
        .into_iter()
        .map(|method| {
            let of: Vec<&MethodReport> = rows
                .iter()
                .filter(|r| r.method == method.name() && !r.is_average())
                .collect();
            let col = |f: fn(&MethodReport) -> Option<f64>| mean(of.iter().map(|r| f(r)));
            MethodReport {
                sensitivity: col(|r| r.sensitivity),
                specificity: col(|r| r.specificity),
                precision: col(|r| r.precision),
                fscore: col(|r| r.fscore),
                pixel_accuracy: col(|r| r.pixel_accuracy),
                area_accuracy: col(|r| r.area_accuracy),
                area_pred: col(|r| r.area_pred),
                area_gt: col(|r| r.area_gt),
                runtime_ms: col(|r| r.runtime_ms),
                ..MethodReport::empty(AVERAGE_ID, method)
            }
        })
        .collect()
}

/// A predicted mask to be written under `masks/`.
#[derive(Debug, Clone)]
pub struct PredictedMask {
    pub image_id: String,
    pub method: Method,
    pub mask: BinaryMask,
}

impl PredictedMask {
    pub fn file_name(&self) -> String {
        format!("{}__{}.pgm", self.image_id, self.method.name())
    }
}

fn opt<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map(|v| format!("{v:?}")).unwrap_or_default()
}

fn parse_opt<T: std::str::FromStr>(field: &str, name: &str) -> Result<Option<T>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| HarnessError::InvalidReport(format!("bad {name} value `{field}`")))
}

impl MethodReport {
    /// CSV fields in header order; floats use the shortest exact decimal form.
    fn csv_fields(&self) -> [String; 15] {
        [
            self.image_id.clone(),
            self.method.clone(),
            opt(self.tp),
            opt(self.fp),
            opt(self.tn),
            opt(self.fn_),
            opt(self.sensitivity),
            opt(self.specificity),
            opt(self.precision),
            opt(self.fscore),
            opt(self.pixel_accuracy),
            opt(self.area_accuracy),
            opt(self.area_pred),
            opt(self.area_gt),
            opt(self.runtime_ms),
        ]
    }

    fn from_csv_fields(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != 15 {
            return Err(HarnessError::InvalidReport(format!("expected 15 fields, got {}", r.len())));
        }
        let names: Vec<&str> = CSV_HEADER.split(',').collect();
        let u = |i: usize| parse_opt::<u64>(&r[i], names[i]);
        let f = |i: usize| parse_opt::<f64>(&r[i], names[i]);
        Ok(Self {
            image_id: r[0].to_string(),
            method: r[1].to_string(),
            tp: u(2)?,
            fp: u(3)?,
            tn: u(4)?,
            fn_: u(5)?,
            sensitivity: f(6)?,
            specificity: f(7)?,
            precision: f(8)?,
            fscore: f(9)?,
            pixel_accuracy: f(10)?,
            area_accuracy: f(11)?,
            area_pred: f(12)?,
            area_gt: f(13)?,
            runtime_ms: f(14)?,
        })
    }
}

pub fn to_csv(reports: &[MethodReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))?;
    for r in reports {
        w.write_record(r.csv_fields())?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<MethodReport>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    if rdr.headers()?.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(HarnessError::InvalidReport("unexpected header".into()));
    }
    rdr.records().map(|r| MethodReport::from_csv_fields(&r?)).collect()
}

fn write(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).map_err(|e| HarnessError::io(path, e))
}

/// Write `report.csv`, `report.json` and `masks/<image>__<method>.pgm`.
pub fn write_report(reports: &[MethodReport], masks: &[PredictedMask], output_dir: &Path) -> Result<()> {
    let mask_dir = output_dir.join("masks");
    fs::create_dir_all(&mask_dir).map_err(|e| HarnessError::io(&mask_dir, e))?;
    write(&output_dir.join("report.csv"), to_csv(reports)?.as_bytes())?;
    let json_path = output_dir.join("report.json");
    let json = serde_json::to_string_pretty(reports).map_err(|e| HarnessError::Json {
        path: json_path.clone(),
        source: e,
    })?;
    write(&json_path, json.as_bytes())?;
    for m in masks {
        save_mask(&m.mask, mask_dir.join(m.file_name()))?;
    }
    Ok(())
}
