use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;
use tumorseg_core::metrics::{area_accuracy, confusion, metric_set, tumor_area};
use tumorseg_core::raster::{load_mask, save_mask};
use tumorseg_harness::manifest::{Entry, FcmSettings, SeedSpec};
use tumorseg_harness::phantom::{write_phantom_set, PhantomFile};
use tumorseg_harness::{run_bench, run_method, write_report, Case, Manifest, Method, MethodReport};

#[derive(Debug, Parser)]
#[command(name = "tumorseg", version, about = "Threshold-based tumor segmentation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment one image and write the mask as PGM.
    Segment {
        #[arg(long)]
        image: PathBuf,
        /// srg, global_threshold, watershed, fcm or histogram_symmetry.
        #[arg(long, value_parser = Method::from_str)]
        method: Method,
        /// Seed `x,y` or `x,y,region_id`; repeatable.
        #[arg(long = "seed", value_parser = parse_seed)]
        seeds: Vec<SeedSpec>,
        /// Fixed threshold; repeat for multi-threshold mode. Omit for Otsu.
        #[arg(long = "threshold")]
        thresholds: Vec<u8>,
        /// FCM fuzzifier.
        #[arg(long)]
        tau: Option<f64>,
        /// Side of the square structuring element (odd).
        #[arg(long, default_value_t = 3)]
        se: usize,
        /// Region-growing stop tolerance.
        #[arg(long, default_value_t = tumorseg_harness::manifest::DEFAULT_STOP_DELTA)]
        stop_delta: u8,
        /// Skip region-growing refinement in global thresholding.
        #[arg(long)]
        no_refine: bool,
        /// Ground truth; adds metrics to the printed row.
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a manifest and write report.csv, report.json and masks/.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        /// Defaults to the manifest's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compare a predicted mask with ground truth.
    Metrics {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Render phantoms from a spec file and write a manifest for them.
    Phantom {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_seed(s: &str) -> std::result::Result<SeedSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<usize>().map_err(|e| format!("bad seed `{s}`: {e}"));
    match parts.as_slice() {
        [x, y] => Ok(SeedSpec::Xy(num(x)?, num(y)?)),
        [x, y, id] => {
            let id = id.parse::<u32>().map_err(|e| format!("bad seed `{s}`: {e}"))?;
            Ok(SeedSpec::Labeled(num(x)?, num(y)?, id))
        }
        _ => Err(format!("seed `{s}` must be x,y or x,y,region_id")),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

#[allow(clippy::too_many_arguments)]
fn segment(
    image: PathBuf,
    method: Method,
    seeds: Vec<SeedSpec>,
    thresholds: Vec<u8>,
    tau: Option<f64>,
    se: usize,
    stop_delta: u8,
    no_refine: bool,
    gt: Option<PathBuf>,
    out: PathBuf,
) -> Result<()> {
    if method == Method::Srg && seeds.is_empty() {
        bail!("method srg needs at least one --seed");
    }
    let mut fcm = FcmSettings::default();
    if let Some(t) = tau {
        fcm.tau = t;
    }
    let entry = Entry {
        ground_truth_path: gt,
        seeds,
        thresholds,
        fcm,
        se_size: se,
        stop_delta: Some(stop_delta),
        refine: !no_refine,
        ..Entry::new(image)
    };
    let case = Case::load(&entry)?;
    let run = run_method(&case, method)?;
    create_dir(&out)?;
    let path = out.join(format!("{}__{}.pgm", case.id, method));
    save_mask(&run.mask, &path)?;
    let row = MethodReport::score(&case.id, method, &run.mask, case.truth.as_ref(), run.runtime_ms)?;
    println!("{}", serde_json::to_string_pretty(&row)?);
    eprintln!("mask written to {}", path.display());
    Ok(())
}

fn bench(manifest: PathBuf, out: Option<PathBuf>, workers: Option<usize>) -> Result<()> {
    let mut m = Manifest::load(&manifest)?;
    if workers.is_some() {
        m.workers = workers;
    }
    let Some(out) = out.or_else(|| m.output_dir.clone()) else {
        bail!("no output directory: pass --out or set output_dir in the manifest");
    };
    let run = run_bench(&m)?;
    create_dir(&out)?;
    write_report(&run.reports, &run.masks, &out)?;
    for f in &run.failures {
        eprintln!("error: {}/{}: {}", f.image_id, f.method, f.message);
    }
    for r in run.reports.iter().filter(|r| r.is_average()) {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<20} fscore {:>8}  area_pred {:>8}  runtime_ms {:>10}",
            r.method,
            show(r.fscore),
            show(r.area_pred),
            show(r.runtime_ms)
        );
    }
    eprintln!(
        "{} rows ({} errors) written to {}",
        run.reports.len(),
        run.failures.len(),
        out.display()
    );
    Ok(())
}

fn metrics(gt: PathBuf, pred: PathBuf) -> Result<()> {
    let gt = load_mask(&gt).with_context(|| format!("ground truth {}", gt.display()))?;
    let pred = load_mask(&pred).with_context(|| format!("prediction {}", pred.display()))?;
    let c = confusion(&gt, &pred)?;
    let m = metric_set(&c);
    let pa = tumor_area(&pred, true);
    let ga = tumor_area(&gt, false);
    let out = json!({
        "tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn_,
        "sensitivity": m.sensitivity,
        "specificity": m.specificity,
        "precision": m.precision,
        "fscore": m.fscore,
        "pixel_accuracy": m.pixel_accuracy,
        "area_accuracy": area_accuracy(&pa, &ga).ok(),
        "area_pred": pa.area,
        "area_gt": ga.area,
        "white_pixels_pred": pa.white_pixels,
        "component_areas_pred": pa.per_component_areas,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn phantom(spec: PathBuf, out: PathBuf) -> Result<()> {
    let text = fs::read_to_string(&spec).with_context(|| format!("cannot read {}", spec.display()))?;
    let file: PhantomFile =
        serde_json::from_str(&text).with_context(|| format!("cannot parse {}", spec.display()))?;
    create_dir(&out)?;
    let m = write_phantom_set(&file.into_specs(), &out)?;
    eprintln!(
        "{} phantoms and manifest.json written to {}",
        m.entries.len(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment {
            image,
            method,
            seeds,
            thresholds,
            tau,
            se,
            stop_delta,
            no_refine,
            gt,
            out,
        } => segment(image, method, seeds, thresholds, tau, se, stop_delta, no_refine, gt, out),
        Command::Bench {
            manifest,
            out,
            workers,
        } => bench(manifest, out, workers),
        Command::Metrics { gt, pred } => metrics(gt, pred),
        Command::Phantom { spec, out } => phantom(spec, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
