use std::path::Path;

use tumorseg_core::metrics::tumor_area;
use tumorseg_core::raster::{load_mask, save_image};
use tumorseg_harness::manifest::{Entry, SeedSpec};
use tumorseg_harness::phantom::{gen_phantom, write_phantom_set, Disk, PhantomSpec};
use tumorseg_harness::report::{from_csv, MethodReport, CSV_HEADER};
use tumorseg_harness::run::segment;
use tumorseg_harness::{run_bench, run_method, write_report, Case, Manifest, Method};

fn spec(cx: usize, cy: usize, r: usize, seed: u64) -> PhantomSpec {
    PhantomSpec {
        id: None,
        width: 48,
        height: 48,
        disks: vec![Disk {
            cx,
            cy,
            radius: r,
            intensity: None,
        }],
        foreground: 200,
        background: 40,
        noise: 8,
        seed,
    }
}

fn two_entry_manifest(dir: &Path) -> Manifest {
    write_phantom_set(&[spec(12, 20, 6, 1), spec(34, 28, 8, 2)], dir).unwrap();
    Manifest::load(dir.join("manifest.json")).unwrap()
}

#[test]
fn two_entries_five_methods() {
    let dir = tempfile::tempdir().unwrap();
    let m = two_entry_manifest(dir.path());
    let run = run_bench(&m).unwrap();
    assert!(run.failures.is_empty());
    assert_eq!(run.reports.len(), 10 + 5);
    let keys: Vec<(String, String)> = run.reports[..10]
        .iter()
        .map(|r| (r.image_id.clone(), r.method.clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(run.reports[10..].iter().all(|r| r.is_average() && r.tp.is_none()));
    for r in &run.reports[..10] {
        assert!(r.runtime_ms.unwrap() >= 0.0);
        assert!(r.fscore.unwrap() >= 0.9, "{}/{}: {:?}", r.image_id, r.method, r.fscore);
    }
}

#[test]
fn missing_ground_truth_gives_null_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = two_entry_manifest(dir.path());
    for e in &mut m.entries {
        e.ground_truth_path = None;
    }
    let run = run_bench(&m).unwrap();
    for r in run.reports.iter().filter(|r| !r.is_average()) {
        assert!(r.tp.is_none() && r.fscore.is_none() && r.area_gt.is_none() && r.area_accuracy.is_none());
        assert!(r.area_pred.is_some());
    }
}

#[test]
fn failures_become_error_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = two_entry_manifest(dir.path());
    m.entries[0].image_path = dir.path().join("missing.pgm");
    m.entries[0].id = Some("broken".into());
    // out-of-bounds seed: srg fails on the second entry only
    m.entries[1].seeds = vec![SeedSpec::Xy(500, 500)];
    let run = run_bench(&m).unwrap();
    assert_eq!(run.reports.len(), 15);
    assert_eq!(run.failures.len(), 5 + 1);
    let broken: Vec<&MethodReport> = run.reports.iter().filter(|r| r.image_id == "broken").collect();
    assert_eq!(broken.len(), 5);
    assert!(broken.iter().all(|r| r.area_pred.is_none() && r.runtime_ms.is_none()));
    let srg = run
        .reports
        .iter()
        .find(|r| r.image_id == "phantom01" && r.method == "srg")
        .unwrap();
    assert!(srg.area_pred.is_none());
    assert!(run.failures.iter().any(|f| f.message.contains("phantom01/srg")));
}

#[test]
fn threshold_above_max_is_empty_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let m = two_entry_manifest(dir.path());
    let mut entry = m.entries[0].clone();
    entry.thresholds = vec![255];
    let case = Case::load(&entry).unwrap();
    assert!(case.image.max_value() < 255);
    let run = run_method(&case, Method::GlobalThreshold).unwrap();
    assert!(run.mask.none());
    let row = MethodReport::score(&case.id, Method::GlobalThreshold, &run.mask, case.truth.as_ref(), run.runtime_ms).unwrap();
    assert_eq!(row.tp, Some(0));
    assert_eq!(row.fp, Some(0));
    assert_eq!(row.fscore, None);
}

#[test]
fn two_thresholds_keep_both_disks() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/two_disks.json")).unwrap();
    let p = gen_phantom(&serde_json::from_str(&text).unwrap()).unwrap();
    let mut entry = Entry::new("two_disks.pgm");
    entry.thresholds = vec![100, 180];
    for method in [Method::GlobalThreshold, Method::Watershed] {
        let mask = segment(&p.image, &entry, method).unwrap();
        let a = tumor_area(&mask, true);
        assert_eq!(a.per_component_areas.len(), 2, "{method}");
        assert!(a.per_component_areas.iter().all(|&v| v > 0.0));
    }
    // a single threshold keeps only the largest component
    entry.thresholds = vec![100];
    entry.refine = false;
    let single = segment(&p.image, &entry, Method::GlobalThreshold).unwrap();
    assert_eq!(tumor_area(&single, true).per_component_areas.len(), 1);
}

#[test]
fn written_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let m = two_entry_manifest(dir.path());
    let run = run_bench(&m).unwrap();
    let out = dir.path().join("out");
    write_report(&run.reports, &run.masks, &out).unwrap();
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    let json: Vec<MethodReport> =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(from_csv(&csv).unwrap(), run.reports);
    assert_eq!(json, run.reports);
    for pm in &run.masks {
        assert_eq!(load_mask(out.join("masks").join(pm.file_name())).unwrap(), pm.mask);
    }
}

#[test]
fn image_id_defaults_to_file_stem() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen_phantom(&spec(20, 20, 5, 3)).unwrap();
    save_image(&p.image, dir.path().join("scan_07.pgm")).unwrap();
    let manifest = Manifest {
        entries: vec![Entry::new(dir.path().join("scan_07.pgm"))],
        methods: vec![Method::Fcm],
        output_dir: None,
        workers: Some(2),
    };
    let run = run_bench(&manifest).unwrap();
    assert_eq!(run.reports[0].image_id, "scan_07");
    assert_eq!(run.reports.len(), 2);
}
