//! End-to-end flows across modules: scene generation through the
//! pipeline into scores, and the same flow routed through on-disk
//! artifacts.

use cctp_core::cctp::{run_cctp, CctpConfig};
use cctp_core::io::{load_mask, load_tensor, save_mask, save_tensor};
use cctp_core::metrics::{prvm_rrim, report_csv, sweep_report, RangeBins, SweepRow};
use cctp_core::synth::{generate_scene, Extent, SceneSpec, TargetSpec, DEFAULT_SIDELOBE_DB};
use cctp_core::tensor::{CellIndex, PolarGrid};

fn bench_scene() -> cctp_core::Scene {
    let mut spec = SceneSpec {
        grid: PolarGrid::new(64, 48, 16, 0.5625, 0.28125, -22.0, 0.9375, -0.5, 0.28125).unwrap(),
        seed: 17,
        ..SceneSpec::default()
    };
    for k in 0..6 {
        spec.targets.push(TargetSpec {
            center: CellIndex {
                i_r: 8 + 9 * k,
                i_a: (11 * k + 7) % 48,
                i_e: 3 + (k % 4),
            },
            extent: Extent {
                d_range: 2,
                d_azimuth: 2,
                d_elevation: 1,
            },
            peak_snr_db: 20.0,
            sidelobe_level_db: DEFAULT_SIDELOBE_DB,
        });
    }
    generate_scene(&spec).unwrap()
}

#[test]
fn scene_to_scores_end_to_end() {
    let scene = bench_scene();
    let bins = RangeBins::uniform(0.0, 36.0, 6).unwrap();
    let rows = sweep_report(&scene, &[CctpConfig::default()], &bins).unwrap();
    let overall = &rows[0].report.overall;

    // Strong targets on the default pipeline: most valid cells survive,
    // most noise goes. Generous floors — this guards wiring, not tuning.
    assert!(overall.prvm.unwrap() > 0.5, "prvm = {:?}", overall.prvm);
    assert!(overall.rrim.unwrap() > 0.9, "rrim = {:?}", overall.rrim);

    let csv = report_csv(&rows);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 6 + 1); // header + bins + overall
    assert!(lines[0].starts_with("label,"));
    // The comma inside the recovery label forces quoting.
    assert!(lines[7].starts_with("\"5-5-(2,1)\",0,36,"));
}

#[test]
fn pipeline_through_files_is_stable() {
    let scene = bench_scene();
    let dir = tempfile::tempdir().unwrap();
    let tensor_path = dir.path().join("scene.rtf");
    let valid_path = dir.path().join("scene.valid.rtm");
    save_tensor(&scene.tensor, &tensor_path).unwrap();
    save_mask(&scene.valid_mask, &valid_path).unwrap();

    // Storage narrows to 32-bit floats, so the on-disk tensor is the
    // canonical input: one narrowing round-trip must be a fixed point.
    let loaded: cctp_core::Tensor = load_tensor(&tensor_path).unwrap();
    let tensor_path2 = dir.path().join("scene2.rtf");
    save_tensor(&loaded, &tensor_path2).unwrap();
    assert_eq!(
        std::fs::read(&tensor_path).unwrap(),
        std::fs::read(&tensor_path2).unwrap()
    );

    let valid = load_mask(&valid_path).unwrap();
    assert_eq!(valid, scene.valid_mask);

    // Two runs from the loaded artifacts agree byte-for-byte in CSV.
    let bins = RangeBins::default_roi();
    let mut csvs = Vec::new();
    for _ in 0..2 {
        let out = run_cctp(&loaded, &CctpConfig::default()).unwrap();
        let report = prvm_rrim(&out.indicator, &valid, &bins).unwrap();
        csvs.push(report_csv(&[SweepRow {
            label: "5-5-(2,1)".into(),
            report,
        }]));
    }
    assert_eq!(csvs[0], csvs[1]);

    // And the filtered masks survive their own save/load round trip.
    let out = run_cctp(&loaded, &CctpConfig::default()).unwrap();
    let indicator_path = dir.path().join("indicator.rtm");
    save_mask(&out.indicator, &indicator_path).unwrap();
    assert_eq!(load_mask(&indicator_path).unwrap(), out.indicator);
}
