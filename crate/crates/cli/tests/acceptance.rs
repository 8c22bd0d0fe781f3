//! Release acceptance gates, one numbered test per criterion so the
//! harness prints one pass/fail line each.
//!
//! Every gate derives its expected values through a path independent of
//! the code under test: a deliberately brute-force reference pipeline
//! (full window scans, full sorts, explicit set filters), binomial
//! statistics, central differences, or plain byte comparison of files.
//! Library gates call cctp-core directly; workflow gates drive the
//! compiled `cctp` binary end to end in temporary directories. Gates
//! with a runtime budget measure and assert it themselves.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use cctp_core::cctp::{
    cctp_step3, config_label, run_cctp, vertical_weighted_projection, CctpConfig, Recovery,
    Step1Mode,
};
use cctp_core::cfar::{ccfar_step1, CaCfarConfig};
use cctp_core::io::{load_mask, load_tensor};
use cctp_core::synth::generate_noise;
use cctp_core::tensor::{from_sparse, CellIndex, PolarGrid, RadarTensor, SparseMeasurementSet};
use cctp_core::ve::{
    grad_check, sve_baseline, ve_step1_attend, ve_step2_inverse, ve_step2_reshape,
    DenseFeatureMap, VerticalEncoderParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cctp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cctp"))
        .args(args)
        .current_dir(dir)
        .env_remove("CCTP_THREADS")
        .output()
        .expect("spawn cctp")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = cctp(dir, args);
    assert!(
        out.status.success(),
        "cctp {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is utf-8")
}

fn random_tensor(grid: PolarGrid, seed: u64, zero_fraction: f64) -> RadarTensor<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.cell_count())
        .map(|_| {
            if rng.random::<f64>() < zero_fraction {
                0.0
            } else {
                rng.random::<f64>() * 10.0
            }
        })
        .collect();
    RadarTensor::from_values(grid, values).unwrap()
}

/// Asserts the gate's own runtime budget and echoes the measurement.
fn budget(started: Instant, limit_s: u64, what: &str) {
    let elapsed = started.elapsed();
    println!("{what}: {:.2}s (budget {limit_s}s)", elapsed.as_secs_f64());
    assert!(
        elapsed < Duration::from_secs(limit_s),
        "{what} took {elapsed:?}, budget {limit_s}s"
    );
}

/// Brute-force reference pipeline. Everything here is the slow, obvious
/// formulation: per-cell window scans with a membership predicate, full
/// sorts of (value, index) pairs, explicit set filters, per-cell
/// distance tests. Summations run in ascending index order, which pins
/// the floating-point results the fast path must reproduce bit for bit.
mod naive {
    use std::collections::BTreeSet;

    use cctp_core::cctp::{CctpConfig, Step1Mode};
    use cctp_core::tensor::RadarTensor;

    pub struct Pipeline {
        pub m1: RadarTensor<f64>,
        pub m2: RadarTensor<f64>,
        pub m3: RadarTensor<f64>,
        pub ranges: BTreeSet<usize>,
        pub azimuths: BTreeSet<usize>,
    }

    fn cfar_column(values: &[f64], train: usize, guard: usize, pfa: f64) -> Vec<bool> {
        let n = values.len();
        let mut out = vec![false; n];
        for i in 0..n {
            let mut sum = 0.0;
            let mut count = 0usize;
            for (j, v) in values.iter().enumerate() {
                let d = i.abs_diff(j);
                if d > guard && d <= guard + train {
                    sum += v;
                    count += 1;
                }
            }
            if count == 0 {
                continue;
            }
            let alpha = count as f64 * (pfa.powf(-1.0 / count as f64) - 1.0);
            out[i] = values[i] > alpha * (sum / count as f64);
        }
        out
    }

    fn step1_cfar(
        raw: &RadarTensor<f64>,
        train: usize,
        guard: usize,
        pfa: f64,
    ) -> RadarTensor<f64> {
        let g = *raw.grid();
        let mut out = RadarTensor::zeros(g);
        for i_a in 0..g.n_azimuth {
            for i_e in 0..g.n_elevation {
                let column: Vec<f64> =
                    (0..g.n_range).map(|i_r| raw.get(i_r, i_a, i_e)).collect();
                for (i_r, hit) in cfar_column(&column, train, guard, pfa).iter().enumerate() {
                    if *hit {
                        out.set(i_r, i_a, i_e, column[i_r]);
                    }
                }
            }
        }
        out
    }

    fn step1_top_percent(raw: &RadarTensor<f64>, percent: f64) -> RadarTensor<f64> {
        let values = raw.values();
        let quota = ((percent * values.len() as f64) / 100.0).ceil() as usize;
        let mut pairs: Vec<(f64, usize)> = values.iter().copied().zip(0..values.len()).collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let mut out = RadarTensor::zeros(*raw.grid());
        for (v, off) in pairs.into_iter().take(quota) {
            out.values_mut()[off] = v;
        }
        out
    }

    fn step2(
        m1: &RadarTensor<f64>,
        k2: f64,
    ) -> (RadarTensor<f64>, BTreeSet<usize>, BTreeSet<usize>) {
        let g = *m1.grid();
        let mut ranges = BTreeSet::new();
        let mut azimuths = BTreeSet::new();
        for i_r in 0..g.n_range {
            let mut projected = vec![0.0; g.n_azimuth];
            for (i_a, p) in projected.iter_mut().enumerate() {
                for i_e in 0..g.n_elevation {
                    *p += (g.n_elevation - i_e) as f64 * m1.get(i_r, i_a, i_e);
                }
            }
            let quota = ((k2 * g.n_azimuth as f64) / 100.0).ceil() as usize;
            let mut pairs: Vec<(f64, usize)> = projected
                .iter()
                .copied()
                .zip(0..g.n_azimuth)
                .filter(|(v, _)| *v > 0.0)
                .collect();
            pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            let selected: Vec<usize> = pairs.into_iter().take(quota).map(|(_, i)| i).collect();
            if !selected.is_empty() {
                ranges.insert(i_r);
                azimuths.extend(selected);
            }
        }
        let mut m2 = RadarTensor::zeros(g);
        for i_r in 0..g.n_range {
            for i_a in 0..g.n_azimuth {
                if !(ranges.contains(&i_r) && azimuths.contains(&i_a)) {
                    continue;
                }
                for i_e in 0..g.n_elevation {
                    let v = m1.get(i_r, i_a, i_e);
                    if v > 0.0 {
                        m2.set(i_r, i_a, i_e, v);
                    }
                }
            }
        }
        (m2, ranges, azimuths)
    }

    fn step3(
        source: &RadarTensor<f64>,
        ranges: &BTreeSet<usize>,
        azimuths: &BTreeSet<usize>,
        d_r: usize,
        d_a: usize,
    ) -> RadarTensor<f64> {
        let g = *source.grid();
        let mut out = RadarTensor::zeros(g);
        for i_r in 0..g.n_range {
            if !ranges.iter().any(|j| j.abs_diff(i_r) <= d_r) {
                continue;
            }
            for i_a in 0..g.n_azimuth {
                if !azimuths.iter().any(|j| j.abs_diff(i_a) <= d_a) {
                    continue;
                }
                for i_e in 0..g.n_elevation {
                    let v = source.get(i_r, i_a, i_e);
                    if v > 0.0 {
                        out.set(i_r, i_a, i_e, v);
                    }
                }
            }
        }
        out
    }

    pub fn pipeline(raw: &RadarTensor<f64>, cfg: &CctpConfig) -> Pipeline {
        let m1 = match cfg.step1_mode {
            Step1Mode::CaCfar => {
                step1_cfar(raw, cfg.train_cells, cfg.guard_cells, cfg.k1_percent / 100.0)
            }
            Step1Mode::TopPercent => step1_top_percent(raw, cfg.k1_percent),
        };
        let (m2, ranges, azimuths) = match cfg.k2_percent {
            Some(k2) => step2(&m1, k2),
            None => (m1.clone(), BTreeSet::new(), BTreeSet::new()),
        };
        let m3 = match cfg.recovery {
            Some(rec) => {
                let source = if cfg.recover_from_raw { raw } else { &m1 };
                step3(source, &ranges, &azimuths, rec.d_r, rec.d_a)
            }
            None => m2.clone(),
        };
        Pipeline {
            m1,
            m2,
            m3,
            ranges,
            azimuths,
        }
    }
}

#[test]
fn criterion_01_pipeline_equals_naive_reference_exactly() {
    let started = Instant::now();
    let grid = PolarGrid::roi(8, 8, 4).unwrap();
    let mut configs = Vec::new();
    for k1 in [2.5, 5.0, 10.0] {
        for k2 in [2.5, 5.0, 10.0, 15.0] {
            configs.push(CctpConfig {
                k1_percent: k1,
                k2_percent: Some(k2),
                recovery: Some(Recovery { d_r: 2, d_a: 1 }),
                ..CctpConfig::default()
            });
        }
    }
    let mut runs = 0u64;
    for seed in 0..1000u64 {
        let zero_fraction = [0.0, 0.3, 0.7][(seed % 3) as usize];
        let raw = random_tensor(grid, seed, zero_fraction);
        for base in &configs {
            // Default CFAR geometry (heavily clamped on 8 range bins), a
            // tight geometry with live cells on both window sides, and
            // the global top-percent mode.
            let variants = [
                base.clone(),
                CctpConfig {
                    train_cells: 2,
                    guard_cells: 1,
                    ..base.clone()
                },
                CctpConfig {
                    step1_mode: Step1Mode::TopPercent,
                    ..base.clone()
                },
            ];
            for cfg in variants {
                let got = run_cctp(&raw, &cfg).unwrap();
                let want = naive::pipeline(&raw, &cfg);
                let at = format!("seed {seed} config {}", config_label(&cfg));
                assert_eq!(from_sparse(&got.m1), want.m1, "m1 differs: {at}");
                assert_eq!(from_sparse(&got.m2), want.m2, "m2 differs: {at}");
                assert_eq!(from_sparse(&got.m3), want.m3, "m3 differs: {at}");
                assert_eq!(got.indicator, want.m3.nonzero_mask(), "indicator differs: {at}");
                assert_eq!(got.preserved_ranges, want.ranges, "ranges differ: {at}");
                assert_eq!(got.preserved_azimuths, want.azimuths, "azimuths differ: {at}");
                runs += 1;
            }
        }
    }
    assert_eq!(runs, 36_000);
    budget(started, 60, "naive-reference equivalence");
}

#[test]
fn criterion_02_cfar_pass_rate_is_calibrated_on_exponential_noise() {
    let started = Instant::now();
    let grid = PolarGrid::desk();
    let cells = grid.cell_count() as f64;
    for seed in [1u64, 2, 3] {
        let noise = generate_noise::<f64>(grid, 1.0, seed).unwrap();
        for pfa in [0.025, 0.05, 0.10] {
            let cfg = CaCfarConfig {
                pfa,
                ..CaCfarConfig::default()
            };
            let rate = ccfar_step1(&noise, &cfg).unwrap().count_nonzero() as f64 / cells;
            let sigma = (pfa * (1.0 - pfa) / cells).sqrt();
            let dev = (rate - pfa).abs() / sigma;
            println!("seed {seed} pfa {pfa}: pass rate {rate:.5} ({dev:.2} sigma)");
            assert!(
                dev < 4.0,
                "seed {seed} pfa {pfa}: pass rate {rate} is {dev:.2} sigma off"
            );
        }
    }
    budget(started, 30, "CA-CFAR calibration");
}

#[test]
fn criterion_03_nesting_chain_is_enforced_on_every_run() {
    // Production paths: sweep re-checks the chain inside every row and
    // preprocess re-derives it under --verify; both succeed on a real
    // scene. The rejection branch itself is covered by a doctored-output
    // unit test next to verify_output.
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--demo", "--out-prefix", "scene"]);
    let stdout = ok(
        d,
        &["preprocess", "--input", "scene.rtf", "--out-prefix", "run", "--k2", "5", "--verify"],
    );
    assert!(stdout.contains("verify: ok"), "{stdout}");
    ok(d, &["sweep", "--scene", "scene", "--out-dir", "sweep", "--grid", "k1=5;k2=5"]);

    // Independent re-check from the files preprocess wrote.
    let raw: RadarTensor<f64> = load_tensor(d.join("scene.rtf")).unwrap();
    let m1: RadarTensor<f64> = load_tensor(d.join("run.m1.rtf")).unwrap();
    let m3: RadarTensor<f64> = load_tensor(d.join("run.m3.rtf")).unwrap();
    let indicator = load_mask(d.join("run.indicator.rtm")).unwrap();
    assert!(m3.nonzero_mask().is_subset_of(&m1.nonzero_mask()).unwrap());
    assert!(m1.nonzero_mask().is_subset_of(&raw.nonzero_mask()).unwrap());
    assert_eq!(indicator, m3.nonzero_mask());

    // m2 never reaches the disk; rebuild it in process for the full chain.
    let out = run_cctp(&raw, &CctpConfig::default()).unwrap();
    let m2 = from_sparse(&out.m2).nonzero_mask();
    assert!(m2.is_subset_of(&from_sparse(&out.m3).nonzero_mask()).unwrap());

    // A failed check exits with 1, distinct from usage errors: a step
    // size this coarse pushes the finite-difference error past the gate.
    let out = cctp(d, &["ve-check", "--cn", "16", "--z", "4", "--eps", "0.75"]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed"));
}

/// Splits one CSV row, honoring double-quoted fields ("" unescapes to ").
fn csv_fields(line: &str) -> Vec<String> {
    let mut fields = vec![String::new()];
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                chars.next();
                fields.last_mut().unwrap().push('"');
            }
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(String::new()),
            _ => fields.last_mut().unwrap().push(c),
        }
    }
    fields
}

/// Overall (whole-span) PRVM/RRIM per label from a sweep CSV.
fn overall_rates(csv: &str) -> HashMap<String, (f64, f64)> {
    let mut out = HashMap::new();
    for line in csv.lines().skip(1) {
        let fields = csv_fields(line);
        if fields[1] == "0" && fields[2] == "72" {
            let prvm: f64 = fields[3].parse().expect("prvm");
            let rrim: f64 = fields[4].parse().expect("rrim");
            out.insert(fields[0].clone(), (prvm, rrim));
        }
    }
    out
}

#[test]
fn criterion_04_prvm_rrim_trends_follow_k1_and_step2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--demo", "--out-prefix", "scene"]);
    // Top-percent step 1 makes K1 a survivor quota, so the kept set grows
    // monotonically with K1 by construction.
    ok(
        d,
        &["sweep", "--scene", "scene", "--out-dir", "out", "--step1", "top", "--grid", "k1=2.5,5,10;k2=5"],
    );
    let csv = std::fs::read_to_string(d.join("out/sweep.csv")).unwrap();
    let overall = overall_rates(&csv);
    let rate = |label: &str| *overall.get(label).unwrap_or_else(|| panic!("no row {label}"));

    let (p25, r25) = rate("2.5-Nan-Nan");
    let (p5, r5) = rate("5-Nan-Nan");
    let (p10, r10) = rate("10-Nan-Nan");
    println!("step-1 only: prvm {p25:.4} -> {p5:.4} -> {p10:.4}, rrim {r25:.4} -> {r5:.4} -> {r10:.4}");
    assert!(p25 < p5 && p5 < p10, "PRVM not strictly increasing in K1");
    assert!(r25 > r5 && r5 > r10, "RRIM not strictly decreasing in K1");

    // Step 2 only removes cells, so RRIM never drops and PRVM never rises.
    for k1 in ["2.5", "5", "10"] {
        let (pa, ra) = rate(&format!("{k1}-Nan-Nan"));
        let (pb, rb) = rate(&format!("{k1}-5-Nan"));
        assert!(rb >= ra, "K1={k1}: step 2 lowered RRIM");
        assert!(pb <= pa, "K1={k1}: step 2 raised PRVM");
    }

    // At K1=5 the trade is strictly favorable: a real RRIM gain at a
    // relative PRVM cost below it.
    let (pa, ra) = rate("5-Nan-Nan");
    let (pb, rb) = rate("5-5-Nan");
    assert!(rb > ra, "step 2 gained no RRIM at K1=5: {ra} -> {rb}");
    let prvm_drop = (pa - pb) / pa;
    let rrim_gain = (rb - ra) / ra;
    println!("K1=5 step-2 trade: relative prvm drop {prvm_drop:.2e}, relative rrim gain {rrim_gain:.2e}");
    assert!(
        prvm_drop < rrim_gain,
        "PRVM cost {prvm_drop} outweighs RRIM gain {rrim_gain}"
    );
}

#[test]
fn criterion_05_projection_matches_triple_loop_and_exact_weights() {
    for n_e in [1usize, 3, 32] {
        let grid = PolarGrid::roi(5, 7, n_e).unwrap();
        // A unit impulse at elevation bin i_e projects to exactly
        // n_e - i_e.
        for i_e in 0..n_e {
            let mut t = RadarTensor::<f64>::zeros(grid);
            t.set(2, 3, i_e, 1.0);
            let p = vertical_weighted_projection(&t, 2).unwrap();
            assert_eq!(p[3], (n_e - i_e) as f64, "weight of bin {i_e} of {n_e}");
            assert!(p.iter().enumerate().all(|(i_a, v)| i_a == 3 || *v == 0.0));
        }
        for seed in 0..200u64 {
            let t = random_tensor(grid, seed, 0.3);
            for i_r in 0..5 {
                let got = vertical_weighted_projection(&t, i_r).unwrap();
                for (i_a, v) in got.iter().enumerate() {
                    // Triple loop accumulated top-down: a genuinely
                    // different summation order, hence the tolerance.
                    let mut want = 0.0;
                    for i_e in (0..n_e).rev() {
                        want += (n_e - i_e) as f64 * t.get(i_r, i_a, i_e);
                    }
                    let scale = want.abs().max(1.0);
                    assert!(
                        (v - want).abs() <= 1e-12 * scale,
                        "n_e {n_e} seed {seed} ({i_r},{i_a}): {v} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn criterion_06_singleton_recovery_is_a_clamped_rectangle() {
    let grid = PolarGrid::roi(12, 9, 3).unwrap();
    let ones = RadarTensor::from_values(grid, vec![1.0; grid.cell_count()]).unwrap();
    let rec = Recovery { d_r: 2, d_a: 1 };
    for (r0, a0) in [(0usize, 0usize), (1, 8), (6, 4), (11, 0), (11, 8)] {
        let jr: BTreeSet<usize> = [r0].into();
        let ja: BTreeSet<usize> = [a0].into();
        let out = cctp_step3(&ones, &jr, &ja, rec).unwrap();
        let mut kept = 0usize;
        for i_r in 0..12usize {
            for i_a in 0..9usize {
                let inside = i_r.abs_diff(r0) <= 2 && i_a.abs_diff(a0) <= 1;
                for i_e in 0..3 {
                    assert_eq!(
                        out.get(i_r, i_a, i_e) > 0.0,
                        inside,
                        "singleton ({r0},{a0}), cell ({i_r},{i_a},{i_e})"
                    );
                    kept += inside as usize;
                }
            }
        }
        assert_eq!(out.count_nonzero(), kept);
    }
    // Interior footprint is the full 5 x 3 rectangle across every
    // elevation bin; a corner clamps to 3 x 2.
    let interior = cctp_step3(&ones, &[6].into(), &[4].into(), rec).unwrap();
    assert_eq!(interior.count_nonzero(), 5 * 3 * 3);
    let corner = cctp_step3(&ones, &[0].into(), &[0].into(), rec).unwrap();
    assert_eq!(corner.count_nonzero(), 3 * 2 * 3);
    // Zero cells inside the window stay removed.
    let mut holed = ones.clone();
    holed.set(6, 4, 1, 0.0);
    let out = cctp_step3(&holed, &[6].into(), &[4].into(), rec).unwrap();
    assert_eq!(out.get(6, 4, 1), 0.0);
    assert_eq!(out.count_nonzero(), 5 * 3 * 3 - 1);
}

#[test]
fn criterion_07_per_range_selection_beats_global_sort_by_half_n_e() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Wall-clock numbers are reported for the record; only the
    // comparison-count ratio is gated.
    let stdout = ok(d, &["bench", "--out-dir", "bench"]);
    for line in stdout.lines() {
        println!("bench | {line}");
    }
    let csv = std::fs::read_to_string(d.join("bench/bench.csv")).unwrap();
    let row = csv.lines().nth(1).expect("one data row");
    let fields = csv_fields(row);
    assert_eq!(fields[0], "128x96x32");
    assert_eq!(fields[1], "5-5-(2,1)");
    let per_range: f64 = fields[2].parse().unwrap();
    let global: f64 = fields[3].parse().unwrap();
    let ratio: f64 = fields[4].parse().unwrap();
    assert!(per_range > 0.0 && global > per_range);
    // The default grid has 32 elevation bins; the per-range selection
    // must beat the global sort by at least half that factor.
    assert!(ratio >= 16.0, "comparison ratio {ratio} below 16");

    // The degenerate single-cell grid still defines the ratio.
    ok(d, &["bench", "--grid", "1x1x1", "--repeat", "1", "--out-dir", "tiny"]);
    let csv = std::fs::read_to_string(d.join("tiny/bench.csv")).unwrap();
    let tiny: f64 = csv_fields(csv.lines().nth(1).unwrap())[4].parse().unwrap();
    assert!(tiny >= 1.0, "1x1x1 ratio {tiny}");
    budget(started, 60, "comparison-count benchmark");
}

#[test]
fn criterion_08_vertical_encoder_numerics_hold() {
    let started = Instant::now();

    // (a) analytic gradients vs central differences, every coordinate of
    // every group, at the reference size.
    let fm = DenseFeatureMap::<f64>::seeded(64, 8, 1, 1, 11).unwrap();
    let params = VerticalEncoderParams::<f64>::seeded(64, 2, 12).unwrap();
    let report = grad_check(&fm, &params, 1e-5).unwrap();
    println!(
        "grad check: max rel err {:.3e} over {} coords (worst {}[{}])",
        report.max_rel_err, report.checked, report.worst_group, report.worst_index
    );
    assert!(report.max_rel_err <= 1e-6, "{:?}", report);

    // (b) every attention simplex is nonnegative and sums to one.
    let fm = DenseFeatureMap::<f64>::seeded(64, 8, 2, 2, 13).unwrap();
    let (_, weights) = ve_step1_attend(&fm, &params).unwrap();
    for h in 0..weights.n_heads {
        for y in 0..weights.height {
            for x in 0..weights.width {
                let mut sum = 0.0;
                for z in 0..weights.depth {
                    let w = weights.get(h, z, y, x);
                    assert!(w.is_finite() && w >= 0.0);
                    sum += w;
                }
                assert!((sum - 1.0).abs() <= 1e-12, "weight sum {sum} at ({h},{y},{x})");
            }
        }
    }

    // (c) the block reshape round-trips bitwise.
    let bev = sve_baseline(&fm);
    let back = ve_step2_inverse(&ve_step2_reshape(&bev, 2).unwrap(), 2).unwrap();
    assert_eq!(back.values(), bev.values());

    // (d) identical vertical slices draw exactly uniform attention, and
    // the attended output matches the single-slice map.
    let single = DenseFeatureMap::<f64>::seeded(64, 1, 2, 2, 14).unwrap();
    let mut stacked = DenseFeatureMap::<f64>::zeros(64, 8, 2, 2).unwrap();
    for c in 0..64 {
        for z in 0..8 {
            for y in 0..2 {
                for x in 0..2 {
                    stacked.set(c, z, y, x, single.get(c, 0, y, x));
                }
            }
        }
    }
    let (bev1, w1) = ve_step1_attend(&single, &params).unwrap();
    let (bev8, w8) = ve_step1_attend(&stacked, &params).unwrap();
    for w in w1.values() {
        assert_eq!(*w, 1.0);
    }
    for w in w8.values() {
        assert!((w - 0.125).abs() <= 1e-12, "non-uniform weight {w}");
    }
    for (a, b) in bev8.values().iter().zip(bev1.values()) {
        let scale = b.abs().max(1.0);
        assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
    }

    budget(started, 10, "vertical encoder numerics");
}

#[test]
fn criterion_09_identical_invocations_reproduce_outputs_byte_for_byte() {
    // Same binary, same relative arguments, two working directories.
    let run = |d: &Path| {
        ok(d, &["synth", "--demo", "--out-prefix", "scene"]);
        ok(
            d,
            &["preprocess", "--input", "scene.rtf", "--out-prefix", "run", "--k2", "5", "--verify"],
        );
        ok(d, &["sweep", "--scene", "scene", "--out-dir", "sweep", "--grid", "k1=2.5,5;k2=5"]);
        ok(
            d,
            &["eval", "--indicator", "run.indicator.rtm", "--valid", "scene.valid.rtm", "--out", "eval.csv"],
        );
        ok(d, &["bench", "--grid", "32x24x8", "--repeat", "2", "--out-dir", "bench"]);
        ok(d, &["ve-check", "--cn", "16", "--z", "4", "--scores-out", "weights.csv"]);
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run(dir_a.path());
    run(dir_b.path());

    let artifacts = [
        "scene.rtf",
        "scene.valid.rtm",
        "scene.spec.txt",
        "run.m1.rtf",
        "run.m3.rtf",
        "run.indicator.rtm",
        "run.jr.txt",
        "run.ja.txt",
        "sweep/sweep.csv",
        "sweep/sweep_prvm.svg",
        "sweep/sweep_rrim.svg",
        "eval.csv",
        "bench/bench.csv",
        "weights.csv",
    ];
    for name in artifacts {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert!(a == b, "{name} differs between identical runs ({} vs {} bytes)", a.len(), b.len());
    }

    // Manifests carry wall-clock timings on trailing lines; everything
    // above them (command, config digest, artifact hashes) must agree.
    let manifests = [
        "scene.manifest.txt",
        "run.manifest.txt",
        "sweep/manifest.txt",
        "eval.manifest.txt",
        "bench/manifest.txt",
        "weights.manifest.txt",
    ];
    for name in manifests {
        let strip = |root: &Path| -> String {
            std::fs::read_to_string(root.join(name))
                .unwrap()
                .lines()
                .filter(|l| !l.starts_with("timing "))
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = strip(dir_a.path());
        let b = strip(dir_b.path());
        assert!(a.contains("config_digest: sha256:"), "{name} lacks a digest");
        assert_eq!(a, b, "{name} differs beyond timings");
    }
}

fn index_set(s: &SparseMeasurementSet<f64>) -> Vec<CellIndex> {
    s.cells().iter().map(|(c, _)| *c).collect()
}

#[test]
fn criterion_10_masks_are_invariant_under_power_scaling() {
    let grid = PolarGrid::roi(16, 12, 6).unwrap();
    for seed in [3u64, 4, 5] {
        let raw = random_tensor(grid, seed, 0.25);
        let scaled =
            RadarTensor::from_values(grid, raw.values().iter().map(|v| v * 7.3).collect())
                .unwrap();
        let configs = [
            CctpConfig::default(),
            CctpConfig {
                train_cells: 3,
                guard_cells: 1,
                ..CctpConfig::default()
            },
            CctpConfig {
                step1_mode: Step1Mode::TopPercent,
                ..CctpConfig::default()
            },
        ];
        for cfg in configs {
            let a = run_cctp(&raw, &cfg).unwrap();
            let b = run_cctp(&scaled, &cfg).unwrap();
            let at = format!("seed {seed} config {}", config_label(&cfg));
            assert_eq!(a.indicator, b.indicator, "indicator changed: {at}");
            assert_eq!(index_set(&a.m1), index_set(&b.m1), "m1 cells changed: {at}");
            assert_eq!(index_set(&a.m2), index_set(&b.m2), "m2 cells changed: {at}");
            assert_eq!(index_set(&a.m3), index_set(&b.m3), "m3 cells changed: {at}");
            assert_eq!(a.preserved_ranges, b.preserved_ranges, "{at}");
            assert_eq!(a.preserved_azimuths, b.preserved_azimuths, "{at}");
        }
    }
}
