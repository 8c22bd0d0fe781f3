//! `cctp bench`: wall-clock per pipeline stage plus instrumented
//! comparison counts for the central ordering claim — per-range
//! selection does far less sorting work than ordering the whole tensor.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use cctp_core::cctp::{
    cctp_step2, cctp_step3, config_label, vertical_weighted_projection, CctpConfig, Recovery,
};
use cctp_core::cfar::{ccfar_step1, os_select_top_k_counted, top_percent_global_counted, CaCfarConfig};
use cctp_core::io::atomic_write;
use cctp_core::metrics;
use cctp_core::synth::generate_noise;
use cctp_core::tensor::PolarGrid;
use cctp_core::Tensor;
use clap::Args;

use super::{parse_dims, CliFailure, CliResult};
use crate::manifest::Manifest;

#[derive(Args)]
pub struct BenchArgs {
    /// Tensor dimensions RxAxE over the standard region of interest
    #[arg(long, default_value = "128x96x32")]
    grid: String,

    /// Number of timed repetitions
    #[arg(long, default_value_t = 5)]
    repeat: usize,

    /// Output directory (bench.csv, manifest.txt)
    #[arg(long)]
    out_dir: PathBuf,

    /// Step-1 false-alarm percentage K1
    #[arg(long, default_value_t = 5.0)]
    k1: f64,

    /// Step-2 per-range percentage K2
    #[arg(long, default_value_t = 5.0)]
    k2: f64,

    /// Step-3 range half-width
    #[arg(long, default_value_t = 2)]
    dr: usize,

    /// Step-3 azimuth half-width
    #[arg(long, default_value_t = 1)]
    da: usize,

    /// CA-CFAR training cells per side
    #[arg(long, default_value_t = 16)]
    train: usize,

    /// CA-CFAR guard cells per side
    #[arg(long, default_value_t = 2)]
    guard: usize,

    /// Noise seed
    #[arg(long, default_value_t = 20260816)]
    seed: u64,
}

fn stats(times: &mut [Duration]) -> (f64, f64, f64) {
    times.sort_unstable();
    let s = |d: Duration| d.as_secs_f64();
    (
        s(times[0]),
        s(times[times.len() / 2]),
        s(times[times.len() - 1]),
    )
}

/// Comparator invocations of the step-2 route: one per-range selection
/// over each projected slice of the step-1 output.
fn per_range_comparisons(m1: &Tensor, k2: f64) -> Result<u64, CliFailure> {
    let mut total = 0u64;
    for i_r in 0..m1.grid().n_range {
        let projected = vertical_weighted_projection(m1, i_r)?;
        let (_, comparisons) = os_select_top_k_counted(&projected, k2)?;
        total += comparisons;
    }
    Ok(total)
}

pub fn run(args: BenchArgs) -> CliResult {
    if args.repeat == 0 {
        return Err(CliFailure::Usage("--repeat must be at least 1".to_string()));
    }
    let (n_r, n_a, n_e) = parse_dims(&args.grid)?;
    let grid = PolarGrid::roi(n_r, n_a, n_e)?;
    let recovery = Recovery {
        d_r: args.dr,
        d_a: args.da,
    };
    let cfg = CctpConfig {
        k1_percent: args.k1,
        k2_percent: Some(args.k2),
        recovery: Some(recovery),
        train_cells: args.train,
        guard_cells: args.guard,
        ..CctpConfig::default()
    };
    cfg.validate()?;
    let label = config_label(&cfg);
    let ca = CaCfarConfig {
        train_cells: args.train,
        guard_cells: args.guard,
        pfa: args.k1 / 100.0,
    };

    let started = Instant::now();
    let raw: Tensor = generate_noise(grid, 1.0, args.seed)?;
    let generate_time = started.elapsed();

    let mut t1 = Vec::with_capacity(args.repeat);
    let mut t2 = Vec::with_capacity(args.repeat);
    let mut t3 = Vec::with_capacity(args.repeat);
    for _ in 0..args.repeat {
        let started = Instant::now();
        let m1 = ccfar_step1(&raw, &ca)?;
        t1.push(started.elapsed());
        let started = Instant::now();
        let s2 = cctp_step2(&m1, args.k2)?;
        t2.push(started.elapsed());
        let started = Instant::now();
        let _m3 = cctp_step3(&m1, &s2.preserved_ranges, &s2.preserved_azimuths, recovery)?;
        t3.push(started.elapsed());
    }

    // The instrumented counts are exact comparator tallies, so one pass
    // suffices and the CSV stays byte-reproducible.
    let m1 = ccfar_step1(&raw, &ca)?;
    let per_range = per_range_comparisons(&m1, args.k2)?;
    let (_, global) = top_percent_global_counted(&raw, args.k2)?;
    let ratio = if per_range == 0 {
        if global == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        global as f64 / per_range as f64
    };

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliFailure::Usage(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let csv_path = args.out_dir.join("bench.csv");
    let csv = format!(
        "dims,label,per_range_comparisons,global_comparisons,comparison_ratio\n\
         {}x{}x{},{},{},{},{}\n",
        n_r,
        n_a,
        n_e,
        metrics::csv_field(&label),
        per_range,
        global,
        ratio
    );
    atomic_write(&csv_path, csv.as_bytes())?;

    let (min1, med1, max1) = stats(&mut t1);
    let (min2, med2, max2) = stats(&mut t2);
    let (min3, med3, max3) = stats(&mut t3);

    let mut manifest = Manifest::new("cctp-bench");
    manifest.config("dims", format!("{n_r}x{n_a}x{n_e}"));
    manifest.config("label", &label);
    manifest.config("train", args.train);
    manifest.config("guard", args.guard);
    manifest.config("seed", args.seed);
    manifest.config("repeat", args.repeat);
    manifest.output(&csv_path)?;
    manifest.timing("generate", generate_time);
    manifest.timing("step1_median", Duration::from_secs_f64(med1));
    manifest.timing("step2_median", Duration::from_secs_f64(med2));
    manifest.timing("step3_median", Duration::from_secs_f64(med3));
    manifest.write(&args.out_dir.join("manifest.txt"))?;

    println!("dims: {n_r}x{n_a}x{n_e}  label: {label}  repeats: {}", args.repeat);
    println!("stage   min_s      median_s   max_s");
    println!("step1   {min1:<10.6} {med1:<10.6} {max1:<10.6}");
    println!("step2   {min2:<10.6} {med2:<10.6} {max2:<10.6}");
    println!("step3   {min3:<10.6} {med3:<10.6} {max3:<10.6}");
    println!("comparisons: per-range {per_range}, global sort {global}, ratio {ratio:.2}");
    println!("wrote {}", csv_path.display());
    Ok(())
}
