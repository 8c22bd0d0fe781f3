//! `cctp sweep`: a hyperparameter grid scored against one scene's
//! ground truth, with CSV plus PRVM/RRIM charts. Every row re-checks the
//! survivor-set nesting chain; a violation aborts with exit 1.

use std::path::PathBuf;
use std::time::Instant;

use cctp_core::cctp::{config_label, run_cctp, CctpConfig, Recovery};
use cctp_core::io::{atomic_write, load_mask, load_tensor};
use cctp_core::metrics::{prvm_rrim, report_csv, RangeBins, SweepRow};
use cctp_core::tensor::{from_sparse, BoolMask};
use cctp_core::Tensor;
use clap::Args;
use rayon::prelude::*;

use super::{
    parse_axis_grid, parse_roi, thread_pool, with_suffix, CliFailure, CliResult, Step1Arg,
};
use crate::manifest::Manifest;
use crate::svg::{line_chart, Series};

#[derive(Args)]
pub struct SweepArgs {
    /// Scene path prefix as written by synth ({prefix}.rtf and
    /// {prefix}.valid.rtm must exist)
    #[arg(long)]
    scene: PathBuf,

    /// Output directory (sweep.csv, sweep_prvm.svg, sweep_rrim.svg,
    /// manifest.txt)
    #[arg(long)]
    out_dir: PathBuf,

    /// Hyperparameter grid. EBNF: grid = axis, {";", axis};
    /// axis = ("k1" | "k2"), "=", value, {",", value}. Each k1 value
    /// yields a "K1-Nan-Nan" row; each (k1, k2) pair adds "K1-K2-Nan"
    /// and "K1-K2-(dr,da)" rows.
    #[arg(long, default_value = "k1=2.5,5,10;k2=2.5,5,10,15")]
    grid: String,

    /// Step-3 range half-width for the recovery rows
    #[arg(long, default_value_t = 2)]
    dr: usize,

    /// Step-3 azimuth half-width for the recovery rows
    #[arg(long, default_value_t = 1)]
    da: usize,

    /// Step-1 variant
    #[arg(long, value_enum, default_value_t = Step1Arg::Cfar)]
    step1: Step1Arg,

    /// CA-CFAR training cells per side
    #[arg(long, default_value_t = 16)]
    train: usize,

    /// CA-CFAR guard cells per side
    #[arg(long, default_value_t = 2)]
    guard: usize,

    /// Number of range bins for the report
    #[arg(long, default_value_t = 9)]
    bins: usize,

    /// Range region of interest "lo:hi" in meters
    #[arg(long, default_value = "0:72")]
    roi: String,
}

fn expand_configs(args: &SweepArgs, k1s: &[f64], k2s: &[f64]) -> Vec<CctpConfig> {
    let base = CctpConfig {
        train_cells: args.train,
        guard_cells: args.guard,
        step1_mode: args.step1.mode(),
        ..CctpConfig::default()
    };
    let mut configs = Vec::new();
    for &k1 in k1s {
        configs.push(CctpConfig {
            k1_percent: k1,
            k2_percent: None,
            recovery: None,
            ..base.clone()
        });
        for &k2 in k2s {
            configs.push(CctpConfig {
                k1_percent: k1,
                k2_percent: Some(k2),
                recovery: None,
                ..base.clone()
            });
            configs.push(CctpConfig {
                k1_percent: k1,
                k2_percent: Some(k2),
                recovery: Some(Recovery {
                    d_r: args.dr,
                    d_a: args.da,
                }),
                ..base.clone()
            });
        }
    }
    configs
}

fn run_row(
    raw: &Tensor,
    valid: &BoolMask,
    bins: &RangeBins,
    cfg: &CctpConfig,
) -> Result<SweepRow, CliFailure> {
    let label = config_label(cfg);
    let out = run_cctp(raw, cfg)?;
    let m1 = from_sparse(&out.m1).nonzero_mask();
    let m2 = from_sparse(&out.m2).nonzero_mask();
    let m3 = from_sparse(&out.m3).nonzero_mask();
    let nested = m2.is_subset_of(&m3)?
        && m3.is_subset_of(&m1)?
        && m1.is_subset_of(&raw.nonzero_mask())?;
    if !nested {
        return Err(CliFailure::Check(format!(
            "survivor-set nesting violated in row {label}"
        )));
    }
    let report = prvm_rrim(&out.indicator, valid, bins)?;
    Ok(SweepRow { label, report })
}

fn rate_chart(rows: &[SweepRow], bins: &RangeBins, prvm: bool) -> String {
    let x_labels: Vec<String> = (0..bins.len())
        .map(|b| {
            let (lo, hi) = bins.bounds(b);
            format!("{lo}-{hi}")
        })
        .collect();
    let series: Vec<Series> = rows
        .iter()
        .map(|row| Series {
            label: row.label.clone(),
            points: row
                .report
                .per_bin
                .iter()
                .map(|s| if prvm { s.prvm } else { s.rrim })
                .collect(),
        })
        .collect();
    let (title, y_label) = if prvm {
        ("valid cells kept, per range bin", "PRVM")
    } else {
        ("invalid cells removed, per range bin", "RRIM")
    };
    line_chart(title, y_label, &x_labels, &series)
}

fn fmt_rate(rate: Option<f64>) -> String {
    rate.map_or("NA".to_string(), |r| format!("{r:.4}"))
}

pub fn run(args: SweepArgs) -> CliResult {
    let (k1s, k2s) = parse_axis_grid(&args.grid)?;
    let (roi_lo, roi_hi) = parse_roi(&args.roi)?;
    let bins = RangeBins::uniform(roi_lo, roi_hi, args.bins)?;

    let tensor_path = with_suffix(&args.scene, ".rtf");
    let valid_path = with_suffix(&args.scene, ".valid.rtm");
    let started = Instant::now();
    let raw: Tensor = load_tensor(&tensor_path)
        .map_err(|e| CliFailure::Usage(format!("cannot load {}: {e}", tensor_path.display())))?;
    let valid = load_mask(&valid_path)
        .map_err(|e| CliFailure::Usage(format!("cannot load {}: {e}", valid_path.display())))?;
    let load_time = started.elapsed();

    let configs = expand_configs(&args, &k1s, &k2s);
    let expensive: Vec<String> = configs
        .iter()
        .filter(|c| c.k1_percent > 10.0)
        .map(config_label)
        .collect();
    if !expensive.is_empty() {
        eprintln!(
            "warning: K1 > 10 keeps a large survivor set and raises downstream cost \
             considerably: {}",
            expensive.join(", ")
        );
    }

    let pool = thread_pool()?;
    let started = Instant::now();
    let rows: Vec<SweepRow> = pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| run_row(&raw, &valid, &bins, cfg))
            .collect::<Result<Vec<_>, CliFailure>>()
    })?;
    let sweep_time = started.elapsed();

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliFailure::Usage(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let csv_path = args.out_dir.join("sweep.csv");
    let prvm_path = args.out_dir.join("sweep_prvm.svg");
    let rrim_path = args.out_dir.join("sweep_rrim.svg");
    let started = Instant::now();
    atomic_write(&csv_path, report_csv(&rows).as_bytes())?;
    atomic_write(&prvm_path, rate_chart(&rows, &bins, true).as_bytes())?;
    atomic_write(&rrim_path, rate_chart(&rows, &bins, false).as_bytes())?;
    let write_time = started.elapsed();

    let mut manifest = Manifest::new("cctp-sweep");
    manifest.config("grid", &args.grid);
    manifest.config("dr", args.dr);
    manifest.config("da", args.da);
    manifest.config("step1", format!("{:?}", args.step1.mode()));
    manifest.config("train", args.train);
    manifest.config("guard", args.guard);
    manifest.config("bins", args.bins);
    manifest.config("roi", &args.roi);
    manifest.input(&tensor_path)?;
    manifest.input(&valid_path)?;
    for path in [&csv_path, &prvm_path, &rrim_path] {
        manifest.output(path)?;
    }
    manifest.timing("load", load_time);
    manifest.timing("sweep", sweep_time);
    manifest.timing("write", write_time);
    manifest.write(&args.out_dir.join("manifest.txt"))?;

    for row in &rows {
        println!(
            "{}: prvm={} rrim={}",
            row.label,
            fmt_rate(row.report.overall.prvm),
            fmt_rate(row.report.overall.rrim)
        );
    }
    println!("wrote {}", csv_path.display());
    Ok(())
}
