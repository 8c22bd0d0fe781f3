//! `cctp eval`: score one survivor mask against a ground-truth mask.

use std::path::PathBuf;
use std::time::Instant;

use cctp_core::io::{atomic_write, load_mask};
use cctp_core::metrics::{prvm_rrim, report_csv, RangeBins, SweepRow};
use clap::Args;

use super::{ensure_parent, parse_roi, CliFailure, CliResult};
use crate::manifest::Manifest;

#[derive(Args)]
pub struct EvalArgs {
    /// Survivor mask (RTM1), e.g. a preprocess {prefix}.indicator.rtm
    #[arg(long)]
    indicator: PathBuf,

    /// Ground-truth validity mask (RTM1)
    #[arg(long)]
    valid: PathBuf,

    /// Output CSV path
    #[arg(long)]
    out: PathBuf,

    /// Row label (default: the indicator's file stem)
    #[arg(long)]
    label: Option<String>,

    /// Number of range bins
    #[arg(long, default_value_t = 9)]
    bins: usize,

    /// Range region of interest "lo:hi" in meters
    #[arg(long, default_value = "0:72")]
    roi: String,
}

fn default_label(path: &PathBuf) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    stem.strip_suffix(".indicator").unwrap_or(&stem).to_string()
}

fn fmt_rate(rate: Option<f64>) -> String {
    rate.map_or("NA".to_string(), |r| format!("{r:.4}"))
}

pub fn run(args: EvalArgs) -> CliResult {
    let (roi_lo, roi_hi) = parse_roi(&args.roi)?;
    let bins = RangeBins::uniform(roi_lo, roi_hi, args.bins)?;
    let label = args.label.clone().unwrap_or_else(|| default_label(&args.indicator));

    let started = Instant::now();
    let kept = load_mask(&args.indicator)
        .map_err(|e| CliFailure::Usage(format!("cannot load {}: {e}", args.indicator.display())))?;
    let valid = load_mask(&args.valid)
        .map_err(|e| CliFailure::Usage(format!("cannot load {}: {e}", args.valid.display())))?;
    let load_time = started.elapsed();

    let started = Instant::now();
    let report = prvm_rrim(&kept, &valid, &bins)?;
    let score_time = started.elapsed();

    let row = SweepRow {
        label: label.clone(),
        report,
    };
    ensure_parent(&args.out)?;
    atomic_write(&args.out, report_csv(std::slice::from_ref(&row)).as_bytes())?;

    let mut manifest = Manifest::new("cctp-eval");
    manifest.config("label", &label);
    manifest.config("bins", args.bins);
    manifest.config("roi", &args.roi);
    manifest.input(&args.indicator)?;
    manifest.input(&args.valid)?;
    manifest.output(&args.out)?;
    manifest.timing("load", load_time);
    manifest.timing("score", score_time);
    manifest.write(&args.out.with_extension("manifest.txt"))?;

    let overall = &row.report.overall;
    println!(
        "{label}: prvm={} rrim={} valid={} invalid={}",
        fmt_rate(overall.prvm),
        fmt_rate(overall.rrim),
        overall.valid_count,
        overall.invalid_count
    );
    println!("wrote {}", args.out.display());
    Ok(())
}
