//! Subcommand implementations and the small amount of shared plumbing:
//! the two-tier failure type behind the exit-code contract (1 = a check
//! or invariant failed, 2 = the invocation or its inputs were unusable),
//! argument micro-grammars, and the worker pool honoring CCTP_THREADS.

pub mod bench;
pub mod eval;
pub mod preprocess;
pub mod sweep;
pub mod synth;
pub mod ve_check;

use std::path::{Path, PathBuf};

use cctp_core::cctp::Step1Mode;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "cctp",
    version,
    about = "Coarse-to-fine condensing of 4D radar tensors: synthetic scenes, \
             the three-step preprocessing pipeline, PRVM/RRIM evaluation, \
             selection benchmarks, and vertical-encoding numeric checks.",
    after_help = "Exit codes: 0 success, 1 invariant/check failure, 2 usage or \
                  validation error.\nCCTP_THREADS caps worker parallelism (0 or \
                  unset = automatic)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Generate a synthetic radar scene (tensor + ground-truth mask)
    Synth(synth::SynthArgs),
    /// Run the three-step pipeline on a tensor file
    Preprocess(preprocess::PreprocessArgs),
    /// Score a hyperparameter grid on one scene (CSV + SVG)
    Sweep(sweep::SweepArgs),
    /// Score one survivor mask against a ground-truth mask
    Eval(eval::EvalArgs),
    /// Time the pipeline stages and count selection comparisons
    Bench(bench::BenchArgs),
    /// Run the vertical-encoding invariant and gradient checks
    VeCheck(ve_check::VeCheckArgs),
}

/// Failure carrying its exit code class. `Usage` = 2, `Check` = 1.
#[derive(Debug)]
pub enum CliFailure {
    Usage(String),
    Check(String),
}

impl From<cctp_core::Error> for CliFailure {
    fn from(e: cctp_core::Error) -> Self {
        CliFailure::Usage(e.to_string())
    }
}

pub type CliResult = Result<(), CliFailure>;

pub fn run(cli: Cli) -> CliResult {
    match cli.cmd {
        Cmd::Synth(args) => synth::run(args),
        Cmd::Preprocess(args) => preprocess::run(args),
        Cmd::Sweep(args) => sweep::run(args),
        Cmd::Eval(args) => eval::run(args),
        Cmd::Bench(args) => bench::run(args),
        Cmd::VeCheck(args) => ve_check::run(args),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Step1Arg {
    /// Per-column CA-CFAR along range at pfa = K1/100
    Cfar,
    /// Global top-K1% selection over the whole tensor
    Top,
}

impl Step1Arg {
    pub fn mode(self) -> Step1Mode {
        match self {
            Step1Arg::Cfar => Step1Mode::CaCfar,
            Step1Arg::Top => Step1Mode::TopPercent,
        }
    }
}

/// "{prefix}{suffix}" as a path; the prefix names a file family.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}{suffix}", prefix.display()))
}

/// Creates the directory that will hold files named `prefix`+suffix.
pub fn ensure_parent(prefix: &Path) -> CliResult {
    if let Some(parent) = prefix.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliFailure::Usage(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    Ok(())
}

/// "RxAxE" tensor dimensions, e.g. "128x96x32".
pub fn parse_dims(s: &str) -> Result<(usize, usize, usize), CliFailure> {
    let parts: Vec<&str> = s.split('x').collect();
    let bad = || CliFailure::Usage(format!("dimensions must look like 128x96x32, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut dims = [0usize; 3];
    for (d, p) in dims.iter_mut().zip(&parts) {
        *d = p.trim().parse().map_err(|_| bad())?;
        if *d == 0 {
            return Err(CliFailure::Usage(format!("dimensions must be positive, got '{s}'")));
        }
    }
    Ok((dims[0], dims[1], dims[2]))
}

/// "lo:hi" range span in meters.
pub fn parse_roi(s: &str) -> Result<(f64, f64), CliFailure> {
    let bad = || CliFailure::Usage(format!("region of interest must look like 0:72, got '{s}'"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(CliFailure::Usage(format!(
            "region of interest needs lo < hi, got '{s}'"
        )));
    }
    Ok((lo, hi))
}

/// Hyperparameter grid "k1=2.5,5,10;k2=2.5,5,10,15". The k2 axis may be
/// omitted for a step-1-only sweep.
pub fn parse_axis_grid(s: &str) -> Result<(Vec<f64>, Vec<f64>), CliFailure> {
    let mut k1: Option<Vec<f64>> = None;
    let mut k2: Option<Vec<f64>> = None;
    for axis in s.split(';') {
        let axis = axis.trim();
        if axis.is_empty() {
            continue;
        }
        let (name, list) = axis.split_once('=').ok_or_else(|| {
            CliFailure::Usage(format!("grid axis '{axis}' is missing '=' (see --help)"))
        })?;
        let mut values = Vec::new();
        for v in list.split(',') {
            let parsed: f64 = v.trim().parse().map_err(|_| {
                CliFailure::Usage(format!("bad grid value '{}' in axis '{axis}'", v.trim()))
            })?;
            if !parsed.is_finite() || parsed <= 0.0 {
                return Err(CliFailure::Usage(format!(
                    "grid values must be positive, got '{}'",
                    v.trim()
                )));
            }
            values.push(parsed);
        }
        if values.is_empty() {
            return Err(CliFailure::Usage(format!("grid axis '{axis}' has no values")));
        }
        let slot = match name.trim() {
            "k1" => &mut k1,
            "k2" => &mut k2,
            other => {
                return Err(CliFailure::Usage(format!(
                    "unknown grid axis '{other}' (only k1 and k2 exist)"
                )))
            }
        };
        if slot.is_some() {
            return Err(CliFailure::Usage(format!("grid axis '{}' given twice", name.trim())));
        }
        *slot = Some(values);
    }
    let k1 = k1.ok_or_else(|| CliFailure::Usage("grid needs a k1 axis".to_string()))?;
    Ok((k1, k2.unwrap_or_default()))
}

/// Worker pool sized by CCTP_THREADS (0 or unset = automatic).
pub fn thread_pool() -> Result<rayon::ThreadPool, CliFailure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CCTP_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            CliFailure::Usage(format!(
                "CCTP_THREADS must be a non-negative integer, got '{v}'"
            ))
        })?;
        if n > 0 {
            builder = builder.num_threads(n);
        }
    }
    builder
        .build()
        .map_err(|e| CliFailure::Usage(format!("cannot build worker pool: {e}")))
}
