//! `cctp preprocess`: the three-step pipeline on one tensor file.

use std::path::PathBuf;
use std::time::Instant;

use cctp_core::cctp::{config_label, run_cctp, CctpConfig, CctpOutput, Recovery};
use cctp_core::io::{load_tensor, save_index_list, save_mask, save_tensor};
use cctp_core::tensor::from_sparse;
use cctp_core::Tensor;
use clap::Args;

use super::{ensure_parent, with_suffix, CliFailure, CliResult, Step1Arg};
use crate::manifest::Manifest;

#[derive(Args)]
pub struct PreprocessArgs {
    /// Input tensor (RTF1)
    #[arg(long)]
    input: PathBuf,

    /// Prefix for output files ({prefix}.m1.rtf, {prefix}.m3.rtf,
    /// {prefix}.indicator.rtm, {prefix}.jr.txt, {prefix}.ja.txt,
    /// {prefix}.manifest.txt)
    #[arg(long)]
    out_prefix: PathBuf,

    /// Step-1 intensity percentage K1
    #[arg(long, default_value_t = 5.0)]
    k1: f64,

    /// Step-2 per-range percentage K2; omit to stop after step 1
    #[arg(long)]
    k2: Option<f64>,

    /// Step-3 range half-width (engaged only when --k2 is given)
    #[arg(long, default_value_t = 2)]
    dr: usize,

    /// Step-3 azimuth half-width
    #[arg(long, default_value_t = 1)]
    da: usize,

    /// Stop after step 2 even when --k2 is given
    #[arg(long)]
    no_recovery: bool,

    /// Step-1 variant
    #[arg(long, value_enum, default_value_t = Step1Arg::Cfar)]
    step1: Step1Arg,

    /// CA-CFAR training cells per side
    #[arg(long, default_value_t = 16)]
    train: usize,

    /// CA-CFAR guard cells per side
    #[arg(long, default_value_t = 2)]
    guard: usize,

    /// Recover from the raw tensor instead of the step-1 output
    #[arg(long)]
    recover_from_raw: bool,

    /// Re-check the survivor-set invariants after the run (exit 1 on
    /// violation)
    #[arg(long)]
    verify: bool,
}

fn build_config(args: &PreprocessArgs) -> CctpConfig {
    let recovery = if args.k2.is_some() && !args.no_recovery {
        Some(Recovery {
            d_r: args.dr,
            d_a: args.da,
        })
    } else {
        None
    };
    CctpConfig {
        k1_percent: args.k1,
        k2_percent: args.k2,
        recovery,
        train_cells: args.train,
        guard_cells: args.guard,
        step1_mode: args.step1.mode(),
        recover_from_raw: args.recover_from_raw,
    }
}

/// Independent re-derivation of the survivor-set invariants from the
/// command's own outputs.
fn verify_output(raw: &Tensor, cfg: &CctpConfig, out: &CctpOutput<f64>) -> CliResult {
    let fail = |msg: &str| Err(CliFailure::Check(msg.to_string()));
    let m1 = from_sparse(&out.m1);
    let m2 = from_sparse(&out.m2);
    let m3 = from_sparse(&out.m3);
    if !m1.nonzero_mask().is_subset_of(&raw.nonzero_mask())? {
        return fail("step-1 output contains cells missing from the raw tensor");
    }
    if !m2.nonzero_mask().is_subset_of(&m3.nonzero_mask())? {
        return fail("recovery lost cells: step-2 output not inside step-3 output");
    }
    let m3_bound = if cfg.recover_from_raw { raw } else { &m1 };
    if !m3.nonzero_mask().is_subset_of(&m3_bound.nonzero_mask())? {
        return fail("step-3 output contains cells missing from its recovery source");
    }
    if out.indicator != m3.nonzero_mask() {
        return fail("indicator mask disagrees with the step-3 survivor set");
    }
    if cfg.k2_percent.is_some() {
        for (cell, _) in out.m2.cells() {
            if !out.preserved_ranges.contains(&cell.i_r)
                || !out.preserved_azimuths.contains(&cell.i_a)
            {
                return fail("step-2 kept a cell outside the preserved index sets");
            }
        }
    }
    Ok(())
}

pub fn run(args: PreprocessArgs) -> CliResult {
    let cfg = build_config(&args);
    let label = config_label(&cfg);

    let started = Instant::now();
    let raw: Tensor = load_tensor(&args.input)
        .map_err(|e| CliFailure::Usage(format!("cannot load {}: {e}", args.input.display())))?;
    let load_time = started.elapsed();

    let started = Instant::now();
    let out = run_cctp(&raw, &cfg)?;
    let pipeline_time = started.elapsed();

    ensure_parent(&args.out_prefix)?;
    let m1_path = with_suffix(&args.out_prefix, ".m1.rtf");
    let m3_path = with_suffix(&args.out_prefix, ".m3.rtf");
    let indicator_path = with_suffix(&args.out_prefix, ".indicator.rtm");
    let jr_path = with_suffix(&args.out_prefix, ".jr.txt");
    let ja_path = with_suffix(&args.out_prefix, ".ja.txt");
    let started = Instant::now();
    save_tensor(&from_sparse(&out.m1), &m1_path)?;
    save_tensor(&from_sparse(&out.m3), &m3_path)?;
    save_mask(&out.indicator, &indicator_path)?;
    save_index_list(out.preserved_ranges.iter(), &jr_path)?;
    save_index_list(out.preserved_azimuths.iter(), &ja_path)?;
    let write_time = started.elapsed();

    let mut manifest = Manifest::new("cctp-preprocess");
    manifest.config("label", &label);
    manifest.config("k1", args.k1);
    manifest.config("k2", args.k2.map_or("Nan".to_string(), |v| v.to_string()));
    manifest.config(
        "recovery",
        cfg.recovery
            .map_or("Nan".to_string(), |r| format!("({},{})", r.d_r, r.d_a)),
    );
    manifest.config("step1", format!("{:?}", cfg.step1_mode));
    manifest.config("train", args.train);
    manifest.config("guard", args.guard);
    manifest.config("recover_from_raw", args.recover_from_raw);
    manifest.input(&args.input)?;
    for path in [&m1_path, &m3_path, &indicator_path, &jr_path, &ja_path] {
        manifest.output(path)?;
    }
    manifest.timing("load", load_time);
    manifest.timing("pipeline", pipeline_time);
    manifest.timing("write", write_time);
    manifest.write(&with_suffix(&args.out_prefix, ".manifest.txt"))?;

    println!("label: {label}");
    println!(
        "cells: raw {} -> m1 {} -> m2 {} -> m3 {}",
        raw.count_nonzero(),
        out.m1.len(),
        out.m2.len(),
        out.m3.len()
    );
    if args.verify {
        verify_output(&raw, &cfg, &out)?;
        println!("verify: ok");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cctp_core::cctp::Step1Mode;
    use cctp_core::tensor::{to_sparse, PolarGrid};

    // The pipeline itself can never violate its own invariants, so the
    // rejection branch needs a doctored output to fire.
    #[test]
    fn verify_rejects_a_doctored_survivor_set() {
        let grid = PolarGrid::roi(6, 6, 2).unwrap();
        let mut raw = Tensor::zeros(grid);
        raw.set(2, 3, 0, 5.0);
        raw.set(2, 3, 1, 2.0);
        raw.set(4, 1, 0, 3.0);
        let cfg = CctpConfig {
            k1_percent: 50.0,
            step1_mode: Step1Mode::TopPercent,
            ..CctpConfig::default()
        };
        let good = run_cctp(&raw, &cfg).unwrap();
        assert!(verify_output(&raw, &cfg, &good).is_ok());

        // A cell in m2 that step 3 never kept breaks the nesting chain.
        let mut bad = good.clone();
        let mut m2 = from_sparse(&bad.m2);
        m2.set(5, 5, 1, 9.0);
        bad.m2 = to_sparse(&m2);
        match verify_output(&raw, &cfg, &bad) {
            Err(CliFailure::Check(msg)) => {
                assert!(msg.contains("recovery lost cells"), "{msg}")
            }
            Err(CliFailure::Usage(msg)) => panic!("wrong failure class: {msg}"),
            Ok(()) => panic!("doctored output passed verification"),
        }
    }
}
