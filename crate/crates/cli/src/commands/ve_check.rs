//! `cctp ve-check`: self-contained numeric verification of the vertical
//! encoding reference — softmax normalization, degenerate-column
//! identities, reshape round-trip, value-hull containment, and an
//! analytic-vs-central-difference gradient check.

use std::path::PathBuf;

use cctp_core::io::atomic_write;
use cctp_core::ve::{
    grad_check, sve_baseline, ve_step1_attend, ve_step2_inverse, ve_step2_reshape,
    DenseFeatureMap, VerticalEncoderParams,
};
use clap::Args;

use super::{CliFailure, CliResult};
use crate::manifest::Manifest;

#[derive(Args)]
pub struct VeCheckArgs {
    /// Input channels C (must be divisible by --heads)
    #[arg(long, default_value_t = 64)]
    cn: usize,

    /// Vertical slices Z
    #[arg(long, default_value_t = 8)]
    z: usize,

    /// Attention heads H
    #[arg(long, default_value_t = 2)]
    heads: usize,

    /// Spatial height of the test feature map
    #[arg(long, default_value_t = 1)]
    y: usize,

    /// Spatial width of the test feature map
    #[arg(long, default_value_t = 1)]
    x: usize,

    /// Pixel-shuffle block size for the reshape round-trip
    #[arg(long, default_value_t = 2)]
    block: usize,

    /// RNG seed for weights and features
    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Central-difference step for the gradient check
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,

    /// Optional CSV dump of post-softmax attention weights
    #[arg(long)]
    scores_out: Option<PathBuf>,
}

struct Checks {
    failures: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks { failures: Vec::new() }
    }

    fn record(&mut self, name: &str, result: Result<(), String>) {
        match result {
            Ok(()) => println!("ok   - {name}"),
            Err(detail) => {
                println!("FAIL - {name}: {detail}");
                self.failures.push(name.to_string());
            }
        }
    }
}

fn softmax_normalization(weights: &cctp_core::ve::AttentionWeights<f64>) -> Result<(), String> {
    for v in weights.values() {
        if !v.is_finite() || *v < 0.0 {
            return Err(format!("weight {v} outside [0, 1]"));
        }
    }
    let mut worst = 0.0f64;
    for h in 0..weights.n_heads {
        for i_y in 0..weights.height {
            for i_x in 0..weights.width {
                let mut sum = 0.0;
                for i_z in 0..weights.depth {
                    sum += weights.get(h, i_z, i_y, i_x);
                }
                worst = worst.max((sum - 1.0).abs());
            }
        }
    }
    if worst <= 1e-12 {
        Ok(())
    } else {
        Err(format!("max |sum - 1| = {worst:.3e}, tolerance 1e-12"))
    }
}

fn single_slice_identity(params: &VerticalEncoderParams<f64>, seed: u64, y: usize, x: usize) -> Result<(), String> {
    let fm = DenseFeatureMap::seeded(params.channels, 1, y, x, seed).map_err(|e| e.to_string())?;
    let (_, weights) = ve_step1_attend(&fm, params).map_err(|e| e.to_string())?;
    for w in weights.values() {
        if *w != 1.0 {
            return Err(format!("single-slice weight {w} != 1.0 exactly"));
        }
    }
    Ok(())
}

fn uniform_column_symmetry(
    params: &VerticalEncoderParams<f64>,
    seed: u64,
    z: usize,
    y: usize,
    x: usize,
) -> Result<(), String> {
    let single = DenseFeatureMap::seeded(params.channels, 1, y, x, seed).map_err(|e| e.to_string())?;
    let mut replicated = DenseFeatureMap::zeros(params.channels, z, y, x).map_err(|e| e.to_string())?;
    for c in 0..params.channels {
        for i_y in 0..y {
            for i_x in 0..x {
                let v = single.get(c, 0, i_y, i_x);
                for i_z in 0..z {
                    replicated.set(c, i_z, i_y, i_x, v);
                }
            }
        }
    }
    let (bev_single, _) = ve_step1_attend(&single, params).map_err(|e| e.to_string())?;
    let (bev_repl, weights) = ve_step1_attend(&replicated, params).map_err(|e| e.to_string())?;
    let expect = 1.0 / z as f64;
    for w in weights.values() {
        if *w != expect {
            return Err(format!("replicated-column weight {w} != 1/{z} exactly"));
        }
    }
    let mut worst = 0.0f64;
    for (a, b) in bev_single.values().iter().zip(bev_repl.values()) {
        worst = worst.max((a - b).abs());
    }
    if worst <= 1e-12 {
        Ok(())
    } else {
        Err(format!("replicated output drifts from single-slice by {worst:.3e}"))
    }
}

fn reshape_round_trip(
    channels: usize,
    z: usize,
    y: usize,
    x: usize,
    block: usize,
    seed: u64,
) -> Result<(), String> {
    // The shuffle eats a factor of block^2 from channels, so feed it a
    // map sized to divide evenly; dimensions come from the CLI flags.
    let c_in = channels * block * block;
    let fm = DenseFeatureMap::<f64>::seeded(c_in, z, y, x, seed).map_err(|e| e.to_string())?;
    let bev = sve_baseline(&fm);
    let shuffled = ve_step2_reshape(&bev, block).map_err(|e| e.to_string())?;
    let back = ve_step2_inverse(&shuffled, block).map_err(|e| e.to_string())?;
    if back.values() == bev.values() {
        Ok(())
    } else {
        Err("inverse shuffle does not restore the original map bitwise".to_string())
    }
}

fn value_hull(params: &VerticalEncoderParams<f64>, fm: &DenseFeatureMap<f64>) -> Result<(), String> {
    // With W_o = I each output channel is a convex combination of that
    // channel's per-slice values, so it must stay inside their hull.
    let d_h = params.head_dim();
    let mut identity = params.clone();
    identity.w_o = vec![0.0; params.channels * params.channels];
    for c in 0..params.channels {
        identity.w_o[c * params.channels + c] = 1.0;
    }
    // Values must also pass through untouched: W_v = I per head block.
    identity.w_v = vec![0.0; params.n_heads * d_h * params.channels];
    for h in 0..params.n_heads {
        for r in 0..d_h {
            let c = h * d_h + r;
            identity.w_v[(h * d_h + r) * params.channels + c] = 1.0;
        }
    }
    let (bev, _) = ve_step1_attend(fm, &identity).map_err(|e| e.to_string())?;
    for c in 0..params.channels {
        for i_y in 0..fm.height {
            for i_x in 0..fm.width {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i_z in 0..fm.depth {
                    let v = fm.get(c, i_z, i_y, i_x);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                let out = bev.get(c, i_y, i_x);
                if out < lo - 1e-12 || out > hi + 1e-12 {
                    return Err(format!(
                        "channel {c} output {out} escapes slice hull [{lo}, {hi}]"
                    ));
                }
            }
        }
    }
    Ok(())
}

fn gradient_check(
    params: &VerticalEncoderParams<f64>,
    fm: &DenseFeatureMap<f64>,
    eps: f64,
) -> Result<(), String> {
    let report = grad_check(fm, params, eps).map_err(|e| e.to_string())?;
    println!(
        "       max relative error {:.3e} over {} coordinates (worst: {}[{}])",
        report.max_rel_err, report.checked, report.worst_group, report.worst_index
    );
    if report.max_rel_err <= 1e-6 {
        Ok(())
    } else {
        Err(format!(
            "max relative error {:.3e} exceeds 1e-6 (worst {}[{}])",
            report.max_rel_err, report.worst_group, report.worst_index
        ))
    }
}

pub fn run(args: VeCheckArgs) -> CliResult {
    // Shape errors here are argument errors, not check failures: the
    // From<cctp_core::Error> conversion maps them to Usage (exit 2).
    let params = VerticalEncoderParams::<f64>::seeded(args.cn, args.heads, args.seed)?;
    let fm = DenseFeatureMap::<f64>::seeded(args.cn, args.z, args.y, args.x, args.seed + 1)?;
    let (_, weights) = ve_step1_attend(&fm, &params)?;

    println!(
        "config: C={} Z={} H={} Y={} X={} block={} seed={} eps={:e}",
        args.cn, args.z, args.heads, args.y, args.x, args.block, args.seed, args.eps
    );

    let mut checks = Checks::new();
    checks.record("softmax-normalization", softmax_normalization(&weights));
    checks.record(
        "single-slice-identity",
        single_slice_identity(&params, args.seed + 2, args.y, args.x),
    );
    checks.record(
        "uniform-column-symmetry",
        uniform_column_symmetry(&params, args.seed + 3, args.z, args.y, args.x),
    );
    checks.record(
        "reshape-round-trip",
        reshape_round_trip(args.cn, args.z, args.y, args.x, args.block, args.seed + 4),
    );
    checks.record("value-hull", value_hull(&params, &fm));
    checks.record("gradient-check", gradient_check(&params, &fm, args.eps));

    if let Some(path) = &args.scores_out {
        let mut csv = String::from("head,z,y,x,weight\n");
        for h in 0..args.heads {
            for i_z in 0..args.z {
                for i_y in 0..args.y {
                    for i_x in 0..args.x {
                        csv.push_str(&format!(
                            "{h},{i_z},{i_y},{i_x},{}\n",
                            weights.get(h, i_z, i_y, i_x)
                        ));
                    }
                }
            }
        }
        atomic_write(path, csv.as_bytes())?;
        let mut manifest = Manifest::new("cctp-ve-check");
        manifest.config("cn", args.cn);
        manifest.config("z", args.z);
        manifest.config("heads", args.heads);
        manifest.config("y", args.y);
        manifest.config("x", args.x);
        manifest.config("seed", args.seed);
        manifest.output(path)?;
        manifest.write(&path.with_extension("manifest.txt"))?;
        println!("wrote {}", path.display());
    }

    if checks.failures.is_empty() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliFailure::Check(format!(
            "{} check(s) failed: {}",
            checks.failures.len(),
            checks.failures.join(", ")
        )))
    }
}
