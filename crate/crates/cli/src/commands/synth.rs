//! `cctp synth`: scene spec in, measurement tensor + ground-truth mask
//! out.

use std::path::PathBuf;
use std::time::Instant;

use cctp_core::io::{atomic_write, save_mask, save_tensor};
use cctp_core::synth::{generate_scene, Extent, SceneSpec, TargetSpec, DEFAULT_SIDELOBE_DB};
use cctp_core::tensor::CellIndex;
use clap::Args;

use super::{ensure_parent, with_suffix, CliFailure, CliResult};
use crate::manifest::Manifest;

#[derive(Args)]
pub struct SynthArgs {
    /// Scene description file: "key = value" lines, '#' comments.
    /// Keys: grid, range_map, azimuth_map, elevation_map,
    /// noise_mean_power, seed, target (center 3, extent 3, snr_db,
    /// sidelobe_db), clutter (center 3, extent 3, mean_power).
    #[arg(long, required_unless_present = "demo", conflicts_with = "demo")]
    spec: Option<PathBuf>,

    /// Use the built-in ten-target desk-scale demo scene instead
    #[arg(long)]
    demo: bool,

    /// Override the spec's random seed
    #[arg(long)]
    seed: Option<u64>,

    /// Prefix for the output files ({prefix}.rtf, {prefix}.valid.rtm,
    /// {prefix}.spec.txt, {prefix}.manifest.txt)
    #[arg(long)]
    out_prefix: PathBuf,
}

/// Ten spread-out medium-strength targets on the desk grid; the scene
/// the quickstart, sweeps, and trend checks all share.
pub fn demo_spec() -> SceneSpec {
    let mut spec = SceneSpec {
        seed: 42,
        ..SceneSpec::default()
    };
    for k in 0..10 {
        spec.targets.push(TargetSpec {
            center: CellIndex {
                i_r: 12 + 11 * k,
                i_a: (17 * k + 5) % 96,
                i_e: 4 + (k % 3),
            },
            extent: Extent {
                d_range: 2,
                d_azimuth: 2,
                d_elevation: 1,
            },
            peak_snr_db: 18.0,
            sidelobe_level_db: DEFAULT_SIDELOBE_DB,
        });
    }
    spec
}

pub fn run(args: SynthArgs) -> CliResult {
    let mut spec = if args.demo {
        demo_spec()
    } else {
        let path = args.spec.as_ref().expect("clap enforces spec xor demo");
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliFailure::Usage(format!("cannot read {}: {e}", path.display())))?;
        SceneSpec::parse(&text)?
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }

    let started = Instant::now();
    let scene = generate_scene::<f64>(&spec)?;
    let generate_time = started.elapsed();

    ensure_parent(&args.out_prefix)?;
    let tensor_path = with_suffix(&args.out_prefix, ".rtf");
    let valid_path = with_suffix(&args.out_prefix, ".valid.rtm");
    let spec_path = with_suffix(&args.out_prefix, ".spec.txt");
    let started = Instant::now();
    save_tensor(&scene.tensor, &tensor_path)?;
    save_mask(&scene.valid_mask, &valid_path)?;
    let canonical = spec.to_text();
    atomic_write(&spec_path, canonical.as_bytes())?;
    let write_time = started.elapsed();

    let mut manifest = Manifest::new("cctp-synth");
    let (n_r, n_a, n_e) = spec.grid.dims();
    manifest.config("grid", format!("{n_r}x{n_a}x{n_e}"));
    manifest.config("seed", spec.seed);
    manifest.config("noise_mean_power", spec.noise_mean_power);
    manifest.config("targets", spec.targets.len());
    manifest.config("clutter", spec.clutter.len());
    manifest.config("spec_sha256", {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        format!("{:x}", h.finalize())
    });
    for path in [&tensor_path, &valid_path, &spec_path] {
        manifest.output(path)?;
    }
    manifest.timing("generate", generate_time);
    manifest.timing("write", write_time);
    manifest.write(&with_suffix(&args.out_prefix, ".manifest.txt"))?;

    println!(
        "scene: {} cells, {} targets, {} valid cells",
        scene.tensor.grid().cell_count(),
        spec.targets.len(),
        scene.valid_mask.count_true()
    );
    println!("wrote {}", tensor_path.display());
    println!("wrote {}", valid_path.display());
    println!("wrote {}", spec_path.display());
    Ok(())
}
