//! Synthetic radar scenes with a ground-truth valid mask.
//!
//! A scene is exponential background noise (power of a complex-Gaussian
//! return), optional elevated-mean clutter patches, and point targets with
//! a deterministic power pattern: an r^-4 peak law against a fixed
//! reference range, a squared-sinc azimuth response whose first sidelobe
//! level is configurable, and linear range/elevation tapers that reach
//! zero one bin outside the target extent. Only cells inside a target's
//! extent box are marked valid; sidelobes and clutter are injected power
//! that the pipeline is supposed to remove.
//!
//! Scene-spec text format (`SceneSpec::parse` / `SceneSpec::to_text`),
//! one `key = value` per line, `#` comments and blank lines ignored:
//!
//! ```text
//! grid = 128 96 32              # bin counts: range azimuth elevation
//! range_map = 0.28125 0.5625    # center of bin 0 and step, meters
//! azimuth_map = -44.53125 0.9375  # center of bin 0 and step, degrees
//! elevation_map = -0.4296875 0.140625 # center of bin 0 and step, meters
//! noise_mean_power = 1
//! seed = 42
//! target = 64 48 8  2 3 1  20 -13.3   # center(3) extent(3) snr_db sidelobe_db
//! clutter = 100 20 4  3 4 2  10       # center(3) extent(3) mean_power
//! ```
//!
//! `grid` may be given without the `*_map` keys; the maps then default to
//! spanning the standard RoI (0..72 m, +-45 deg, -0.5..4 m). `target` and
//! `clutter` repeat. Omitted keys default to the desk grid, unit noise
//! power, seed 0 and an empty scene.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{BoolMask, CellIndex, PolarGrid, RadarTensor};

/// Integer half-widths of an axis-aligned cell box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extent {
    pub d_range: usize,
    pub d_azimuth: usize,
    pub d_elevation: usize,
}

impl Extent {
    pub fn new(d_range: usize, d_azimuth: usize, d_elevation: usize) -> Self {
        Extent {
            d_range,
            d_azimuth,
            d_elevation,
        }
    }
}

/// One point target.
///
/// `peak_snr_db` is the center-cell power over the scene noise floor when
/// the target sits at the reference range (the midpoint of the range
/// span); the injected peak scales with (r_ref / r_center)^4 elsewhere.
/// `sidelobe_level_db` places the first azimuth sidelobe relative to the
/// main lobe and must be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub center: CellIndex,
    pub extent: Extent,
    pub peak_snr_db: f64,
    pub sidelobe_level_db: f64,
}

/// Default first-sidelobe level of the azimuth response, dB.
pub const DEFAULT_SIDELOBE_DB: f64 = -13.3;

/// An elevated-mean exponential noise patch. Never marked valid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterSpec {
    pub center: CellIndex,
    pub extent: Extent,
    pub mean_power: f64,
}

/// Full scene description; generation is a pure function of this value.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub grid: PolarGrid,
    pub noise_mean_power: f64,
    pub targets: Vec<TargetSpec>,
    pub clutter: Vec<ClutterSpec>,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            grid: PolarGrid::desk(),
            noise_mean_power: 1.0,
            targets: Vec::new(),
            clutter: Vec::new(),
            seed: 0,
        }
    }
}

/// Generated scene: the measurement tensor, the ground-truth valid mask
/// (union of target extent boxes) and the spec that produced them.
#[derive(Debug, Clone)]
pub struct Scene<T> {
    pub tensor: RadarTensor<T>,
    pub valid_mask: BoolMask,
    pub spec: SceneSpec,
}

/// One exponential power sample with mean `mean`, strictly positive even
/// after narrowing to the target scalar. Inverse CDF on v in (0, 1]; the
/// measure-zero draws that would round to 0 are rejected and redrawn.
fn exp_sample<T: Real>(rng: &mut ChaCha8Rng, mean: f64) -> T {
    loop {
        let v = 1.0 - rng.random::<f64>(); // (0, 1]
        let x = T::of(-mean * v.ln());
        if x > T::zero() && x.is_finite() {
            return x;
        }
    }
}

fn noise_into<T: Real>(t: &mut RadarTensor<T>, mean: f64, rng: &mut ChaCha8Rng) {
    for v in t.values_mut() {
        *v = exp_sample(rng, mean);
    }
}

/// Pure exponential background noise over `grid`.
pub fn generate_noise<T: Real>(grid: PolarGrid, mean_power: f64, seed: u64) -> Result<RadarTensor<T>> {
    if !mean_power.is_finite() {
        return Err(Error::NonFiniteInput("noise mean power"));
    }
    if mean_power <= 0.0 {
        return Err(Error::domain("noise mean power must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = RadarTensor::zeros(grid);
    noise_into(&mut t, mean_power, &mut rng);
    Ok(t)
}

/// sin(pi x) / (pi x), 1 at x = 0.
fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Amplitude of the first sidelobe of sinc, |sinc(x*)| with x* in (1, 2).
const SINC_FIRST_SIDELOBE_AMPLITUDE: f64 = 0.217_233_628_211_221_66;

/// Natural first-sidelobe level of the squared-sinc power pattern, dB.
fn sinc2_first_sidelobe_db() -> f64 {
    20.0 * SINC_FIRST_SIDELOBE_AMPLITUDE.log10()
}

/// Azimuth power response at `delta` bins off center for a target of
/// azimuth half-width `d_azimuth`. First null one bin outside the extent;
/// the squared sinc is raised to the power that puts the first sidelobe
/// at `sidelobe_level_db` exactly.
pub(crate) fn azimuth_power_pattern(delta: f64, d_azimuth: usize, sidelobe_level_db: f64) -> f64 {
    let x = delta / (d_azimuth as f64 + 1.0);
    let s = sinc(x).abs();
    if s == 0.0 {
        return 0.0;
    }
    let p = sidelobe_level_db / sinc2_first_sidelobe_db();
    s.powf(2.0 * p)
}

/// Linear taper: 1 at the center, 0 one bin outside the half-width.
fn linear_taper(delta: f64, half_width: usize) -> f64 {
    let w = half_width as f64 + 1.0;
    (1.0 - delta.abs() / w).max(0.0)
}

/// Reference range of the r^-4 peak law: midpoint of the range-center span.
pub fn reference_range_m(grid: &PolarGrid) -> f64 {
    0.5 * (grid.range_m(0) + grid.range_m(grid.n_range - 1))
}

fn check_target(grid: &PolarGrid, spec: &TargetSpec) -> Result<()> {
    let c = spec.center;
    if !grid.contains(c.i_r, c.i_a, c.i_e) {
        return Err(Error::IndexOutOfGrid {
            i_r: c.i_r,
            i_a: c.i_a,
            i_e: c.i_e,
            n_r: grid.n_range,
            n_a: grid.n_azimuth,
            n_e: grid.n_elevation,
        });
    }
    if !spec.peak_snr_db.is_finite() || !spec.sidelobe_level_db.is_finite() {
        return Err(Error::NonFiniteInput("target levels"));
    }
    if spec.sidelobe_level_db >= 0.0 {
        return Err(Error::domain("sidelobe level must be < 0 dB"));
    }
    if grid.range_m(c.i_r) <= 0.0 || reference_range_m(grid) <= 0.0 {
        return Err(Error::domain("target range must be positive for the r^-4 law"));
    }
    Ok(())
}

/// Adds `spec`'s power pattern (scaled by `floor_power`) onto `t` and
/// returns the target's valid box.
fn inject_scaled<T: Real>(
    t: &RadarTensor<T>,
    spec: &TargetSpec,
    floor_power: f64,
) -> Result<(RadarTensor<T>, BoolMask)> {
    let grid = *t.grid();
    check_target(&grid, spec)?;
    let c = spec.center;
    let r_center = grid.range_m(c.i_r);
    let peak = floor_power
        * 10f64.powf(spec.peak_snr_db / 10.0)
        * (reference_range_m(&grid) / r_center).powi(4);

    let mut out = t.clone();
    let r_lo = c.i_r.saturating_sub(spec.extent.d_range);
    let r_hi = (c.i_r + spec.extent.d_range).min(grid.n_range - 1);
    let e_lo = c.i_e.saturating_sub(spec.extent.d_elevation);
    let e_hi = (c.i_e + spec.extent.d_elevation).min(grid.n_elevation - 1);
    for i_r in r_lo..=r_hi {
        let taper_r = linear_taper(i_r as f64 - c.i_r as f64, spec.extent.d_range);
        for i_e in e_lo..=e_hi {
            let taper_e = linear_taper(i_e as f64 - c.i_e as f64, spec.extent.d_elevation);
            // Sidelobes run across the whole azimuth axis.
            for i_a in 0..grid.n_azimuth {
                let pat = azimuth_power_pattern(
                    i_a as f64 - c.i_a as f64,
                    spec.extent.d_azimuth,
                    spec.sidelobe_level_db,
                );
                let add = peak * taper_r * pat * taper_e;
                if add > 0.0 {
                    let v = out.get(i_r, i_a, i_e);
                    out.set(i_r, i_a, i_e, v + T::of(add));
                }
            }
        }
    }

    let mut mask = BoolMask::falses(grid);
    let a_lo = c.i_a.saturating_sub(spec.extent.d_azimuth);
    let a_hi = (c.i_a + spec.extent.d_azimuth).min(grid.n_azimuth - 1);
    for i_r in r_lo..=r_hi {
        for i_a in a_lo..=a_hi {
            for i_e in e_lo..=e_hi {
                mask.set(i_r, i_a, i_e, true);
            }
        }
    }
    Ok((out, mask))
}

/// Adds one target's pattern to `t`, assuming a unit noise floor, and
/// returns the new tensor plus the target's valid box.
pub fn inject_target<T: Real>(
    t: &RadarTensor<T>,
    spec: &TargetSpec,
) -> Result<(RadarTensor<T>, BoolMask)> {
    inject_scaled(t, spec, 1.0)
}

impl SceneSpec {
    /// Checks every field, naming the offending target/clutter index.
    pub fn validate(&self) -> Result<()> {
        if !self.noise_mean_power.is_finite() {
            return Err(Error::NonFiniteInput("noise mean power"));
        }
        if self.noise_mean_power <= 0.0 {
            return Err(Error::domain("noise mean power must be > 0"));
        }
        for (k, t) in self.targets.iter().enumerate() {
            check_target(&self.grid, t).map_err(|e| Error::domain(format!("target {k}: {e}")))?;
        }
        for (k, cl) in self.clutter.iter().enumerate() {
            let c = cl.center;
            if !self.grid.contains(c.i_r, c.i_a, c.i_e) {
                return Err(Error::domain(format!(
                    "clutter {k}: center ({}, {}, {}) outside grid",
                    c.i_r, c.i_a, c.i_e
                )));
            }
            if !(cl.mean_power.is_finite() && cl.mean_power > 0.0) {
                return Err(Error::domain(format!("clutter {k}: mean power must be > 0")));
            }
        }
        Ok(())
    }
}

/// Generates the full scene: background noise, clutter patches (resampled
/// in place with their elevated mean), then target patterns scaled by the
/// noise floor. Fully deterministic in the spec.
pub fn generate_scene<T: Real>(spec: &SceneSpec) -> Result<Scene<T>> {
    spec.validate()?;
    let grid = spec.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut tensor = RadarTensor::zeros(grid);
    noise_into(&mut tensor, spec.noise_mean_power, &mut rng);

    for cl in &spec.clutter {
        let c = cl.center;
        let r_lo = c.i_r.saturating_sub(cl.extent.d_range);
        let r_hi = (c.i_r + cl.extent.d_range).min(grid.n_range - 1);
        let a_lo = c.i_a.saturating_sub(cl.extent.d_azimuth);
        let a_hi = (c.i_a + cl.extent.d_azimuth).min(grid.n_azimuth - 1);
        let e_lo = c.i_e.saturating_sub(cl.extent.d_elevation);
        let e_hi = (c.i_e + cl.extent.d_elevation).min(grid.n_elevation - 1);
        for i_r in r_lo..=r_hi {
            for i_a in a_lo..=a_hi {
                for i_e in e_lo..=e_hi {
                    let v = exp_sample(&mut rng, cl.mean_power);
                    tensor.set(i_r, i_a, i_e, v);
                }
            }
        }
    }

    let mut valid_mask = BoolMask::falses(grid);
    for t in &spec.targets {
        let (next, mask) = inject_scaled(&tensor, t, spec.noise_mean_power)?;
        tensor = next;
        valid_mask.union_with(&mask)?;
    }

    Ok(Scene {
        tensor,
        valid_mask,
        spec: spec.clone(),
    })
}

// --- scene-spec text format ---

fn parse_numbers(line: usize, key: &str, value: &str, want: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != want {
        return Err(Error::Parse {
            line,
            msg: format!("{key} wants {want} numbers, got {}", parts.len()),
        });
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>().map_err(|e| Error::Parse {
                line,
                msg: format!("{key}: bad number '{p}': {e}"),
            })
        })
        .collect()
}

fn as_index(line: usize, key: &str, v: f64) -> Result<usize> {
    if v.fract() != 0.0 || v < 0.0 || v > usize::MAX as f64 {
        return Err(Error::Parse {
            line,
            msg: format!("{key}: expected a non-negative integer, got {v}"),
        });
    }
    Ok(v as usize)
}

/// Maps spanning the standard RoI for the given bin counts.
fn roi_maps(n_range: usize, n_azimuth: usize, n_elevation: usize) -> [f64; 6] {
    let r_step = 72.0 / n_range as f64;
    let a_step = 90.0 / n_azimuth as f64;
    let e_step = 4.5 / n_elevation as f64;
    [
        0.5 * r_step,
        r_step,
        -45.0 + 0.5 * a_step,
        a_step,
        -0.5 + 0.5 * e_step,
        e_step,
    ]
}

impl SceneSpec {
    /// Parses the key-value text format. Errors carry the 1-based line.
    pub fn parse(text: &str) -> Result<SceneSpec> {
        let mut counts = (128usize, 96usize, 32usize);
        let mut maps: [Option<[f64; 2]>; 3] = [None, None, None];
        let mut noise_mean_power = 1.0;
        let mut seed = 0u64;
        let mut targets = Vec::new();
        let mut clutter = Vec::new();

        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: "expected 'key = value'".to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "grid" => {
                    let v = parse_numbers(line, key, value, 3)?;
                    counts = (
                        as_index(line, key, v[0])?,
                        as_index(line, key, v[1])?,
                        as_index(line, key, v[2])?,
                    );
                }
                "range_map" | "azimuth_map" | "elevation_map" => {
                    let v = parse_numbers(line, key, value, 2)?;
                    let slot = match key {
                        "range_map" => 0,
                        "azimuth_map" => 1,
                        _ => 2,
                    };
                    maps[slot] = Some([v[0], v[1]]);
                }
                "noise_mean_power" => {
                    noise_mean_power = parse_numbers(line, key, value, 1)?[0];
                }
                "seed" => {
                    let v = parse_numbers(line, key, value, 1)?[0];
                    if v.fract() != 0.0 || v < 0.0 || v > u64::MAX as f64 {
                        return Err(Error::Parse {
                            line,
                            msg: format!("seed: expected a non-negative integer, got {v}"),
                        });
                    }
                    seed = v as u64;
                }
                "target" => {
                    let v = parse_numbers(line, key, value, 8)?;
                    targets.push(TargetSpec {
                        center: CellIndex::new(
                            as_index(line, key, v[0])?,
                            as_index(line, key, v[1])?,
                            as_index(line, key, v[2])?,
                        ),
                        extent: Extent::new(
                            as_index(line, key, v[3])?,
                            as_index(line, key, v[4])?,
                            as_index(line, key, v[5])?,
                        ),
                        peak_snr_db: v[6],
                        sidelobe_level_db: v[7],
                    });
                }
                "clutter" => {
                    let v = parse_numbers(line, key, value, 7)?;
                    clutter.push(ClutterSpec {
                        center: CellIndex::new(
                            as_index(line, key, v[0])?,
                            as_index(line, key, v[1])?,
                            as_index(line, key, v[2])?,
                        ),
                        extent: Extent::new(
                            as_index(line, key, v[3])?,
                            as_index(line, key, v[4])?,
                            as_index(line, key, v[5])?,
                        ),
                        mean_power: v[6],
                    });
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown key '{other}'"),
                    });
                }
            }
        }

        let defaults = roi_maps(counts.0, counts.1, counts.2);
        let m_r = maps[0].unwrap_or([defaults[0], defaults[1]]);
        let m_a = maps[1].unwrap_or([defaults[2], defaults[3]]);
        let m_e = maps[2].unwrap_or([defaults[4], defaults[5]]);
        let grid = PolarGrid::new(
            counts.0, counts.1, counts.2, m_r[0], m_r[1], m_a[0], m_a[1], m_e[0], m_e[1],
        )?;
        Ok(SceneSpec {
            grid,
            noise_mean_power,
            targets,
            clutter,
            seed,
        })
    }

    /// Canonical text rendering; `parse` inverts it exactly.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let mut out = String::new();
        out.push_str(&format!(
            "grid = {} {} {}\n",
            g.n_range, g.n_azimuth, g.n_elevation
        ));
        out.push_str(&format!("range_map = {} {}\n", g.range_start_m, g.range_step_m));
        out.push_str(&format!(
            "azimuth_map = {} {}\n",
            g.azimuth_start_deg, g.azimuth_step_deg
        ));
        out.push_str(&format!(
            "elevation_map = {} {}\n",
            g.elevation_start_m, g.elevation_step_m
        ));
        out.push_str(&format!("noise_mean_power = {}\n", self.noise_mean_power));
        out.push_str(&format!("seed = {}\n", self.seed));
        for t in &self.targets {
            out.push_str(&format!(
                "target = {} {} {}  {} {} {}  {} {}\n",
                t.center.i_r,
                t.center.i_a,
                t.center.i_e,
                t.extent.d_range,
                t.extent.d_azimuth,
                t.extent.d_elevation,
                t.peak_snr_db,
                t.sidelobe_level_db
            ));
        }
        for c in &self.clutter {
            out.push_str(&format!(
                "clutter = {} {} {}  {} {} {}  {}\n",
                c.center.i_r,
                c.center.i_a,
            c.center.i_e,
                c.extent.d_range,
                c.extent.d_azimuth,
                c.extent.d_elevation,
                c.mean_power
            ));
        }
        out
    }
}
