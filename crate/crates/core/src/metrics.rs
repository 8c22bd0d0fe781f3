//! Filter-quality scoring against a scene's ground-truth validity mask.
//!
//! Two per-range-bin rates summarise a preprocessing run. PRVM is the
//! fraction of valid cells the filter kept; RRIM is the fraction of
//! invalid cells it removed. A bin with no valid (resp. invalid) cells
//! has no defined rate and reports `None`, rendered "NA" in CSV. Cells
//! are binned by the range coordinate of their bin center; cells whose
//! range falls outside the configured bins are ignored entirely.

use crate::cctp::{config_label, run_cctp, CctpConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::synth::Scene;
use crate::tensor::BoolMask;

/// Range-axis binning, as a strictly ascending edge list. Each bin is
/// half-open: `[edges[i], edges[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeBins {
    edges: Vec<f64>,
}

impl RangeBins {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::domain("need at least two bin edges"));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFiniteInput("bin edge"));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("bin edges must be strictly ascending"));
        }
        Ok(RangeBins { edges })
    }

    pub fn uniform(start_m: f64, end_m: f64, n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::domain("need at least one bin"));
        }
        if !start_m.is_finite() || !end_m.is_finite() || start_m >= end_m {
            return Err(Error::domain(format!(
                "bad uniform bin span [{start_m}, {end_m})"
            )));
        }
        let width = (end_m - start_m) / n_bins as f64;
        let edges = (0..=n_bins).map(|i| start_m + i as f64 * width).collect();
        RangeBins::new(edges)
    }

    /// Nine 8 m bins over the 0-72 m region of interest.
    pub fn default_roi() -> Self {
        RangeBins::uniform(0.0, 72.0, 9).expect("static edges")
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one bin
    }

    pub fn bounds(&self, bin: usize) -> (f64, f64) {
        (self.edges[bin], self.edges[bin + 1])
    }

    pub fn span(&self) -> (f64, f64) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    /// Bin holding `range_m`, or `None` when it falls outside every bin.
    pub fn index_of(&self, range_m: f64) -> Option<usize> {
        if !range_m.is_finite() || range_m < self.edges[0] || range_m >= *self.edges.last().unwrap()
        {
            return None;
        }
        // partition_point returns the count of edges <= range_m.
        let upper = self.edges.partition_point(|e| *e <= range_m);
        Some(upper - 1)
    }
}

/// Counts and rates for one range bin (or the whole region).
#[derive(Debug, Clone, PartialEq)]
pub struct BinScore {
    pub bin_start_m: f64,
    pub bin_end_m: f64,
    pub valid_count: u64,
    pub invalid_count: u64,
    pub kept_valid: u64,
    pub removed_invalid: u64,
    pub prvm: Option<f64>,
    pub rrim: Option<f64>,
}

impl BinScore {
    fn empty(bin_start_m: f64, bin_end_m: f64) -> Self {
        BinScore {
            bin_start_m,
            bin_end_m,
            valid_count: 0,
            invalid_count: 0,
            kept_valid: 0,
            removed_invalid: 0,
            prvm: None,
            rrim: None,
        }
    }

    fn finish(&mut self) {
        self.prvm = ratio(self.kept_valid, self.valid_count);
        self.rrim = ratio(self.removed_invalid, self.invalid_count);
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Per-bin scores plus the aggregate over every in-bin cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PrvmRrimReport {
    pub per_bin: Vec<BinScore>,
    pub overall: BinScore,
}

/// Scores a filter's survivor mask against ground truth. `kept` is true
/// on cells the filter retained, `valid` on cells the scene marks as
/// genuine target returns; the masks must share a grid.
pub fn prvm_rrim(kept: &BoolMask, valid: &BoolMask, bins: &RangeBins) -> Result<PrvmRrimReport> {
    if kept.grid() != valid.grid() {
        return Err(Error::GridMismatch("kept mask", "validity mask"));
    }
    let grid = kept.grid();
    let mut per_bin: Vec<BinScore> = (0..bins.len())
        .map(|b| {
            let (lo, hi) = bins.bounds(b);
            BinScore::empty(lo, hi)
        })
        .collect();
    let (roi_lo, roi_hi) = bins.span();
    let mut overall = BinScore::empty(roi_lo, roi_hi);

    for i_r in 0..grid.n_range {
        let Some(bin) = bins.index_of(grid.range_m(i_r)) else {
            continue;
        };
        for i_a in 0..grid.n_azimuth {
            for i_e in 0..grid.n_elevation {
                let keep = kept.get(i_r, i_a, i_e);
                let is_valid = valid.get(i_r, i_a, i_e);
                let score = &mut per_bin[bin];
                if is_valid {
                    score.valid_count += 1;
                    overall.valid_count += 1;
                    if keep {
                        score.kept_valid += 1;
                        overall.kept_valid += 1;
                    }
                } else {
                    score.invalid_count += 1;
                    overall.invalid_count += 1;
                    if !keep {
                        score.removed_invalid += 1;
                        overall.removed_invalid += 1;
                    }
                }
            }
        }
    }
    for score in &mut per_bin {
        score.finish();
    }
    overall.finish();
    Ok(PrvmRrimReport { per_bin, overall })
}

/// One pipeline configuration scored on one scene.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub label: String,
    pub report: PrvmRrimReport,
}

/// Runs every configuration on the scene and scores each survivor mask.
pub fn sweep_report<T: Real>(
    scene: &Scene<T>,
    configs: &[CctpConfig],
    bins: &RangeBins,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let out = run_cctp(&scene.tensor, cfg)?;
        let report = prvm_rrim(&out.indicator, &scene.valid_mask, bins)?;
        rows.push(SweepRow {
            label: config_label(cfg),
            report,
        });
    }
    Ok(rows)
}

fn fmt_rate(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{r}"),
        None => "NA".to_string(),
    }
}

/// Quotes a CSV field when its content demands it. Labels of recovery
/// configurations contain a comma ("5-5-(2,1)"), so they must be quoted
/// or every naive column split downstream shears the row.
pub fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

fn push_csv_line(out: &mut String, label: &str, score: &BinScore) {
    out.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        csv_field(label),
        score.bin_start_m,
        score.bin_end_m,
        fmt_rate(score.prvm),
        fmt_rate(score.rrim),
        score.valid_count,
        score.invalid_count
    ));
}

/// Renders sweep rows as CSV: per-bin lines for each configuration
/// followed by its aggregate line spanning the whole binned region.
pub fn report_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("label,bin_start_m,bin_end_m,prvm,rrim,valid_count,invalid_count\n");
    for row in rows {
        for score in &row.report.per_bin {
            push_csv_line(&mut out, &row.label, score);
        }
        push_csv_line(&mut out, &row.label, &row.report.overall);
    }
    out
}
