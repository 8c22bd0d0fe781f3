//! The three-step coarse-to-fine condensing pipeline.
//!
//! Step 1 (`ccfar_step1` in [`crate::cfar`]) thins the raw tensor with a
//! coarse CA-CFAR at pfa = K1/100 along range columns. Step 2 projects
//! each range slice down the elevation axis with linearly decaying
//! weights (weight `E_T - i_e` for elevation bin `i_e`, `E_T` the bin
//! count, bin 0 the lowest) and keeps, per range, the top K2% azimuth
//! bins of the projected vector; a cell of M1 survives exactly when its
//! range index is preserved AND its azimuth index is preserved somewhere
//! (the two index sets apply separably). Step 3 re-admits cells of the
//! step-1 output whose range lies within d_r of a preserved range and
//! whose azimuth lies within d_a of a preserved azimuth, recovering
//! low-power returns next to confident ones.
//!
//! Zero is the removed sentinel throughout, so the surviving sets nest:
//! nonzero(m2) is contained in nonzero(m3), which is contained in
//! nonzero(m1), which is contained in nonzero(raw). Recovering from the
//! raw tensor instead (`recover_from_raw`) is supported for comparison
//! but breaks the m3-within-m1 link.

use std::collections::BTreeSet;

use crate::cfar::{os_select_top_k, top_percent_global, CaCfarConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{to_sparse, BoolMask, RadarTensor, SparseMeasurementSet};

/// How step 1 thins the raw tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step1Mode {
    /// Per-column CA-CFAR along range at pfa = K1/100 (the default).
    CaCfar,
    /// Global top-K1% selection over the whole tensor; used by sweeps to
    /// compare the rate-calibrated and quota-calibrated readings of K1.
    TopPercent,
}

/// Step-3 recovery half-widths, in bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recovery {
    pub d_r: usize,
    pub d_a: usize,
}

impl Recovery {
    pub fn validate(&self) -> Result<()> {
        if self.d_a < 1 || self.d_r < self.d_a {
            return Err(Error::domain(format!(
                "recovery needs d_r >= d_a >= 1, got ({}, {})",
                self.d_r, self.d_a
            )));
        }
        Ok(())
    }
}

/// Full pipeline configuration. `k2_percent: None` stops after step 1,
/// `recovery: None` stops after step 2; both render as "Nan" in labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CctpConfig {
    pub k1_percent: f64,
    pub k2_percent: Option<f64>,
    pub recovery: Option<Recovery>,
    /// CA-CFAR window geometry, per side.
    pub train_cells: usize,
    pub guard_cells: usize,
    pub step1_mode: Step1Mode,
    pub recover_from_raw: bool,
}

impl Default for CctpConfig {
    fn default() -> Self {
        CctpConfig {
            k1_percent: 5.0,
            k2_percent: Some(5.0),
            recovery: Some(Recovery { d_r: 2, d_a: 1 }),
            train_cells: 16,
            guard_cells: 2,
            step1_mode: Step1Mode::CaCfar,
            recover_from_raw: false,
        }
    }
}

impl CctpConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.k1_percent.is_finite() {
            return Err(Error::NonFiniteInput("k1 percent"));
        }
        match self.step1_mode {
            // K1 maps to a false-alarm rate, which must stay below 1.
            Step1Mode::CaCfar => {
                if self.k1_percent <= 0.0 || self.k1_percent >= 100.0 {
                    return Err(Error::domain(format!(
                        "k1 must lie in (0, 100) for CA-CFAR, got {}",
                        self.k1_percent
                    )));
                }
                if self.train_cells == 0 {
                    return Err(Error::domain("CA-CFAR needs at least one training cell per side"));
                }
            }
            Step1Mode::TopPercent => {
                if self.k1_percent <= 0.0 || self.k1_percent > 100.0 {
                    return Err(Error::domain(format!(
                        "k1 must lie in (0, 100] for top-percent, got {}",
                        self.k1_percent
                    )));
                }
            }
        }
        if let Some(k2) = self.k2_percent {
            if !k2.is_finite() {
                return Err(Error::NonFiniteInput("k2 percent"));
            }
            if k2 <= 0.0 || k2 > 100.0 {
                return Err(Error::domain(format!("k2 must lie in (0, 100], got {k2}")));
            }
        }
        if let Some(rec) = &self.recovery {
            rec.validate()?;
            if self.k2_percent.is_none() {
                return Err(Error::domain(
                    "recovery needs step 2: no preserved index sets without k2",
                ));
            }
        }
        Ok(())
    }

    fn ca_config(&self) -> CaCfarConfig {
        CaCfarConfig {
            train_cells: self.train_cells,
            guard_cells: self.guard_cells,
            pfa: self.k1_percent / 100.0,
        }
    }
}

/// Everything the pipeline produced. `m2` is the pre-recovery survivor
/// set, kept so the nesting chain stays checkable; `indicator` is true
/// exactly on `m3`'s cells.
#[derive(Debug, Clone)]
pub struct CctpOutput<T> {
    pub m1: SparseMeasurementSet<T>,
    pub m2: SparseMeasurementSet<T>,
    pub m3: SparseMeasurementSet<T>,
    pub indicator: BoolMask,
    pub preserved_ranges: BTreeSet<usize>,
    pub preserved_azimuths: BTreeSet<usize>,
}

/// Step-2 result on the dense side.
#[derive(Debug, Clone)]
pub struct Step2Output<T> {
    pub m2: RadarTensor<T>,
    pub preserved_ranges: BTreeSet<usize>,
    pub preserved_azimuths: BTreeSet<usize>,
    /// Selected azimuth indices per range slice, ascending.
    pub selections: Vec<Vec<usize>>,
}

/// Elevation-weighted projection of one range slice: for each azimuth,
/// sum of `(E_T - i_e) * value` over the elevation bins.
pub fn vertical_weighted_projection<T: Real>(t: &RadarTensor<T>, i_r: usize) -> Result<Vec<T>> {
    let grid = t.grid();
    if i_r >= grid.n_range {
        return Err(Error::IndexOutOfGrid {
            i_r,
            i_a: 0,
            i_e: 0,
            n_r: grid.n_range,
            n_a: grid.n_azimuth,
            n_e: grid.n_elevation,
        });
    }
    let mut out = Vec::with_capacity(grid.n_azimuth);
    for i_a in 0..grid.n_azimuth {
        let mut acc = T::zero();
        for i_e in 0..grid.n_elevation {
            let w = T::of_usize(grid.n_elevation - i_e);
            acc = acc + w * t.get(i_r, i_a, i_e);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Step 2: per-range top-K2% azimuth selection on the projected slices,
/// then the separable row/column filter on `m1`.
pub fn cctp_step2<T: Real>(m1: &RadarTensor<T>, k2_percent: f64) -> Result<Step2Output<T>> {
    let grid = *m1.grid();
    let mut preserved_ranges = BTreeSet::new();
    let mut preserved_azimuths = BTreeSet::new();
    let mut selections = Vec::with_capacity(grid.n_range);
    for i_r in 0..grid.n_range {
        let projected = vertical_weighted_projection(m1, i_r)?;
        let selected = os_select_top_k(&projected, k2_percent)?;
        if !selected.is_empty() {
            preserved_ranges.insert(i_r);
            preserved_azimuths.extend(selected.iter().copied());
        }
        selections.push(selected);
    }
    let mut m2 = RadarTensor::zeros(grid);
    for &j_r in &preserved_ranges {
        for &j_a in &preserved_azimuths {
            for i_e in 0..grid.n_elevation {
                let v = m1.get(j_r, j_a, i_e);
                if v > T::zero() {
                    m2.set(j_r, j_a, i_e, v);
                }
            }
        }
    }
    Ok(Step2Output {
        m2,
        preserved_ranges,
        preserved_azimuths,
        selections,
    })
}

/// Step 3: keeps every column of `source` whose range index falls within
/// `d_r` of some preserved range AND whose azimuth index falls within
/// `d_a` of some preserved azimuth, windows clamped at the borders.
pub fn cctp_step3<T: Real>(
    source: &RadarTensor<T>,
    preserved_ranges: &BTreeSet<usize>,
    preserved_azimuths: &BTreeSet<usize>,
    recovery: Recovery,
) -> Result<RadarTensor<T>> {
    recovery.validate()?;
    let grid = *source.grid();
    for &j in preserved_ranges {
        if j >= grid.n_range {
            return Err(Error::domain(format!("preserved range {j} outside grid")));
        }
    }
    for &j in preserved_azimuths {
        if j >= grid.n_azimuth {
            return Err(Error::domain(format!("preserved azimuth {j} outside grid")));
        }
    }
    let mut keep_r = vec![false; grid.n_range];
    for &j in preserved_ranges {
        let lo = j.saturating_sub(recovery.d_r);
        let hi = (j + recovery.d_r).min(grid.n_range - 1);
        for k in keep_r.iter_mut().take(hi + 1).skip(lo) {
            *k = true;
        }
    }
    let mut keep_a = vec![false; grid.n_azimuth];
    for &j in preserved_azimuths {
        let lo = j.saturating_sub(recovery.d_a);
        let hi = (j + recovery.d_a).min(grid.n_azimuth - 1);
        for k in keep_a.iter_mut().take(hi + 1).skip(lo) {
            *k = true;
        }
    }
    let mut out = RadarTensor::zeros(grid);
    for (i_r, kr) in keep_r.iter().enumerate() {
        if !kr {
            continue;
        }
        for (i_a, ka) in keep_a.iter().enumerate() {
            if !ka {
                continue;
            }
            for i_e in 0..grid.n_elevation {
                let v = source.get(i_r, i_a, i_e);
                if v > T::zero() {
                    out.set(i_r, i_a, i_e, v);
                }
            }
        }
    }
    Ok(out)
}

/// Runs the configured pipeline. Disabled stages pass their input
/// through, so `m3` always holds the final survivor set.
pub fn run_cctp<T: Real>(raw: &RadarTensor<T>, cfg: &CctpConfig) -> Result<CctpOutput<T>> {
    cfg.validate()?;
    let m1 = match cfg.step1_mode {
        Step1Mode::CaCfar => crate::cfar::ccfar_step1(raw, &cfg.ca_config())?,
        Step1Mode::TopPercent => top_percent_global(raw, cfg.k1_percent)?,
    };

    let (m2, preserved_ranges, preserved_azimuths) = match cfg.k2_percent {
        Some(k2) => {
            let s = cctp_step2(&m1, k2)?;
            (s.m2, s.preserved_ranges, s.preserved_azimuths)
        }
        None => (m1.clone(), BTreeSet::new(), BTreeSet::new()),
    };

    let m3 = match cfg.recovery {
        Some(rec) => {
            let source = if cfg.recover_from_raw { raw } else { &m1 };
            cctp_step3(source, &preserved_ranges, &preserved_azimuths, rec)?
        }
        None => m2.clone(),
    };

    let indicator = m3.nonzero_mask();
    Ok(CctpOutput {
        m1: to_sparse(&m1),
        m2: to_sparse(&m2),
        m3: to_sparse(&m3),
        indicator,
        preserved_ranges,
        preserved_azimuths,
    })
}

/// Renders a config as "K1-K2-(d_r,d_a)" with "Nan" for disabled stages,
/// e.g. "5-5-(2,1)", "10-Nan-Nan", "2.5-2.5-(2,1)".
pub fn config_label(cfg: &CctpConfig) -> String {
    let k2 = match cfg.k2_percent {
        Some(k2) => format!("{k2}"),
        None => "Nan".to_string(),
    };
    let rec = match cfg.recovery {
        Some(r) => format!("({},{})", r.d_r, r.d_a),
        None => "Nan".to_string(),
    };
    format!("{}-{}-{}", cfg.k1_percent, k2, rec)
}
