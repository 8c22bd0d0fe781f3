//! Cell-averaging CFAR along range columns and deterministic top-K
//! selectors.
//!
//! The pipeline's first step runs a 1D CA-CFAR along the range axis of
//! every (azimuth, elevation) column. The scale factor alpha =
//! N ((1/pfa)^(1/N) - 1) makes the per-cell false-alarm rate exactly
//! `pfa` on exponential noise with N training cells; windows clamp at the
//! borders and alpha is recomputed for the actual training count, so the
//! calibration holds at the edges too. A cell with no training cells at
//! all is never detected.
//!
//! Two selectors back the coarse/fine comparisons elsewhere: a global
//! top-percent filter over the whole tensor (the baseline whose full sort
//! the per-range selection is measured against) and the per-vector
//! `os_select_top_k` used by the projection step. Both are fully
//! deterministic: ties break toward the lower index, quotas are
//! ceil(percent/100 * len), and zero cells are never selected by the
//! per-vector form. The `*_counted` variants report how many comparator
//! invocations the internal sort performed.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::RadarTensor;

/// CA-CFAR window geometry and target false-alarm rate.
///
/// `train_cells` and `guard_cells` are per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaCfarConfig {
    pub train_cells: usize,
    pub guard_cells: usize,
    pub pfa: f64,
}

impl Default for CaCfarConfig {
    fn default() -> Self {
        CaCfarConfig {
            train_cells: 16,
            guard_cells: 2,
            pfa: 0.05,
        }
    }
}

impl CaCfarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_cells == 0 {
            return Err(Error::domain("CA-CFAR needs at least one training cell per side"));
        }
        check_pfa(self.pfa)
    }
}

fn check_pfa(pfa: f64) -> Result<()> {
    if !pfa.is_finite() {
        return Err(Error::NonFiniteInput("pfa"));
    }
    if pfa <= 0.0 || pfa >= 1.0 {
        return Err(Error::domain(format!("pfa must lie in (0, 1), got {pfa}")));
    }
    Ok(())
}

/// CA-CFAR threshold multiplier for `n_train` training cells:
/// alpha = N ((1/pfa)^(1/N) - 1).
pub fn ca_threshold_factor(n_train: usize, pfa: f64) -> Result<f64> {
    check_pfa(pfa)?;
    if n_train == 0 {
        return Err(Error::domain("threshold factor undefined for 0 training cells"));
    }
    let n = n_train as f64;
    Ok(n * (pfa.powf(-1.0 / n) - 1.0))
}

fn check_powers<T: Real>(values: &[T], what: &'static str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput(what));
    }
    if values.iter().any(|v| *v < T::zero()) {
        return Err(Error::domain(format!("{what}: powers must be >= 0")));
    }
    Ok(())
}

/// 1D CA-CFAR over one power vector. Returns the per-cell detection flags:
/// strict `value > alpha * mean(training)`. Training windows are the
/// `train_cells` cells beyond `guard_cells` on each side, clamped to the
/// vector; alpha is recomputed for the clamped count.
pub fn ca_cfar_1d<T: Real>(values: &[T], cfg: &CaCfarConfig) -> Result<Vec<bool>> {
    cfg.validate()?;
    check_powers(values, "CA-CFAR input")?;
    let n = values.len();
    let mut out = vec![false; n];
    // alpha depends only on the training count; cache per count.
    let mut alpha: Vec<Option<f64>> = vec![None; 2 * cfg.train_cells + 1];
    for i in 0..n {
        let mut sum = T::zero();
        let mut count = 0usize;
        if i > cfg.guard_cells {
            let hi = i - cfg.guard_cells - 1;
            let lo = i.saturating_sub(cfg.guard_cells + cfg.train_cells);
            for j in lo..=hi {
                sum = sum + values[j];
            }
            count += hi - lo + 1;
        }
        let r_lo = i + cfg.guard_cells + 1;
        if r_lo < n {
            let r_hi = (i + cfg.guard_cells + cfg.train_cells).min(n - 1);
            for j in r_lo..=r_hi {
                sum = sum + values[j];
            }
            count += r_hi - r_lo + 1;
        }
        if count == 0 {
            continue;
        }
        let a = match alpha[count] {
            Some(a) => a,
            None => {
                let a = ca_threshold_factor(count, cfg.pfa)?;
                alpha[count] = Some(a);
                a
            }
        };
        let threshold = T::of(a) * (sum / T::of_usize(count));
        out[i] = values[i] > threshold;
    }
    Ok(out)
}

/// Coarse step of the pipeline: CA-CFAR along the range axis of every
/// (azimuth, elevation) column. Detected cells keep their power, all
/// others become 0.
pub fn ccfar_step1<T: Real>(t: &RadarTensor<T>, cfg: &CaCfarConfig) -> Result<RadarTensor<T>> {
    cfg.validate()?;
    let grid = *t.grid();
    let mut out = RadarTensor::zeros(grid);
    let mut column = vec![T::zero(); grid.n_range];
    for i_a in 0..grid.n_azimuth {
        for i_e in 0..grid.n_elevation {
            for (i_r, c) in column.iter_mut().enumerate() {
                *c = t.get(i_r, i_a, i_e);
            }
            let detected = ca_cfar_1d(&column, cfg)?;
            for (i_r, d) in detected.iter().enumerate() {
                if *d {
                    out.set(i_r, i_a, i_e, column[i_r]);
                }
            }
        }
    }
    Ok(out)
}

/// ceil(percent / 100 * n), multiplying before dividing so decimal
/// percents hit exact integer products where they should.
fn ceil_quota(percent: f64, n: usize) -> usize {
    ((percent * n as f64) / 100.0).ceil() as usize
}

fn check_percent(percent: f64, what: &'static str) -> Result<()> {
    if !percent.is_finite() {
        return Err(Error::NonFiniteInput(what));
    }
    if percent <= 0.0 || percent > 100.0 {
        return Err(Error::domain(format!("{what} must lie in (0, 100], got {percent}")));
    }
    Ok(())
}

/// Keeps the ceil(percent/100 * cell_count) highest-power cells of the
/// whole tensor (ties toward the lower linear offset) and zeroes the
/// rest. Also reports the comparator invocations of its full sort; this
/// is the global-sort baseline the per-range selection is measured
/// against.
pub fn top_percent_global_counted<T: Real>(
    t: &RadarTensor<T>,
    percent: f64,
) -> Result<(RadarTensor<T>, u64)> {
    check_percent(percent, "top percent")?;
    let values = t.values();
    let quota = ceil_quota(percent, values.len());
    let mut order: Vec<usize> = (0..values.len()).collect();
    let mut comparisons = 0u64;
    order.sort_unstable_by(|&i, &j| {
        comparisons += 1;
        values[j]
            .partial_cmp(&values[i])
            .expect("powers are finite")
            .then_with(|| i.cmp(&j))
    });
    let mut out = RadarTensor::zeros(*t.grid());
    let kept = out.values_mut();
    for &off in order.iter().take(quota) {
        kept[off] = values[off];
    }
    Ok((out, comparisons))
}

/// [`top_percent_global_counted`] without the instrumentation.
pub fn top_percent_global<T: Real>(t: &RadarTensor<T>, percent: f64) -> Result<RadarTensor<T>> {
    top_percent_global_counted(t, percent).map(|(out, _)| out)
}

/// Selects the ceil(k2_percent/100 * len) largest strictly positive
/// elements of one vector. Ties break toward the lower index; zero cells
/// are never selected even if that leaves the quota unmet. Returns the
/// selected indices in ascending order plus the sort's comparator count.
pub fn os_select_top_k_counted<T: Real>(
    values: &[T],
    k2_percent: f64,
) -> Result<(Vec<usize>, u64)> {
    check_percent(k2_percent, "k2 percent")?;
    check_powers(values, "selection input")?;
    let quota = ceil_quota(k2_percent, values.len());
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| values[i] > T::zero()).collect();
    let mut comparisons = 0u64;
    order.sort_unstable_by(|&i, &j| {
        comparisons += 1;
        values[j]
            .partial_cmp(&values[i])
            .expect("powers are finite")
            .then_with(|| i.cmp(&j))
    });
    order.truncate(quota);
    order.sort_unstable();
    Ok((order, comparisons))
}

/// [`os_select_top_k_counted`] without the instrumentation.
pub fn os_select_top_k<T: Real>(values: &[T], k2_percent: f64) -> Result<Vec<usize>> {
    os_select_top_k_counted(values, k2_percent).map(|(idx, _)| idx)
}
