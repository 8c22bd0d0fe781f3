//! Polar grids, dense power tensors, boolean masks and sparse cell sets.
//!
//! A measurement tensor is a dense row-major array over (range, azimuth,
//! elevation): the linear offset of `(i_r, i_a, i_e)` is
//! `(i_r * n_azimuth + i_a) * n_elevation + i_e`. Power 0 is the canonical
//! "removed / no return" sentinel everywhere in the pipeline, so dense and
//! sparse views convert without extra bookkeeping.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Polar measurement grid: bin counts plus linear bin-center maps.
///
/// The `*_start_*` fields locate the CENTER of bin 0 on each axis; bin `i`
/// is centered at `start + i * step`. Elevation is binned directly in
/// height above the sensor plane, so its map is in meters, not degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    pub n_range: usize,
    pub n_azimuth: usize,
    pub n_elevation: usize,
    pub range_start_m: f64,
    pub range_step_m: f64,
    pub azimuth_start_deg: f64,
    pub azimuth_step_deg: f64,
    pub elevation_start_m: f64,
    pub elevation_step_m: f64,
}

impl PolarGrid {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_range: usize,
        n_azimuth: usize,
        n_elevation: usize,
        range_start_m: f64,
        range_step_m: f64,
        azimuth_start_deg: f64,
        azimuth_step_deg: f64,
        elevation_start_m: f64,
        elevation_step_m: f64,
    ) -> Result<Self> {
        if n_range == 0 || n_azimuth == 0 || n_elevation == 0 {
            return Err(Error::DimMismatch(format!(
                "bin counts must be >= 1, got {n_range}x{n_azimuth}x{n_elevation}"
            )));
        }
        let maps = [
            range_start_m,
            range_step_m,
            azimuth_start_deg,
            azimuth_step_deg,
            elevation_start_m,
            elevation_step_m,
        ];
        if maps.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("grid bin maps"));
        }
        if range_step_m <= 0.0 || azimuth_step_deg <= 0.0 || elevation_step_m <= 0.0 {
            return Err(Error::domain("grid bin steps must be > 0"));
        }
        Ok(PolarGrid {
            n_range,
            n_azimuth,
            n_elevation,
            range_start_m,
            range_step_m,
            azimuth_start_deg,
            azimuth_step_deg,
            elevation_start_m,
            elevation_step_m,
        })
    }

    /// Grid with the given bin counts over the standard region of
    /// interest (0..72 m range, +-45 deg azimuth, -0.5..4 m elevation),
    /// start fields sitting on the centers of the lowest bins.
    pub fn roi(n_range: usize, n_azimuth: usize, n_elevation: usize) -> Result<Self> {
        if n_range == 0 || n_azimuth == 0 || n_elevation == 0 {
            return Err(Error::DimMismatch(format!(
                "bin counts must be >= 1, got {n_range}x{n_azimuth}x{n_elevation}"
            )));
        }
        let range_step = 72.0 / n_range as f64;
        let az_step = 90.0 / n_azimuth as f64;
        let el_step = 4.5 / n_elevation as f64;
        PolarGrid::new(
            n_range,
            n_azimuth,
            n_elevation,
            0.5 * range_step,
            range_step,
            -45.0 + 0.5 * az_step,
            az_step,
            -0.5 + 0.5 * el_step,
            el_step,
        )
    }

    /// Desk-scale default: 128 range bins across 0..72 m, 96 azimuth bins
    /// across +-45 deg, 32 elevation bins across -0.5..4 m.
    pub fn desk() -> Self {
        PolarGrid::roi(128, 96, 32).expect("static counts")
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_range, self.n_azimuth, self.n_elevation)
    }

    pub fn cell_count(&self) -> usize {
        self.n_range * self.n_azimuth * self.n_elevation
    }

    /// Linear offset of a cell in the dense layout.
    #[inline]
    pub fn linear(&self, i_r: usize, i_a: usize, i_e: usize) -> usize {
        debug_assert!(self.contains(i_r, i_a, i_e));
        (i_r * self.n_azimuth + i_a) * self.n_elevation + i_e
    }

    #[inline]
    pub fn contains(&self, i_r: usize, i_a: usize, i_e: usize) -> bool {
        i_r < self.n_range && i_a < self.n_azimuth && i_e < self.n_elevation
    }

    /// Center range of bin `i_r`, meters.
    pub fn range_m(&self, i_r: usize) -> f64 {
        self.range_start_m + i_r as f64 * self.range_step_m
    }

    /// Center azimuth of bin `i_a`, degrees.
    pub fn azimuth_deg(&self, i_a: usize) -> f64 {
        self.azimuth_start_deg + i_a as f64 * self.azimuth_step_deg
    }

    /// Center height of bin `i_e`, meters.
    pub fn elevation_m(&self, i_e: usize) -> f64 {
        self.elevation_start_m + i_e as f64 * self.elevation_step_m
    }
}

/// One cell address. Ordering is lexicographic in (i_r, i_a, i_e), which
/// coincides with ascending linear offset on any fixed grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub i_r: usize,
    pub i_a: usize,
    pub i_e: usize,
}

impl CellIndex {
    pub fn new(i_r: usize, i_a: usize, i_e: usize) -> Self {
        CellIndex { i_r, i_a, i_e }
    }
}

/// Dense non-negative power tensor over a polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarTensor<T> {
    grid: PolarGrid,
    values: Vec<T>,
}

impl<T: Real> RadarTensor<T> {
    pub fn zeros(grid: PolarGrid) -> Self {
        RadarTensor {
            grid,
            values: vec![T::zero(); grid.cell_count()],
        }
    }

    /// Wraps a dense payload in layout order. Rejects wrong lengths and
    /// values outside the power domain (finite, >= 0).
    pub fn from_values(grid: PolarGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for grid {}x{}x{}, got {}",
                grid.cell_count(),
                grid.n_range,
                grid.n_azimuth,
                grid.n_elevation,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("tensor payload"));
        }
        if values.iter().any(|v| *v < T::zero()) {
            return Err(Error::domain("tensor powers must be >= 0"));
        }
        Ok(RadarTensor { grid, values })
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Mutable payload access. Callers must keep values finite and >= 0.
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, i_r: usize, i_a: usize, i_e: usize) -> T {
        self.values[self.grid.linear(i_r, i_a, i_e)]
    }

    #[inline]
    pub fn set(&mut self, i_r: usize, i_a: usize, i_e: usize, v: T) {
        assert!(v.is_finite() && v >= T::zero(), "power must be finite and >= 0");
        let off = self.grid.linear(i_r, i_a, i_e);
        self.values[off] = v;
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v > T::zero()).count()
    }

    /// True where the tensor is strictly positive.
    pub fn nonzero_mask(&self) -> BoolMask {
        BoolMask {
            grid: self.grid,
            bits: self.values.iter().map(|v| *v > T::zero()).collect(),
        }
    }
}

/// Boolean per-cell mask over a polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoolMask {
    grid: PolarGrid,
    bits: Vec<bool>,
}

impl BoolMask {
    pub fn falses(grid: PolarGrid) -> Self {
        BoolMask {
            grid,
            bits: vec![false; grid.cell_count()],
        }
    }

    pub fn from_bits(grid: PolarGrid, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.cell_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} mask bits, got {}",
                grid.cell_count(),
                bits.len()
            )));
        }
        Ok(BoolMask { grid, bits })
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i_r: usize, i_a: usize, i_e: usize) -> bool {
        self.bits[self.grid.linear(i_r, i_a, i_e)]
    }

    #[inline]
    pub fn set(&mut self, i_r: usize, i_a: usize, i_e: usize, v: bool) {
        let off = self.grid.linear(i_r, i_a, i_e);
        self.bits[off] = v;
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Cellwise OR with another mask on the same grid.
    pub fn union_with(&mut self, other: &BoolMask) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("mask", "mask"));
        }
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a = *a || *b;
        }
        Ok(())
    }

    /// True iff every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BoolMask) -> Result<bool> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("mask", "mask"));
        }
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b))
    }
}

/// Sparse view of a tensor: the strictly positive cells in canonical
/// (i_r, i_a, i_e) order, unique and within the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMeasurementSet<T> {
    grid: PolarGrid,
    cells: Vec<(CellIndex, T)>,
}

impl<T: Real> SparseMeasurementSet<T> {
    /// Builds a set from unordered entries, sorting canonically.
    pub fn new(grid: PolarGrid, mut entries: Vec<(CellIndex, T)>) -> Result<Self> {
        for (c, p) in &entries {
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
            if !p.is_finite() {
                return Err(Error::NonFiniteInput("sparse power"));
            }
            if *p <= T::zero() {
                return Err(Error::domain(format!(
                    "sparse power at ({}, {}, {}) must be > 0 (zero means removed)",
                    c.i_r, c.i_a, c.i_e
                )));
            }
        }
        entries.sort_by_key(|(c, _)| *c);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                let c = w[0].0;
                return Err(Error::DuplicateCell {
                    i_r: c.i_r,
                    i_a: c.i_a,
                    i_e: c.i_e,
                });
            }
        }
        Ok(SparseMeasurementSet { grid, cells: entries })
    }

    pub fn empty(grid: PolarGrid) -> Self {
        SparseMeasurementSet { grid, cells: Vec::new() }
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn cells(&self) -> &[(CellIndex, T)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Collects the strictly positive cells of `t` in canonical order.
pub fn to_sparse<T: Real>(t: &RadarTensor<T>) -> SparseMeasurementSet<T> {
    let g = *t.grid();
    let mut cells = Vec::new();
    for i_r in 0..g.n_range {
        for i_a in 0..g.n_azimuth {
            for i_e in 0..g.n_elevation {
                let v = t.get(i_r, i_a, i_e);
                if v > T::zero() {
                    cells.push((CellIndex::new(i_r, i_a, i_e), v));
                }
            }
        }
    }
    SparseMeasurementSet { grid: g, cells }
}

/// Scatters a sparse set back onto a zero tensor. Infallible because the
/// set's constructor already enforced bounds, uniqueness and positivity.
pub fn from_sparse<T: Real>(s: &SparseMeasurementSet<T>) -> RadarTensor<T> {
    let mut t = RadarTensor::zeros(*s.grid());
    for (c, p) in s.cells() {
        let off = t.grid.linear(c.i_r, c.i_a, c.i_e);
        t.values[off] = *p;
    }
    t
}

/// Cartesian (x, y, z) of a cell center: x = r cos(az), y = r sin(az) on the
/// sensor plane, z straight from the height bin map.
pub fn cell_to_cartesian(grid: &PolarGrid, c: CellIndex) -> Result<[f64; 3]> {
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
    let r = grid.range_m(c.i_r);
    let az = grid.azimuth_deg(c.i_a).to_radians();
    Ok([r * az.cos(), r * az.sin(), grid.elevation_m(c.i_e)])
}
