use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest grid dimension supported.
pub const MAX_GRID_DIM: usize = 3;

/// Tolerance on the Riemann mass of a density grid before normalization.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Axis-aligned box `Π [lo_j, hi_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion<S> {
    pub lo: Vec<S>,
    pub hi: Vec<S>,
}

impl<S: Scalar> BoxRegion<S> {
    pub fn new(lo: Vec<S>, hi: Vec<S>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::param("box needs finite lo < hi on every axis"));
        }
        Ok(BoxRegion { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(BoxRegion {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        })
    }

    /// Largest distance from the origin of any point in the box.
    pub fn radius(&self) -> S {
        self.lo.iter().zip(&self.hi).map(|(a, b)| a.abs().max(b.abs()).powi(2)).sum::<S>().sqrt()
    }
}

/// Uniform rectangular grid: nodes `lo_j + k Δ_j`, `k = 0..n_j`, `Δ_j = (hi_j - lo_j) / n_j`.
///
/// Flat indices are row-major (last axis fastest). Every `n_j` is a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<S> {
    lo: Vec<S>,
    hi: Vec<S>,
    n: Vec<usize>,
}

impl<S: Scalar> GridSpec<S> {
    pub fn new(lo: Vec<S>, hi: Vec<S>, n: Vec<usize>) -> Result<Self> {
        let region = BoxRegion::new(lo, hi)?;
        Self::from_region(&region, n)
    }

    pub fn from_region(region: &BoxRegion<S>, n: Vec<usize>) -> Result<Self> {
        let d = region.dim();
        if n.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: n.len() });
        }
        if d == 0 || d > MAX_GRID_DIM {
            return Err(Error::param(format!("grids support dimensions 1..={MAX_GRID_DIM}, got {d}")));
        }
        if n.iter().any(|&k| k < 2 || !k.is_power_of_two()) {
            return Err(Error::param("grid counts must be powers of two (at least 2)"));
        }
        Ok(GridSpec { lo: region.lo.clone(), hi: region.hi.clone(), n })
    }

    /// Same resolution `n` on every axis.
    pub fn cube(region: &BoxRegion<S>, n: usize) -> Result<Self> {
        Self::from_region(region, vec![n; region.dim()])
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.n
    }

    pub fn lo(&self) -> &[S] {
        &self.lo
    }

    pub fn hi(&self) -> &[S] {
        &self.hi
    }

    pub fn region(&self) -> BoxRegion<S> {
        BoxRegion { lo: self.lo.clone(), hi: self.hi.clone() }
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> S {
        (self.hi[axis] - self.lo[axis]) / S::from_usize_(self.n[axis])
    }

    pub fn cell_volume(&self) -> S {
        (0..self.dim()).map(|j| self.spacing(j)).fold(S::one(), |a, b| a * b)
    }

    /// Spacing of the dual frequency grid along `axis`: `2π / (n Δ)`.
    pub fn freq_spacing(&self, axis: usize) -> S {
        S::TAU() / (self.hi[axis] - self.lo[axis])
    }

    pub fn freq_cell_volume(&self) -> S {
        (0..self.dim()).map(|j| self.freq_spacing(j)).fold(S::one(), |a, b| a * b)
    }

    /// Nyquist frequency `π / Δ` along `axis`.
    pub fn max_freq(&self, axis: usize) -> S {
        S::PI() / self.spacing(axis)
    }

    pub fn axis_nodes(&self, axis: usize) -> Vec<S> {
        let h = self.spacing(axis);
        (0..self.n[axis]).map(|k| self.lo[axis] + S::from_usize_(k) * h).collect()
    }

    /// Dual frequencies along `axis` in centered order: `2πk / (nΔ)`, `k = -n/2 .. n/2`.
    pub fn axis_freqs(&self, axis: usize) -> Vec<S> {
        let du = self.freq_spacing(axis);
        let half = self.n[axis] / 2;
        (0..self.n[axis]).map(|k| (S::from_usize_(k) - S::from_usize_(half)) * du).collect()
    }

    /// Multi-index of a flat index.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            idx[j] = flat % self.n[j];
            flat /= self.n[j];
        }
        idx
    }

    pub fn node(&self, flat: usize) -> Vec<S> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(j, &k)| self.lo[j] + S::from_usize_(k) * self.spacing(j))
            .collect()
    }

    /// Frequency at a flat index of the centered dual grid.
    pub fn freq(&self, flat: usize) -> Vec<S> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(j, &k)| (S::from_usize_(k) - S::from_usize_(self.n[j] / 2)) * self.freq_spacing(j))
            .collect()
    }

    /// Same box at twice the resolution on every axis.
    pub fn refined(&self) -> Self {
        GridSpec { lo: self.lo.clone(), hi: self.hi.clone(), n: self.n.iter().map(|k| 2 * k).collect() }
    }
}

/// Probability density sampled on a grid, normalized to unit discrete mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity<S> {
    spec: GridSpec<S>,
    values: Vec<S>,
    mass_defect: S,
    raw_mass: S,
}

impl<S: Scalar> GridDensity<S> {
    /// Wraps sampled density values; the Riemann mass must already be within
    /// [`MASS_TOLERANCE`] of one and is then normalized away.
    pub fn from_values(spec: GridSpec<S>, values: Vec<S>) -> Result<Self> {
        Self::normalized(spec, values, S::zero())
    }

    pub(crate) fn normalized(spec: GridSpec<S>, mut values: Vec<S>, mass_defect: S) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::DimensionMismatch { expected: spec.len(), found: values.len() });
        }
        if values.iter().any(|v| !(*v >= S::zero()) || !v.is_finite()) {
            return Err(Error::InvalidDistribution("density values must be finite and non-negative".into()));
        }
        let raw_mass = values.iter().copied().sum::<S>() * spec.cell_volume();
        let miss = (raw_mass - S::one()).abs();
        if miss > S::lit(MASS_TOLERANCE) {
            return Err(Error::Precision { defect: miss.f64(), limit: MASS_TOLERANCE });
        }
        let scale = S::one() / (values.iter().copied().sum::<S>() * spec.cell_volume());
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(GridDensity { spec, values, mass_defect, raw_mass })
    }

    pub fn spec(&self) -> &GridSpec<S> {
        &self.spec
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Probability mass lying outside the box (tail bound recorded at discretization).
    pub fn mass_defect(&self) -> S {
        self.mass_defect
    }

    /// Riemann mass before normalization.
    pub fn raw_mass(&self) -> S {
        self.raw_mass
    }

    /// Riemann sum of `g(x, f(x))` over the grid.
    pub fn integrate(&self, g: impl Fn(&[S], S) -> S) -> S {
        let acc: S = self.values.iter().enumerate().map(|(i, &v)| g(&self.spec.node(i), v)).sum();
        acc * self.spec.cell_volume()
    }
}

/// Signed real field on a grid (for example a weighted density difference).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<S> {
    pub spec: GridSpec<S>,
    pub values: Vec<S>,
}

impl<S: Scalar> GridField<S> {
    pub fn sup_abs(&self) -> S {
        self.values.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest `|v(x) - w(x)|` over the nodes.
    pub fn sup_distance(&self, other: &[S]) -> S {
        self.values.iter().zip(other).fold(S::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}
