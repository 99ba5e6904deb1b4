use num_complex::Complex;

use super::analytic::{check_even, char_fn_unchecked, pure_partial_unchecked};
use super::transform::{complexify, forward, inverse};
use crate::distributions::{GaussianMixture, GridDensity, GridField, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Complex values on the frequency grid dual to a space grid, in centered order.
#[derive(Debug, Clone, PartialEq)]
pub struct CharGrid<S = f64> {
    spec: GridSpec<S>,
    values: Vec<Complex<S>>,
}

impl<S: Scalar> CharGrid<S> {
    pub fn new(spec: GridSpec<S>, values: Vec<Complex<S>>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::DimensionMismatch { expected: spec.len(), found: values.len() });
        }
        Ok(CharGrid { spec, values })
    }

    /// The space grid this frequency grid is dual to.
    pub fn spec(&self) -> &GridSpec<S> {
        &self.spec
    }

    pub fn values(&self) -> &[Complex<S>] {
        &self.values
    }

    pub fn freq(&self, flat: usize) -> Vec<S> {
        self.spec.freq(flat)
    }

    /// Flat index of the zero frequency.
    pub fn origin_index(&self) -> usize {
        self.spec.counts().iter().fold(0, |acc, &n| acc * n + n / 2)
    }

    /// Flat index of the node nearest to `u`, if `u` lies inside the band.
    pub fn nearest_index(&self, u: &[S]) -> Option<usize> {
        if u.len() != self.spec.dim() {
            return None;
        }
        let mut flat = 0;
        for (j, &uj) in u.iter().enumerate() {
            let n = self.spec.counts()[j];
            let k = (uj / self.spec.freq_spacing(j)).round().to_i64()? + (n / 2) as i64;
            if k < 0 || k >= n as i64 {
                return None;
            }
            flat = flat * n + k as usize;
        }
        Some(flat)
    }

    /// Exact discrete inverse back to the space grid.
    pub fn to_space(&self) -> Vec<Complex<S>> {
        inverse(&self.spec, &self.values)
    }

    /// Pointwise `φ(u) - ψ(u)`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::MismatchedGrids);
        }
        Ok(CharGrid {
            spec: self.spec.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }
}

/// Discrete characteristic function of a grid density.
pub fn char_fn_grid<S: Scalar>(f: &GridDensity<S>) -> CharGrid<S> {
    CharGrid { spec: f.spec().clone(), values: forward(f.spec(), &complexify(f.values())) }
}

/// Closed-form characteristic function sampled on the dual grid of `spec`.
pub fn char_fn_sampled<S: Scalar>(dist: &GaussianMixture<S>, spec: &GridSpec<S>) -> Result<CharGrid<S>> {
    if dist.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: dist.dim(), found: spec.dim() });
    }
    let values = (0..spec.len()).map(|i| char_fn_unchecked(dist, &spec.freq(i))).collect();
    Ok(CharGrid { spec: spec.clone(), values })
}

/// `Δ_p φ` on the dual grid, by transforming `(i x_j)^p f` summed over axes.
pub fn delta_p_char_grid<S: Scalar>(f: &GridDensity<S>, p: usize) -> Result<CharGrid<S>> {
    check_even(p)?;
    let spec = f.spec();
    let sign = if p % 4 == 0 { S::one() } else { -S::one() };
    let weighted: Vec<Complex<S>> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let s: S = spec.node(i).iter().map(|x| x.powi(p as i32)).sum();
            Complex::new(sign * s * v, S::zero())
        })
        .collect();
    Ok(CharGrid { spec: spec.clone(), values: forward(spec, &weighted) })
}

/// Closed-form `Δ_p φ` sampled on the dual grid of `spec`.
pub fn delta_p_char_sampled<S: Scalar>(dist: &GaussianMixture<S>, spec: &GridSpec<S>, p: usize) -> Result<CharGrid<S>> {
    check_even(p)?;
    if dist.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: dist.dim(), found: spec.dim() });
    }
    let values = (0..spec.len())
        .map(|i| {
            let u = spec.freq(i);
            (0..dist.dim()).map(|j| pure_partial_unchecked(dist, j, p, &u)).sum()
        })
        .collect();
    Ok(CharGrid { spec: spec.clone(), values })
}

/// `(f_a - f_b)(x) Σ_j x_j^p` on the nodes of `spec`, recovered by inverting
/// `(-i)^p Δ_p (φ_a - φ_b)` sampled from the closed forms.
pub fn weighted_diff_reconstruct<S: Scalar>(
    a: &GaussianMixture<S>,
    b: &GaussianMixture<S>,
    spec: &GridSpec<S>,
    p: usize,
) -> Result<GridField<S>> {
    if a.dim() != b.dim() {
        return Err(Error::MismatchedGrids);
    }
    let diff = delta_p_char_sampled(a, spec, p)?.difference(&delta_p_char_sampled(b, spec, p)?)?;
    // (-i)^p is real for even p
    let sign = if p % 4 == 0 { S::one() } else { -S::one() };
    let values = diff.to_space().iter().map(|v| v.re * sign).collect();
    Ok(GridField { spec: spec.clone(), values })
}

/// `(f_a - f_b)(x) Σ_j x_j^p` evaluated directly from the densities.
pub fn weighted_diff_direct<S: Scalar>(
    a: &GaussianMixture<S>,
    b: &GaussianMixture<S>,
    spec: &GridSpec<S>,
    p: usize,
) -> Result<GridField<S>> {
    if a.dim() != b.dim() || a.dim() != spec.dim() {
        return Err(Error::MismatchedGrids);
    }
    let values = (0..spec.len())
        .map(|i| {
            let x = spec.node(i);
            let w: S = x.iter().map(|v| v.powi(p as i32)).sum();
            (a.density_unchecked(&x) - b.density_unchecked(&x)) * w
        })
        .collect();
    Ok(GridField { spec: spec.clone(), values })
}

/// `(-iu)^α` at a frequency, with the Nyquist mode of odd-order axes zeroed.
pub(crate) fn derivative_symbol<S: Scalar>(spec: &GridSpec<S>, flat: usize, alpha: &[usize]) -> Complex<S> {
    let idx = spec.unflatten(flat);
    let mut acc = Complex::new(S::one(), S::zero());
    for (j, &k) in idx.iter().enumerate() {
        if alpha[j] == 0 {
            continue;
        }
        if k == 0 && alpha[j] % 2 == 1 {
            return Complex::new(S::zero(), S::zero());
        }
        let u = (S::from_usize_(k) - S::from_usize_(spec.counts()[j] / 2)) * spec.freq_spacing(j);
        acc = acc * Complex::new(S::zero(), -u).powu(alpha[j] as u32);
    }
    acc
}

/// `∂_α (f_a - f_b)` on the nodes of `spec`, from the closed-form characteristic functions.
pub fn derivative_diff<S: Scalar>(
    a: &GaussianMixture<S>,
    b: &GaussianMixture<S>,
    spec: &GridSpec<S>,
    alpha: &[usize],
) -> Result<GridField<S>> {
    if alpha.len() != spec.dim() || a.dim() != spec.dim() || b.dim() != spec.dim() {
        return Err(Error::MismatchedGrids);
    }
    let spectrum: Vec<Complex<S>> = (0..spec.len())
        .map(|i| {
            let u = spec.freq(i);
            (char_fn_unchecked(a, &u) - char_fn_unchecked(b, &u)) * derivative_symbol(spec, i, alpha)
        })
        .collect();
    let values = inverse(spec, &spectrum).iter().map(|v| v.re).collect();
    Ok(GridField { spec: spec.clone(), values })
}
