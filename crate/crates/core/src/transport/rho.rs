use rayon::prelude::*;

use super::{DistanceResult, Method};
use crate::distributions::{BoxRegion, GaussianMixture, GridDensity, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default relative tolerance for grid quadrature of ρ_p.
pub const RHO_TOLERANCE: f64 = 1e-6;

fn weight<S: Scalar>(x: &[S], p: S) -> S {
    if p == S::zero() {
        return S::lit(2.0);
    }
    let r2: S = x.iter().map(|v| *v * *v).sum();
    S::one() + r2.powf(p / S::lit(2.0))
}

fn check_power<S: Scalar>(p: S) -> Result<()> {
    if !(p >= S::zero()) || !p.is_finite() {
        return Err(Error::param(format!("weight power must be finite and non-negative, got {p}")));
    }
    Ok(())
}

/// `Σ V(x) |f_a(x) - f_b(x)| Δ^d` over `spec`, with `V = 1 + |x|^p` or `V = 1`.
fn riemann<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>, spec: &GridSpec<S>, p: Option<S>) -> S {
    let sum: S = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let x = spec.node(i);
            let diff = (a.density_unchecked(&x) - b.density_unchecked(&x)).abs();
            match p {
                Some(p) => weight(&x, p) * diff,
                None => diff,
            }
        })
        .sum();
    sum * spec.cell_volume()
}

/// Box holding all but a negligible part of both laws, with room for the weight.
fn common_box<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>, p: S) -> Result<BoxRegion<S>> {
    let k = S::lit(11.0) + S::lit(2.0) * p.sqrt();
    a.sigma_box(k).union(&b.sigma_box(k))
}

fn start_and_cap(d: usize) -> (usize, usize) {
    match d {
        1 => (1 << 12, 1 << 18),
        2 => (1 << 7, 1 << 11),
        _ => (1 << 5, 1 << 7),
    }
}

fn grid_quadrature<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>, p: Option<S>, tol: S) -> Result<DistanceResult<S>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if a == b {
        return Ok(DistanceResult { value: S::zero(), method: Method::GridQuadrature, err: S::zero() });
    }
    let region = common_box(a, b, p.unwrap_or(S::zero()))?;
    let (mut n, cap) = start_and_cap(a.dim());
    let mut previous = riemann(a, b, &GridSpec::cube(&region, n)?, p);
    loop {
        n *= 2;
        let value = riemann(a, b, &GridSpec::cube(&region, n)?, p);
        let err = (value - previous).abs();
        if err <= tol * value.abs() || err <= S::min_positive_value() {
            return Ok(DistanceResult { value, method: Method::GridQuadrature, err });
        }
        if n >= cap {
            return Err(Error::Unresolved { err: err.f64(), tol: (tol * value).f64() });
        }
        previous = value;
    }
}

/// `ρ_p(a, b) = ∫ (1 + |x|^p) |f_a - f_b| dx` for two mixtures, by grid
/// quadrature on a common box, refined until two successive resolutions
/// agree to `tol` (relative); the error estimate is that difference.
pub fn rho_p<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>, p: S, tol: S) -> Result<DistanceResult<S>> {
    check_power(p)?;
    grid_quadrature(a, b, Some(p), tol)
}

/// `∫ |f_a - f_b| dx` (twice the usual total-variation distance).
pub fn tv_mass<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>, tol: S) -> Result<DistanceResult<S>> {
    grid_quadrature(a, b, None, tol)
}

fn grid_sum<S: Scalar>(a: &GridDensity<S>, b: &GridDensity<S>, p: Option<S>, stride: usize) -> S {
    let spec = a.spec();
    let mut sum = S::zero();
    for i in 0..spec.len() {
        if stride > 1 && spec.unflatten(i).iter().any(|k| k % stride != 0) {
            continue;
        }
        let x = spec.node(i);
        let diff = (a.values()[i] - b.values()[i]).abs();
        sum += match p {
            Some(p) => weight(&x, p) * diff,
            None => diff,
        };
    }
    let scale = S::from_usize_(stride).powi(spec.dim() as i32);
    sum * spec.cell_volume() * scale
}

fn grid_pair<S: Scalar>(a: &GridDensity<S>, b: &GridDensity<S>, p: Option<S>) -> Result<DistanceResult<S>> {
    if a.spec() != b.spec() {
        return Err(Error::MismatchedGrids);
    }
    let value = grid_sum(a, b, p, 1);
    let coarse = grid_sum(a, b, p, 2);
    Ok(DistanceResult { value, method: Method::GridQuadrature, err: (value - coarse).abs() })
}

/// ρ_p between two densities on the same grid; the error estimate compares
/// against the sum over every other node.
pub fn rho_p_grid<S: Scalar>(a: &GridDensity<S>, b: &GridDensity<S>, p: S) -> Result<DistanceResult<S>> {
    check_power(p)?;
    grid_pair(a, b, Some(p))
}

pub fn tv_mass_grid<S: Scalar>(a: &GridDensity<S>, b: &GridDensity<S>) -> Result<DistanceResult<S>> {
    grid_pair(a, b, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;
    use crate::scalar::normal_cdf;
    use approx::assert_relative_eq;

    fn n(m: f64, v: f64) -> GaussianMixture {
        GaussianMixture::normal(m, v).unwrap()
    }

    #[test]
    fn identical_inputs() {
        let a = n(0.3, 2.0);
        assert_eq!(rho_p(&a, &a, 2.0, 1e-6).unwrap().value, 0.0);
        assert_eq!(tv_mass(&a, &a, 1e-6).unwrap().value, 0.0);
    }

    #[test]
    fn translate_tv_closed_form() {
        let tv = tv_mass(&n(0.0, 1.0), &n(1.0, 1.0), 1e-8).unwrap();
        let exact = 2.0 * (2.0 * normal_cdf(0.5) - 1.0);
        assert!((tv.value - exact).abs() < 1e-8, "{} vs {exact}", tv.value);
        let rho0 = rho_p(&n(0.0, 1.0), &n(1.0, 1.0), 0.0, 1e-8).unwrap();
        assert_relative_eq!(rho0.value, 2.0 * exact, max_relative = 1e-8);
    }

    #[test]
    fn scale_tv_matches_crossing_formula() {
        // densities of N(0,1), N(0,4) cross at ±x*, x*² = 8 ln 2 / 3
        let x = (8.0 * 2f64.ln() / 3.0).sqrt();
        let inner = (2.0 * normal_cdf(x) - 1.0) - (2.0 * normal_cdf(x / 2.0) - 1.0);
        let exact = 2.0 * inner;
        let tv = tv_mass(&n(0.0, 1.0), &n(0.0, 4.0), 1e-8).unwrap();
        assert!((tv.value - exact).abs() < 1e-7);
    }

    #[test]
    fn weighted_translate_matches_adaptive_oracle() {
        let (a, b) = (n(0.0, 1.0), n(1.0, 1.0));
        let g = |x: f64| (1.0 + x * x) * (a.density(&[x]).unwrap() - b.density(&[x]).unwrap()).abs();
        let oracle = quadrature::adaptive(g, -40.0, 40.0, &[0.5], 1e-13, 1e-300, 5000).value;
        let v = rho_p(&a, &b, 2.0, 1e-8).unwrap();
        assert!((v.value - oracle).abs() < 1e-6);
        assert!(v.value >= tv_mass(&a, &b, 1e-8).unwrap().value);
    }

    #[test]
    fn grid_version_agrees() {
        let (a, b) = (n(0.0, 1.0), n(0.5, 1.0));
        let spec = GridSpec::<f64>::new(vec![-14.0], vec![14.0], vec![1 << 14]).unwrap();
        let (fa, fb) = (a.discretize(&spec).unwrap(), b.discretize(&spec).unwrap());
        let g = rho_p_grid(&fa, &fb, 2.0).unwrap();
        let m = rho_p(&a, &b, 2.0, 1e-8).unwrap();
        assert!((g.value - m.value).abs() < 1e-6);
        assert!(g.err < 1e-5);
        let other = GridSpec::<f64>::new(vec![-14.0], vec![14.0], vec![1 << 13]).unwrap();
        assert!(matches!(rho_p_grid(&fa, &b.discretize(&other).unwrap(), 2.0), Err(Error::MismatchedGrids)));
    }

    #[test]
    fn symmetric_and_two_dimensional() {
        let a = GaussianMixture::<f64>::gaussian(vec![0.0, 0.0], vec![vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap();
        let b = GaussianMixture::gaussian(vec![0.4, -0.1], vec![vec![1.2, 0.0], vec![0.0, 0.9]]).unwrap();
        let ab = rho_p(&a, &b, 2.0, 1e-6).unwrap();
        let ba = rho_p(&b, &a, 2.0, 1e-6).unwrap();
        assert!((ab.value - ba.value).abs() <= 1e-10);
        assert!(ab.value > tv_mass(&a, &b, 1e-6).unwrap().value);
    }
}
