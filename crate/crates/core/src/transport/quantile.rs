use super::{DistanceResult, Method};
use crate::distributions::GaussianMixture;
use crate::error::{Error, Result};
use crate::quadrature::composite_gauss_legendre;
use crate::scalar::{normal_pdf, Scalar};

/// Score range `[-T, T]`; the mass outside is `2Φ(-10) ≈ 1.5e-23`.
const SCORE_RANGE: f64 = 10.0;
const MAX_PANELS: usize = 1 << 12;
const REL_TOL: f64 = 1e-12;

/// `W_q` between one-dimensional mixtures,
/// `(∫_0^1 |F_a^{-1}(u) - F_b^{-1}(u)|^q du)^{1/q}`.
///
/// Substituting `u = Φ(t)` turns the integral into a smooth one over the
/// real line against the normal density, evaluated by composite
/// Gauss–Legendre with panel doubling; the error estimate is the change
/// across the last doubling.
pub fn wasserstein_1d<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>, q: S) -> Result<DistanceResult<S>> {
    for dist in [a, b] {
        if dist.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: dist.dim() });
        }
    }
    if !(q >= S::one()) || !q.is_finite() {
        return Err(Error::param(format!("transport order must be at least 1, got {q}")));
    }
    if a == b {
        return Ok(DistanceResult { value: S::zero(), method: Method::QuantileQuadrature, err: S::zero() });
    }
    let t = S::lit(SCORE_RANGE);
    let integrand = |s: S| {
        let gap = (a.quantile_at_score(s) - b.quantile_at_score(s)).abs();
        gap.powf(q) * normal_pdf(s)
    };
    let mut panels = 8;
    let mut previous = composite_gauss_legendre(integrand, -t, t, panels).powf(q.recip());
    loop {
        panels *= 2;
        let value = composite_gauss_legendre(integrand, -t, t, panels).powf(q.recip());
        let err = (value - previous).abs();
        if err <= S::tol(REL_TOL) * value || panels >= MAX_PANELS {
            return Ok(DistanceResult { value, method: Method::QuantileQuadrature, err });
        }
        previous = value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;
    use approx::assert_relative_eq;

    fn n(m: f64, v: f64) -> GaussianMixture {
        GaussianMixture::normal(m, v).unwrap()
    }

    #[test]
    fn gaussian_closed_forms() {
        // W_2(N(m1, s1²), N(m2, s2²))² = (m1-m2)² + (s1-s2)²
        for &(m, s) in &[(0.01, 1.0), (0.5, 1.0), (0.0, 2.0), (1.5, 0.3)] {
            let w = wasserstein_1d(&n(0.0, 1.0), &n(m, s * s), 2.0).unwrap();
            let exact = (m * m + (1.0 - s) * (1.0 - s)).sqrt();
            assert!((w.value - exact).abs() < 1e-9, "{m} {s}: {} vs {exact}", w.value);
        }
        let w1 = wasserstein_1d(&n(0.0, 1.0), &n(0.7, 1.0), 1.0).unwrap();
        assert!((w1.value - 0.7).abs() < 1e-9);
    }

    #[test]
    fn mixture_matches_cdf_difference() {
        // W_1 = ∫ |F_a - F_b| dx
        let a = GaussianMixture::<f64>::mixture_1d(&[(0.4, -1.0, 0.5), (0.6, 1.5, 1.0)]).unwrap();
        let b = n(0.2, 1.3);
        let g = |x: f64| (a.cdf_1d(x) - b.cdf_1d(x)).abs();
        let crossings: Vec<f64> = (0..4000)
            .map(|i| -20.0 + i as f64 * 0.01)
            .filter(|&x| (a.cdf_1d(x) - b.cdf_1d(x)) * (a.cdf_1d(x + 0.01) - b.cdf_1d(x + 0.01)) <= 0.0)
            .collect();
        let oracle = quadrature::adaptive(g, -30.0, 30.0, &crossings, 1e-12, 1e-300, 4000).value;
        let w = wasserstein_1d(&a, &b, 1.0).unwrap();
        assert_relative_eq!(w.value, oracle, max_relative = 1e-6);
    }

    #[test]
    fn order_is_monotone() {
        let a = GaussianMixture::<f64>::mixture_1d(&[(0.5, -1.0, 0.5), (0.5, 2.0, 1.0)]).unwrap();
        let b = n(0.0, 2.0);
        let w1 = wasserstein_1d(&a, &b, 1.0).unwrap().value;
        let w2 = wasserstein_1d(&a, &b, 2.0).unwrap().value;
        let w3 = wasserstein_1d(&a, &b, 3.0).unwrap().value;
        assert!(w1 <= w2 + 1e-12 && w2 <= w3 + 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(wasserstein_1d(&n(0.0, 1.0), &n(1.0, 1.0), 0.5).is_err());
        let planar = GaussianMixture::<f64>::standard(2);
        assert!(matches!(wasserstein_1d(&planar, &planar, 2.0), Err(Error::DimensionMismatch { .. })));
    }
}
