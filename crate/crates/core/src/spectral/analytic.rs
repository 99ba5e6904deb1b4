//! Closed-form characteristic functions of Gaussian mixtures and their pure
//! partial derivatives.

use num_complex::Complex;

use crate::distributions::{Component, GaussianMixture};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn exponent<S: Scalar>(c: &Component<S>, u: &[S]) -> Complex<S> {
    let d = u.len();
    let mut quad = S::zero();
    let mut phase = S::zero();
    for i in 0..d {
        phase += u[i] * c.mean[i];
        for j in 0..d {
            quad += u[i] * c.cov[i][j] * u[j];
        }
    }
    Complex::new(-quad / S::lit(2.0), phase)
}

/// `φ(u) = Σ w exp(i⟨u, m⟩ - uᵀΣu / 2)`.
pub fn char_fn<S: Scalar>(dist: &GaussianMixture<S>, u: &[S]) -> Result<Complex<S>> {
    if u.len() != dist.dim() {
        return Err(Error::DimensionMismatch { expected: dist.dim(), found: u.len() });
    }
    Ok(char_fn_unchecked(dist, u))
}

pub(crate) fn char_fn_unchecked<S: Scalar>(dist: &GaussianMixture<S>, u: &[S]) -> Complex<S> {
    dist.components().iter().map(|c| exponent(c, u).exp() * c.weight).sum()
}

/// Coefficients `c_r` with `∂^k e^g = e^g Σ_r c_r a^r` for a quadratic `g`
/// whose first derivative along the axis is `a` and second derivative is `b`.
fn hermite_coefficients<S: Scalar>(k: usize, b: S) -> Vec<S> {
    let mut c = vec![S::zero(); k + 1];
    c[0] = S::one();
    for step in 0..k {
        let mut next = vec![S::zero(); k + 1];
        for r in 0..=step + 1 {
            let raised = if r >= 1 { c[r - 1] } else { S::zero() };
            let lowered = if r < step { b * S::from_usize_(r + 1) * c[r + 1] } else { S::zero() };
            next[r] = raised + lowered;
        }
        c = next;
    }
    c
}

/// `∂_j^k φ(u)`, evaluated in closed form.
pub fn pure_partial<S: Scalar>(dist: &GaussianMixture<S>, axis: usize, k: usize, u: &[S]) -> Result<Complex<S>> {
    if u.len() != dist.dim() {
        return Err(Error::DimensionMismatch { expected: dist.dim(), found: u.len() });
    }
    if axis >= dist.dim() {
        return Err(Error::param(format!("axis {axis} out of range")));
    }
    Ok(pure_partial_unchecked(dist, axis, k, u))
}

pub(crate) fn pure_partial_unchecked<S: Scalar>(dist: &GaussianMixture<S>, axis: usize, k: usize, u: &[S]) -> Complex<S> {
    dist.components()
        .iter()
        .map(|c| {
            let sigma_u: S = (0..u.len()).map(|i| c.cov[axis][i] * u[i]).sum();
            let a = Complex::new(-sigma_u, c.mean[axis]);
            let coeffs = hermite_coefficients(k, -c.cov[axis][axis]);
            let mut poly = Complex::new(S::zero(), S::zero());
            for coef in coeffs.iter().rev() {
                poly = poly * a + *coef;
            }
            exponent(c, u).exp() * poly * c.weight
        })
        .sum()
}

/// `Δ_p φ(u) = Σ_j ∂_j^p φ(u)` for even `p ≥ 2`.
pub fn delta_p_char<S: Scalar>(dist: &GaussianMixture<S>, u: &[S], p: usize) -> Result<Complex<S>> {
    check_even(p)?;
    if u.len() != dist.dim() {
        return Err(Error::DimensionMismatch { expected: dist.dim(), found: u.len() });
    }
    Ok((0..dist.dim()).map(|j| pure_partial_unchecked(dist, j, p, u)).sum())
}

pub(crate) fn check_even(p: usize) -> Result<()> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::param(format!("the Δ_p operator needs an even p >= 2, got {p}")));
    }
    Ok(())
}
