//! Closed-form constants of the Fourier-side estimates.

use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::distributions::GaussianMixture;
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::spectral::PolyEnvelopeTable;

/// `γ_k = 2π^{d/2} / (Γ(d/2)(k - d))`, so that `∫_{|u|≥M} |u|^{-k} du = γ_k M^{d-k}`.
pub fn gamma_k<S: Scalar>(k: usize, d: usize) -> Result<S> {
    if d == 0 || k <= d {
        return Err(Error::param(format!("γ_k needs k > d (k={k}, d={d})")));
    }
    Ok(scalar::unit_sphere_area::<S>(d) / S::from_usize_(k - d))
}

/// `h_p = d^{p/2 - 1}`, the best constant in `|x|^p ≤ h_p Σ_j |x_j|^p` for even `p`.
pub fn h_p_const<S: Scalar>(p: usize, d: usize) -> Result<S> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::param(format!("h_p needs an even p >= 2, got {p}")));
    }
    Ok(S::from_usize_(d).powi(p as i32 / 2 - 1))
}

/// `θ_{l,p} = (l - d) l / ((l + 1)(l + p + d))`, exact in any numeric type.
pub fn theta<T: Num + FromPrimitive>(l: usize, p: usize, d: usize) -> Result<T> {
    if l <= d {
        return Err(Error::param(format!("θ needs l > d (l={l}, d={d})")));
    }
    let num = T::from_usize((l - d) * l).ok_or_else(|| Error::param("θ numerator not representable"))?;
    let den = T::from_usize((l + 1) * (l + p + d)).ok_or_else(|| Error::param("θ denominator not representable"))?;
    Ok(num / den)
}

fn check_epsilon<T: ToPrimitive>(eps: &T) -> Result<f64> {
    let e = eps.to_f64().unwrap_or(f64::NAN);
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::param(format!("ε must lie in (0, 1), got {e}")));
    }
    Ok(e)
}

/// `l = ⌈(d + √(1-ε)(p + d)) / (1 - √(1-ε))⌉`, at least `d + 1`, then raised
/// until `θ_{l,p} ≥ 1 - ε` holds exactly in `T`. Values within 1e-9 of an
/// integer are snapped to it before the ceiling.
pub fn choose_l<T>(eps: T, p: usize, d: usize) -> Result<usize>
where
    T: Num + FromPrimitive + ToPrimitive + PartialOrd + Clone,
{
    let e = check_epsilon(&eps)?;
    let s = (1.0 - e).sqrt();
    let x = (d as f64 + s * (p + d) as f64) / (1.0 - s);
    let nearest = x.round();
    let mut l = if (x - nearest).abs() <= 1e-9 * x.max(1.0) { nearest } else { x.ceil() } as usize;
    l = l.max(d + 1);
    let target = T::one() - eps;
    while theta::<T>(l, p, d)? < target {
        l += 1;
    }
    Ok(l)
}

/// Smallest `l > d + |α|` with `(l - d - |α|)/(l + 1) ≥ 1 - ε`: the
/// exponent of the derivative bound.
pub fn pointwise_l<T>(eps: T, alpha_order: usize, d: usize) -> Result<usize>
where
    T: Num + FromPrimitive + ToPrimitive + PartialOrd + Clone,
{
    let e = check_epsilon(&eps)?;
    let shift = d + alpha_order;
    let target = T::one() - eps;
    let ok = |l: usize| -> bool {
        let num = T::from_usize(l - shift).unwrap();
        let den = T::from_usize(l + 1).unwrap();
        num / den >= target
    };
    let mut l = (((shift + 1) as f64 - e) / e).floor().max((shift + 1) as f64) as usize;
    while l > shift + 1 && ok(l - 1) {
        l -= 1;
    }
    while !ok(l) {
        l += 1;
    }
    Ok(l)
}

/// Frequency cutoff `M = A^{-1/(l+1)}`; `M = 1` in the constant regime `A > 1`.
pub fn choose_m<S: Scalar>(a: S, l: usize) -> Result<S> {
    if !(a > S::zero()) {
        return Err(Error::param(format!("cutoff needs A > 0, got {a}")));
    }
    if a > S::one() {
        return Ok(S::one());
    }
    Ok(a.powf(-S::one() / S::from_usize_(l + 1)))
}

/// How `E^{1/q'}[(|ξ|^{k-1} + |η|^{k-1})^{q'}]` is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingBound {
    /// Minkowski's inequality: valid for every coupling, including the optimal one.
    Minkowski,
    /// Exact value when ξ and η are independent (integer `q'` only).
    Independent,
}

pub(crate) fn conjugate<S: Scalar>(q: S) -> Result<S> {
    if !(q > S::one()) || !q.is_finite() {
        return Err(Error::param(format!("q must exceed 1, got {q}")));
    }
    Ok(q / (q - S::one()))
}

/// `C°_0 = 1`; for `k ≥ 1`,
/// `C°_k = E^{1/q'}|ξ|^{kq'} + k 2^{k-1} E^{1/q'}[(|ξ|^{k-1} + |η|^{k-1})^{q'}]`.
pub fn c_circ<S: Scalar>(
    k: usize,
    q: S,
    xi: &GaussianMixture<S>,
    eta: &GaussianMixture<S>,
    coupling: CouplingBound,
) -> Result<S> {
    let qc = conjugate(q)?;
    if k == 0 {
        return Ok(S::one());
    }
    let kk = S::from_usize_(k);
    let lead = xi.abs_moment(kk * qc).powf(qc.recip());
    let low = S::from_usize_(k - 1);
    let mixed = match coupling {
        CouplingBound::Minkowski => {
            xi.abs_moment(low * qc).powf(qc.recip()) + eta.abs_moment(low * qc).powf(qc.recip())
        }
        CouplingBound::Independent => {
            if qc.fract() != S::zero() {
                return Err(Error::param(format!("independent coupling bound needs an integer q', got {qc}")));
            }
            let n = qc.to_u32().unwrap();
            let sum: S = (0..=n)
                .map(|j| {
                    scalar::binomial::<S>(n, j)
                        * xi.abs_moment(low * S::from_u32(j).unwrap())
                        * eta.abs_moment(low * S::from_u32(n - j).unwrap())
                })
                .sum();
            sum.powf(qc.recip())
        }
    };
    Ok(lead + kk * S::lit(2.0).powi(k as i32 - 1) * mixed)
}

/// `C°_k` from family-wide moment bounds `a(m) ≥ E|X|^m` (Minkowski form).
pub(crate) fn c_circ_uniform<S: Scalar>(k: usize, q: S, a: &mut impl FnMut(S) -> S) -> Result<S> {
    let qc = conjugate(q)?;
    if k == 0 {
        return Ok(S::one());
    }
    let kk = S::from_usize_(k);
    let lead = a(kk * qc).powf(qc.recip());
    let mixed = S::lit(2.0) * a(S::from_usize_(k - 1) * qc).powf(qc.recip());
    Ok(lead + kk * S::lit(2.0).powi(k as i32 - 1) * mixed)
}

/// `2 h_p d / (2π)^d` for even `p ≥ 2`, and `2 / (2π)^d` for `p = 0`.
fn hat_prefactor<S: Scalar>(p: usize, d: usize) -> Result<S> {
    let base = S::lit(2.0) / S::TAU().powi(d as i32);
    if p == 0 {
        return Ok(base);
    }
    Ok(base * h_p_const::<S>(p, d)? * S::from_usize_(d))
}

/// `Ĉ_{l,p} = (2 h_p d / (2π)^d)(C°_p V_d + b_{p,l} γ_l)`, with `V_d` the
/// unit-ball volume and `b_{p,l}` read from a frequency-side table.
pub fn hat_c<S: Scalar>(l: usize, p: usize, c_circ_p: S, b_table: &PolyEnvelopeTable<S>, d: usize) -> Result<S> {
    hat_c_value(l, p, c_circ_p, b_table.require(p, l)?, d)
}

pub(crate) fn hat_c_value<S: Scalar>(l: usize, p: usize, c_circ_p: S, b_pl: S, d: usize) -> Result<S> {
    let vd = scalar::unit_ball_volume::<S>(d);
    Ok(hat_prefactor::<S>(p, d)? * (c_circ_p * vd + b_pl * gamma_k::<S>(l, d)?))
}

/// `C̄_{l,p} = Ĉ_{l,p} V_d + 2 (a_{0,2p} a_{0,2l})^{1/2}`, the square root
/// taken in log scale so that very high moments do not overflow.
pub fn bar_c<S: Scalar>(hat: S, a_2p: S, a_2l: S, d: usize) -> S {
    let root = ((a_2p.ln() + a_2l.ln()) / S::lit(2.0)).exp();
    hat * scalar::unit_ball_volume::<S>(d) + S::lit(2.0) * root
}
