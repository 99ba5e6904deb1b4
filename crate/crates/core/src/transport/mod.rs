//! Weighted total variation, Wasserstein distances, and optimal transport.

mod quantile;
mod rho;
mod simplex;
mod sinkhorn;

use serde::{Deserialize, Serialize};

use crate::distributions::{AtomSet, GaussianMixture};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use quantile::wasserstein_1d;
pub use rho::{rho_p, rho_p_grid, tv_mass, tv_mass_grid, RHO_TOLERANCE};
pub use sinkhorn::RegSchedule;

/// Largest `n_a · n_b` accepted by the exact solver.
pub const EXACT_OT_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    QuantileQuadrature,
    GridQuadrature,
    ExactOt,
    EntropicOt,
    /// Exact transport between two independent i.i.d. samples per law.
    SampledOt,
}

/// A computed distance together with the method that produced it and an
/// error estimate in the same units as `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult<S> {
    pub value: S,
    pub method: Method,
    pub err: S,
}

impl<S: Scalar> DistanceResult<S> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distance result serializes")
    }
}

/// A coupling of two atom sets, stored as its positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<S> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, S)>,
}

impl<S: Scalar> TransportPlan<S> {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// `(row, column, mass)` triples with positive mass.
    pub fn entries(&self) -> &[(usize, usize, S)] {
        &self.entries
    }

    pub fn row_sums(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.rows];
        self.entries.iter().for_each(|&(i, _, m)| out[i] += m);
        out
    }

    pub fn col_sums(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.cols];
        self.entries.iter().for_each(|&(_, j, m)| out[j] += m);
        out
    }

    /// `Σ π_ij c_ij` for a row-major cost matrix.
    pub fn cost(&self, cost: &[S]) -> S {
        self.entries.iter().map(|&(i, j, m)| m * cost[i * self.cols + j]).sum()
    }
}

/// Row-major matrix of `|x_i - y_j|^q`.
pub fn cost_matrix<S: Scalar>(a: &AtomSet<S>, b: &AtomSet<S>, q: S) -> Result<Vec<S>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (x, _) in a.atoms() {
        for (y, _) in b.atoms() {
            let d2: S = x.iter().zip(y).map(|(u, v)| (*u - *v) * (*u - *v)).sum();
            out.push(d2.sqrt().powf(q));
        }
    }
    Ok(out)
}

fn check_order<S: Scalar>(q: S) -> Result<()> {
    if !(q >= S::one()) || !q.is_finite() {
        return Err(Error::param(format!("transport order must be at least 1, got {q}")));
    }
    Ok(())
}

fn check_size<S: Scalar>(a: &AtomSet<S>, b: &AtomSet<S>) -> Result<()> {
    let size = a.len() * b.len();
    if size > EXACT_OT_LIMIT {
        return Err(Error::SizeLimit { size, limit: EXACT_OT_LIMIT });
    }
    Ok(())
}

/// Exact `W_q` between atom sets by the network simplex method.
pub fn ot_exact<S: Scalar>(a: &AtomSet<S>, b: &AtomSet<S>, q: S) -> Result<(DistanceResult<S>, TransportPlan<S>)> {
    check_order(q)?;
    check_size(a, b)?;
    let cost = cost_matrix(a, b, q)?;
    let sol = simplex::solve(&a.masses(), &b.masses(), &cost)?;
    let value = sol.cost.max(S::zero()).powf(q.recip());
    let plan = TransportPlan { rows: a.len(), cols: b.len(), entries: sol.entries };
    Ok((DistanceResult { value, method: Method::ExactOt, err: S::zero() }, plan))
}

/// Entropic `W_q`: the value is the cost of the Sinkhorn plan after rounding
/// onto the exact coupling set, so it never undershoots the true distance;
/// the error estimate is the gap to the dual lower bound.
pub fn ot_entropic<S: Scalar>(
    a: &AtomSet<S>,
    b: &AtomSet<S>,
    q: S,
    schedule: &RegSchedule<S>,
) -> Result<(DistanceResult<S>, TransportPlan<S>)> {
    check_order(q)?;
    check_size(a, b)?;
    let cost = cost_matrix(a, b, q)?;
    let sol = sinkhorn::solve(&a.masses(), &b.masses(), &cost, schedule)?;
    let value = sol.primal.max(S::zero()).powf(q.recip());
    let lower = sol.dual.max(S::zero()).powf(q.recip());
    let cols = b.len();
    let entries = sol
        .plan
        .iter()
        .enumerate()
        .filter(|(_, m)| **m > S::zero())
        .map(|(k, m)| (k / cols, k % cols, *m))
        .collect();
    let plan = TransportPlan { rows: a.len(), cols, entries };
    Ok((DistanceResult { value, method: Method::EntropicOt, err: (value - lower).max(S::zero()) }, plan))
}

/// `W_q` between mixtures: quantile quadrature in one dimension, otherwise
/// exact transport between two independent pairs of `samples`-point draws
/// (value is their mean, error their half-difference).
pub fn wasserstein<S: Scalar>(
    a: &GaussianMixture<S>,
    b: &GaussianMixture<S>,
    q: S,
    samples: usize,
    seed: u64,
) -> Result<DistanceResult<S>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if a.dim() == 1 {
        return wasserstein_1d(a, b, q);
    }
    check_order(q)?;
    let mut values = [S::zero(); 2];
    for (k, v) in values.iter_mut().enumerate() {
        let base = seed.wrapping_mul(4).wrapping_add(2 * k as u64);
        let (sa, sb) = (a.sample(samples, base)?, b.sample(samples, base + 1)?);
        *v = ot_exact(&sa, &sb, q)?.0.value;
    }
    let two = S::lit(2.0);
    Ok(DistanceResult {
        value: (values[0] + values[1]) / two,
        method: Method::SampledOt,
        err: (values[0] - values[1]).abs() / two,
    })
}

/// Fortet–Mourier upper bound `min(2, W_1)` for one-dimensional mixtures.
pub fn fm_upper<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>) -> Result<DistanceResult<S>> {
    Ok(cap_at_two(wasserstein_1d(a, b, S::one())?))
}

/// Fortet–Mourier upper bound `min(2, W_1)` for atom sets.
pub fn fm_upper_atoms<S: Scalar>(a: &AtomSet<S>, b: &AtomSet<S>) -> Result<DistanceResult<S>> {
    Ok(cap_at_two(ot_exact(a, b, S::one())?.0))
}

fn cap_at_two<S: Scalar>(w1: DistanceResult<S>) -> DistanceResult<S> {
    let two = S::lit(2.0);
    if w1.value >= two {
        DistanceResult { value: two, err: S::zero(), ..w1 }
    } else {
        w1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_distances() {
        let a = AtomSet::<f64>::dirac(vec![0.0]);
        let b = AtomSet::dirac(vec![3.0]);
        let (w, plan) = ot_exact(&a, &b, 2.0).unwrap();
        assert!((w.value - 3.0).abs() < 1e-14);
        assert_eq!(plan.entries(), &[(0, 0, 1.0)]);
        assert_eq!(fm_upper_atoms(&a, &b).unwrap().value, 2.0);
        let c = AtomSet::dirac(vec![0.5]);
        assert!((fm_upper_atoms(&a, &c).unwrap().value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fm_caps_far_mixtures() {
        let a = GaussianMixture::<f64>::normal(0.0, 1.0).unwrap();
        let b = GaussianMixture::normal(5.0, 1.0).unwrap();
        assert_eq!(fm_upper(&a, &b).unwrap().value, 2.0);
    }

    #[test]
    fn size_limit() {
        let many: Vec<Vec<f64>> = (0..1001).map(|i| vec![i as f64]).collect();
        let a = AtomSet::uniform(1, many.clone()).unwrap();
        let b = AtomSet::uniform(1, many).unwrap();
        assert!(matches!(ot_exact(&a, &b, 2.0), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn one_dimensional_sorted_coupling() {
        // in one dimension the monotone coupling is optimal
        let xs = [0.3, -1.2, 2.5, 0.9, -0.4];
        let ys = [1.1, -0.7, 0.2, 3.0, -2.0];
        let a = AtomSet::uniform(1, xs.iter().map(|&x| vec![x]).collect()).unwrap();
        let b = AtomSet::uniform(1, ys.iter().map(|&y| vec![y]).collect()).unwrap();
        let (mut sx, mut sy) = (xs.to_vec(), ys.to_vec());
        sx.sort_by(f64::total_cmp);
        sy.sort_by(f64::total_cmp);
        let sorted: f64 = sx.iter().zip(&sy).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / 5.0;
        let (w, _) = ot_exact(&a, &b, 2.0).unwrap();
        assert!((w.value - sorted.sqrt()).abs() < 1e-12);
        let (e, _) = ot_entropic(&a, &b, 2.0, &RegSchedule::default()).unwrap();
        assert!(e.value >= w.value - 1e-12);
        assert!(e.value <= w.value * 1.01);
    }

    #[test]
    fn json_form() {
        let r = DistanceResult { value: 0.25, method: Method::ExactOt, err: 0.0 };
        assert_eq!(r.to_json(), r#"{"value":0.25,"method":"exact-ot","err":0.0}"#);
    }
}
