//! Log-domain Sinkhorn iterations with ε-annealing, followed by rounding
//! onto the exact transport polytope.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Geometric regularization schedule, relative to the largest cost entry:
/// `ε` runs from `start · max c` down to `end · max c`, multiplying by `factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegSchedule<S> {
    pub start: S,
    pub end: S,
    pub factor: S,
    /// Iteration cap per stage.
    pub max_iter: usize,
    /// Stage ends once the L1 marginal violation drops below this.
    pub tol: S,
}

impl<S: Scalar> Default for RegSchedule<S> {
    fn default() -> Self {
        RegSchedule { start: S::one(), end: S::lit(5e-4), factor: S::lit(0.5), max_iter: 100_000, tol: S::tol(1e-5) }
    }
}

impl<S: Scalar> RegSchedule<S> {
    pub(crate) fn validate(&self) -> Result<()> {
        let ok = self.start > S::zero()
            && self.end > S::zero()
            && self.end <= self.start
            && self.factor > S::zero()
            && self.factor < S::one()
            && self.max_iter > 0
            && self.tol > S::zero();
        if !ok {
            return Err(Error::param("regularization schedule needs 0 < end <= start, 0 < factor < 1, positive caps"));
        }
        Ok(())
    }

    fn levels(&self, scale: S) -> Vec<S> {
        let mut out = Vec::new();
        let mut eps = self.start;
        while eps > self.end {
            out.push(eps * scale);
            eps *= self.factor;
        }
        out.push(self.end * scale);
        out
    }
}

pub(crate) struct EntropicSolution<S> {
    /// Dense row-major plan, exactly feasible up to rounding.
    pub plan: Vec<S>,
    pub primal: S,
    /// Lower bound from the c-transformed dual potentials.
    pub dual: S,
}

fn log_sum_exp<S: Scalar>(values: impl Iterator<Item = S> + Clone) -> S {
    let max = values.clone().fold(S::neg_infinity(), |a, b| a.max(b));
    if max == S::neg_infinity() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<S>().ln()
}

fn marginal_error<S: Scalar>(f: &[S], g: &[S], cost: &[S], a: &[S], eps: S) -> S {
    let n_cols = g.len();
    (0..f.len())
        .into_par_iter()
        .map(|i| {
            let row: S = (0..n_cols).map(|j| ((f[i] + g[j] - cost[i * n_cols + j]) / eps).exp()).sum();
            (row - a[i]).abs()
        })
        .sum()
}

pub(crate) fn solve<S: Scalar>(a: &[S], b: &[S], cost: &[S], schedule: &RegSchedule<S>) -> Result<EntropicSolution<S>> {
    schedule.validate()?;
    let (n, m) = (a.len(), b.len());
    let scale = cost.iter().fold(S::zero(), |acc, c| acc.max(c.abs())).max(S::min_positive_value());
    let log_a: Vec<S> = a.iter().map(|v| v.ln()).collect();
    let log_b: Vec<S> = b.iter().map(|v| v.ln()).collect();
    let mut f = vec![S::zero(); n];
    let mut g = vec![S::zero(); m];

    let levels = schedule.levels(scale);
    let last = levels.len() - 1;
    for (stage, &eps) in levels.iter().enumerate() {
        let mut converged = false;
        for _ in 0..schedule.max_iter {
            f = (0..n)
                .into_par_iter()
                .map(|i| {
                    let terms = (0..m).map(|j| (g[j] - cost[i * m + j]) / eps);
                    eps * log_a[i] - eps * log_sum_exp(terms)
                })
                .collect();
            g = (0..m)
                .into_par_iter()
                .map(|j| {
                    let terms = (0..n).map(|i| (f[i] - cost[i * m + j]) / eps);
                    eps * log_b[j] - eps * log_sum_exp(terms)
                })
                .collect();
            if marginal_error(&f, &g, cost, a, eps) <= schedule.tol {
                converged = true;
                break;
            }
        }
        if stage == last && !converged {
            return Err(Error::NotConverged { what: "Sinkhorn iterations", iterations: schedule.max_iter });
        }
    }
    let eps = levels[last];

    let mut plan: Vec<S> = (0..n * m).map(|k| ((f[k / m] + g[k % m] - cost[k]) / eps).exp()).collect();
    round_to_polytope(&mut plan, a, b);
    let primal: S = plan.iter().zip(cost).map(|(p, c)| *p * *c).sum();

    // c-transform of f gives a feasible dual pair
    let g_feasible: Vec<S> =
        (0..m).map(|j| (0..n).map(|i| cost[i * m + j] - f[i]).fold(S::infinity(), |acc, v| acc.min(v))).collect();
    let dual: S = a.iter().zip(&f).map(|(w, v)| *w * *v).sum::<S>()
        + b.iter().zip(&g_feasible).map(|(w, v)| *w * *v).sum::<S>();
    Ok(EntropicSolution { plan, primal, dual })
}

/// Scales rows then columns down to their targets and spreads the remaining
/// deficit as a rank-one correction, giving a plan with exact marginals.
fn round_to_polytope<S: Scalar>(plan: &mut [S], a: &[S], b: &[S]) {
    let (n, m) = (a.len(), b.len());
    for i in 0..n {
        let row: S = plan[i * m..(i + 1) * m].iter().copied().sum();
        if row > a[i] {
            let s = a[i] / row;
            plan[i * m..(i + 1) * m].iter_mut().for_each(|v| *v *= s);
        }
    }
    for j in 0..m {
        let col: S = (0..n).map(|i| plan[i * m + j]).sum();
        if col > b[j] {
            let s = b[j] / col;
            (0..n).for_each(|i| plan[i * m + j] *= s);
        }
    }
    let row_gap: Vec<S> =
        (0..n).map(|i| (a[i] - plan[i * m..(i + 1) * m].iter().copied().sum::<S>()).max(S::zero())).collect();
    let col_gap: Vec<S> = (0..m).map(|j| (b[j] - (0..n).map(|i| plan[i * m + j]).sum::<S>()).max(S::zero())).collect();
    let total: S = row_gap.iter().copied().sum();
    if total > S::zero() {
        for i in 0..n {
            for j in 0..m {
                plan[i * m + j] += row_gap[i] * col_gap[j] / total;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_gives_exact_marginals() {
        let a = [0.2f64, 0.3, 0.5];
        let b = [0.6, 0.4];
        let mut plan = vec![0.15, 0.1, 0.2, 0.05, 0.1, 0.3];
        round_to_polytope(&mut plan, &a, &b);
        for i in 0..3 {
            assert!((plan[2 * i] + plan[2 * i + 1] - a[i]).abs() < 1e-15);
        }
        for j in 0..2 {
            assert!(((0..3).map(|i| plan[2 * i + j]).sum::<f64>() - b[j]).abs() < 1e-15);
        }
        assert!(plan.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn brackets_the_optimum() {
        let a = [0.5, 0.5];
        let b = [0.5, 0.5];
        let cost = [0.0, 1.0, 1.0, 0.0];
        let sol = solve(&a, &b, &cost, &RegSchedule::default()).unwrap();
        assert!(sol.dual <= sol.primal + 1e-12);
        assert!(sol.primal < 1e-4);
    }

    #[test]
    fn schedule_validation() {
        let bad = RegSchedule { factor: 1.5, ..RegSchedule::<f64>::default() };
        assert!(bad.validate().is_err());
    }
}
