use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::bounds::{
    lemma1_bound, lemma2_bound, measure_a, pointwise_bound, pointwise_sup, BoundParams, Branch, FamilyBounds,
    DEFAULT_EXP_RATE,
};
use crate::distributions::GaussianMixture;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::transport::{rho_p, tv_mass, Method, RHO_TOLERANCE};

/// Largest fraction of rows allowed to fail before the sweep as a whole fails.
pub const MAX_FAILED_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<S> {
    pub h: S,
    /// `W_q` between the reference and perturbed laws.
    #[serde(rename = "A")]
    pub a: S,
    pub a_err: S,
    pub a_method: Method,
    pub rho_p: S,
    pub tv: S,
    pub rhs1: S,
    pub rhs2: S,
    pub branch2: Branch,
    pub psup: S,
    pub prhs: S,
    pub ok1: bool,
    pub ok2: bool,
    pub okp: bool,
}

impl<S: Scalar> SweepRow<S> {
    pub fn all_satisfied(&self) -> bool {
        self.ok1 && self.ok2 && self.okp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure<S> {
    pub h: S,
    pub error: String,
}

/// Least-squares line through `(ln A, ln ρ_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit<S> {
    pub slope: S,
    pub intercept: S,
    pub stderr: S,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata<S> {
    pub seed: u64,
    pub exp_rate: S,
    pub alpha: Vec<usize>,
    pub envelope_nodes: usize,
    pub family_members: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport<S> {
    pub scenario: String,
    pub params: BoundParams<S>,
    pub rows: Vec<SweepRow<S>>,
    pub failures: Vec<RowFailure<S>>,
    /// `None` when fewer than three rows have `0 < A < 1`.
    pub fit: Option<RateFit<S>>,
    pub metadata: RunMetadata<S>,
}

impl<S: Scalar> SweepReport<S> {
    pub fn all_satisfied(&self) -> bool {
        self.rows.iter().all(SweepRow::all_satisfied)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Ordinary least squares of `ln y` on `ln x` over the pairs with `0 < x < 1`
/// and `y > 0`; the standard error comes from the residual variance.
pub fn fit_rate<S: Scalar>(pairs: &[(S, S)]) -> Result<RateFit<S>> {
    let pts: Vec<(S, S)> = pairs
        .iter()
        .filter(|(x, y)| *x > S::zero() && *x < S::one() && *y > S::zero())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::TooFewRows(n));
    }
    let nn = S::from_usize_(n);
    let mx = pts.iter().map(|p| p.0).sum::<S>() / nn;
    let my = pts.iter().map(|p| p.1).sum::<S>() / nn;
    let sxx: S = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: S = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > S::zero()) {
        return Err(Error::param("rate fit needs at least two distinct A values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: S = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / S::from_usize_(n - 2) / sxx).sqrt();
    Ok(RateFit { slope, intercept, stderr, points: n })
}

fn run_row<S: Scalar>(
    sc: &Scenario<S>,
    reference: &GaussianMixture<S>,
    perturbed: &GaussianMixture<S>,
    family: &FamilyBounds<S>,
    alpha: &[usize],
    h: S,
    index: usize,
) -> Result<SweepRow<S>> {
    let params = &sc.params;
    let tol = S::tol(RHO_TOLERANCE);
    let dist = measure_a(reference, perturbed, params.q, sc.seed.wrapping_add(index as u64))?;
    let a = dist.value;
    let rho = rho_p(reference, perturbed, params.p, tol)?.value;
    let tv = tv_mass(reference, perturbed, tol)?.value;
    let one = lemma1_bound(params, family, a)?;
    let two = lemma2_bound(params, family, a)?;
    let point = pointwise_bound(params, family, alpha, a)?;
    let psup = pointwise_sup(reference, perturbed, params.p, alpha)?;
    Ok(SweepRow {
        h,
        a,
        a_err: dist.err,
        a_method: dist.method,
        rho_p: rho,
        tv,
        rhs1: one.rhs,
        rhs2: two.rhs,
        branch2: two.branch,
        psup,
        prhs: point.rhs,
        ok1: rho <= one.rhs,
        ok2: rho <= two.rhs,
        okp: psup <= point.rhs,
    })
}

/// Runs every scale of the scenario. Envelope and moment constants are taken
/// over the reference law and all perturbed laws at once, so every row uses
/// the same constants.
pub fn run_sweep<S: Scalar>(sc: &Scenario<S>) -> Result<SweepReport<S>> {
    sc.validate()?;
    let alpha = sc.alpha();
    let reference = sc.reference()?;
    let laws: Vec<Result<GaussianMixture<S>>> = sc.h.iter().map(|h| sc.perturbed(*h)).collect();
    let mut members = vec![reference.clone()];
    members.extend(laws.iter().filter_map(|l| l.as_ref().ok().cloned()));
    let (orders, powers) = sc.params.coverage(alpha.iter().sum())?;
    let exp_rate = sc.exp_rate.unwrap_or(S::lit(DEFAULT_EXP_RATE));
    let family = FamilyBounds::new(members, orders, powers, exp_rate)?;

    let outcomes: Vec<Result<SweepRow<S>>> = laws
        .par_iter()
        .enumerate()
        .map(|(i, law)| {
            let law = law.as_ref().map_err(|e| Error::InvalidDistribution(e.to_string()))?;
            run_row(sc, &reference, law, &family, &alpha, sc.h[i], i)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (h, outcome) in sc.h.iter().zip(outcomes) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(RowFailure { h: *h, error: e.to_string() }),
        }
    }
    let total = sc.h.len();
    if failures.len() as f64 > MAX_FAILED_FRACTION * total as f64 {
        return Err(Error::SweepFailed { failed: failures.len(), total });
    }
    let pairs: Vec<(S, S)> = rows.iter().map(|r| (r.a, r.rho_p)).collect();
    let fit = fit_rate(&pairs).ok();
    Ok(SweepReport {
        scenario: sc.name.clone(),
        params: sc.params,
        rows,
        failures,
        fit,
        metadata: RunMetadata {
            seed: sc.seed,
            exp_rate,
            alpha,
            envelope_nodes: family.frequency_grid().counts()[0],
            family_members: family.members().len(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fit_recovers_power_laws() {
        let xs = [0.5f64, 0.1, 0.01, 1e-3, 1e-4];
        let fit = fit_rate(&xs.iter().map(|&x| (x, x.powf(0.9))).collect::<Vec<_>>()).unwrap();
        assert!((fit.slope - 0.9).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
        let fit = fit_rate(&xs.iter().map(|&x| (x, 3.0 * x)).collect::<Vec<_>>()).unwrap();
        assert_relative_eq!(fit.slope, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 3f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn fit_needs_three_rows_below_one() {
        let pairs = [(0.5f64, 0.5), (0.1, 0.1), (2.0, 2.0), (1.0, 1.0)];
        assert!(matches!(fit_rate(&pairs), Err(Error::TooFewRows(2))));
    }

    #[test]
    fn fit_stderr_matches_residuals() {
        // residuals ±δ around slope 2 on three points
        let d = 0.01f64;
        let xs = [0.1f64, 0.01, 0.001];
        let ys = [2.0 * xs[0].ln() + d, 2.0 * xs[1].ln() - 2.0 * d, 2.0 * xs[2].ln() + d];
        let pairs: Vec<(f64, f64)> = xs.iter().zip(&ys).map(|(x, y)| (*x, y.exp())).collect();
        let fit = fit_rate(&pairs).unwrap();
        assert_relative_eq!(fit.slope, 2.0, max_relative = 1e-12);
        let sxx: f64 = xs.iter().map(|x| (x.ln() - 0.01f64.ln()).powi(2)).sum();
        assert_relative_eq!(fit.stderr, (6.0 * d * d / sxx).sqrt(), max_relative = 1e-9);
    }
}
