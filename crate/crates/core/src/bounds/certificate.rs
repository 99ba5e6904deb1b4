//! Right-hand sides of the weighted total-variation bounds and the
//! certificates that compare them against measured distances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::constants::{bar_c, c_circ_uniform, choose_l, choose_m, gamma_k, h_p_const, hat_c_value, pointwise_l, theta};
use super::family::FamilyBounds;
use crate::distributions::{GaussianMixture, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::spectral::derivative_diff;
use crate::transport::{self, rho_p, DistanceResult, RHO_TOLERANCE};

/// Sample size per law for `W_q` in more than one dimension.
pub const SAMPLED_OT_POINTS: usize = 400;

/// Sigma multiple of the box on which pointwise suprema are taken.
const POINTWISE_BOX_SIGMAS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams<S> {
    /// Weight power of `ρ_p`, kept as given.
    pub p: S,
    pub q: S,
    pub epsilon: S,
    pub d: usize,
}

impl<S: Scalar> BoundParams<S> {
    pub fn new(p: S, q: S, epsilon: S, d: usize) -> Result<Self> {
        let params = BoundParams { p, q, epsilon, d };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= S::one()) || !self.p.is_finite() {
            return Err(Error::param(format!("p must be a finite value >= 1, got {}", self.p)));
        }
        if !(self.q > S::one()) || !self.q.is_finite() {
            return Err(Error::param(format!("q must exceed 1, got {}", self.q)));
        }
        if !(self.epsilon > S::zero() && self.epsilon < S::one()) {
            return Err(Error::param(format!("ε must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        Ok(())
    }

    /// The even power `p' = max(2, 2⌈p/2⌉)` used on the Fourier side.
    pub fn even_p(&self) -> usize {
        let half = (self.p / S::lit(2.0)).ceil().to_usize().unwrap_or(1);
        (2 * half).max(2)
    }

    /// 2 when `p` had to be raised to `p'` (then `1 + |x|^p ≤ 2 + |x|^{p'}`), else 1.
    fn tv_multiplier(&self) -> S {
        if S::from_usize_(self.even_p()) == self.p {
            S::one()
        } else {
            S::lit(2.0)
        }
    }

    /// Envelope orders and powers needed by all three bounds.
    pub fn coverage(&self, alpha_order: usize) -> Result<(usize, usize)> {
        let pe = self.even_p();
        let l1 = choose_l(self.epsilon, pe, self.d)?;
        let lp = pointwise_l(self.epsilon, alpha_order, self.d)?;
        Ok((pe, l1.max(lp)))
    }
}

/// Every constant that enters a right-hand side, keyed by its indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstantLedger<S> {
    /// `γ_k`, key `k`.
    pub gamma: BTreeMap<String, S>,
    /// `C°_k`, key `k`.
    pub c_circ: BTreeMap<String, S>,
    pub h_p: Option<S>,
    /// `Ĉ_{l,p}`, key `l,p`.
    pub hat_c: BTreeMap<String, S>,
    /// `C̄_{l,p}`, key `l,p`.
    pub bar_c: BTreeMap<String, S>,
    /// `θ_{l,p}`, key `l,p`.
    pub theta: BTreeMap<String, S>,
    /// `a_{0,m}`, key `m`.
    pub moments: BTreeMap<String, S>,
    /// Envelope entries read from the family tables.
    pub envelopes: BTreeMap<String, S>,
    /// Intermediate and final coefficients of the assembly.
    pub chain: BTreeMap<String, S>,
}

impl<S: Scalar> ConstantLedger<S> {
    fn moment(&mut self, family: &FamilyBounds<S>, m: S) -> S {
        let v = family.moment(m);
        self.moments.insert(format!("{m}"), v);
        v
    }

    fn check_finite(&self) -> Result<()> {
        let maps = [
            ("gamma", &self.gamma),
            ("c_circ", &self.c_circ),
            ("hat_c", &self.hat_c),
            ("bar_c", &self.bar_c),
            ("theta", &self.theta),
            ("moments", &self.moments),
            ("envelopes", &self.envelopes),
            ("chain", &self.chain),
        ];
        for (name, map) in maps {
            if let Some((k, _)) = map.iter().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFinite(format!("{name}[{k}]")));
            }
        }
        match self.h_p {
            Some(h) if !h.is_finite() => Err(Error::NonFinite("h_p".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Lemma1Poly,
    Lemma2Exp,
    Pointwise,
}

/// Which case of the estimate produced the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `A = 0`: the laws coincide.
    Identical,
    /// Small `A`: the rate bound.
    Rate,
    /// Large `A`: bound linear in `A` from moments alone.
    Constant,
}

/// An evaluated right-hand side with its ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound<S> {
    pub l: usize,
    /// Frequency cutoff.
    pub m: S,
    pub rhs: S,
    pub branch: Branch,
    pub constants: ConstantLedger<S>,
}

fn check_family<S: Scalar>(params: &BoundParams<S>, family: &FamilyBounds<S>, a: S) -> Result<()> {
    params.validate()?;
    if family.dim() != params.d {
        return Err(Error::DimensionMismatch { expected: params.d, found: family.dim() });
    }
    if !(a >= S::zero()) || !a.is_finite() {
        return Err(Error::param(format!("A must be finite and non-negative, got {a}")));
    }
    Ok(())
}

/// `2 + 2 a_{0,p}` bounds `ρ_p` of any two members outright.
fn moment_cap<S: Scalar>(ledger: &mut ConstantLedger<S>, params: &BoundParams<S>, family: &FamilyBounds<S>) -> S {
    let a_p = ledger.moment(family, params.p);
    let cap = S::lit(2.0) + S::lit(2.0) * a_p;
    ledger.chain.insert("moment_cap".into(), cap);
    cap
}

fn finish<S: Scalar>(l: usize, m: S, rhs: S, branch: Branch, constants: ConstantLedger<S>) -> Result<Bound<S>> {
    constants.check_finite()?;
    if !rhs.is_finite() {
        return Err(Error::NonFinite("rhs".into()));
    }
    Ok(Bound { l, m, rhs, branch, constants })
}

/// `ρ_p ≤ (2 C̄_{l,p'} + 2 τ C̄_{l,0}) A^{θ_{l,p'}}` for `0 < A ≤ 1`, with
/// `τ = 2` when `p` was raised to `p'` and 1 otherwise; `(2 + 2a_{0,p}) A`
/// for `A > 1`.
pub fn lemma1_bound<S: Scalar>(params: &BoundParams<S>, family: &FamilyBounds<S>, a: S) -> Result<Bound<S>> {
    check_family(params, family, a)?;
    let d = params.d;
    let pe = params.even_p();
    let l = choose_l(params.epsilon, pe, d)?;
    let mut ledger = ConstantLedger::default();
    if a == S::zero() {
        return finish(l, S::one(), S::zero(), Branch::Identical, ledger);
    }
    if a > S::one() {
        let cap = moment_cap(&mut ledger, params, family);
        return finish(l, S::one(), cap * a, Branch::Constant, ledger);
    }

    ledger.gamma.insert(l.to_string(), gamma_k::<S>(l, d)?);
    ledger.h_p = Some(h_p_const::<S>(pe, d)?);
    let cc_p = c_circ_uniform(pe, params.q, &mut |m| ledger.moment(family, m))?;
    ledger.c_circ.insert(pe.to_string(), cc_p);
    ledger.c_circ.insert("0".into(), S::one());

    let table = family.poly_table();
    let b_p = table.require(pe, l)?;
    let b_0 = table.require(0, l)?;
    ledger.envelopes.insert(format!("b[{pe},{l}]"), b_p);
    ledger.envelopes.insert(format!("b[0,{l}]"), b_0);

    let hat_p = hat_c_value(l, pe, cc_p, b_p, d)?;
    let hat_0 = hat_c_value(l, 0, S::one(), b_0, d)?;
    ledger.hat_c.insert(format!("{l},{pe}"), hat_p);
    ledger.hat_c.insert(format!("{l},0"), hat_0);

    let a_2p = ledger.moment(family, S::from_usize_(2 * pe));
    let a_2l = ledger.moment(family, S::from_usize_(2 * l));
    let bar_p = bar_c(hat_p, a_2p, a_2l, d);
    let bar_0 = bar_c(hat_0, S::one(), a_2l, d);
    ledger.bar_c.insert(format!("{l},{pe}"), bar_p);
    ledger.bar_c.insert(format!("{l},0"), bar_0);

    let th_p: S = theta(l, pe, d)?;
    ledger.theta.insert(format!("{l},{pe}"), th_p);
    ledger.theta.insert(format!("{l},0"), theta(l, 0, d)?);

    let two = S::lit(2.0);
    let coefficient = two * bar_p + two * params.tv_multiplier() * bar_0;
    let radius = a.powf(-S::from_usize_(l - d) / S::from_usize_((l + 1) * (l + pe + d)));
    ledger.chain.insert("coefficient".into(), coefficient);
    ledger.chain.insert("spatial_radius".into(), radius);
    ledger.chain.insert("tv_multiplier".into(), params.tv_multiplier());
    let m = choose_m(a, l)?;
    finish(l, m, coefficient * a.powf(th_p), Branch::Rate, ledger)
}

/// `Σ_{k<d} (d-1)! / (k! r^{d-k})`, so that `∫_M^∞ e^{-r y} y^{d-1} dy ≤ T_d e^{-rM} M^{d-1}` for `M ≥ 1`.
fn tail_polynomial<S: Scalar>(d: usize, r: S) -> S {
    let fact = |n: usize| (1..=n).fold(S::one(), |acc, k| acc * S::from_usize_(k));
    (0..d).map(|k| fact(d - 1) / (fact(k) * r.powi((d - k) as i32))).sum()
}

/// `C''_k`: `|f_ξ - f_η| Σ_j |x_j|^k ≤ C''_k A |ln A|^{d+1}` for `A < e^{-r_k}`.
fn pointwise_exp_constant<S: Scalar>(
    ledger: &mut ConstantLedger<S>,
    family: &FamilyBounds<S>,
    params: &BoundParams<S>,
    k: usize,
) -> Result<S> {
    let d = params.d;
    let entry = family.exp_entry(k)?;
    let (r, c) = (entry.r, entry.c);
    ledger.envelopes.insert(format!("r[{k}]"), r);
    ledger.envelopes.insert(format!("c[{k}]"), c);
    let two = S::lit(2.0);
    let tau = S::TAU().powi(d as i32);
    let vd = scalar::unit_ball_volume::<S>(d);
    let sd = scalar::unit_sphere_area::<S>(d);
    let dd = S::from_usize_(d);

    let (c1, k2) = if k == 0 {
        (two * vd / tau, two * two * c)
    } else {
        let cc = *ledger.c_circ.get(&k.to_string()).expect("C°_k recorded before use");
        let a_k = ledger.moment(family, S::from_usize_(k));
        (two * dd * cc * vd / tau, two * dd * a_k * dd * two * c)
    };
    let t_d = tail_polynomial(d, r);
    let c2 = (k2 * sd * t_d).sqrt() / tau;
    let near = c1 * (two / r).powi(d as i32 + 1);
    let tail = c2 * (two / r).powf((dd - S::one()) / two) * r.powf(-(dd + S::lit(3.0)) / two);
    let cpp = near + tail;
    ledger.chain.insert(format!("C1[{k}]"), c1);
    ledger.chain.insert(format!("K2[{k}]"), k2);
    ledger.chain.insert(format!("T_d[{k}]"), t_d);
    ledger.chain.insert(format!("C2[{k}]"), c2);
    ledger.chain.insert(format!("C''[{k}]"), cpp);
    Ok(cpp)
}

/// `ρ_p ≤ C'''' A |ln A|^{2d+1}` for `0 < A < e^{-r*}`, `r* = max(r_0, r_{p'})`,
/// from the exponential envelopes and `C♯ ≥ E e^{r|ξ|} + E e^{r|η|}`.
/// Above that threshold the moment cap `(2 + 2a_{0,p}) max(A, 1)` is used.
pub fn lemma2_bound<S: Scalar>(params: &BoundParams<S>, family: &FamilyBounds<S>, a: S) -> Result<Bound<S>> {
    check_family(params, family, a)?;
    let d = params.d;
    let pe = params.even_p();
    let mut ledger = ConstantLedger::default();
    if a == S::zero() {
        return finish(0, S::one(), S::zero(), Branch::Identical, ledger);
    }
    let r0 = family.exp_entry(0)?.r;
    let rp = family.exp_entry(pe)?.r;
    let r_star = r0.max(rp);
    ledger.chain.insert("r_star".into(), r_star);
    if a >= (-r_star).exp() {
        let cap = moment_cap(&mut ledger, params, family);
        return finish(0, S::one(), cap * a.max(S::one()), Branch::Constant, ledger);
    }

    let two = S::lit(2.0);
    let vd = scalar::unit_ball_volume::<S>(d);
    let hp = h_p_const::<S>(pe, d)?;
    ledger.h_p = Some(hp);
    let cc_p = c_circ_uniform(pe, params.q, &mut |m| ledger.moment(family, m))?;
    ledger.c_circ.insert(pe.to_string(), cc_p);
    ledger.c_circ.insert("0".into(), S::one());

    let cpp_0 = pointwise_exp_constant(&mut ledger, family, params, 0)?;
    let cpp_p = pointwise_exp_constant(&mut ledger, family, params, pe)?;
    let r = family.exp_rate();
    let c_sharp = family.c_sharp();
    ledger.chain.insert("r".into(), r);
    ledger.chain.insert("C_sharp".into(), c_sharp);

    let tv = params.tv_multiplier();
    let tail = c_sharp / r_star.powi(2 * d as i32 + 1);
    let pe_s = S::from_usize_(pe);
    let markov = (two * pe_s / (S::E() * r)).powi(pe as i32);
    let c4 = tv * (vd * r.powi(-(d as i32)) * cpp_0 + tail)
        + vd * (two / r).powi(d as i32) * hp * cpp_p
        + markov * tail;
    ledger.chain.insert("tv_multiplier".into(), tv);
    ledger.chain.insert("markov".into(), markov);
    ledger.chain.insert("C''''".into(), c4);

    let log = a.ln().abs();
    ledger.chain.insert("frequency_cutoff_0".into(), two * log / r0);
    ledger.chain.insert("spatial_radius_0".into(), log / r);
    ledger.chain.insert("spatial_radius_p".into(), two * log / r);
    let m = two * log / rp;
    let rhs = c4 * a * log.powi(2 * d as i32 + 1);
    finish(0, m, rhs, Branch::Rate, ledger)
}

/// `sup |∂_α(f_ξ - f_η)| (1 + |x|^p) ≤ (τ P_0 + P_{p'}) A^{(l-d-|α|)/(l+1)}`
/// for `0 < A ≤ 1`, the same coefficient times `A` above.
pub fn pointwise_bound<S: Scalar>(
    params: &BoundParams<S>,
    family: &FamilyBounds<S>,
    alpha: &[usize],
    a: S,
) -> Result<Bound<S>> {
    check_family(params, family, a)?;
    let d = params.d;
    if alpha.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: alpha.len() });
    }
    let order: usize = alpha.iter().sum();
    let pe = params.even_p();
    let l = pointwise_l(params.epsilon, order, d)?;
    let mut ledger = ConstantLedger::default();
    if a == S::zero() {
        return finish(l, S::one(), S::zero(), Branch::Identical, ledger);
    }

    let two = S::lit(2.0);
    let tau = S::TAU().powi(d as i32);
    let vd = scalar::unit_ball_volume::<S>(d);
    let hp = h_p_const::<S>(pe, d)?;
    ledger.h_p = Some(hp);
    let table = family.poly_table();
    let circ = |k: usize, ledger: &mut ConstantLedger<S>| -> Result<S> {
        let v = c_circ_uniform(k, params.q, &mut |m| ledger.moment(family, m))?;
        ledger.c_circ.insert(k.to_string(), v);
        Ok(v)
    };
    let gamma = |k: usize, ledger: &mut ConstantLedger<S>| -> Result<S> {
        let v = gamma_k::<S>(k, d)?;
        ledger.gamma.insert(k.to_string(), v);
        Ok(v)
    };

    let mut k_near = S::zero();
    let mut k_tail = S::zero();
    for &aj in alpha {
        for m in 0..=pe.min(aj) {
            let falling = (0..m).fold(S::one(), |acc, i| acc * S::from_usize_(aj - i));
            let w = scalar::binomial::<S>(pe as u32, m as u32) * falling;
            let b = table.require(pe - m, l)?;
            ledger.envelopes.insert(format!("b[{},{l}]", pe - m), b);
            k_near += w * circ(pe - m, &mut ledger)?;
            k_tail += w * b * gamma(l - order + m, &mut ledger)?;
        }
    }
    let b0 = table.require(0, l)?;
    ledger.envelopes.insert(format!("b[0,{l}]"), b0);
    let p_p = hp / tau * (two * vd * k_near + two * k_tail);
    let p_0 = (two * vd + two * b0 * gamma(l - order, &mut ledger)?) / tau;
    let coefficient = params.tv_multiplier() * p_0 + p_p;
    ledger.chain.insert("K_near".into(), k_near);
    ledger.chain.insert("K_tail".into(), k_tail);
    ledger.chain.insert("P_p".into(), p_p);
    ledger.chain.insert("P_0".into(), p_0);
    ledger.chain.insert("tv_multiplier".into(), params.tv_multiplier());
    ledger.chain.insert("coefficient".into(), coefficient);

    if a > S::one() {
        return finish(l, S::one(), coefficient * a, Branch::Constant, ledger);
    }
    let exponent = S::from_usize_(l - d - order) / S::from_usize_(l + 1);
    ledger.chain.insert("exponent".into(), exponent);
    finish(l, choose_m(a, l)?, coefficient * a.powf(exponent), Branch::Rate, ledger)
}

/// A bound evaluated for a concrete pair, set against the measured left-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate<S> {
    pub regime: Regime,
    pub params: BoundParams<S>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<usize>>,
    pub l: usize,
    #[serde(rename = "M")]
    pub m: S,
    #[serde(rename = "A")]
    pub a: DistanceResult<S>,
    pub branch: Branch,
    /// Description of the envelope tables the constants came from.
    pub envelope: String,
    pub constants: ConstantLedger<S>,
    pub rhs: S,
    pub lhs: S,
    pub satisfied: bool,
    pub provenance: String,
}

impl<S: Scalar> BoundCertificate<S> {
    pub fn assemble(
        regime: Regime,
        params: BoundParams<S>,
        alpha: Option<Vec<usize>>,
        bound: Bound<S>,
        a: DistanceResult<S>,
        lhs: S,
        family: &FamilyBounds<S>,
    ) -> Self {
        BoundCertificate {
            regime,
            params,
            alpha,
            l: bound.l,
            m: bound.m,
            a,
            branch: bound.branch,
            envelope: envelope_reference(family),
            constants: bound.constants,
            rhs: bound.rhs,
            lhs,
            satisfied: lhs <= bound.rhs,
            provenance: "empirical".into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn envelope_reference<S: Scalar>(family: &FamilyBounds<S>) -> String {
    let grid = family.frequency_grid();
    format!(
        "frequency-side grid suprema over {} member(s), {} nodes per axis, max frequency {:.6}",
        family.members().len(),
        grid.counts()[0],
        grid.max_freq(0).f64()
    )
}

/// `W_q` entering the certificates: quantile quadrature in one dimension,
/// sampled exact transport otherwise.
pub fn measure_a<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>, q: S, seed: u64) -> Result<DistanceResult<S>> {
    transport::wasserstein(a, b, q, SAMPLED_OT_POINTS, seed)
}

fn pointwise_nodes(d: usize) -> usize {
    match d {
        1 => 4096,
        2 => 256,
        _ => 64,
    }
}

/// Grid supremum of `|∂_α(f_a - f_b)(x)| (1 + |x|^p)`.
pub fn pointwise_sup<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>, p: S, alpha: &[usize]) -> Result<S> {
    let k = S::lit(POINTWISE_BOX_SIGMAS);
    let region = a.sigma_box(k).union(&b.sigma_box(k))?;
    let spec = GridSpec::cube(&region, pointwise_nodes(a.dim()))?;
    let field = derivative_diff(a, b, &spec, alpha)?;
    Ok((0..spec.len())
        .map(|i| {
            let x = spec.node(i);
            let norm = x.iter().map(|v| *v * *v).sum::<S>().sqrt();
            field.values[i].abs() * (S::one() + norm.powf(p))
        })
        .fold(S::zero(), |acc, v| acc.max(v)))
}

fn pair_family<S: Scalar>(
    a: &GaussianMixture<S>,
    b: &GaussianMixture<S>,
    params: &BoundParams<S>,
    alpha_order: usize,
) -> Result<FamilyBounds<S>> {
    let (orders, powers) = params.coverage(alpha_order)?;
    FamilyBounds::new(vec![a.clone(), b.clone()], orders, powers, S::lit(super::family::DEFAULT_EXP_RATE))
}

fn check_pair<S: Scalar>(a: &GaussianMixture<S>, b: &GaussianMixture<S>, params: &BoundParams<S>) -> Result<()> {
    params.validate()?;
    for x in [a, b] {
        if x.dim() != params.d {
            return Err(Error::DimensionMismatch { expected: params.d, found: x.dim() });
        }
    }
    Ok(())
}

/// Lemma-1 certificate for a pair; constants from `family`, or from the pair itself when `None`.
pub fn certificate_lemma1<S: Scalar>(
    a: &GaussianMixture<S>,
    b: &GaussianMixture<S>,
    params: &BoundParams<S>,
    family: Option<&FamilyBounds<S>>,
) -> Result<BoundCertificate<S>> {
    check_pair(a, b, params)?;
    let own;
    let family = match family {
        Some(f) => f,
        None => {
            own = pair_family(a, b, params, 0)?;
            &own
        }
    };
    let dist = measure_a(a, b, params.q, 0)?;
    let bound = lemma1_bound(params, family, dist.value)?;
    let lhs = if dist.value == S::zero() { S::zero() } else { rho_p(a, b, params.p, S::tol(RHO_TOLERANCE))?.value };
    Ok(BoundCertificate::assemble(Regime::Lemma1Poly, *params, None, bound, dist, lhs, family))
}

/// Exponential-regime certificate for a pair.
pub fn certificate_lemma2<S: Scalar>(
    a: &GaussianMixture<S>,
    b: &GaussianMixture<S>,
    params: &BoundParams<S>,
    family: Option<&FamilyBounds<S>>,
) -> Result<BoundCertificate<S>> {
    check_pair(a, b, params)?;
    let own;
    let family = match family {
        Some(f) => f,
        None => {
            own = pair_family(a, b, params, 0)?;
            &own
        }
    };
    let dist = measure_a(a, b, params.q, 0)?;
    let bound = lemma2_bound(params, family, dist.value)?;
    let lhs = if dist.value == S::zero() { S::zero() } else { rho_p(a, b, params.p, S::tol(RHO_TOLERANCE))?.value };
    Ok(BoundCertificate::assemble(Regime::Lemma2Exp, *params, None, bound, dist, lhs, family))
}

/// Pointwise certificate for `∂_α` of the density difference.
pub fn certificate_pointwise<S: Scalar>(
    a: &GaussianMixture<S>,
    b: &GaussianMixture<S>,
    params: &BoundParams<S>,
    alpha: &[usize],
    family: Option<&FamilyBounds<S>>,
) -> Result<BoundCertificate<S>> {
    check_pair(a, b, params)?;
    let order = alpha.iter().sum();
    let own;
    let family = match family {
        Some(f) => f,
        None => {
            own = pair_family(a, b, params, order)?;
            &own
        }
    };
    let dist = measure_a(a, b, params.q, 0)?;
    let bound = pointwise_bound(params, family, alpha, dist.value)?;
    let lhs = if dist.value == S::zero() { S::zero() } else { pointwise_sup(a, b, params.p, alpha)? };
    Ok(BoundCertificate::assemble(Regime::Pointwise, *params, Some(alpha.to_vec()), bound, dist, lhs, family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::weighted_diff_reconstruct;
    use approx::assert_relative_eq;

    fn normal(m: f64) -> GaussianMixture<f64> {
        GaussianMixture::normal(m, 1.0).unwrap()
    }

    fn params() -> BoundParams<f64> {
        BoundParams::new(2.0, 2.0, 0.1, 1).unwrap()
    }

    fn translate_family(shifts: &[f64]) -> FamilyBounds<f64> {
        let mut members = vec![normal(0.0)];
        members.extend(shifts.iter().map(|h| normal(*h)));
        let (k, l) = params().coverage(1).unwrap();
        FamilyBounds::new(members, k, l, 1.0).unwrap()
    }

    /// `∫ (1 + x²) |φ(x) - φ(x - h)| dx` by a fine trapezoid rule.
    fn rho_2_trapezoid(h: f64) -> f64 {
        let n = 400_000;
        let (lo, hi) = (-14.0, 14.0 + h);
        let dx = (hi - lo) / n as f64;
        let g = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        (0..=n)
            .map(|i| {
                let x = lo + i as f64 * dx;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * (1.0 + x * x) * (g(x) - g(x - h)).abs()
            })
            .sum::<f64>()
            * dx
    }

    #[test]
    fn params_validation() {
        assert!(BoundParams::new(2.0, 1.0, 0.1, 1).is_err());
        assert!(BoundParams::new(0.5, 2.0, 0.1, 1).is_err());
        assert!(BoundParams::new(2.0, 2.0, 1.0, 1).is_err());
        assert!(BoundParams::new(2.0, 2.0, 0.1, 0).is_err());
        let even = |p: f64| BoundParams::new(p, 2.0, 0.1, 1).unwrap().even_p();
        assert_eq!([even(1.0), even(2.0), even(2.5), even(3.0), even(4.0)], [2, 2, 4, 4, 4]);
    }

    #[test]
    fn identical_laws_give_zero() {
        let g = normal(0.0);
        let p = params();
        for cert in [
            certificate_lemma1(&g, &g, &p, None).unwrap(),
            certificate_lemma2(&g, &g, &p, None).unwrap(),
            certificate_pointwise(&g, &g, &p, &[0], None).unwrap(),
        ] {
            assert_eq!(cert.a.value, 0.0);
            assert_eq!((cert.lhs, cert.rhs), (0.0, 0.0));
            assert!(cert.satisfied);
            assert_eq!(cert.branch, Branch::Identical);
        }
    }

    #[test]
    fn lemma1_translate_pair() {
        let cert = certificate_lemma1(&normal(0.0), &normal(0.1), &params(), None).unwrap();
        assert_eq!(cert.l, 75);
        assert_eq!(cert.branch, Branch::Rate);
        assert!(cert.satisfied && cert.rhs / cert.lhs > 1.0);
        assert!(cert.m >= 1.0);
        assert_relative_eq!(cert.a.value, 0.1, max_relative = 1e-9);
        assert_relative_eq!(cert.lhs, rho_2_trapezoid(0.1), max_relative = 1e-6);
        assert_relative_eq!(cert.constants.theta["75,2"], 5550.0 / 5928.0, max_relative = 1e-15);
    }

    #[test]
    fn lemma1_rhs_increases_with_a() {
        let fam = translate_family(&[1.0]);
        let p = params();
        let rhs: Vec<f64> =
            [1e-3, 1e-2, 0.1, 0.5, 1.0].iter().map(|a| lemma1_bound(&p, &fam, *a).unwrap().rhs).collect();
        assert!(rhs.windows(2).all(|w| w[0] < w[1]), "{rhs:?}");
    }

    #[test]
    fn pointwise_translate_pair() {
        let (a, b) = (normal(0.0), normal(0.05));
        let p = params();
        let cert = certificate_pointwise(&a, &b, &p, &[0], None).unwrap();
        assert!(cert.satisfied);
        assert_eq!(cert.l, 19);
        // (1 + x²)|Δf| = |Δf + x² Δf|, with x² Δf from the spectral reconstruction
        let region = a.sigma_box(12.0).union(&b.sigma_box(12.0)).unwrap();
        let spec = GridSpec::cube(&region, 4096).unwrap();
        let weighted = weighted_diff_reconstruct(&a, &b, &spec, 2).unwrap();
        let oracle = (0..spec.len())
            .map(|i| {
                let x = spec.node(i);
                (a.density(&x).unwrap() - b.density(&x).unwrap() + weighted.values[i]).abs()
            })
            .fold(0.0, f64::max);
        assert!((cert.lhs - oracle).abs() < 1e-3, "{} vs {oracle}", cert.lhs);

        let first = certificate_pointwise(&a, &b, &p, &[1], None).unwrap();
        assert!(first.satisfied);
        assert_eq!(first.l, 29);
        assert_relative_eq!(first.constants.chain["exponent"], 27.0 / 30.0, max_relative = 1e-15);
    }

    #[test]
    fn lemma2_polylog_shape() {
        let hs = [1e-2, 1e-3, 1e-4];
        let fam = translate_family(&hs);
        let p = params();
        let mut ratios = Vec::new();
        for h in hs {
            let cert = certificate_lemma2(&normal(0.0), &normal(h), &p, Some(&fam)).unwrap();
            assert!(cert.satisfied, "h = {h}");
            assert_eq!(cert.branch, Branch::Rate);
            let a = cert.a.value;
            ratios.push(cert.rhs / (a * a.ln().abs().powi(3)));
        }
        for r in &ratios {
            assert_relative_eq!(*r, ratios[0], max_relative = 1e-2);
        }
    }

    #[test]
    fn lemma2_beats_lemma1_for_small_a() {
        let fam = translate_family(&[0.5]);
        let p = params();
        for a in [1e-4, 1e-8, 1e-16] {
            let one = lemma1_bound(&p, &fam, a).unwrap().rhs;
            let two = lemma2_bound(&p, &fam, a).unwrap().rhs;
            assert!(two < one, "A = {a}: {two} vs {one}");
        }
    }

    #[test]
    fn large_a_uses_moment_cap() {
        let fam = translate_family(&[3.0]);
        let p = params();
        let cap = 2.0 + 2.0 * fam.moment(2.0);
        let b = lemma1_bound(&p, &fam, 3.0).unwrap();
        assert_eq!(b.branch, Branch::Constant);
        assert_eq!(b.m, 1.0);
        assert_relative_eq!(b.rhs, 3.0 * cap, max_relative = 1e-15);
        let b2 = lemma2_bound(&p, &fam, 0.5).unwrap();
        assert_eq!(b2.branch, Branch::Constant);
        assert_relative_eq!(b2.rhs, cap, max_relative = 1e-15);
    }

    #[test]
    fn odd_power_adds_tv_term() {
        let fam = translate_family(&[0.3]);
        let odd = BoundParams::new(1.0, 2.0, 0.1, 1).unwrap();
        let even = params();
        let b_odd = lemma1_bound(&odd, &fam, 0.3).unwrap();
        let b_even = lemma1_bound(&even, &fam, 0.3).unwrap();
        assert!(b_odd.rhs > b_even.rhs);
        assert_eq!(b_odd.constants.chain["tv_multiplier"], 2.0);
        let cert = certificate_lemma1(&normal(0.0), &normal(0.3), &odd, Some(&fam)).unwrap();
        assert!(cert.satisfied);
    }

    #[test]
    fn ledger_is_deterministic() {
        let p = params();
        let build = || {
            let fam = translate_family(&[0.2]);
            (lemma1_bound(&p, &fam, 0.2).unwrap(), lemma2_bound(&p, &fam, 0.01).unwrap())
        };
        let (x1, y1) = build();
        let (x2, y2) = build();
        assert_eq!(serde_json::to_string(&x1).unwrap(), serde_json::to_string(&x2).unwrap());
        assert_eq!(serde_json::to_string(&y1).unwrap(), serde_json::to_string(&y2).unwrap());
        for v in x1.constants.bar_c.values().chain(y1.constants.chain.values()) {
            assert!(v.is_finite() && *v > 0.0);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let g = GaussianMixture::<f32>::normal(0.0, 1.0).unwrap();
        let h = GaussianMixture::<f32>::normal(0.1, 1.0).unwrap();
        let p = BoundParams::<f32>::new(2.0, 2.0, 0.1, 1).unwrap();
        let (k, l) = p.coverage(0).unwrap();
        let fam = FamilyBounds::new(vec![g, h], k, l, 1.0).unwrap();
        assert!(matches!(lemma1_bound(&p, &fam, 0.1), Err(Error::NonFinite(_))));
    }

    #[test]
    fn certificate_json_layout() {
        let cert = certificate_lemma1(&normal(0.0), &normal(0.5), &params(), None).unwrap();
        let value: serde_json::Value = serde_json::from_str(&cert.to_json()).unwrap();
        for key in ["regime", "params", "l", "M", "A", "constants", "rhs", "lhs", "satisfied", "provenance"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(value["regime"], "lemma1-poly");
        assert_eq!(value["provenance"], "empirical");
        let back: BoundCertificate<f64> = serde_json::from_str(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
    }
}
