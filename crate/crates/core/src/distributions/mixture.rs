use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{AtomSet, BoxRegion, GridDensity, GridSpec};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::scalar::{self, normal_cdf, normal_pdf, Scalar};

/// Upper bound on the probability mass a discretization box may miss.
pub const MAX_MASS_DEFECT: f64 = 1e-6;

/// JSON form of a mixture: `{"d": 1, "components": [{"w": .., "mean": [..], "cov": [[..]]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec<S> {
    pub d: usize,
    pub components: Vec<ComponentSpec<S>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec<S> {
    pub w: S,
    pub mean: Vec<S>,
    pub cov: Vec<Vec<S>>,
}

/// One Gaussian component with its Cholesky factor cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Component<S> {
    pub weight: S,
    pub mean: Vec<S>,
    pub cov: Vec<Vec<S>>,
    chol: Vec<S>,
    log_norm: S,
}

impl<S: Scalar> Component<S> {
    fn new(weight: S, mean: Vec<S>, cov: Vec<Vec<S>>) -> Result<Self> {
        let d = mean.len();
        if cov.len() != d || cov.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidDistribution(format!("covariance must be {d}x{d}")));
        }
        if !(weight > S::zero() && weight <= S::one() + S::tol(1e-12)) {
            return Err(Error::InvalidDistribution(format!("weight {weight} outside (0, 1]")));
        }
        if mean.iter().chain(cov.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite parameter".into()));
        }
        let scale = cov.iter().flatten().fold(S::zero(), |m, v| m.max(v.abs()));
        for i in 0..d {
            for j in 0..i {
                if (cov[i][j] - cov[j][i]).abs() > S::tol(1e-12) * scale {
                    return Err(Error::InvalidDistribution("covariance is not symmetric".into()));
                }
            }
        }
        let chol = cholesky(&cov)
            .ok_or_else(|| Error::InvalidDistribution("covariance is not positive definite".into()))?;
        let log_det: S = (0..d).map(|i| chol[i * d + i].ln()).sum::<S>() * S::lit(2.0);
        let log_norm = -(S::from_usize_(d) * S::TAU().ln() + log_det) / S::lit(2.0);
        Ok(Component { weight, mean, cov, chol, log_norm })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Marginal standard deviation along `axis`.
    pub fn axis_sd(&self, axis: usize) -> S {
        self.cov[axis][axis].sqrt()
    }

    /// Lower Cholesky factor, row-major.
    pub fn cholesky(&self) -> &[S] {
        &self.chol
    }

    fn log_density(&self, x: &[S]) -> S {
        let d = self.dim();
        // solve L y = x - m
        let mut y = vec![S::zero(); d];
        let mut quad = S::zero();
        for i in 0..d {
            let mut acc = x[i] - self.mean[i];
            for k in 0..i {
                acc -= self.chol[i * d + k] * y[k];
            }
            y[i] = acc / self.chol[i * d + i];
            quad += y[i] * y[i];
        }
        self.log_norm - quad / S::lit(2.0)
    }

    /// `m + L z`.
    fn transform(&self, z: &[S]) -> Vec<S> {
        let d = self.dim();
        (0..d)
            .map(|i| self.mean[i] + (0..=i).map(|k| self.chol[i * d + k] * z[k]).sum::<S>())
            .collect()
    }
}

fn cholesky<S: Scalar>(a: &[Vec<S>]) -> Option<Vec<S>> {
    let d = a.len();
    let mut l = vec![S::zero(); d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(sum > S::zero()) {
                    return None;
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Finite mixture of multivariate Gaussians.
///
/// Immutable after construction; all derived quantities (densities, moments,
/// quantiles) are computed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture<S = f64> {
    dim: usize,
    components: Vec<Component<S>>,
}

impl<S: Scalar> GaussianMixture<S> {
    pub fn new(dim: usize, components: Vec<(S, Vec<S>, Vec<Vec<S>>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDistribution("dimension must be at least 1".into()));
        }
        if components.is_empty() {
            return Err(Error::InvalidDistribution("mixture needs at least one component".into()));
        }
        let components = components
            .into_iter()
            .map(|(w, m, c)| {
                if m.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: m.len() });
                }
                Component::new(w, m, c)
            })
            .collect::<Result<Vec<_>>>()?;
        let total: S = components.iter().map(|c| c.weight).sum();
        if (total - S::one()).abs() > S::tol(1e-12) {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, not 1")));
        }
        Ok(GaussianMixture { dim, components })
    }

    /// Single Gaussian `N(mean, cov)`.
    pub fn gaussian(mean: Vec<S>, cov: Vec<Vec<S>>) -> Result<Self> {
        Self::new(mean.len(), vec![(S::one(), mean, cov)])
    }

    /// One-dimensional `N(mean, variance)`.
    pub fn normal(mean: S, variance: S) -> Result<Self> {
        Self::gaussian(vec![mean], vec![vec![variance]])
    }

    /// Standard normal in `R^d`.
    pub fn standard(dim: usize) -> Self {
        let cov = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        Self::gaussian(vec![S::zero(); dim], cov).expect("identity covariance")
    }

    /// One-dimensional mixture from `(weight, mean, variance)` triples.
    pub fn mixture_1d(parts: &[(S, S, S)]) -> Result<Self> {
        Self::new(1, parts.iter().map(|&(w, m, v)| (w, vec![m], vec![vec![v]])).collect())
    }

    pub fn from_spec(spec: &MixtureSpec<S>) -> Result<Self> {
        Self::new(spec.d, spec.components.iter().map(|c| (c.w, c.mean.clone(), c.cov.clone())).collect())
    }

    pub fn to_spec(&self) -> MixtureSpec<S> {
        MixtureSpec {
            d: self.dim,
            components: self
                .components
                .iter()
                .map(|c| ComponentSpec { w: c.weight, mean: c.mean.clone(), cov: c.cov.clone() })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MixtureSpec<S> = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("mixture serializes")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component<S>] {
        &self.components
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: len });
        }
        Ok(())
    }

    /// Mixture density at `x`.
    pub fn density(&self, x: &[S]) -> Result<S> {
        self.check_dim(x.len())?;
        Ok(self.density_unchecked(x))
    }

    pub(crate) fn density_unchecked(&self, x: &[S]) -> S {
        self.components.iter().map(|c| c.weight * c.log_density(x).exp()).sum()
    }

    /// `E|X|^p` with `|.|` the Euclidean norm.
    ///
    /// Integer powers in one dimension use closed forms (Gaussian raw and
    /// truncated moments); everything else goes through adaptive quadrature
    /// over the whitened coordinates of each component.
    pub fn abs_moment(&self, p: S) -> S {
        assert!(p >= S::zero(), "moment order must be non-negative");
        if p == S::zero() {
            return S::one();
        }
        self.components
            .iter()
            .map(|c| {
                let m = if self.dim == 1 && p.fract() == S::zero() && p <= S::lit(400.0) {
                    let sd = c.axis_sd(0);
                    abs_moment_normal_int(c.mean[0], sd, p.to_u32().unwrap())
                } else {
                    abs_moment_quadrature(c, p)
                };
                c.weight * m
            })
            .sum()
    }

    /// Upper bound on `E exp(r |X|)`; exact in one dimension.
    pub fn exp_abs_moment_bound(&self, r: S) -> S {
        let d = self.dim;
        self.components
            .iter()
            .map(|c| {
                let per_axis = |axis: usize, rate: S| {
                    let m = c.mean[axis];
                    let s = c.axis_sd(axis);
                    let base = rate * rate * s * s / S::lit(2.0);
                    (rate * m + base).exp() * normal_cdf(m / s + rate * s)
                        + (-rate * m + base).exp() * normal_cdf(-m / s + rate * s)
                };
                if d == 1 {
                    c.weight * per_axis(0, r)
                } else {
                    // |x| <= sum_j |x_j| and Hölder over the d factors
                    let inv_d = S::one() / S::from_usize_(d);
                    let rate = r * S::from_usize_(d);
                    c.weight * (0..d).map(|j| per_axis(j, rate).powf(inv_d)).fold(S::one(), |a, b| a * b)
                }
            })
            .sum()
    }

    /// Law of `X + θ` with `θ ~ N(0, σ² I)` independent of `X`.
    pub fn smooth(&self, sigma: S) -> Result<Self> {
        if !(sigma > S::zero()) {
            return Err(Error::param("smoothing scale must be positive"));
        }
        self.add_isotropic_variance(sigma * sigma)
    }

    pub(crate) fn add_isotropic_variance(&self, var: S) -> Result<Self> {
        let parts = self
            .components
            .iter()
            .map(|c| {
                let mut cov = c.cov.clone();
                for (i, row) in cov.iter_mut().enumerate() {
                    row[i] += var;
                }
                (c.weight, c.mean.clone(), cov)
            })
            .collect();
        Self::new(self.dim, parts)
    }

    /// Law of `c X`.
    pub fn scaled(&self, factor: S) -> Result<Self> {
        let parts = self
            .components
            .iter()
            .map(|c| {
                let mean = c.mean.iter().map(|&m| m * factor).collect();
                let cov = c.cov.iter().map(|r| r.iter().map(|&v| v * factor * factor).collect()).collect();
                (c.weight, mean, cov)
            })
            .collect();
        Self::new(self.dim, parts)
    }

    /// Law of `X + shift`.
    pub fn translated(&self, shift: &[S]) -> Result<Self> {
        self.check_dim(shift.len())?;
        let parts = self
            .components
            .iter()
            .map(|c| {
                let mean = c.mean.iter().zip(shift).map(|(&m, &s)| m + s).collect();
                (c.weight, mean, c.cov.clone())
            })
            .collect();
        Self::new(self.dim, parts)
    }

    /// Convex combination `(1 - t) self + t other`.
    pub fn blend(&self, other: &Self, t: S) -> Result<Self> {
        self.check_dim(other.dim)?;
        let mut parts: Vec<_> = self
            .components
            .iter()
            .map(|c| (c.weight * (S::one() - t), c.mean.clone(), c.cov.clone()))
            .collect();
        parts.extend(other.components.iter().map(|c| (c.weight * t, c.mean.clone(), c.cov.clone())));
        parts.retain(|p| p.0 > S::zero());
        Self::new(self.dim, parts)
    }

    /// Mixture CDF in one dimension.
    pub fn cdf_1d(&self, x: S) -> S {
        self.components.iter().map(|c| c.weight * normal_cdf((x - c.mean[0]) / c.axis_sd(0))).sum()
    }

    /// Mixture survival function `1 - F(x)`, accurate in the upper tail.
    pub fn sf_1d(&self, x: S) -> S {
        self.components.iter().map(|c| c.weight * normal_cdf((c.mean[0] - x) / c.axis_sd(0))).sum()
    }

    fn quantile_bracket(&self) -> (S, S) {
        let (mut lo, mut hi) = (S::infinity(), S::neg_infinity());
        for c in &self.components {
            let s = c.axis_sd(0);
            lo = lo.min(c.mean[0] - S::lit(40.0) * s);
            hi = hi.max(c.mean[0] + S::lit(40.0) * s);
        }
        (lo, hi)
    }

    /// Bisection for `F(x) = target` (lower tail) or `1 - F(x) = target` (upper tail).
    fn invert(&self, target: S, upper_tail: bool) -> S {
        let (mut lo, mut hi) = self.quantile_bracket();
        for _ in 0..400 {
            let mid = lo + (hi - lo) / S::lit(2.0);
            if mid <= lo || mid >= hi || hi - lo <= S::epsilon() * lo.abs().max(hi.abs()) {
                break;
            }
            let below = if upper_tail { self.sf_1d(mid) > target } else { self.cdf_1d(mid) < target };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo + (hi - lo) / S::lit(2.0)
    }

    /// Quantile `F^{-1}(u)` for a one-dimensional mixture.
    pub fn quantile_1d(&self, u: S) -> Result<S> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim });
        }
        if !(u > S::zero() && u < S::one()) {
            return Err(Error::param(format!("quantile level {u} outside (0, 1)")));
        }
        Ok(if u <= S::lit(0.5) { self.invert(u, false) } else { self.invert(S::one() - u, true) })
    }

    /// `F^{-1}(Φ(t))`: the quantile at standard-normal score `t`, resolved
    /// in whichever tail keeps full relative precision.
    pub(crate) fn quantile_at_score(&self, t: S) -> S {
        if t <= S::zero() {
            self.invert(normal_cdf(t), false)
        } else {
            self.invert(normal_cdf(-t), true)
        }
    }

    /// `n` i.i.d. draws with equal masses, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<AtomSet<S>> {
        if n == 0 {
            return Err(Error::param("sample size must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cumulative: Vec<f64> = self
            .components
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.weight.f64();
                Some(*acc)
            })
            .collect();
        let mass = S::one() / S::from_usize_(n);
        let atoms = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let idx = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
                let z: Vec<S> = (0..self.dim).map(|_| S::lit(rng.sample::<f64, _>(StandardNormal))).collect();
                (self.components[idx].transform(&z), mass)
            })
            .collect();
        AtomSet::new(self.dim, atoms)
    }

    /// Box `[min_c (m_c - k s_c), max_c (m_c + k s_c)]` per axis.
    pub fn sigma_box(&self, k: S) -> BoxRegion<S> {
        let mut lo = vec![S::infinity(); self.dim];
        let mut hi = vec![S::neg_infinity(); self.dim];
        for c in &self.components {
            for j in 0..self.dim {
                let s = c.axis_sd(j);
                lo[j] = lo[j].min(c.mean[j] - k * s);
                hi[j] = hi[j].max(c.mean[j] + k * s);
            }
        }
        BoxRegion { lo, hi }
    }

    /// Smallest sigma-box whose Gaussian tail bound leaves at most `delta` mass outside.
    pub fn auto_box(&self, delta: S) -> BoxRegion<S> {
        let per_side = delta.f64() / (2.0 * self.dim as f64);
        let k = -scalar::normal_quantile(per_side);
        self.sigma_box(S::lit(k))
    }

    /// Union bound on the mass outside `region`, exact in one dimension.
    pub fn mass_outside(&self, region: &BoxRegion<S>) -> S {
        self.components
            .iter()
            .map(|c| {
                let tails: S = (0..self.dim)
                    .map(|j| {
                        let s = c.axis_sd(j);
                        normal_cdf((region.lo[j] - c.mean[j]) / s) + normal_cdf((c.mean[j] - region.hi[j]) / s)
                    })
                    .sum();
                c.weight * tails
            })
            .sum()
    }

    /// Samples the density on `spec` and renormalizes to unit discrete mass.
    pub fn discretize(&self, spec: &GridSpec<S>) -> Result<GridDensity<S>> {
        self.check_dim(spec.dim())?;
        let defect = self.mass_outside(&spec.region());
        if defect > S::lit(MAX_MASS_DEFECT) {
            return Err(Error::Precision { defect: defect.f64(), limit: MAX_MASS_DEFECT });
        }
        let values: Vec<S> = (0..spec.len()).map(|i| self.density_unchecked(&spec.node(i))).collect();
        GridDensity::normalized(spec.clone(), values, defect)
    }
}

/// `E|X|^p` for `X ~ N(m, s²)` and integer `p`.
fn abs_moment_normal_int<S: Scalar>(m: S, s: S, p: u32) -> S {
    // E|X|^p is symmetric in m, so work with m >= 0: the negative half-line is the small side.
    let m = m.abs();
    let raw: S = (0..=p)
        .map(|k| scalar::binomial::<S>(p, k) * m.powi((p - k) as i32) * s.powi(k as i32) * scalar::gaussian_raw_moment::<S>(k))
        .sum();
    if p % 2 == 0 {
        return raw;
    }
    // truncated moments I_k = E[Z^k ; Z < a]
    let a = -m / s;
    let phi = normal_pdf(a);
    let mut trunc = vec![S::zero(); p as usize + 1];
    trunc[0] = normal_cdf(a);
    if p >= 1 {
        trunc[1] = -phi;
    }
    for k in 2..=p as usize {
        trunc[k] = -a.powi(k as i32 - 1) * phi + S::from_usize_(k - 1) * trunc[k - 2];
    }
    let negative_part: S = (0..=p)
        .map(|k| scalar::binomial::<S>(p, k) * m.powi((p - k) as i32) * s.powi(k as i32) * trunc[k as usize])
        .sum();
    raw - S::lit(2.0) * negative_part
}

/// `E|m + L Z|^p` by nested adaptive quadrature over the standard normal `Z`.
fn abs_moment_quadrature<S: Scalar>(c: &Component<S>, p: S) -> S {
    let d = c.dim();
    let half_width = S::lit(10.0) + p.sqrt();
    let breaks: Vec<S> = if d == 1 { vec![-c.mean[0] / c.axis_sd(0)] } else { Vec::new() };
    fn level<S: Scalar>(c: &Component<S>, p: S, z: &mut Vec<S>, half_width: S, breaks: &[S]) -> S {
        let d = c.dim();
        if z.len() == d {
            let x = c.transform(z);
            let norm2: S = x.iter().map(|v| *v * *v).sum();
            return norm2.powf(p / S::lit(2.0));
        }
        let tol = S::tol(if z.is_empty() { 1e-11 } else { 1e-12 });
        let r = quadrature::adaptive(
            |t: S| {
                z.push(t);
                let inner = level(c, p, z, half_width, &[]);
                z.pop();
                inner * normal_pdf(t)
            },
            -half_width,
            half_width,
            breaks,
            tol,
            S::min_positive_value(),
            if d == 1 { 2000 } else { 400 },
        );
        r.value
    }
    let mut z = Vec::with_capacity(d);
    level(c, p, &mut z, half_width, &breaks)
}
