//! Envelope and moment constants shared by every law in a family.

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::distributions::{GaussianMixture, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{fit_exp_profile, pure_partial_unchecked, ExpEntry, ExpEnvelopeTable, PolyEntry, PolyEnvelopeTable, Side};

/// Default rate `r` in the exponential-moment bound `E e^{r|X|}`.
pub const DEFAULT_EXP_RATE: f64 = 1.0;

fn nodes_per_axis(d: usize) -> usize {
    match d {
        1 => 1 << 14,
        2 => 1 << 9,
        _ => 1 << 6,
    }
}

/// Constants uniform over a family of mixtures:
///
/// - `b_{k,l} = max sup_u |∂_j^k φ(u)| (1 + |u|)^l` over members and axes,
///   from the closed-form characteristic functions on a fine frequency grid;
/// - exponential envelopes `(r_k, c_k)` with `∫ |∂_j^k φ| e^{r_k|u|} du ≤ c_k`
///   for every member and axis (`r_k` the smallest fitted rate, `c_k` the largest constant);
/// - absolute moments `a_{0,m} = max E|X|^m`, evaluated on demand;
/// - `C♯ ≥ E e^{r|ξ|} + E e^{r|η|}` for any two members.
///
/// All suprema are over grid nodes, so the constants are empirical.
#[derive(Debug)]
pub struct FamilyBounds<S> {
    dim: usize,
    members: Vec<GaussianMixture<S>>,
    freq_spec: GridSpec<S>,
    poly: PolyEnvelopeTable<S>,
    exp: Vec<std::result::Result<ExpEntry<S>, f64>>,
    exp_rate: S,
    c_sharp: S,
    moments: Mutex<BTreeMap<String, S>>,
}

impl<S: Scalar> FamilyBounds<S> {
    /// Tables for derivative orders `k ≤ max_order` and powers `l ≤ max_power`.
    pub fn new(members: Vec<GaussianMixture<S>>, max_order: usize, max_power: usize, exp_rate: S) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::param("a family needs at least one member"));
        };
        let dim = first.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        if !(exp_rate > S::zero()) {
            return Err(Error::param("exponential-moment rate must be positive"));
        }
        let sd_min = members
            .iter()
            .flat_map(|m| m.components().iter().flat_map(|c| (0..dim).map(move |j| c.axis_sd(j))))
            .fold(S::infinity(), |a, b| a.min(b));
        let reach = S::lit(8.0) + S::lit(2.0) * S::from_usize_(max_power + max_order).sqrt();
        let band = reach / sd_min;
        let n = nodes_per_axis(dim);
        let spacing = S::PI() / band;
        let half = spacing * S::from_usize_(n / 2);
        let freq_spec = GridSpec::new(vec![-half; dim], vec![half; dim], vec![n; dim])?;
        let freqs: Vec<Vec<S>> = (0..freq_spec.len()).map(|i| freq_spec.freq(i)).collect();
        let radii: Vec<S> = freqs.iter().map(|u| u.iter().map(|v| *v * *v).sum::<S>().sqrt()).collect();

        let mut poly = vec![S::zero(); (max_order + 1) * (max_power + 1)];
        let mut exp = Vec::with_capacity(max_order + 1);
        for k in 0..=max_order {
            let mut fitted: std::result::Result<Option<(S, S)>, f64> = Ok(None);
            for member in &members {
                for axis in 0..dim {
                    let mags: Vec<S> = freqs.iter().map(|u| pure_partial_unchecked(member, axis, k, u).norm()).collect();
                    for l in 0..=max_power {
                        let slot = &mut poly[k * (max_power + 1) + l];
                        for (m, r) in mags.iter().zip(&radii) {
                            *slot = slot.max(*m * (S::one() + *r).powi(l as i32));
                        }
                    }
                    fitted = match (fitted, fit_exp_profile(&freq_spec, &mags, k)) {
                        (Err(slope), _) => Err(slope),
                        (Ok(_), Err(Error::NonExponentialTail { slope, .. })) => Err(slope),
                        (Ok(_), Err(e)) => return Err(e),
                        (Ok(None), Ok(rc)) => Ok(Some(rc)),
                        (Ok(Some((r0, c0))), Ok((r, c))) => Ok(Some((r0.min(r), c0.max(c)))),
                    };
                }
            }
            exp.push(fitted.map(|rc| {
                let (r, c) = rc.expect("family is non-empty");
                ExpEntry { k, r, c }
            }));
        }
        let entries = (0..=max_order)
            .flat_map(|k| (0..=max_power).map(move |l| (k, l)))
            .map(|(k, l)| PolyEntry { k, l, c: poly[k * (max_power + 1) + l] })
            .collect();
        let c_sharp = S::lit(2.0) * members.iter().map(|m| m.exp_abs_moment_bound(exp_rate)).fold(S::zero(), |a, b| a.max(b));
        Ok(FamilyBounds {
            dim,
            members,
            freq_spec,
            poly: PolyEnvelopeTable { side: Side::Frequency, entries },
            exp,
            exp_rate,
            c_sharp,
            moments: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[GaussianMixture<S>] {
        &self.members
    }

    /// The frequency grid on which the envelopes were measured (its dual nodes).
    pub fn frequency_grid(&self) -> &GridSpec<S> {
        &self.freq_spec
    }

    pub fn poly_table(&self) -> &PolyEnvelopeTable<S> {
        &self.poly
    }

    /// Exponential envelopes for the orders whose fit succeeded.
    pub fn exp_table(&self) -> ExpEnvelopeTable<S> {
        ExpEnvelopeTable { entries: self.exp.iter().filter_map(|e| e.ok()).collect() }
    }

    pub(crate) fn exp_entry(&self, k: usize) -> Result<ExpEntry<S>> {
        match self.exp.get(k) {
            Some(Ok(e)) => Ok(*e),
            Some(Err(slope)) => Err(Error::NonExponentialTail { order: k, slope: *slope }),
            None => Err(Error::InsufficientCoverage(format!("no exponential envelope for order {k}"))),
        }
    }

    pub fn exp_rate(&self) -> S {
        self.exp_rate
    }

    /// `C♯ = 2 max E e^{r|X|}` over members.
    pub fn c_sharp(&self) -> S {
        self.c_sharp
    }

    /// `a_{0,m} = max E|X|^m` over members.
    pub fn moment(&self, m: S) -> S {
        let key = format!("{m}");
        let mut cache = self.moments.lock().expect("moment cache lock");
        *cache
            .entry(key)
            .or_insert_with(|| self.members.iter().map(|x| x.abs_moment(m)).fold(S::zero(), |a, b| a.max(b)))
    }
}
