//! Decay envelopes of densities and characteristic functions measured on grids.
//!
//! All suprema are taken over grid nodes only, so every constant produced
//! here is an empirical lower estimate of the true supremum.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::chargrid::{derivative_symbol, CharGrid};
use super::transform::{complexify, forward, inverse};
use crate::distributions::{GridDensity, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Spectral coefficients below this fraction of the largest one are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Largest admissible fraction of derivative content in the outer half of the band.
pub const EDGE_RATIO_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Density,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyEntry<S> {
    pub k: usize,
    pub l: usize,
    pub c: S,
}

/// Constants `sup |∂_α g| (1 + |·|)^l` over `|α| = k`, for `k ≤ K`, `l ≤ L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyEnvelopeTable<S> {
    pub side: Side,
    pub entries: Vec<PolyEntry<S>>,
}

impl<S: Scalar> PolyEnvelopeTable<S> {
    pub fn get(&self, k: usize, l: usize) -> Option<S> {
        self.entries.iter().find(|e| e.k == k && e.l == l).map(|e| e.c)
    }

    pub(crate) fn require(&self, k: usize, l: usize) -> Result<S> {
        self.get(k, l)
            .ok_or_else(|| Error::InsufficientCoverage(format!("no {:?}-side envelope entry for k={k}, l={l}", self.side)))
    }

    /// Entrywise maximum with another table over the same index set.
    pub fn max_with(&self, other: &Self) -> Result<Self> {
        if self.side != other.side {
            return Err(Error::param("cannot merge envelopes of different sides"));
        }
        let entries = self
            .entries
            .iter()
            .map(|e| other.require(e.k, e.l).map(|c| PolyEntry { c: e.c.max(c), ..*e }))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyEnvelopeTable { side: self.side, entries })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("envelope serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpEntry<S> {
    pub k: usize,
    pub r: S,
    pub c: S,
}

/// Constants `(r_k, c_k)` with `∫ |∂^k φ(u)| e^{r_k |u|} du ≤ c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpEnvelopeTable<S> {
    pub entries: Vec<ExpEntry<S>>,
}

impl<S: Scalar> ExpEnvelopeTable<S> {
    pub fn get(&self, k: usize) -> Option<ExpEntry<S>> {
        self.entries.iter().find(|e| e.k == k).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("envelope serializes")
    }
}

/// All multi-indices in `N^d` of total order `k`.
pub fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![k]];
    }
    (0..=k)
        .rev()
        .flat_map(|first| {
            multi_indices(d - 1, k - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn zero_below_floor<S: Scalar>(values: &mut [Complex<S>]) {
    let peak = values.iter().fold(S::zero(), |m, v| m.max(v.norm()));
    let floor = peak * S::lit(NOISE_FLOOR);
    for v in values.iter_mut() {
        if v.norm() < floor {
            *v = Complex::new(S::zero(), S::zero());
        }
    }
}

/// True when any coordinate index lies in the outer half of its axis range
/// (measured from the axis center).
fn in_outer_half<S: Scalar>(spec: &GridSpec<S>, flat: usize) -> bool {
    spec.unflatten(flat).iter().zip(spec.counts()).any(|(&k, &n)| {
        let off = k.abs_diff(n / 2);
        4 * off >= n
    })
}

/// True when any coordinate lies in the outermost eighth of the box on either side.
fn near_box_edge<S: Scalar>(spec: &GridSpec<S>, flat: usize) -> bool {
    spec.unflatten(flat).iter().zip(spec.counts()).any(|(&k, &n)| 8 * k < n || 8 * (n - 1 - k) < n)
}

fn edge_ratio<S: Scalar>(spec: &GridSpec<S>, magnitudes: impl Iterator<Item = S>, edge: impl Fn(&GridSpec<S>, usize) -> bool) -> S {
    let (mut inner, mut outer) = (S::zero(), S::zero());
    for (i, m) in magnitudes.enumerate() {
        if edge(spec, i) {
            outer = outer.max(m);
        }
        inner = inner.max(m);
    }
    if inner > S::zero() { outer / inner } else { S::zero() }
}

fn norm_of<S: Scalar>(x: &[S]) -> S {
    x.iter().map(|v| *v * *v).sum::<S>().sqrt()
}

/// `∂_α f` on the space grid for every `|α| = k`, by spectral differentiation.
fn density_derivatives<S: Scalar>(spec: &GridSpec<S>, spectrum: &[Complex<S>], k: usize) -> Result<Vec<Vec<S>>> {
    multi_indices(spec.dim(), k)
        .iter()
        .map(|alpha| {
            let shaped: Vec<Complex<S>> =
                spectrum.iter().enumerate().map(|(i, v)| *v * derivative_symbol(spec, i, alpha)).collect();
            let ratio = edge_ratio(spec, shaped.iter().map(|v| v.norm()), in_outer_half);
            if ratio > S::lit(EDGE_RATIO_LIMIT) {
                return Err(Error::UnstableDifferentiation { order: k, ratio: ratio.f64() });
            }
            Ok(inverse(spec, &shaped).iter().map(|v| v.re).collect())
        })
        .collect()
}

/// `∂_α φ` on the frequency grid for every `|α| = k`, from the space-side values `f`.
fn char_derivatives<S: Scalar>(spec: &GridSpec<S>, space: &[Complex<S>], k: usize) -> Result<Vec<Vec<Complex<S>>>> {
    multi_indices(spec.dim(), k)
        .iter()
        .map(|alpha| {
            let weighted: Vec<Complex<S>> = space
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let x = spec.node(i);
                    let mono = x.iter().zip(alpha).fold(S::one(), |acc, (xj, &a)| acc * xj.powi(a as i32));
                    *v * Complex::new(S::zero(), S::one()).powu(k as u32) * mono
                })
                .collect();
            let ratio = edge_ratio(spec, weighted.iter().map(|v| v.norm()), near_box_edge);
            if ratio > S::lit(EDGE_RATIO_LIMIT) {
                return Err(Error::UnstableDifferentiation { order: k, ratio: ratio.f64() });
            }
            let mut out = forward(spec, &weighted);
            zero_below_floor(&mut out);
            Ok(out)
        })
        .collect()
}

fn sup_table<S: Scalar>(
    side: Side,
    max_order: usize,
    max_power: usize,
    mut magnitudes: impl FnMut(usize) -> Result<Vec<S>>,
    radius: impl Fn(usize) -> S,
) -> Result<PolyEnvelopeTable<S>> {
    let mut entries = Vec::new();
    for k in 0..=max_order {
        let mags = magnitudes(k)?;
        for l in 0..=max_power {
            let c = mags
                .iter()
                .enumerate()
                .fold(S::zero(), |m, (i, &v)| m.max(v * (S::one() + radius(i)).powi(l as i32)));
            entries.push(PolyEntry { k, l, c });
        }
    }
    Ok(PolyEnvelopeTable { side, entries })
}

/// Density-side table `sup_x |∂_α f(x)| (1 + |x|)^l`.
pub fn poly_envelope_density<S: Scalar>(
    f: &GridDensity<S>,
    max_order: usize,
    max_power: usize,
) -> Result<PolyEnvelopeTable<S>> {
    let spec = f.spec();
    let mut spectrum = forward(spec, &complexify(f.values()));
    zero_below_floor(&mut spectrum);
    let radii: Vec<S> = (0..spec.len()).map(|i| norm_of(&spec.node(i))).collect();
    sup_table(
        Side::Density,
        max_order,
        max_power,
        |k| {
            let derivs = density_derivatives(spec, &spectrum, k)?;
            Ok((0..spec.len()).map(|i| derivs.iter().fold(S::zero(), |m, dv| m.max(dv[i].abs()))).collect())
        },
        |i| radii[i],
    )
}

/// Frequency-side table `sup_u |∂_α φ(u)| (1 + |u|)^l`.
pub fn poly_envelope_char<S: Scalar>(
    phi: &CharGrid<S>,
    max_order: usize,
    max_power: usize,
) -> Result<PolyEnvelopeTable<S>> {
    let spec = phi.spec();
    let space = phi.to_space();
    let radii: Vec<S> = (0..spec.len()).map(|i| norm_of(&spec.freq(i))).collect();
    sup_table(
        Side::Frequency,
        max_order,
        max_power,
        |k| Ok(char_derivative_magnitudes(spec, &space, k)?),
        |i| radii[i],
    )
}

fn char_derivative_magnitudes<S: Scalar>(spec: &GridSpec<S>, space: &[Complex<S>], k: usize) -> Result<Vec<S>> {
    let derivs = char_derivatives(spec, space, k)?;
    Ok((0..spec.len()).map(|i| derivs.iter().fold(S::zero(), |m, dv| m.max(dv[i].norm()))).collect())
}

/// Exponential envelopes `(r_k, c_k)` for `k ≤ K` from a characteristic-function grid.
pub fn exp_envelope<S: Scalar>(phi: &CharGrid<S>, max_order: usize) -> Result<ExpEnvelopeTable<S>> {
    let spec = phi.spec();
    let space = phi.to_space();
    let entries = (0..=max_order)
        .map(|k| {
            let mags = char_derivative_magnitudes(spec, &space, k)?;
            let (r, c) = fit_exp_profile(spec, &mags, k)?;
            Ok(ExpEntry { k, r, c })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpEnvelopeTable { entries })
}

/// `Σ |∂^k φ(u)| e^{r|u|} Δu^d` over the grid, using the same derivative values as [`exp_envelope`].
pub fn exp_weighted_integral<S: Scalar>(phi: &CharGrid<S>, k: usize, r: S) -> Result<S> {
    let spec = phi.spec();
    let mags = char_derivative_magnitudes(spec, &phi.to_space(), k)?;
    let sum: S = mags
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > S::zero())
        .map(|(i, &m)| m * (r * norm_of(&spec.freq(i))).exp())
        .sum();
    Ok(sum * spec.freq_cell_volume())
}

/// `∫_R^∞ ρ^{d-1} e^{-rρ} dρ` in closed form.
pub(crate) fn radial_exp_tail<S: Scalar>(d: usize, r: S, radius: S) -> S {
    let mut acc = S::zero();
    let mut fact_ratio = S::one(); // (d-1)! / k!
    for k in (0..d).rev() {
        acc += fact_ratio * radius.powi(k as i32) / r.powi((d - k) as i32);
        fact_ratio *= S::from_usize_(k.max(1));
    }
    (-r * radius).exp() * acc
}

/// Fits the exponential decay of a radial profile and integrates it.
///
/// The profile is binned by `|u|`, replaced by its running maximum from the
/// outside in, and fitted by least squares in log scale on the outer quarter
/// of the resolved band (where it exceeds [`NOISE_FLOOR`] of its peak). The
/// returned rate is half the fitted decay rate; the constant is the grid
/// integral of `m(u) e^{r|u|}` over the band plus the integral of the fitted
/// upper line beyond it.
pub(crate) fn fit_exp_profile<S: Scalar>(spec: &GridSpec<S>, mags: &[S], order: usize) -> Result<(S, S)> {
    let d = spec.dim();
    let width = (0..d).map(|j| spec.freq_spacing(j)).fold(S::infinity(), |a, b| a.min(b));
    let radii: Vec<S> = (0..spec.len()).map(|i| norm_of(&spec.freq(i))).collect();
    let peak = mags.iter().fold(S::zero(), |m, &v| m.max(v));
    if !(peak > S::zero()) {
        return Err(Error::NonExponentialTail { order, slope: f64::NAN });
    }
    let floor = peak * S::lit(NOISE_FLOOR);
    let bins = radii.iter().map(|r| (*r / width).floor().to_usize().unwrap()).max().unwrap() + 1;
    let mut bin_max = vec![S::zero(); bins];
    for (r, &m) in radii.iter().zip(mags) {
        let b = (*r / width).floor().to_usize().unwrap();
        bin_max[b] = bin_max[b].max(m);
    }
    let resolved = match bin_max.iter().rposition(|&m| m >= floor) {
        Some(b) if b >= 8 => b,
        _ => return Err(Error::NonExponentialTail { order, slope: f64::NAN }),
    };
    let mut envelope = bin_max[..=resolved].to_vec();
    for b in (0..resolved).rev() {
        envelope[b] = envelope[b].max(envelope[b + 1]);
    }
    let start = (3 * resolved + 3) / 4;
    let points: Vec<(S, S)> = (start..=resolved)
        .map(|b| ((S::from_usize_(b) + S::lit(0.5)) * width, envelope[b].ln()))
        .collect();
    let n = S::from_usize_(points.len());
    let mx = points.iter().map(|p| p.0).sum::<S>() / n;
    let my = points.iter().map(|p| p.1).sum::<S>() / n;
    let sxx: S = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: S = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    if !(slope < S::zero()) {
        return Err(Error::NonExponentialTail { order, slope: slope.f64() });
    }
    let r = -slope / S::lit(2.0);
    let intercept = points.iter().map(|p| p.1 - slope * p.0).fold(S::neg_infinity(), |a, b| a.max(b));
    let edge = S::from_usize_(resolved + 1) * width;
    let inside: S = radii
        .iter()
        .zip(mags)
        .filter(|(rad, _)| **rad < edge)
        .map(|(rad, &m)| m * (r * *rad).exp())
        .sum::<S>()
        * spec.freq_cell_volume();
    let tail = intercept.exp() * scalar::unit_sphere_area::<S>(d) * radial_exp_tail(d, r, edge);
    Ok((r, inside + tail))
}
