use serde::{Deserialize, Serialize};

use super::GaussianMixture;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// JSON form: `{"d": 1, "atoms": [{"x": [..], "m": ..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSetSpec<S> {
    pub d: usize,
    pub atoms: Vec<AtomSpec<S>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec<S> {
    pub x: Vec<S>,
    pub m: S,
}

/// Finitely supported probability measure `Σ m_i δ_{x_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSet<S = f64> {
    dim: usize,
    atoms: Vec<(Vec<S>, S)>,
}

impl<S: Scalar> AtomSet<S> {
    pub fn new(dim: usize, atoms: Vec<(Vec<S>, S)>) -> Result<Self> {
        if dim == 0 || atoms.is_empty() {
            return Err(Error::InvalidDistribution("atom set needs d >= 1 and at least one atom".into()));
        }
        for (x, m) in &atoms {
            if x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: x.len() });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDistribution("atom location is not finite".into()));
            }
            if !(*m > S::zero() && *m <= S::one() + S::tol(1e-12)) {
                return Err(Error::InvalidDistribution(format!("atom mass {m} outside (0, 1]")));
            }
        }
        let total: S = atoms.iter().map(|a| a.1).sum();
        let slack = S::tol(1e-12).max(S::from_usize_(4 * atoms.len()) * S::epsilon());
        if (total - S::one()).abs() > slack {
            return Err(Error::InvalidDistribution(format!("atom masses sum to {total}, not 1")));
        }
        Ok(AtomSet { dim, atoms })
    }

    /// Equal-mass atoms at the given locations.
    pub fn uniform(dim: usize, locations: Vec<Vec<S>>) -> Result<Self> {
        let m = S::one() / S::from_usize_(locations.len().max(1));
        Self::new(dim, locations.into_iter().map(|x| (x, m)).collect())
    }

    /// Point mass at `x`.
    pub fn dirac(x: Vec<S>) -> Self {
        AtomSet { dim: x.len(), atoms: vec![(x, S::one())] }
    }

    /// `n` equal atoms at the mid-quantiles `F^{-1}((i + 1/2) / n)` of a 1-D mixture.
    pub fn quantile_atoms(dist: &GaussianMixture<S>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("need at least one atom"));
        }
        let locations = (0..n)
            .map(|i| dist.quantile_1d((S::from_usize_(i) + S::lit(0.5)) / S::from_usize_(n)).map(|x| vec![x]))
            .collect::<Result<Vec<_>>>()?;
        Self::uniform(1, locations)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[(Vec<S>, S)] {
        &self.atoms
    }

    pub fn masses(&self) -> Vec<S> {
        self.atoms.iter().map(|a| a.1).collect()
    }

    /// Image under `x -> c x`.
    pub fn scaled(&self, c: S) -> Self {
        AtomSet {
            dim: self.dim,
            atoms: self.atoms.iter().map(|(x, m)| (x.iter().map(|v| *v * c).collect(), *m)).collect(),
        }
    }

    /// Largest Euclidean norm of an atom location.
    pub fn radius(&self) -> S {
        self.atoms
            .iter()
            .map(|(x, _)| x.iter().map(|v| *v * *v).sum::<S>().sqrt())
            .fold(S::zero(), |a, b| a.max(b))
    }

    pub fn from_spec(spec: &AtomSetSpec<S>) -> Result<Self> {
        Self::new(spec.d, spec.atoms.iter().map(|a| (a.x.clone(), a.m)).collect())
    }

    pub fn to_spec(&self) -> AtomSetSpec<S> {
        AtomSetSpec {
            d: self.dim,
            atoms: self.atoms.iter().map(|(x, m)| AtomSpec { x: x.clone(), m: *m }).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: AtomSetSpec<S> = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("atom set serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(AtomSet::new(1, vec![(vec![0.0], 0.5), (vec![1.0], 0.5)]).is_ok());
        assert!(AtomSet::new(1, vec![(vec![0.0], 0.5), (vec![1.0], 0.4)]).is_err());
        assert!(AtomSet::new(1, vec![(vec![f64::NAN], 1.0)]).is_err());
        assert!(AtomSet::new(2, vec![(vec![0.0], 1.0)]).is_err());
        assert!(AtomSet::<f64>::new(1, vec![]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"d": 2, "atoms": [{"x": [0.0, 1.0], "m": 0.25}, {"x": [1.5, -2.0], "m": 0.75}]}"#;
        let a = AtomSet::<f64>::from_json(text).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(AtomSet::<f64>::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn quantile_atoms_are_symmetric() {
        let g = GaussianMixture::<f64>::normal(0.0, 1.0).unwrap();
        let a = AtomSet::quantile_atoms(&g, 8).unwrap();
        for i in 0..4 {
            assert!((a.atoms()[i].0[0] + a.atoms()[7 - i].0[0]).abs() < 1e-12);
        }
    }
}
