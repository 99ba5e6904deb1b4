//! Probability distributions: analytic Gaussian mixtures, densities sampled
//! on uniform grids, and finitely supported atom sets.

mod atoms;
mod grid;
mod mixture;

pub use atoms::{AtomSet, AtomSetSpec, AtomSpec};
pub use grid::{BoxRegion, GridDensity, GridField, GridSpec, MASS_TOLERANCE, MAX_GRID_DIM};
pub use mixture::{Component, ComponentSpec, GaussianMixture, MixtureSpec, MAX_MASS_DEFECT};
