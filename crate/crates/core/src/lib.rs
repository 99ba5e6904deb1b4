//! Weighted total variation and Wasserstein distances between probability
//! laws, and certificates for bounds of the form `ρ_p ≤ C W_q^{1-ε}` and
//! `ρ_p ≤ C W_q |ln W_q|^{2d+1}` with every constant evaluated explicitly.
//!
//! Numerical code is generic over [`scalar::Scalar`] (`f32`, `f64`); the
//! aliases below fix the scalar for common use.

pub mod bounds;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod quadrature;
pub mod scalar;
pub mod spectral;
pub mod transport;

pub use bounds::{BoundCertificate, BoundParams, ConstantLedger, FamilyBounds, Regime};
pub use distributions::{AtomSet, GaussianMixture, GridDensity, GridSpec};
pub use error::{Error, Result};
pub use harness::{Scenario, SweepReport};
pub use scalar::Scalar;
pub use spectral::{CharGrid, ExpEnvelopeTable, PolyEnvelopeTable};
pub use transport::{DistanceResult, TransportPlan};

pub type MixtureF64 = GaussianMixture<f64>;
pub type MixtureF32 = GaussianMixture<f32>;
pub type AtomSetF64 = AtomSet<f64>;
pub type AtomSetF32 = AtomSet<f32>;
pub type GridDensityF64 = GridDensity<f64>;
pub type GridDensityF32 = GridDensity<f32>;
pub type CharGridF64 = CharGrid<f64>;
pub type CharGridF32 = CharGrid<f32>;
pub type BoundParamsF64 = BoundParams<f64>;
pub type CertificateF64 = BoundCertificate<f64>;
pub type ScenarioF64 = Scenario<f64>;
pub type SweepReportF64 = SweepReport<f64>;
