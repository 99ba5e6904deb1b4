//! Characteristic functions and Fourier machinery.
//!
//! Convention: `φ(u) = E e^{i⟨u,X⟩} = ∫ f(x) e^{i⟨u,x⟩} dx` and
//! `f(x) = (2π)^{-d} ∫ φ(u) e^{-i⟨u,x⟩} du`. Derivatives are spectral:
//! `∂_α f ↔ (-iu)^α φ` and `∂_α φ ↔ (ix)^α f`.

mod analytic;
mod chargrid;
mod envelope;
pub mod transform;

pub use analytic::{char_fn, delta_p_char, pure_partial};
pub use chargrid::{
    char_fn_grid, char_fn_sampled, delta_p_char_grid, delta_p_char_sampled, derivative_diff, weighted_diff_direct,
    weighted_diff_reconstruct, CharGrid,
};
pub use envelope::{
    exp_envelope, exp_weighted_integral, multi_indices, poly_envelope_char, poly_envelope_density, ExpEntry,
    ExpEnvelopeTable, PolyEntry, PolyEnvelopeTable, Side, EDGE_RATIO_LIMIT, NOISE_FLOOR,
};

pub(crate) use analytic::pure_partial_unchecked;
pub(crate) use envelope::fit_exp_profile;
