//! Explicit constants and certificates for the weighted total-variation bounds.

mod certificate;
mod constants;
mod family;

pub use certificate::{
    certificate_lemma1, certificate_lemma2, certificate_pointwise, lemma1_bound, lemma2_bound, measure_a,
    pointwise_bound, pointwise_sup, Bound, BoundCertificate, BoundParams, Branch, ConstantLedger, Regime,
    SAMPLED_OT_POINTS,
};
pub use constants::{bar_c, c_circ, choose_l, choose_m, gamma_k, h_p_const, hat_c, pointwise_l, theta, CouplingBound};
pub use family::{FamilyBounds, DEFAULT_EXP_RATE};
