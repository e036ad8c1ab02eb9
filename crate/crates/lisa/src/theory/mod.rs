//! Closed-form oracle for a two-domain, two-class Gaussian mixture.
//!
//! The mixture ([`ModelParams`]) has conditional means μ^(y,d), a shared
//! covariance Σ and minority proportion α on the groups (y=0, d=R) and
//! (y=1, d=G). Because the class difference Δ is domain-invariant, Σ⁻¹Δ is
//! the invariant discriminant direction; the marginal class difference Δ̃
//! tilts away from it exactly when domain and label are spuriously
//! correlated, and the Σ⁻¹ correlation ξ between the two measures that tilt.
//!
//! [`population_classifier`] gives every training scheme's infinite-sample
//! least-squares rule in closed form, [`group_error`]/[`worst_group_error`]/
//! [`shift_errors`] evaluate exact Gaussian error probabilities for it,
//! [`monte_carlo_error`] cross-checks them by simulation, and
//! [`check_theorem_conditions`] reports whether a parameter point sits in the
//! regimes where the selective-mixing rules provably dominate. The [`sweep`]
//! module packages grid comparisons over the canonical construction.

mod classifier;
mod conditions;
mod errors;
mod model;
mod ols;
mod phi;
mod sample;
mod sigma;
pub mod sweep;
mod target;

pub use classifier::{population_classifier, LinearClassifier, MethodTag};
pub use conditions::{check_theorem_conditions, ConditionReport, ShiftConditionReport};
pub use errors::{group_error, monte_carlo_error, shift_errors, worst_group_error, ShiftErrors};
pub use model::{derive_stats, DerivedStats, ModelFixture, ModelParams, DOMAIN_G, DOMAIN_R};
pub use ols::{
    angle_between, empirical_ols, erm_design, lisa_d_design, lisa_l_design, vanilla_mixup_design,
};
pub use phi::phi;
pub use sample::sample_model;
pub use sigma::SigmaOps;
pub use target::ShiftTarget;
