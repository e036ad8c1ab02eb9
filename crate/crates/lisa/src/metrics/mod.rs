//! Spurious-correlation strength and predictor-invariance metrics.
//!
//! [`cramers_v`] measures the domain-label association of a dataset;
//! [`ip_adp`], [`pairwise_kl`], [`ip_var`] and [`ip_norm`] measure how
//! domain-invariant a trained predictor is (lower is more invariant).

mod adp;
mod contingency;
mod kde;
mod risk;
mod scores;

pub use adp::{ip_adp, DEFAULT_SPLIT};
pub use contingency::{cramers_v, ContingencyTable};
pub use kde::{kl_between_samples, pairwise_kl};
pub use risk::{domain_scale_gradient, ip_norm, ip_var};
pub use scores::ScoreSet;
