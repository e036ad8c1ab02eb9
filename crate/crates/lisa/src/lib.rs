//! Selective mixup for learning under subpopulation and domain shift.
//!
//! The crate has three layers:
//!
//! - **Data + mixing** ([`data`], [`beta`], [`mixing`]): labeled, domain-tagged
//!   datasets and the selective interpolation engine. Pairs are chosen
//!   intra-label (same label, different domain) with probability `p_sel` and
//!   intra-domain (same domain, different label) otherwise; vanilla and
//!   in-group pairings are available as substitutes.
//! - **Closed-form oracle** ([`theory`]): a two-domain, two-class Gaussian
//!   mixture in which the population least-squares classifier of every
//!   training scheme (plain regression, vanilla mixup, intra-label and
//!   intra-domain mixing) has an explicit slope and intercept, and every
//!   group's misclassification error is an exact Gaussian tail probability.
//!   Includes Monte Carlo cross-checks, finite-sample estimators and regime
//!   condition reports for the worst-group error comparisons.
//! - **Desk-scale trainer + metrics** ([`train`], [`metrics`]): small
//!   linear/logistic/one-hidden-layer models trained with plain SGD under
//!   each scheme, evaluated by worst-group accuracy, plus predictor-invariance
//!   metrics (domain predictability of logits, pairwise KL of per-domain logit
//!   densities, risk variance, dummy-scale gradient norm) and Cramér's V for
//!   spurious-correlation strength.
//!
//! The `lisa` binary exposes the experiment runner ([`runner`]) with the
//! `theory`, `simulate`, `mc-check` and `metrics` subcommands; the
//! `examples/` directory demonstrates each capability as a library.

pub mod beta;
pub mod data;
pub mod error;
pub mod metrics;
pub mod mixing;
pub mod rng;
pub mod runner;
pub mod theory;
pub mod train;

pub use beta::{BetaMoments, BetaParams};
pub use data::{build_group_index, Dataset, GroupIndex, GroupKey, Sample};
pub use error::{Error, Result};
pub use rng::SeededRng;

/// Format a float with 17 significant digits, enough to round-trip `f64`
/// exactly through text.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    #[test]
    fn g17_round_trips() {
        for &v in &[
            0.0,
            -1.0,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02214076e23,
            -2.2250738585072014e-308,
        ] {
            let s = super::fmt_g17(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{v} -> {s} -> {back}");
        }
    }
}
