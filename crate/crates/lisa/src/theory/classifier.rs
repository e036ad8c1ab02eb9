//! Population least-squares classifiers for the four training schemes.

use super::model::{derive_stats, ModelParams};
use crate::beta::BetaParams;
use crate::error::{Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// A linear rule: predict class 1 when `x·b + b0 > 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub slope: DVector<f64>,
    pub intercept: f64,
}

impl LinearClassifier {
    pub fn new(slope: DVector<f64>, intercept: f64) -> Result<Self> {
        if slope.iter().any(|v| !v.is_finite()) || !intercept.is_finite() {
            return Err(Error::invalid("classifier has non-finite entries"));
        }
        Ok(LinearClassifier { slope, intercept })
    }

    pub fn score(&self, x: &DVector<f64>) -> f64 {
        self.slope.dot(x) + self.intercept
    }

    pub fn predict(&self, x: &DVector<f64>) -> usize {
        usize::from(self.score(x) > 0.5)
    }
}

/// Which population estimator a classifier came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodTag {
    Erm,
    VanillaMixup,
    LisaL,
    LisaD,
}

impl MethodTag {
    pub const ALL: [MethodTag; 4] = [
        MethodTag::Erm,
        MethodTag::VanillaMixup,
        MethodTag::LisaL,
        MethodTag::LisaD,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::Erm => "erm",
            MethodTag::VanillaMixup => "mixup",
            MethodTag::LisaL => "lisa_l",
            MethodTag::LisaD => "lisa_d",
        }
    }
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Infinite-sample least-squares slope and intercept for one training scheme.
///
/// Every scheme's slope solves a rank-one-corrected system
/// `(Σ + a·Δ0Δ0ᵀ)⁻¹ t`:
///
/// - plain regression and vanilla mixup: `t = Δ̃`,
///   `a = ½(π_{R|1}π_{G|1} + π_{R|0}π_{G|0})` — mixing any pairs rescales the
///   covariance and cross-covariance by the same factor, so the direction and
///   intercept coincide with the plain ones;
/// - intra-label mixing: `t = Δ`, `a = var(λ)/(2E[λ²])`;
/// - intra-domain mixing: `t = Δ`, `a = π^(R)π^(G)/(2E[λ²])`.
///
/// Slopes are normalized to unit Σ-norm (the direction carries all the
/// decision-relevant content), and the intercept re-centers the score so the
/// overall mean sits on the threshold: `b0 = E[y] − E[x]·b = ½ − E[x]·b`
/// for the label regressions, and `b0 = ½ − E[x̃]·b` with `E[x̃] = E[x]`,
/// `E[ỹ] = ½` for the ratio regression of intra-domain mixing.
pub fn population_classifier(
    params: &ModelParams,
    method: MethodTag,
    beta: &BetaParams,
) -> Result<LinearClassifier> {
    let stats = derive_stats(params)?;
    let moments = beta.moments();
    let alpha = params.alpha();
    // conditional proportions: π_{G|1} = π_{R|0} = 2α, π_{R|1} = π_{G|0} = 1 − 2α
    let a0 = 2.0 * alpha * (1.0 - 2.0 * alpha);
    let (a, targeted) = match method {
        MethodTag::Erm | MethodTag::VanillaMixup => (a0, &stats.delta_tilde),
        MethodTag::LisaL => (
            moments.variance / (2.0 * moments.second_moment),
            &stats.delta,
        ),
        MethodTag::LisaD => (0.25 / (2.0 * moments.second_moment), &stats.delta),
    };
    let ops = params.ops();
    let direction = ops.rank_one_solve(a, &stats.delta0, targeted)?;
    let scale = ops.norm(&direction);
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::invalid("population slope degenerated to zero"));
    }
    let slope = direction / scale;
    let intercept = 0.5 - stats.mean_x.dot(&slope);
    LinearClassifier::new(slope, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_params(seed: u64) -> ModelParams {
        let mut rng = SeededRng::new(seed, 21);
        let dim = 3;
        let m = DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() - 0.5);
        let sigma = &m * m.transpose() + DMatrix::identity(dim, dim) * 0.4;
        let mu_0r = DVector::from_fn(dim, |_, _| rng.random::<f64>() - 0.5);
        let mu_0g = DVector::from_fn(dim, |_, _| rng.random::<f64>() - 0.5);
        let delta = DVector::from_fn(dim, |_, _| rng.random::<f64>() - 0.2);
        let alpha = 0.02 + 0.2 * rng.random::<f64>();
        ModelParams::new(
            mu_0r.clone(),
            mu_0g.clone(),
            &mu_0r + &delta,
            &mu_0g + &delta,
            sigma,
            alpha,
        )
        .unwrap()
    }

    #[test]
    fn no_domain_offset_collapses_all_methods() {
        // delta0 = 0: every scheme returns b ∝ Σ⁻¹Δ with the same intercept
        let mu0 = DVector::from_vec(vec![-0.4, 0.1]);
        let mu1 = DVector::from_vec(vec![0.4, -0.1]);
        let params = ModelParams::new(
            mu0.clone(),
            mu0.clone(),
            mu1.clone(),
            mu1.clone(),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]),
            0.1,
        )
        .unwrap();
        let beta = BetaParams::new(2.0, 2.0).unwrap();
        let reference = population_classifier(&params, MethodTag::Erm, &beta).unwrap();
        for method in MethodTag::ALL {
            let clf = population_classifier(&params, method, &beta).unwrap();
            assert!((&clf.slope - &reference.slope).abs().max() < 1e-12);
            assert_relative_eq!(clf.intercept, reference.intercept, epsilon = 1e-12);
        }
    }

    #[test]
    fn lisa_l_slope_decomposes_over_sigma_inverse_basis() {
        // b_LL ∝ Σ⁻¹Δ̃ + c·Σ⁻¹Δ. With d0 = Δ − Δ̃ = (1−4α)·Δ0, the rank-one
        // correction a·Δ0Δ0ᵀ equals a'·d0d0ᵀ for a' = a/(1−4α)², and the
        // closed-form coefficient is c = (1 − a'·Δ̃ᵀΣ⁻¹d0)/(a'·ΔᵀΣ⁻¹d0).
        let params = ModelParams::canonical(0.1, 0.05, 0.7, 0.7, 2).unwrap();
        let beta = BetaParams::new(2.0, 2.0).unwrap();
        let stats = derive_stats(&params).unwrap();
        let ops = params.ops();
        let m = beta.moments();
        let a_ll = m.variance / (2.0 * m.second_moment);
        let shrink = 1.0 - 4.0 * params.alpha();
        let a_eff = a_ll / (shrink * shrink);
        let d0 = &stats.delta - &stats.delta_tilde;
        let c_ll = (1.0 - a_eff * ops.inner(&stats.delta_tilde, &d0))
            / (a_eff * ops.inner(&stats.delta, &d0));
        let expected = ops.solve(&stats.delta_tilde) + ops.solve(&stats.delta) * c_ll;
        let clf = population_classifier(&params, MethodTag::LisaL, &beta).unwrap();
        let cos = clf.slope.dot(&expected) / (clf.slope.norm() * expected.norm());
        assert_relative_eq!(cos, 1.0, epsilon = 1e-10);
    }

    proptest! {
        // direction equivalence of plain regression and vanilla mixup
        #[test]
        fn vanilla_mixup_matches_plain_regression(seed in 0u64..60, a in 0.3f64..8.0, b in 0.3f64..8.0) {
            let params = random_params(seed);
            let beta = BetaParams::new(a, b).unwrap();
            let erm = population_classifier(&params, MethodTag::Erm, &beta).unwrap();
            let mix = population_classifier(&params, MethodTag::VanillaMixup, &beta).unwrap();
            let cos = erm.slope.dot(&mix.slope) / (erm.slope.norm() * mix.slope.norm());
            prop_assert!((cos - 1.0).abs() < 1e-10);
            prop_assert!((erm.intercept - mix.intercept).abs() < 1e-10);
        }

        #[test]
        fn slopes_have_unit_sigma_norm(seed in 0u64..40) {
            let params = random_params(seed);
            let beta = BetaParams::new(2.0, 2.0).unwrap();
            for method in MethodTag::ALL {
                let clf = population_classifier(&params, method, &beta).unwrap();
                let n = params.ops().norm(&clf.slope);
                prop_assert!((n - 1.0).abs() < 1e-10);
            }
        }
    }
}
