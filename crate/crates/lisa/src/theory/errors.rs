//! Exact group misclassification errors and their Monte Carlo cross-check.

use super::classifier::LinearClassifier;
use super::model::ModelParams;
use super::phi::phi;
use super::target::ShiftTarget;
use crate::data::GroupKey;
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

fn score_spread(clf: &LinearClassifier, params: &ModelParams) -> Result<f64> {
    let s2 = params.ops().quad(&clf.slope);
    if s2 <= 0.0 || !s2.is_finite() {
        return Err(Error::invalid(
            "slope has non-positive variance under the model covariance",
        ));
    }
    Ok(s2.sqrt())
}

fn gaussian_group_error(
    clf: &LinearClassifier,
    mu: &DVector<f64>,
    label: usize,
    spread: f64,
) -> f64 {
    // score ~ N(mu·b + b0, bᵀΣb); error is the tail on the wrong side of ½
    let z = (clf.score(mu) - 0.5) / spread;
    if label == 0 {
        phi(z)
    } else {
        phi(-z)
    }
}

/// Exact misclassification probability of `clf` on one group of the mixture:
/// the Gaussian tail of the score past the ½ threshold.
pub fn group_error(clf: &LinearClassifier, params: &ModelParams, group: GroupKey) -> Result<f64> {
    let spread = score_spread(clf, params)?;
    let mu = params.mu(group.label, group.domain)?;
    Ok(gaussian_group_error(clf, mu, group.label, spread))
}

/// Maximum of the four group errors.
pub fn worst_group_error(clf: &LinearClassifier, params: &ModelParams) -> Result<f64> {
    let spread = score_spread(clf, params)?;
    let mut worst = f64::NEG_INFINITY;
    for domain in 0..2 {
        for label in 0..2 {
            let mu = params.mu(label, domain)?;
            worst = worst.max(gaussian_group_error(clf, mu, label, spread));
        }
    }
    Ok(worst)
}

/// Per-class and worst error on a held-out domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftErrors {
    pub e0: f64,
    pub e1: f64,
    pub worst: f64,
}

/// Exact class errors of `clf` on the new domain described by `target`.
pub fn shift_errors(
    clf: &LinearClassifier,
    params: &ModelParams,
    target: &ShiftTarget,
) -> Result<ShiftErrors> {
    let spread = score_spread(clf, params)?;
    let e0 = gaussian_group_error(clf, &target.mu_0star, 0, spread);
    let e1 = gaussian_group_error(clf, &target.mu_1star, 1, spread);
    Ok(ShiftErrors {
        e0,
        e1,
        worst: e0.max(e1),
    })
}

/// Monte Carlo estimate of one group error from `n` fresh group-conditional
/// draws, with its binomial standard error.
pub fn monte_carlo_error(
    clf: &LinearClassifier,
    params: &ModelParams,
    group: GroupKey,
    n: usize,
    rng: &mut SeededRng,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("monte carlo needs at least one draw"));
    }
    let mu = params.mu(group.label, group.domain)?;
    let chol_l = params.ops().chol_l();
    let dim = params.dim();
    let mut z = DVector::zeros(dim);
    let mut wrong = 0usize;
    for _ in 0..n {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let x = mu + &chol_l * &z;
        if clf.predict(&x) != group.label {
            wrong += 1;
        }
    }
    let estimate = wrong as f64 / n as f64;
    let stderr = (estimate * (1.0 - estimate) / n as f64).sqrt();
    Ok((estimate, stderr))
}
