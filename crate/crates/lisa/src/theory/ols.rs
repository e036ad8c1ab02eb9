//! Finite-sample least squares and the per-scheme design constructions.
//!
//! [`empirical_ols`] is plain centered least squares. The design builders
//! realize each training scheme's estimator on a sampled dataset:
//!
//! - plain regression: raw features against 0/1 labels;
//! - vanilla mixup: independently re-paired rows, soft targets
//!   λ·y₁ + (1−λ)·y₂;
//! - intra-label mixing: for each row, a fresh pair drawn from that label's
//!   G- and R-domain pools, regressed against the original hard label;
//! - intra-domain mixing: within the row's domain, a class-1 and a class-0
//!   draw mixed with ratio λ, regressed against ỹ = λ.

use super::classifier::LinearClassifier;
use crate::beta::BetaParams;
use crate::data::{Dataset, GroupIndex, GroupKey};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;

/// Centered least squares: slope from the centered normal equations,
/// intercept `b0 = ȳ − x̄·b`.
pub fn empirical_ols(features: &DMatrix<f64>, targets: &DVector<f64>) -> Result<LinearClassifier> {
    let n = features.nrows();
    let p = features.ncols();
    if targets.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: targets.len(),
        });
    }
    if n <= p {
        return Err(Error::invalid(format!(
            "least squares needs n > p, got n = {n}, p = {p}"
        )));
    }
    let x_mean = features.row_mean();
    let y_mean = targets.mean();
    let mut centered = features.clone();
    for mut row in centered.row_iter_mut() {
        row -= &x_mean;
    }
    let centered_targets = targets.map(|v| v - y_mean);
    let gram = centered.transpose() * &centered;
    let chol = Cholesky::new(gram).ok_or(Error::RankDeficient)?;
    // Cholesky can slip through an exactly singular Gram with a pivot at the
    // rounding-noise floor (~sqrt(eps) relative); a collapsed pivot is still
    // rank deficiency
    let diag = chol.l_dirty().diagonal();
    let max_pivot = diag.amax();
    if diag.iter().any(|&d| d <= 1e-7 * max_pivot) {
        return Err(Error::RankDeficient);
    }
    let slope = chol.solve(&(centered.transpose() * centered_targets));
    let intercept = y_mean - x_mean.transpose().dot(&slope);
    LinearClassifier::new(slope, intercept)
}

/// Angle in radians between two slopes (Euclidean geometry).
pub fn angle_between(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let cos = a.dot(b) / (a.norm() * b.norm());
    cos.clamp(-1.0, 1.0).acos()
}

fn features_matrix(dataset: &Dataset) -> DMatrix<f64> {
    DMatrix::from_fn(dataset.len(), dataset.feature_dim(), |i, j| {
        dataset.sample(i).features[j]
    })
}

fn draw(pool: &[usize], rng: &mut SeededRng) -> usize {
    pool[rng.random_range(0..pool.len())]
}

fn group_pool(index: &GroupIndex, domain: usize, label: usize) -> Result<&[usize]> {
    index
        .group(GroupKey::new(domain, label))
        .ok_or(Error::EmptyGroup { domain, label })
}

/// Raw features against 0/1 labels.
pub fn erm_design(dataset: &Dataset) -> (DMatrix<f64>, DVector<f64>) {
    let x = features_matrix(dataset);
    let y = DVector::from_fn(dataset.len(), |i, _| dataset.sample(i).label as f64);
    (x, y)
}

/// Independently re-paired rows with soft targets.
pub fn vanilla_mixup_design(
    dataset: &Dataset,
    beta: &BetaParams,
    rng: &mut SeededRng,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = dataset.len();
    let p = dataset.feature_dim();
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let lambda = beta.sample(rng);
        let a = dataset.sample(rng.random_range(0..n));
        let b = dataset.sample(rng.random_range(0..n));
        for j in 0..p {
            x[(i, j)] = lambda * a.features[j] + (1.0 - lambda) * b.features[j];
        }
        y[i] = lambda * a.label as f64 + (1.0 - lambda) * b.label as f64;
    }
    (x, y)
}

/// Fresh same-label cross-domain pairs against the original hard labels.
pub fn lisa_l_design(
    dataset: &Dataset,
    index: &GroupIndex,
    beta: &BetaParams,
    rng: &mut SeededRng,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = dataset.len();
    let p = dataset.feature_dim();
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let label = dataset.sample(i).label;
        let pool_g = group_pool(index, super::model::DOMAIN_G, label)?;
        let pool_r = group_pool(index, super::model::DOMAIN_R, label)?;
        let lambda = beta.sample(rng);
        let a = dataset.sample(draw(pool_g, rng));
        let b = dataset.sample(draw(pool_r, rng));
        for j in 0..p {
            x[(i, j)] = lambda * a.features[j] + (1.0 - lambda) * b.features[j];
        }
        y[i] = label as f64;
    }
    Ok((x, y))
}

/// Within-domain cross-label pairs against the interpolation ratio.
pub fn lisa_d_design(
    dataset: &Dataset,
    index: &GroupIndex,
    beta: &BetaParams,
    rng: &mut SeededRng,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = dataset.len();
    let p = dataset.feature_dim();
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let domain = dataset.sample(i).domain;
        let pool_1 = group_pool(index, domain, 1)?;
        let pool_0 = group_pool(index, domain, 0)?;
        let lambda = beta.sample(rng);
        let a = dataset.sample(draw(pool_1, rng));
        let b = dataset.sample(draw(pool_0, rng));
        for j in 0..p {
            x[(i, j)] = lambda * a.features[j] + (1.0 - lambda) * b.features[j];
        }
        y[i] = lambda;
    }
    Ok((x, y))
}
