//! Selective interpolation: pairing strategies and mixed-batch construction.
//!
//! A mixed row interpolates an anchor with a partner chosen under one of five
//! pairing rules:
//!
//! - `IntraLabel`: same label, different domain — cancels domain-specific
//!   signal within a class.
//! - `IntraDomain`: same domain, different label — forces predictions to move
//!   with the interpolation ratio inside one domain.
//! - `IntraLabelAnyDomain`: same label, domain ignored.
//! - `Vanilla`: any pair.
//! - `InGroup`: same label and same domain.
//!
//! [`build_mixed_batch`] draws one Bernoulli(`p_sel`) strategy per batch
//! (intra-label on success, intra-domain otherwise) and one λ per batch by
//! default; per-row λ is available. Anchors whose constraint set is empty are
//! handled by the configured [`FallbackPolicy`].

use crate::beta::BetaParams;
use crate::data::{Dataset, GroupIndex, GroupKey};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Partner-selection rule for one mixed row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingStrategy {
    Vanilla,
    IntraLabel,
    IntraLabelAnyDomain,
    IntraDomain,
    InGroup,
}

/// What to do with an anchor that has no eligible partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FallbackPolicy {
    /// Drop the row and count it; the batch may come out smaller.
    #[default]
    Skip,
    /// Pair within the anchor's own group instead.
    FallbackInGroup,
    /// Surface the first missing partner as an error.
    Error,
}

/// Configuration of the selective-mixing engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LisaConfig {
    /// Probability of choosing intra-label over intra-domain for a batch.
    pub p_sel: f64,
    pub beta: BetaParams,
    /// One λ per batch (default) or one per row.
    pub per_batch_lambda: bool,
    pub fallback: FallbackPolicy,
    /// Replaces the Beta draw with a constant; `Some(1.0)` reproduces the
    /// anchor rows exactly.
    pub fixed_lambda: Option<f64>,
}

impl LisaConfig {
    pub fn new(p_sel: f64, beta: BetaParams) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_sel) {
            return Err(Error::invalid(format!(
                "p_sel must be in [0,1], got {p_sel}"
            )));
        }
        Ok(LisaConfig {
            p_sel,
            beta,
            per_batch_lambda: true,
            fallback: FallbackPolicy::Skip,
            fixed_lambda: None,
        })
    }

    fn draw_lambda(&self, rng: &mut SeededRng) -> f64 {
        match self.fixed_lambda {
            Some(l) => l.clamp(0.0, 1.0),
            None => self.beta.sample(rng),
        }
    }
}

/// One interpolated row with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedRow {
    pub x_mix: Vec<f64>,
    /// Soft label: a convex combination of two one-hot vectors.
    pub y_mix: Vec<f64>,
    pub lambda: f64,
    pub anchor: usize,
    pub partner: usize,
    pub strategy_used: PairingStrategy,
}

/// A batch of interpolated rows plus the count of anchors dropped by the
/// `Skip` fallback.
#[derive(Debug, Clone, Default)]
pub struct MixedBatch {
    pub rows: Vec<MixedRow>,
    pub skipped: usize,
}

impl MixedBatch {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Interpolate a feature pair and the matching one-hot labels:
/// `x_mix = λ·x_i + (1−λ)·x_j`, `y_mix = λ·onehot(y_i) + (1−λ)·onehot(y_j)`.
pub fn mix(
    x_i: &[f64],
    x_j: &[f64],
    y_i: usize,
    y_j: usize,
    n_classes: usize,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x_i.len() != x_j.len() {
        return Err(Error::DimensionMismatch {
            expected: x_i.len(),
            got: x_j.len(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!(
            "lambda must be in [0,1], got {lambda}"
        )));
    }
    if y_i >= n_classes || y_j >= n_classes {
        return Err(Error::invalid("label out of range for one-hot expansion"));
    }
    let x_mix = x_i
        .iter()
        .zip(x_j)
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect();
    let mut y_mix = vec![0.0; n_classes];
    y_mix[y_i] += lambda;
    y_mix[y_j] += 1.0 - lambda;
    Ok((x_mix, y_mix))
}

/// Uniform draw over the positions eligible to partner `anchor` under
/// `strategy`, or `None` when the constraint set is empty.
pub fn select_partner(
    dataset: &Dataset,
    index: &GroupIndex,
    anchor: usize,
    strategy: PairingStrategy,
    rng: &mut SeededRng,
) -> Option<usize> {
    let a = dataset.sample(anchor);
    match strategy {
        PairingStrategy::Vanilla => {
            let n = index.len();
            Some(rng.random_range(0..n))
        }
        PairingStrategy::IntraLabelAnyDomain => uniform_from(index.label_positions(a.label), rng),
        PairingStrategy::InGroup => {
            uniform_from(index.group(GroupKey::new(a.domain, a.label))?, rng)
        }
        PairingStrategy::IntraLabel => {
            // same label, any other domain
            let pools: Vec<&[usize]> = (0..index.n_domains())
                .filter(|&d| d != a.domain)
                .filter_map(|d| index.group(GroupKey::new(d, a.label)))
                .collect();
            uniform_from_pools(&pools, rng)
        }
        PairingStrategy::IntraDomain => {
            // same domain, any other label
            let pools: Vec<&[usize]> = (0..index.n_labels())
                .filter(|&y| y != a.label)
                .filter_map(|y| index.group(GroupKey::new(a.domain, y)))
                .collect();
            uniform_from_pools(&pools, rng)
        }
    }
}

fn uniform_from(pool: &[usize], rng: &mut SeededRng) -> Option<usize> {
    if pool.is_empty() {
        return None;
    }
    Some(pool[rng.random_range(0..pool.len())])
}

fn uniform_from_pools(pools: &[&[usize]], rng: &mut SeededRng) -> Option<usize> {
    let total: usize = pools.iter().map(|p| p.len()).sum();
    if total == 0 {
        return None;
    }
    let mut r = rng.random_range(0..total);
    for pool in pools {
        if r < pool.len() {
            return Some(pool[r]);
        }
        r -= pool.len();
    }
    unreachable!("r < total by construction")
}

/// Build a batch with a fixed pairing strategy for every anchor.
///
/// Partner draws are independent across rows (with replacement). λ is drawn
/// once per batch when `per_batch_lambda` is set, else once per row.
pub fn build_batch_with_strategy(
    dataset: &Dataset,
    index: &GroupIndex,
    anchors: &[usize],
    strategy: PairingStrategy,
    config: &LisaConfig,
    rng: &mut SeededRng,
) -> Result<MixedBatch> {
    let k = dataset.n_classes();
    let batch_lambda = config.per_batch_lambda.then(|| config.draw_lambda(rng));
    let mut batch = MixedBatch::default();
    for &anchor in anchors {
        if anchor >= dataset.len() {
            return Err(Error::invalid(format!(
                "anchor {anchor} out of range for dataset of size {}",
                dataset.len()
            )));
        }
        let (partner, used) = match select_partner(dataset, index, anchor, strategy, rng) {
            Some(p) => (p, strategy),
            None => match config.fallback {
                FallbackPolicy::Skip => {
                    batch.skipped += 1;
                    continue;
                }
                FallbackPolicy::FallbackInGroup => {
                    match select_partner(dataset, index, anchor, PairingStrategy::InGroup, rng) {
                        Some(p) => (p, PairingStrategy::InGroup),
                        None => {
                            batch.skipped += 1;
                            continue;
                        }
                    }
                }
                FallbackPolicy::Error => {
                    return Err(Error::NoEligiblePartner { anchor, strategy });
                }
            },
        };
        let lambda = batch_lambda.unwrap_or_else(|| config.draw_lambda(rng));
        let a = dataset.sample(anchor);
        let p = dataset.sample(partner);
        let (x_mix, y_mix) = mix(&a.features, &p.features, a.label, p.label, k, lambda)?;
        batch.rows.push(MixedRow {
            x_mix,
            y_mix,
            lambda,
            anchor,
            partner,
            strategy_used: used,
        });
    }
    if batch.skipped > 0 {
        log::debug!(
            "mixed batch dropped {} of {} anchors with no eligible {strategy:?} partner",
            batch.skipped,
            anchors.len()
        );
    }
    Ok(batch)
}

/// Selective mixing over one anchor batch: draws the strategy once per batch,
/// intra-label with probability `p_sel` and intra-domain otherwise.
pub fn build_mixed_batch(
    dataset: &Dataset,
    index: &GroupIndex,
    anchors: &[usize],
    config: &LisaConfig,
    rng: &mut SeededRng,
) -> Result<MixedBatch> {
    let intra_label = rng.random::<f64>() < config.p_sel;
    let strategy = if intra_label {
        PairingStrategy::IntraLabel
    } else {
        PairingStrategy::IntraDomain
    };
    build_batch_with_strategy(dataset, index, anchors, strategy, config, rng)
}
