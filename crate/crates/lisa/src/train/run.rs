//! SGD training under each scheme, and worst-group evaluation.

use super::batching::{group_balanced_batches, upweights};
use super::model::{loss_and_grad, Loss, ModelKind, PredictiveModel};
use crate::beta::BetaParams;
use crate::data::{build_group_index, Dataset, GroupKey};
use crate::error::{Error, Result};
use crate::mixing::{build_batch_with_strategy, build_mixed_batch, LisaConfig, PairingStrategy};
use crate::rng::SeededRng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Training scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMethod {
    /// Plain minibatch SGD on raw rows.
    Erm,
    /// Raw rows weighted by inverse group frequency.
    Uw,
    /// Unselective pairing.
    VanillaMixup(BetaParams),
    /// Same-group pairing.
    InGroupMixup(BetaParams),
    /// Selective pairing: intra-label with probability `p_sel`, intra-domain
    /// otherwise.
    Lisa(LisaConfig),
}

impl TrainMethod {
    pub fn name(&self) -> &'static str {
        match self {
            TrainMethod::Erm => "erm",
            TrainMethod::Uw => "uw",
            TrainMethod::VanillaMixup(_) => "vanilla_mixup",
            TrainMethod::InGroupMixup(_) => "in_group_mixup",
            TrainMethod::Lisa(_) => "lisa",
        }
    }
}

/// Full training configuration. Mixing methods draw anchors group-balanced
/// when `group_balanced` is set; raw-row methods shuffle the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub method: TrainMethod,
    pub model: ModelKind,
    pub loss: Loss,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub group_balanced: bool,
    pub seed: u64,
    pub weight_decay: f64,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be finite and >= 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::invalid("weight_decay must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Per-group accuracies and summary rates on one dataset.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub per_group_accuracy: BTreeMap<GroupKey, f64>,
    /// Overall accuracy (group accuracies weighted by group size).
    pub average_accuracy: f64,
    /// Minimum group accuracy.
    pub worst_group_accuracy: f64,
    /// 0-1 risk per occupied domain.
    pub per_domain_risk: BTreeMap<usize, f64>,
}

/// Train a fresh model on `dataset`. Deterministic for a fixed config: the
/// initializer and the batch/mixing draws run on seed-derived streams.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(PredictiveModel, Vec<f64>)> {
    config.validate()?;
    let root = SeededRng::new(config.seed, 0);
    let mut init_rng = root.child(1);
    let mut data_rng = root.child(2);
    let mut model = PredictiveModel::new(
        config.model,
        dataset.feature_dim(),
        dataset.n_classes(),
        &mut init_rng,
    )?;
    let index = build_group_index(dataset);
    let sample_weights = match config.method {
        TrainMethod::Uw => Some(upweights(dataset, &index)),
        _ => None,
    };
    let k = dataset.n_classes();
    let batches_per_epoch = (dataset.len() / config.batch_size).max(1);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut positions: Vec<usize> = (0..dataset.len()).collect();
    type BatchPayload = (Vec<Vec<f64>>, Vec<Vec<f64>>, Option<Vec<f64>>);
    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut batches_seen = 0usize;
        let anchor_batches: Vec<Vec<usize>> = if config.group_balanced {
            group_balanced_batches(&index, config.batch_size, &data_rng)?
                .take(batches_per_epoch)
                .collect()
        } else {
            positions.shuffle(&mut data_rng);
            positions
                .chunks(config.batch_size)
                .map(|c| c.to_vec())
                .collect()
        };
        if config.group_balanced {
            // the iterator above cloned data_rng; advance the real stream so
            // epochs do not repeat draws
            data_rng = data_rng.child(3 + epoch as u64);
        }
        for anchors in anchor_batches {
            let (features, targets, weights): BatchPayload = match &config.method {
                TrainMethod::Erm | TrainMethod::Uw => {
                    let features: Vec<Vec<f64>> = anchors
                        .iter()
                        .map(|&i| dataset.sample(i).features.clone())
                        .collect();
                    let targets: Vec<Vec<f64>> = anchors
                        .iter()
                        .map(|&i| {
                            let mut t = vec![0.0; k];
                            t[dataset.sample(i).label] = 1.0;
                            t
                        })
                        .collect();
                    let weights = sample_weights
                        .as_ref()
                        .map(|w| anchors.iter().map(|&i| w[i]).collect());
                    (features, targets, weights)
                }
                TrainMethod::VanillaMixup(beta) | TrainMethod::InGroupMixup(beta) => {
                    let strategy = if matches!(config.method, TrainMethod::VanillaMixup(_)) {
                        PairingStrategy::Vanilla
                    } else {
                        PairingStrategy::InGroup
                    };
                    let cfg = LisaConfig::new(0.5, *beta)?;
                    let batch = build_batch_with_strategy(
                        dataset,
                        &index,
                        &anchors,
                        strategy,
                        &cfg,
                        &mut data_rng,
                    )?;
                    let features = batch.rows.iter().map(|r| r.x_mix.clone()).collect();
                    let targets = batch.rows.iter().map(|r| r.y_mix.clone()).collect();
                    (features, targets, None)
                }
                TrainMethod::Lisa(cfg) => {
                    let batch = build_mixed_batch(dataset, &index, &anchors, cfg, &mut data_rng)?;
                    let features = batch.rows.iter().map(|r| r.x_mix.clone()).collect();
                    let targets = batch.rows.iter().map(|r| r.y_mix.clone()).collect();
                    (features, targets, None)
                }
            };
            if features.is_empty() {
                continue;
            }
            let (loss, grad) =
                loss_and_grad(&model, &features, &targets, config.loss, weights.as_deref())?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            let lr = config.learning_rate;
            let wd = config.weight_decay;
            for (theta, g) in model.params_mut().iter_mut().zip(&grad) {
                *theta -= lr * (g + wd * *theta);
            }
            epoch_loss += loss;
            batches_seen += 1;
        }
        if model.params().iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        epoch_losses.push(if batches_seen > 0 {
            epoch_loss / batches_seen as f64
        } else {
            f64::NAN
        });
    }
    Ok((model, epoch_losses))
}

/// Argmax predictions with exact per-group accounting.
pub fn evaluate(model: &PredictiveModel, dataset: &Dataset) -> Result<EvalReport> {
    let mut group_hits: BTreeMap<GroupKey, (usize, usize)> = BTreeMap::new();
    let mut domain_hits: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut total_hits = 0usize;
    for s in dataset.samples() {
        let scores = model.forward(&s.features)?;
        let pred = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let hit = usize::from(pred == s.label);
        total_hits += hit;
        let g = group_hits
            .entry(GroupKey::new(s.domain, s.label))
            .or_insert((0, 0));
        g.0 += hit;
        g.1 += 1;
        let d = domain_hits.entry(s.domain).or_insert((0, 0));
        d.0 += hit;
        d.1 += 1;
    }
    let per_group_accuracy: BTreeMap<GroupKey, f64> = group_hits
        .into_iter()
        .map(|(k, (hits, n))| (k, hits as f64 / n as f64))
        .collect();
    let worst_group_accuracy = per_group_accuracy
        .values()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let per_domain_risk = domain_hits
        .into_iter()
        .map(|(d, (hits, n))| (d, 1.0 - hits as f64 / n as f64))
        .collect();
    Ok(EvalReport {
        per_group_accuracy,
        average_accuracy: total_hits as f64 / dataset.len() as f64,
        worst_group_accuracy,
        per_domain_risk,
    })
}
