//! Group-balanced anchor batches and inverse-frequency sample weights.

use crate::data::{Dataset, GroupIndex};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use rand::Rng;

/// Endless supply of anchor batches with ⌈batch_size/|groups|⌉ positions per
/// occupied group, drawn with replacement.
pub struct GroupBalancedBatches<'a> {
    index: &'a GroupIndex,
    per_group: usize,
    rng: SeededRng,
}

/// Anchor batches that sample every occupied group equally.
pub fn group_balanced_batches<'a>(
    index: &'a GroupIndex,
    batch_size: usize,
    rng: &SeededRng,
) -> Result<GroupBalancedBatches<'a>> {
    if batch_size == 0 {
        return Err(Error::invalid("batch_size must be positive"));
    }
    if index.n_groups() == 0 {
        return Err(Error::EmptyDataset);
    }
    let per_group = batch_size.div_ceil(index.n_groups());
    Ok(GroupBalancedBatches {
        index,
        per_group,
        rng: rng.clone(),
    })
}

impl Iterator for GroupBalancedBatches<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let mut batch = Vec::with_capacity(self.per_group * self.index.n_groups());
        for (_, positions) in self.index.occupied() {
            for _ in 0..self.per_group {
                batch.push(positions[self.rng.random_range(0..positions.len())]);
            }
        }
        Some(batch)
    }
}

/// Inverse group-frequency weights, normalized to mean one.
pub fn upweights(dataset: &Dataset, index: &GroupIndex) -> Vec<f64> {
    let mut weights = vec![0.0; dataset.len()];
    for (_, positions) in index.occupied() {
        let w = 1.0 / positions.len() as f64;
        for &i in positions {
            weights[i] = w;
        }
    }
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    for w in &mut weights {
        *w /= mean;
    }
    weights
}
