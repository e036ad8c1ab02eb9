//! Domain predictability of scores: how well a softmax regression recovers
//! the domain from logits.

use super::scores::ScoreSet;
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use rand::seq::SliceRandom;

/// Train/validation/test fractions used by the metric by default.
pub const DEFAULT_SPLIT: (f64, f64, f64) = (0.6, 0.2, 0.2);

const RIDGE_GRID: [f64; 5] = [0.0, 1e-3, 1e-2, 1e-1, 1.0];
const GD_STEPS: usize = 400;
const GD_RATE: f64 = 0.5;

/// Accuracy of a softmax regression predicting the domain from the scores.
///
/// The set is re-split into train/validation/test by `split_seed`; features
/// are standardized on the train split; the ridge strength is chosen on the
/// validation split; the reported accuracy is on the test split. Lower means
/// more domain-invariant scores.
pub fn ip_adp(scores: &ScoreSet, split_seed: u64, split_fractions: (f64, f64, f64)) -> Result<f64> {
    let n_domains = scores.n_domains();
    if n_domains < 2 {
        return Err(Error::invalid("domain prediction needs at least 2 domains"));
    }
    let (f_train, f_val, f_test) = split_fractions;
    if f_train <= 0.0 || f_val <= 0.0 || f_test <= 0.0 || f_train + f_val + f_test > 1.0 + 1e-9 {
        return Err(Error::invalid(
            "split fractions must be positive and sum to at most 1",
        ));
    }
    let n = scores.len();
    let n_train = (f_train * n as f64).round() as usize;
    let n_val = (f_val * n as f64).round() as usize;
    if n_train < 2 || n_val < 1 || n_train + n_val >= n {
        return Err(Error::invalid("not enough samples for the requested split"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SeededRng::new(split_seed, 0);
    order.shuffle(&mut rng);
    let (train_idx, rest) = order.split_at(n_train);
    let (val_idx, test_idx) = rest.split_at(n_val);

    let dim = scores.dim();
    let mut mean = vec![0.0; dim];
    for &i in train_idx {
        for (m, v) in mean.iter_mut().zip(scores.score(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= train_idx.len() as f64;
    }
    let mut sd = vec![0.0; dim];
    for &i in train_idx {
        for ((s, v), m) in sd.iter_mut().zip(scores.score(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut sd {
        *s = (*s / train_idx.len() as f64).sqrt().max(1e-9);
    }
    let standardize = |i: usize| -> Vec<f64> {
        scores
            .score(i)
            .iter()
            .zip(&mean)
            .zip(&sd)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    };

    let accuracy = |w: &[f64], b: &[f64], idx: &[usize]| -> f64 {
        let mut hits = 0usize;
        for &i in idx {
            let x = standardize(i);
            let mut best = (0usize, f64::NEG_INFINITY);
            for d in 0..n_domains {
                let z: f64 = w[d * dim..(d + 1) * dim]
                    .iter()
                    .zip(&x)
                    .map(|(wi, xi)| wi * xi)
                    .sum::<f64>()
                    + b[d];
                if z > best.1 {
                    best = (d, z);
                }
            }
            hits += usize::from(best.0 == scores.domain(i));
        }
        hits as f64 / idx.len() as f64
    };

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for ridge in RIDGE_GRID {
        let mut w = vec![0.0; n_domains * dim];
        let mut b = vec![0.0; n_domains];
        for _ in 0..GD_STEPS {
            let mut gw = vec![0.0; n_domains * dim];
            let mut gb = vec![0.0; n_domains];
            for &i in train_idx {
                let x = standardize(i);
                let mut z: Vec<f64> = (0..n_domains)
                    .map(|d| {
                        w[d * dim..(d + 1) * dim]
                            .iter()
                            .zip(&x)
                            .map(|(wi, xi)| wi * xi)
                            .sum::<f64>()
                            + b[d]
                    })
                    .collect();
                let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for v in &mut z {
                    *v = (*v - m).exp();
                    sum += *v;
                }
                for (d, v) in z.iter().enumerate() {
                    let g = v / sum - f64::from(u8::from(d == scores.domain(i)));
                    for (gwi, xi) in gw[d * dim..(d + 1) * dim].iter_mut().zip(&x) {
                        *gwi += g * xi;
                    }
                    gb[d] += g;
                }
            }
            let inv_n = 1.0 / train_idx.len() as f64;
            for (wi, gwi) in w.iter_mut().zip(&gw) {
                *wi -= GD_RATE * (gwi * inv_n + ridge * *wi);
            }
            for (bi, gbi) in b.iter_mut().zip(&gb) {
                *bi -= GD_RATE * gbi * inv_n;
            }
        }
        let val_acc = accuracy(&w, &b, val_idx);
        if best.as_ref().is_none_or(|(acc, _, _)| val_acc > *acc) {
            best = Some((val_acc, w, b));
        }
    }
    let (_, w, b) = best.expect("ridge grid is non-empty");
    Ok(accuracy(&w, &b, test_idx))
}
