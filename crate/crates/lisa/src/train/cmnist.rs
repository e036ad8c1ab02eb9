//! A two-feature synthetic task with the colored-digit spurious-correlation
//! geometry.
//!
//! Feature 0 carries the invariant signal (its sign follows the clean label
//! before noise); feature 1 carries the spurious signal (its sign follows the
//! domain). Labels are flipped with probability `label_noise`, and the domain
//! then matches the stored label with probability `spurious_strength` — so on
//! an anti-correlated test set the spurious feature points the wrong way
//! while the invariant feature keeps its meaning.

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Mean magnitude of the invariant feature.
pub const INVARIANT_MEAN: f64 = 1.0;
/// Mean magnitude of the spurious feature; stronger than the invariant one so
/// shortcut learning is tempting.
pub const SPURIOUS_MEAN: f64 = 2.0;

/// Generate `n` samples at the given spurious-correlation strength
/// P(domain = label) and label-flip probability.
pub fn make_cmnist_analog(
    n: usize,
    spurious_strength: f64,
    label_noise: f64,
    rng: &mut SeededRng,
) -> Result<Dataset> {
    if n < 100 {
        return Err(Error::invalid("make_cmnist_analog needs n >= 100"));
    }
    if !(0.0..=1.0).contains(&spurious_strength) {
        return Err(Error::invalid("spurious_strength must lie in [0,1]"));
    }
    if !(0.0..=1.0).contains(&label_noise) {
        return Err(Error::invalid("label_noise must lie in [0,1]"));
    }
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let clean = usize::from(rng.random::<f64>() < 0.5);
        let label = if rng.random::<f64>() < label_noise {
            1 - clean
        } else {
            clean
        };
        let domain = if rng.random::<f64>() < spurious_strength {
            label
        } else {
            1 - label
        };
        let invariant =
            INVARIANT_MEAN * (2.0 * clean as f64 - 1.0) + rng.sample::<f64, _>(StandardNormal);
        let spurious =
            SPURIOUS_MEAN * (2.0 * domain as f64 - 1.0) + rng.sample::<f64, _>(StandardNormal);
        samples.push(Sample::new(vec![invariant, spurious], label, domain));
    }
    Dataset::new(samples, 2, 2, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{cramers_v, ContingencyTable};

    fn v_at(strength: f64, noise: f64) -> f64 {
        let mut rng = SeededRng::new(9, 0);
        let ds = make_cmnist_analog(100_000, strength, noise, &mut rng).unwrap();
        let table = ContingencyTable::from_dataset(&ds);
        cramers_v(&table).unwrap()
    }

    #[test]
    fn eighty_twenty_proportions_give_point_six() {
        let v = v_at(0.8, 0.0);
        assert!((v - 0.6).abs() < 0.01, "V = {v}");
    }

    #[test]
    fn balanced_domains_are_independent() {
        let v = v_at(0.5, 0.0);
        assert!(v < 0.01, "V = {v}");
    }

    #[test]
    fn perfect_association_gives_one() {
        let v = v_at(1.0, 0.0);
        assert!((v - 1.0).abs() < 1e-12, "V = {v}");
    }

    #[test]
    fn domain_matches_label_at_requested_rate_under_noise() {
        let mut rng = SeededRng::new(10, 0);
        let ds = make_cmnist_analog(100_000, 0.9, 0.25, &mut rng).unwrap();
        let agree =
            ds.samples().iter().filter(|s| s.domain == s.label).count() as f64 / ds.len() as f64;
        assert!((agree - 0.9).abs() < 0.005, "agreement {agree}");
    }

    #[test]
    fn rejects_tiny_n() {
        let mut rng = SeededRng::new(1, 0);
        assert!(make_cmnist_analog(50, 0.5, 0.0, &mut rng).is_err());
    }
}
