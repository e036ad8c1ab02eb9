//! Kernel-density KL divergence between per-domain score distributions.
//!
//! Densities use a Gaussian kernel with Silverman's bandwidth per cell,
//! evaluated on a shared 512-point grid spanning the pooled sample range
//! padded by three bandwidths; KL is integrated by the trapezoid rule with
//! densities floored at 1e-12. Vector scores average the per-coordinate KL
//! (a product-kernel reading of the density).

use super::scores::ScoreSet;
use crate::error::{Error, Result};

const GRID_POINTS: usize = 512;
const DENSITY_FLOOR: f64 = 1e-12;

/// Silverman's rule: 0.9 · min(sd, iqr/1.34) · n^(−1/5).
fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let sd = var.sqrt();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantile = |q: f64| {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let mut scale = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if scale == 0.0 {
        // degenerate point mass; keep the density finite
        scale = 1e-9;
    }
    0.9 * scale * n.powf(-0.2)
}

fn density_on_grid(xs: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (xs.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&g| {
            let sum: f64 = xs
                .iter()
                .map(|&x| {
                    let z = (g - x) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .sum();
            (norm * sum).max(DENSITY_FLOOR)
        })
        .collect()
}

fn kl_trapezoid(p: &[f64], q: &[f64], step: f64) -> f64 {
    let integrand: Vec<f64> = p
        .iter()
        .zip(q)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .collect();
    let mut total = 0.0;
    for w in integrand.windows(2) {
        total += 0.5 * (w[0] + w[1]) * step;
    }
    total
}

/// KL(P‖Q) between two scalar samples through the shared-grid KDE estimate.
pub fn kl_between_samples(p_samples: &[f64], q_samples: &[f64]) -> Result<f64> {
    if p_samples.len() < 2 || q_samples.len() < 2 {
        return Err(Error::invalid("KDE needs at least 2 samples per side"));
    }
    let hp = silverman_bandwidth(p_samples);
    let hq = silverman_bandwidth(q_samples);
    let pad = 3.0 * hp.max(hq);
    let lo = p_samples
        .iter()
        .chain(q_samples)
        .cloned()
        .fold(f64::INFINITY, f64::min)
        - pad;
    let hi = p_samples
        .iter()
        .chain(q_samples)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        + pad;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + step * i as f64).collect();
    let p = density_on_grid(p_samples, hp, &grid);
    let q = density_on_grid(q_samples, hq, &grid);
    Ok(kl_trapezoid(&p, &q, step))
}

/// Pairwise KL of per-domain score densities, conditioned on the label:
/// (1/(|Y|·|D|²)) Σ_y Σ_{d,d'} KL(P(g^y|d) ‖ P(g^y|d')), with the d = d'
/// terms contributing zero. Every (label, domain) cell needs at least 10
/// samples.
pub fn pairwise_kl(scores: &ScoreSet) -> Result<f64> {
    let n_labels = scores.n_labels();
    let n_domains = scores.n_domains();
    if n_domains < 2 {
        return Err(Error::invalid("pairwise KL needs at least 2 domains"));
    }
    let dim = scores.dim();
    let mut total = 0.0;
    for label in 0..n_labels {
        let cells: Vec<Vec<usize>> = (0..n_domains).map(|d| scores.cell(label, d)).collect();
        for (d, cell) in cells.iter().enumerate() {
            if cell.len() < 10 {
                return Err(Error::EmptyGroup { domain: d, label });
            }
        }
        for coord in 0..dim {
            let samples: Vec<Vec<f64>> = cells
                .iter()
                .map(|cell| cell.iter().map(|&i| scores.score(i)[coord]).collect())
                .collect();
            let bandwidths: Vec<f64> = samples.iter().map(|s| silverman_bandwidth(s)).collect();
            // shared grid per (label, coordinate), pooled over domains
            let pad = 3.0 * bandwidths.iter().cloned().fold(0.0f64, f64::max);
            let lo = samples
                .iter()
                .flatten()
                .cloned()
                .fold(f64::INFINITY, f64::min)
                - pad;
            let hi = samples
                .iter()
                .flatten()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max)
                + pad;
            let step = (hi - lo) / (GRID_POINTS - 1) as f64;
            let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + step * i as f64).collect();
            let densities: Vec<Vec<f64>> = samples
                .iter()
                .zip(&bandwidths)
                .map(|(s, &h)| density_on_grid(s, h, &grid))
                .collect();
            for d in 0..n_domains {
                for d2 in 0..n_domains {
                    if d == d2 {
                        continue;
                    }
                    total += kl_trapezoid(&densities[d], &densities[d2], step) / dim as f64;
                }
            }
        }
    }
    Ok(total / (n_labels * n_domains * n_domains) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, mean: f64, rng: &mut SeededRng) -> Vec<f64> {
        (0..n)
            .map(|_| mean + rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    #[test]
    fn identical_samples_have_zero_kl() {
        let mut rng = SeededRng::new(1, 0);
        let xs = gaussian(2000, 0.0, &mut rng);
        let kl = kl_between_samples(&xs, &xs).unwrap();
        assert!(kl.abs() <= 1e-9, "KL = {kl}");
    }

    #[test]
    fn kl_grows_with_the_mean_gap() {
        let mut rng = SeededRng::new(2, 0);
        let base = gaussian(4000, 0.0, &mut rng);
        let mut last = -1.0;
        for gap in [0.5, 1.0, 2.0] {
            let shifted = gaussian(4000, gap, &mut rng);
            let kl = kl_between_samples(&base, &shifted).unwrap();
            assert!(kl > last, "KL not monotone at gap {gap}: {kl} <= {last}");
            last = kl;
        }
    }

    #[test]
    fn symmetrized_kl_matches_the_gaussian_closed_form() {
        // KL(N(0,1) || N(1,1)) = KL(N(1,1) || N(0,1)) = 1/2
        let mut rng = SeededRng::new(3, 0);
        let p = gaussian(10_000, 0.0, &mut rng);
        let q = gaussian(10_000, 1.0, &mut rng);
        let sym = 0.5 * (kl_between_samples(&p, &q).unwrap() + kl_between_samples(&q, &p).unwrap());
        assert!((sym - 0.5).abs() / 0.5 < 0.15, "symmetrized KL = {sym}");
    }

    #[test]
    fn pairwise_kl_is_the_normalized_pair_sum() {
        let mut rng = SeededRng::new(4, 0);
        let p = gaussian(500, 0.0, &mut rng);
        let q = gaussian(500, 1.0, &mut rng);
        let scores: Vec<Vec<f64>> = p.iter().chain(&q).map(|&v| vec![v]).collect();
        let labels = vec![0usize; 1000];
        let domains: Vec<usize> = (0..1000).map(|i| usize::from(i >= 500)).collect();
        let set = ScoreSet::new(scores, labels, domains).unwrap();
        let total = pairwise_kl(&set).unwrap();
        // one label, two domains: (KL(P||Q) + KL(Q||P)) / 4, positive
        assert!(total > 0.05, "pairwise KL = {total}");
    }

    #[test]
    fn identical_domain_distributions_sit_at_the_floor() {
        let mut rng = SeededRng::new(5, 0);
        let xs = gaussian(600, 0.0, &mut rng);
        // both domains hold the same multiset
        let scores: Vec<Vec<f64>> = xs.iter().chain(&xs).map(|&v| vec![v]).collect();
        let labels = vec![0usize; 1200];
        let domains: Vec<usize> = (0..1200).map(|i| usize::from(i >= 600)).collect();
        let set = ScoreSet::new(scores, labels, domains).unwrap();
        let total = pairwise_kl(&set).unwrap();
        assert!(total.abs() <= 1e-9, "pairwise KL = {total}");
    }

    #[test]
    fn small_cell_is_an_error() {
        let scores: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let labels = vec![0usize; 30];
        let domains: Vec<usize> = (0..30).map(|i| usize::from(i < 5)).collect();
        let set = ScoreSet::new(scores, labels, domains).unwrap();
        assert!(matches!(pairwise_kl(&set), Err(Error::EmptyGroup { .. })));
    }
}
