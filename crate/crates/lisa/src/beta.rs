//! Beta-distributed interpolation ratios and their exact moments.

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

/// Shape parameters of the Beta distribution the interpolation ratio λ is
/// drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Closed-form moments of Beta(α, β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "Beta shape parameters must be positive and finite, got ({alpha}, {beta})"
            )));
        }
        Ok(BetaParams { alpha, beta })
    }

    /// Exact mean, second moment and variance.
    pub fn moments(&self) -> BetaMoments {
        let (a, b) = (self.alpha, self.beta);
        let s = a + b;
        let mean = a / s;
        let second_moment = a * (a + 1.0) / (s * (s + 1.0));
        let variance = a * b / (s * s * (s + 1.0));
        BetaMoments {
            mean,
            second_moment,
            variance,
        }
    }

    /// One draw of λ, clamped to [0, 1] so extreme shapes cannot escape the
    /// support through rounding.
    pub fn sample(&self, rng: &mut SeededRng) -> f64 {
        let dist = rand_distr::Beta::new(self.alpha, self.beta).expect("validated at construction");
        dist.sample(rng).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rejects_nonpositive_shapes() {
        assert!(BetaParams::new(0.0, 1.0).is_err());
        assert!(BetaParams::new(1.0, -2.0).is_err());
        assert!(BetaParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn moments_2_2() {
        let m = BetaParams::new(2.0, 2.0).unwrap().moments();
        assert_relative_eq!(m.mean, 0.5, max_relative = 1e-15);
        assert_relative_eq!(m.second_moment, 0.3, max_relative = 1e-15);
        assert_relative_eq!(m.variance, 0.05, max_relative = 1e-15);
    }

    #[test]
    fn moments_1_1_uniform() {
        let m = BetaParams::new(1.0, 1.0).unwrap().moments();
        assert_relative_eq!(m.mean, 0.5, max_relative = 1e-15);
        assert_relative_eq!(m.second_moment, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(m.variance, 1.0 / 12.0, max_relative = 1e-15);
    }

    #[test]
    fn moments_5_1() {
        let m = BetaParams::new(5.0, 1.0).unwrap().moments();
        assert_relative_eq!(m.mean, 5.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(m.variance, 5.0 / 252.0, max_relative = 1e-15);
    }

    #[test]
    fn sample_mean_matches_closed_form() {
        let params = BetaParams::new(2.0, 2.0).unwrap();
        let mut rng = SeededRng::new(11, 0);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let l = params.sample(&mut rng);
            assert!((0.0..=1.0).contains(&l));
            sum += l;
            sum_sq += l * l;
        }
        let mean = sum / n as f64;
        let second = sum_sq / n as f64;
        // 3 sigma of the sample mean is ~0.00067; the looser 0.002 band is
        // the documented contract.
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
        assert!((second - 0.3).abs() < 0.002, "second moment {second}");
    }

    #[test]
    fn extreme_shapes_stay_in_unit_interval() {
        let params = BetaParams::new(1e8, 1e-3).unwrap();
        let mut rng = SeededRng::new(5, 0);
        for _ in 0..1000 {
            let l = params.sample(&mut rng);
            assert!((0.0..=1.0).contains(&l), "sample {l} escaped [0,1]");
        }
    }

    proptest! {
        #[test]
        fn variance_plus_mean_sq_is_second_moment(a in 0.05f64..50.0, b in 0.05f64..50.0) {
            let m = BetaParams::new(a, b).unwrap().moments();
            prop_assert!((m.variance + m.mean * m.mean - m.second_moment).abs() < 1e-15);
        }
    }
}
