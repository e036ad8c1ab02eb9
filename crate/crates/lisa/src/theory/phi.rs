//! Standard normal CDF.

use std::f64::consts::FRAC_1_SQRT_2;

/// Φ(x), evaluated through the complementary error function so the tails keep
/// full double precision (absolute error below 1e-15 over the real line).
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}
