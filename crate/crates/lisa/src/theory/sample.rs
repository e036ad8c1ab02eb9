//! Finite-sample draws from the mixture.

use super::model::{ModelParams, DOMAIN_G, DOMAIN_R};
use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

/// Draw `n` samples: group membership from the (α, ½−α) proportions, features
/// from N(μ^(y,d), Σ) through the Cholesky factor. Domains are encoded
/// R → 0, G → 1.
pub fn sample_model(params: &ModelParams, n: usize, rng: &mut SeededRng) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("sample_model needs n >= 1"));
    }
    let alpha = params.alpha();
    // cumulative proportions over (y=0,R), (y=0,G), (y=1,R), (y=1,G)
    let cells = [
        (0usize, DOMAIN_R, alpha),
        (0, DOMAIN_G, 0.5 - alpha),
        (1, DOMAIN_R, 0.5 - alpha),
        (1, DOMAIN_G, alpha),
    ];
    let chol_l = params.ops().chol_l();
    let dim = params.dim();
    let mut z = DVector::zeros(dim);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = cells[3];
        for cell in cells {
            acc += cell.2;
            if u < acc {
                chosen = cell;
                break;
            }
        }
        let (label, domain, _) = chosen;
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let x = params.mu(label, domain)? + &chol_l * &z;
        samples.push(Sample::new(x.iter().cloned().collect(), label, domain));
    }
    Dataset::new(samples, dim, 2, 2)
}
