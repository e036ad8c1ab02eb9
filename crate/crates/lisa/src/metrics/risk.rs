//! Risk-variance and dummy-scale gradient-norm invariance metrics.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::train::{Loss, PredictiveModel};
use std::collections::BTreeMap;

/// Population variance of the per-domain risks.
pub fn ip_var(per_domain_risks: &BTreeMap<usize, f64>) -> Result<f64> {
    if per_domain_risks.len() < 2 {
        return Err(Error::invalid("risk variance needs at least 2 domains"));
    }
    let n = per_domain_risks.len() as f64;
    let mean = per_domain_risks.values().sum::<f64>() / n;
    Ok(per_domain_risks
        .values()
        .map(|r| (r - mean) * (r - mean))
        .sum::<f64>()
        / n)
}

/// Derivative of one domain's risk with respect to a multiplicative dummy
/// scale on the logits, at scale one: the mean of ⟨∂ℓ/∂z, z⟩ over the domain.
pub fn domain_scale_gradient(
    model: &PredictiveModel,
    dataset: &Dataset,
    domain: usize,
    loss: Loss,
) -> Result<f64> {
    let k = model.n_classes();
    let mut total = 0.0;
    let mut count = 0usize;
    for s in dataset.samples() {
        if s.domain != domain {
            continue;
        }
        let scores = model.forward(&s.features)?;
        let mut target = vec![0.0; k];
        target[s.label] = 1.0;
        let (_, dz) = crate::train::model_internals::loss_and_score_grad(
            model.kind(),
            loss,
            &scores,
            &target,
        );
        total += dz.iter().zip(&scores).map(|(g, z)| g * z).sum::<f64>();
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid(format!("domain {domain} has no samples")));
    }
    Ok(total / count as f64)
}

/// Mean over domains of the squared dummy-scale risk derivative: zero exactly
/// when every domain's risk is stationary in the shared logit scale.
pub fn ip_norm(model: &PredictiveModel, dataset: &Dataset, loss: Loss) -> Result<f64> {
    let mut total = 0.0;
    for domain in 0..dataset.n_domains() {
        let g = domain_scale_gradient(model, dataset, domain, loss)?;
        total += g * g;
    }
    Ok(total / dataset.n_domains() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use crate::rng::SeededRng;
    use crate::train::ModelKind;

    fn toy_model(params: &[f64]) -> PredictiveModel {
        let mut rng = SeededRng::new(1, 0);
        let mut m = PredictiveModel::new(ModelKind::Logistic, 2, 2, &mut rng).unwrap();
        m.set_params(params).unwrap();
        m
    }

    fn toy_dataset() -> Dataset {
        Dataset::new(
            vec![
                Sample::new(vec![0.5, -1.0], 0, 0),
                Sample::new(vec![-0.25, 2.0], 1, 0),
                Sample::new(vec![1.5, 0.5], 1, 1),
                Sample::new(vec![-1.0, -0.5], 0, 1),
            ],
            2,
            2,
            2,
        )
        .unwrap()
    }

    #[test]
    fn equal_risks_have_zero_variance() {
        let risks = BTreeMap::from([(0, 0.3), (1, 0.3), (2, 0.3)]);
        assert_eq!(ip_var(&risks).unwrap(), 0.0);
    }

    #[test]
    fn two_point_variance() {
        let risks = BTreeMap::from([(0, 0.0), (1, 1.0)]);
        assert!((ip_var(&risks).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn three_point_variance_by_direct_arithmetic() {
        let risks = BTreeMap::from([(0, 0.2), (1, 0.5), (2, 0.8)]);
        assert!((ip_var(&risks).unwrap() - 0.06).abs() < 1e-15);
    }

    #[test]
    fn single_domain_variance_is_an_error() {
        let risks = BTreeMap::from([(0, 0.3)]);
        assert!(ip_var(&risks).is_err());
    }

    #[test]
    fn zero_scores_are_stationary_in_the_scale() {
        // zero parameters: logits vanish, so ⟨∂ℓ/∂z, z⟩ = 0 in every domain
        let model = toy_model(&[0.0; 6]);
        let v = ip_norm(&model, &toy_dataset(), Loss::CrossEntropy).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn matches_central_finite_difference_in_the_scale() {
        let model = toy_model(&[0.8, -0.3, 0.1, 0.4, 0.05, -0.2]);
        let ds = toy_dataset();
        for loss in [Loss::CrossEntropy, Loss::Squared] {
            for domain in 0..2 {
                let analytic = domain_scale_gradient(&model, &ds, domain, loss).unwrap();
                // numeric risk at scaled logits
                let risk = |w: f64| -> f64 {
                    let mut total = 0.0;
                    let mut count = 0;
                    for s in ds.samples() {
                        if s.domain != domain {
                            continue;
                        }
                        let scores: Vec<f64> = model
                            .forward(&s.features)
                            .unwrap()
                            .iter()
                            .map(|z| w * z)
                            .collect();
                        let mut target = vec![0.0; 2];
                        target[s.label] = 1.0;
                        let (value, _) = crate::train::model_internals::loss_and_score_grad(
                            model.kind(),
                            loss,
                            &scores,
                            &target,
                        );
                        total += value;
                        count += 1;
                    }
                    total / count as f64
                };
                let step = 1e-5;
                let fd = (risk(1.0 + step) - risk(1.0 - step)) / (2.0 * step);
                let denom = analytic.abs().max(fd.abs()).max(1e-8);
                assert!(
                    (analytic - fd).abs() / denom < 1e-5,
                    "{loss:?} domain {domain}: analytic {analytic} fd {fd}"
                );
            }
        }
    }

    #[test]
    fn duplicating_samples_leaves_the_norm_unchanged() {
        let model = toy_model(&[0.8, -0.3, 0.1, 0.4, 0.05, -0.2]);
        let ds = toy_dataset();
        let doubled = Dataset::new(
            ds.samples().iter().chain(ds.samples()).cloned().collect(),
            2,
            2,
            2,
        )
        .unwrap();
        let a = ip_norm(&model, &ds, Loss::CrossEntropy).unwrap();
        let b = ip_norm(&model, &doubled, Loss::CrossEntropy).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn missing_domain_is_an_error() {
        let model = toy_model(&[0.0; 6]);
        let ds = Dataset::new(vec![Sample::new(vec![0.0, 0.0], 0, 0)], 2, 2, 2).unwrap();
        assert!(ip_norm(&model, &ds, Loss::CrossEntropy).is_err());
    }
}
