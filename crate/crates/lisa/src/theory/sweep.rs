//! Grid sweeps over the canonical mixture comparing the four schemes.

use super::classifier::{population_classifier, MethodTag};
use super::conditions::{check_theorem_conditions, ConditionReport};
use super::errors::{shift_errors, worst_group_error};
use super::model::ModelParams;
use super::target::ShiftTarget;
use crate::beta::BetaParams;
use crate::error::Result;
use serde::{Deserialize, Serialize};

/// One subpopulation-shift grid point: canonical-model coordinates.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SubpopulationPoint {
    pub xi: f64,
    pub alpha: f64,
    pub delta_norm: f64,
    pub delta_tilde_norm: f64,
}

/// One domain-shift grid point: a subpopulation point plus target
/// correlations. `xi_star_frac` positions ξ* inside [0, γ·ξ].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DomainShiftPoint {
    pub base: SubpopulationPoint,
    pub gamma: f64,
    pub xi_star_frac: f64,
    pub offset_norm: f64,
}

/// Worst-group errors of the four schemes at one grid point, with the regime
/// report and the gaps min(plain, mixup) − each selective variant.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub report: ConditionReport,
    pub worst_erm: f64,
    pub worst_mixup: f64,
    pub worst_lisa_l: f64,
    pub worst_lisa_d: f64,
    pub gap_lisa_l: f64,
    pub gap_lisa_d: f64,
    /// Shift worst errors (erm, mixup, lisa_l, lisa_d) when a target is set.
    pub shift_worst: Option<[f64; 4]>,
    pub shift_gap_lisa_l: Option<f64>,
    pub shift_gap_lisa_d: Option<f64>,
}

/// Evaluate every scheme's worst-group error (and shift error, when a target
/// is given) on one model.
pub fn evaluate_point(
    params: &ModelParams,
    beta: &BetaParams,
    target: Option<&ShiftTarget>,
    margin: f64,
) -> Result<SweepRow> {
    let report = check_theorem_conditions(params, beta, target, margin)?;
    let mut worst = [0.0f64; 4];
    let mut shift_worst = target.map(|_| [0.0f64; 4]);
    for (k, method) in MethodTag::ALL.iter().enumerate() {
        let clf = population_classifier(params, *method, beta)?;
        worst[k] = worst_group_error(&clf, params)?;
        if let (Some(t), Some(sw)) = (target, shift_worst.as_mut()) {
            sw[k] = shift_errors(&clf, params, t)?.worst;
        }
    }
    let baseline = worst[0].min(worst[1]);
    let shift_baseline = shift_worst.map(|sw| sw[0].min(sw[1]));
    Ok(SweepRow {
        report,
        worst_erm: worst[0],
        worst_mixup: worst[1],
        worst_lisa_l: worst[2],
        worst_lisa_d: worst[3],
        gap_lisa_l: baseline - worst[2],
        gap_lisa_d: baseline - worst[3],
        shift_worst,
        shift_gap_lisa_l: shift_baseline.zip(shift_worst).map(|(b, sw)| b - sw[2]),
        shift_gap_lisa_d: shift_baseline.zip(shift_worst).map(|(b, sw)| b - sw[3]),
    })
}

/// Build the canonical model for a subpopulation point (dim 2).
pub fn subpopulation_model(pt: &SubpopulationPoint) -> Result<ModelParams> {
    ModelParams::canonical(pt.xi, pt.alpha, pt.delta_norm, pt.delta_tilde_norm, 2)
}

/// Build the canonical model and target for a domain-shift point (dim 3; the
/// target correlations need a direction outside the Δ/Δ̃ plane).
pub fn domain_shift_model(pt: &DomainShiftPoint) -> Result<(ModelParams, ShiftTarget)> {
    let params = ModelParams::canonical(
        pt.base.xi,
        pt.base.alpha,
        pt.base.delta_norm,
        pt.base.delta_tilde_norm,
        3,
    )?;
    let xi_star = pt.xi_star_frac * pt.gamma * pt.base.xi;
    let target = ShiftTarget::canonical(&params, pt.gamma, xi_star, pt.offset_norm)?;
    Ok((params, target))
}

/// 100 canonical subpopulation-shift points that pass the regime conditions
/// at margin 0.2 with room to spare: ξ well below the margined bound and
/// small minority proportions.
pub fn default_subpopulation_grid() -> Vec<SubpopulationPoint> {
    let xis: Vec<f64> = (0..10).map(|i| -0.30 + 0.05 * i as f64).collect();
    let alphas = [0.02, 0.04];
    let norms = [(0.5, 0.5), (0.6, 0.6), (0.7, 0.7), (0.5, 0.6), (0.6, 0.5)];
    let mut grid = Vec::with_capacity(100);
    for &xi in &xis {
        for &alpha in &alphas {
            for &(delta_norm, delta_tilde_norm) in &norms {
                grid.push(SubpopulationPoint {
                    xi,
                    alpha,
                    delta_norm,
                    delta_tilde_norm,
                });
            }
        }
    }
    grid
}

/// 100 canonical domain-shift points satisfying 0 ≤ ξ* ≤ γ·ξ and the
/// margined ξ bound.
pub fn default_domain_shift_grid() -> Vec<DomainShiftPoint> {
    let xis = [0.04, 0.07, 0.10, 0.13, 0.16];
    let alphas = [0.02, 0.04];
    let gammas = [0.75, 0.9];
    // fractions stay off the 0 and γ·ξ boundaries, where the strict
    // alignment check would hinge on rounding noise
    let fracs = [0.05, 0.275, 0.5, 0.725, 0.95];
    let mut grid = Vec::with_capacity(100);
    for &xi in &xis {
        for &alpha in &alphas {
            for &gamma in &gammas {
                for &frac in &fracs {
                    grid.push(DomainShiftPoint {
                        base: SubpopulationPoint {
                            xi,
                            alpha,
                            delta_norm: 0.6,
                            delta_tilde_norm: 0.6,
                        },
                        gamma,
                        xi_star_frac: frac,
                        offset_norm: 0.6,
                    });
                }
            }
        }
    }
    grid
}
