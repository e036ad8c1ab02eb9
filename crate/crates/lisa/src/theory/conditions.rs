//! Regime conditions under which the selective-mixing classifiers provably
//! beat plain regression and vanilla mixup on worst-group error.
//!
//! The analysis leaves a constant next to α unspecified; callers supply that
//! slack directly as `margin` (the ξ bounds are tightened by it). Fixtures
//! and sweep grids are constructed so the conclusions are insensitive to the
//! exact constant.

use super::model::{derive_stats, ModelParams};
use super::target::ShiftTarget;
use crate::beta::BetaParams;
use crate::error::Result;

/// Evaluated quantities and pass/fail booleans for the regime conditions.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub xi: f64,
    pub norm_delta: f64,
    pub norm_delta_tilde: f64,
    /// E[λ²] / max(var(λ), ¼).
    pub moment_ratio: f64,
    /// ‖Δ̃‖_Σ² + ‖Δ̃‖_Σ·‖Δ‖_Σ, the level the moment ratio must reach.
    pub moment_requirement: f64,
    pub moment_ok: bool,
    /// min(‖Δ̃‖/‖Δ‖, ‖Δ‖/‖Δ̃‖) − margin.
    pub subpop_xi_bound: f64,
    pub subpop_xi_ok: bool,
    /// Subpopulation-shift regime: ξ bound and moment condition both hold.
    pub subpopulation_ok: bool,
    pub shift: Option<ShiftConditionReport>,
}

/// Domain-shift regime conditions for one target.
#[derive(Debug, Clone)]
pub struct ShiftConditionReport {
    pub xi_star: f64,
    pub gamma: f64,
    /// 0 ≤ ξ* ≤ γ·ξ.
    pub alignment_ok: bool,
    /// min((γ/2)·‖Δ̃‖/‖Δ‖, ‖Δ‖/‖Δ̃‖) − margin.
    pub xi_bound: f64,
    pub xi_ok: bool,
    /// Domain-shift regime: alignment, ξ bound and moment condition all hold.
    pub domain_shift_ok: bool,
}

/// Evaluate the regime conditions at the given margin; `target` adds the
/// domain-shift block.
pub fn check_theorem_conditions(
    params: &ModelParams,
    beta: &BetaParams,
    target: Option<&ShiftTarget>,
    margin: f64,
) -> Result<ConditionReport> {
    let stats = derive_stats(params)?;
    let moments = beta.moments();
    let ratio = stats.norm_delta_tilde / stats.norm_delta;
    let moment_ratio = moments.second_moment / moments.variance.max(0.25);
    let moment_requirement =
        stats.norm_delta_tilde * stats.norm_delta_tilde + stats.norm_delta_tilde * stats.norm_delta;
    let moment_ok = moment_ratio >= moment_requirement;
    let subpop_xi_bound = ratio.min(1.0 / ratio) - margin;
    let subpop_xi_ok = stats.xi < subpop_xi_bound;
    let shift = target.map(|t| {
        let xi_bound = (0.5 * t.gamma * ratio).min(1.0 / ratio) - margin;
        let xi_ok = stats.xi < xi_bound;
        let alignment_ok = t.xi_star >= 0.0 && t.xi_star <= t.gamma * stats.xi;
        ShiftConditionReport {
            xi_star: t.xi_star,
            gamma: t.gamma,
            alignment_ok,
            xi_bound,
            xi_ok,
            domain_shift_ok: alignment_ok && xi_ok && moment_ok,
        }
    });
    Ok(ConditionReport {
        xi: stats.xi,
        norm_delta: stats.norm_delta,
        norm_delta_tilde: stats.norm_delta_tilde,
        moment_ratio,
        moment_requirement,
        moment_ok,
        subpop_xi_bound,
        subpop_xi_ok,
        subpopulation_ok: subpop_xi_ok && moment_ok,
        shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moment_condition_arithmetic() {
        // Beta(2,2): E[λ²]/max(var,¼) = 0.3/0.25 = 1.2 against 0.16+0.20
        let params = ModelParams::canonical(0.1, 0.05, 0.5, 0.4, 2).unwrap();
        let beta = BetaParams::new(2.0, 2.0).unwrap();
        let report = check_theorem_conditions(&params, &beta, None, 0.0).unwrap();
        assert_relative_eq!(report.moment_ratio, 1.2, epsilon = 1e-12);
        assert_relative_eq!(report.moment_requirement, 0.36, epsilon = 1e-12);
        assert!(report.moment_ok);
    }

    #[test]
    fn boundary_xi_fails_with_positive_margin() {
        // equal norms: the bound is 1 − margin
        let params = ModelParams::canonical(0.99, 0.05, 0.6, 0.6, 2).unwrap();
        let beta = BetaParams::new(2.0, 2.0).unwrap();
        let loose = check_theorem_conditions(&params, &beta, None, 0.0).unwrap();
        assert_relative_eq!(loose.subpop_xi_bound, 1.0, epsilon = 1e-12);
        assert!(loose.subpop_xi_ok);
        let tight = check_theorem_conditions(&params, &beta, None, 0.05).unwrap();
        assert!(!tight.subpop_xi_ok);
    }

    #[test]
    fn f1_regime_holds_with_generous_margin() {
        let params = ModelParams::canonical(0.1, 0.05, 0.7, 0.7, 2).unwrap();
        let beta = BetaParams::new(2.0, 2.0).unwrap();
        let report = check_theorem_conditions(&params, &beta, None, 0.2).unwrap();
        assert!(report.subpopulation_ok, "{report:?}");
    }

    #[test]
    fn shift_block_checks_alignment_and_bound() {
        let params = ModelParams::canonical(0.1, 0.04, 0.6, 0.6, 3).unwrap();
        let beta = BetaParams::new(2.0, 2.0).unwrap();
        let good = ShiftTarget::canonical(&params, 0.9, 0.045, 0.6).unwrap();
        let report = check_theorem_conditions(&params, &beta, Some(&good), 0.2).unwrap();
        let shift = report.shift.unwrap();
        assert!(shift.alignment_ok && shift.xi_ok && shift.domain_shift_ok);

        // xi* above gamma*xi breaks the alignment
        let bad = ShiftTarget::canonical(&params, 0.9, 0.5, 0.6).unwrap();
        let report = check_theorem_conditions(&params, &beta, Some(&bad), 0.2).unwrap();
        assert!(!report.shift.unwrap().alignment_ok);
    }
}
