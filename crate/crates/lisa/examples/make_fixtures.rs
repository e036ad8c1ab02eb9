//! Rebuild the canonical model fixtures that ship with the crate.
//!
//! `f1.toml` sits in the subpopulation-shift regime (margin 0.2 with room to
//! spare); `f2.toml` adds a held-out domain target in the domain-shift
//! regime. Usage:
//!
//! ```text
//! cargo run --example make_fixtures [-- OUTPUT_DIR]
//! ```

use lisa::theory::{check_theorem_conditions, ModelFixture, ModelParams, ShiftTarget};
use lisa::BetaParams;

fn main() -> lisa::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/lisa/fixtures".to_string());
    std::fs::create_dir_all(&out_dir)?;
    let beta = BetaParams::new(2.0, 2.0)?;

    // F1: xi = 0.10, alpha = 0.05, both class differences at Sigma-norm 0.7
    let f1 = ModelParams::canonical(0.10, 0.05, 0.7, 0.7, 2)?;
    let report = check_theorem_conditions(&f1, &beta, None, 0.2)?;
    assert!(report.subpopulation_ok, "f1 left the regime: {report:?}");
    let f1_path = format!("{out_dir}/f1.toml");
    ModelFixture {
        params: f1,
        target_means: None,
    }
    .save(&f1_path)?;
    println!("wrote {f1_path}");

    // F2: the same point in dimension 3 plus a target with gamma = 0.9 and
    // xi* at half the alignment bound
    let params = ModelParams::canonical(0.10, 0.05, 0.7, 0.7, 3)?;
    let target = ShiftTarget::canonical(&params, 0.9, 0.045, 0.7)?;
    let report = check_theorem_conditions(&params, &beta, Some(&target), 0.2)?;
    let shift = report.shift.as_ref().expect("target present");
    assert!(shift.domain_shift_ok, "f2 left the regime: {report:?}");
    let f2_path = format!("{out_dir}/f2.toml");
    ModelFixture {
        params,
        target_means: Some((target.mu_0star.clone(), target.mu_1star.clone())),
    }
    .save(&f2_path)?;
    println!("wrote {f2_path}");
    Ok(())
}
