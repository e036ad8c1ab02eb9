//! Closed-form population analysis of the f1 fixture: derived statistics,
//! the four schemes' classifiers, exact per-group errors and the regime
//! report.
//!
//! ```text
//! cargo run --example theory_oracle
//! ```

use lisa::data::GroupKey;
use lisa::theory::{
    check_theorem_conditions, derive_stats, group_error, population_classifier, worst_group_error,
    MethodTag, ModelFixture,
};
use lisa::BetaParams;

fn main() -> lisa::Result<()> {
    let fixture = ModelFixture::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/f1.toml"))?;
    let params = fixture.params;
    let beta = BetaParams::new(2.0, 2.0)?;

    let stats = derive_stats(&params)?;
    println!("derived statistics:");
    println!("  xi                = {:.6}", stats.xi);
    println!("  ||delta||_Sigma   = {:.6}", stats.norm_delta);
    println!("  ||delta~||_Sigma  = {:.6}", stats.norm_delta_tilde);

    let report = check_theorem_conditions(&params, &beta, None, 0.2)?;
    println!("\nregime report (margin 0.2):");
    println!(
        "  xi bound {:.4}  -> xi condition {}",
        report.subpop_xi_bound,
        if report.subpop_xi_ok {
            "holds"
        } else {
            "fails"
        }
    );
    println!(
        "  moment ratio {:.4} vs requirement {:.4} -> {}",
        report.moment_ratio,
        report.moment_requirement,
        if report.moment_ok { "holds" } else { "fails" }
    );

    println!("\nper-group errors (rows: scheme; columns: (d,y)):");
    print!("{:>12}", "");
    for domain in 0..2 {
        for label in 0..2 {
            print!("{:>12}", format!("({domain},{label})"));
        }
    }
    println!("{:>12}", "worst");
    for method in MethodTag::ALL {
        let clf = population_classifier(&params, method, &beta)?;
        print!("{:>12}", method.to_string());
        for domain in 0..2 {
            for label in 0..2 {
                let e = group_error(&clf, &params, GroupKey::new(domain, label))?;
                print!("{e:>12.6}");
            }
        }
        println!("{:>12.6}", worst_group_error(&clf, &params)?);
    }
    Ok(())
}
