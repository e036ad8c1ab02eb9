//! Run both 100-point regime sweeps and summarize the worst-group orderings.
//!
//! ```text
//! cargo run --release --example theorem_sweeps
//! ```

use lisa::theory::sweep::{
    default_domain_shift_grid, default_subpopulation_grid, domain_shift_model, evaluate_point,
    subpopulation_model,
};
use lisa::BetaParams;

fn main() -> lisa::Result<()> {
    let beta = BetaParams::new(2.0, 2.0)?;
    let margin = 0.2;

    let grid = default_subpopulation_grid();
    let mut holds = 0usize;
    let mut min_gap = f64::INFINITY;
    for pt in &grid {
        let params = subpopulation_model(pt)?;
        let row = evaluate_point(&params, &beta, None, margin)?;
        assert!(row.report.subpopulation_ok);
        let gap = row.gap_lisa_l.min(row.gap_lisa_d);
        min_gap = min_gap.min(gap);
        holds += usize::from(gap > 0.0);
    }
    println!(
        "subpopulation sweep: selective mixing strictly better at {holds}/{} points (min gap {min_gap:.4})",
        grid.len()
    );

    let grid = default_domain_shift_grid();
    let mut holds = 0usize;
    let mut min_gap = f64::INFINITY;
    for pt in &grid {
        let (params, target) = domain_shift_model(pt)?;
        let row = evaluate_point(&params, &beta, Some(&target), margin)?;
        assert!(row.report.shift.as_ref().unwrap().domain_shift_ok);
        let gap = row
            .shift_gap_lisa_l
            .unwrap()
            .min(row.shift_gap_lisa_d.unwrap());
        min_gap = min_gap.min(gap);
        holds += usize::from(gap > 0.0);
    }
    println!(
        "domain-shift sweep:  selective mixing strictly better at {holds}/{} points (min gap {min_gap:.4})",
        grid.len()
    );
    Ok(())
}
