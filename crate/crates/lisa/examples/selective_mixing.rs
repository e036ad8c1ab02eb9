//! Build mixed batches under each pairing strategy and inspect the rows.
//!
//! ```text
//! cargo run --example selective_mixing
//! ```

use lisa::mixing::{build_batch_with_strategy, build_mixed_batch, LisaConfig, PairingStrategy};
use lisa::train::make_cmnist_analog;
use lisa::{build_group_index, BetaParams, SeededRng};

fn main() -> lisa::Result<()> {
    let mut rng = SeededRng::new(7, 0);
    let dataset = make_cmnist_analog(400, 0.8, 0.1, &mut rng)?;
    let index = build_group_index(&dataset);
    println!("dataset: {} samples, groups:", dataset.len());
    for (key, positions) in index.occupied() {
        println!("  {key}: {} samples", positions.len());
    }

    let config = LisaConfig::new(0.5, BetaParams::new(2.0, 2.0)?)?;
    let anchors: Vec<usize> = (0..8).collect();

    for strategy in [
        PairingStrategy::IntraLabel,
        PairingStrategy::IntraDomain,
        PairingStrategy::Vanilla,
        PairingStrategy::InGroup,
    ] {
        let batch =
            build_batch_with_strategy(&dataset, &index, &anchors, strategy, &config, &mut rng)?;
        println!("\n{strategy:?}: {} rows (one λ per batch)", batch.len());
        for row in batch.rows.iter().take(3) {
            let a = dataset.sample(row.anchor);
            let p = dataset.sample(row.partner);
            println!(
                "  λ={:.3} anchor(d={},y={}) + partner(d={},y={}) -> y_mix={:?}",
                row.lambda, a.domain, a.label, p.domain, p.label, row.y_mix
            );
        }
    }

    // the selective engine draws the strategy per batch
    println!("\nselective batches at p_sel = 0.5:");
    for _ in 0..5 {
        let batch = build_mixed_batch(&dataset, &index, &anchors, &config, &mut rng)?;
        println!(
            "  strategy {:?}, {} rows, {} skipped",
            batch.rows[0].strategy_used,
            batch.len(),
            batch.skipped
        );
    }
    Ok(())
}
