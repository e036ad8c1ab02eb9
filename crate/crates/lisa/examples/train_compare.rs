//! Desk-scale comparison of the training schemes on the spurious-correlation
//! task: train at strength 0.9, evaluate on an anti-correlated test set.
//!
//! ```text
//! cargo run --release --example train_compare
//! ```

use lisa::mixing::LisaConfig;
use lisa::train::{evaluate, make_cmnist_analog, train, Loss, ModelKind, TrainConfig, TrainMethod};
use lisa::{BetaParams, SeededRng};

fn main() -> lisa::Result<()> {
    let beta = BetaParams::new(2.0, 2.0)?;
    let methods: Vec<(&str, TrainMethod)> = vec![
        ("erm", TrainMethod::Erm),
        ("uw", TrainMethod::Uw),
        ("vanilla_mixup", TrainMethod::VanillaMixup(beta)),
        ("in_group_mixup", TrainMethod::InGroupMixup(beta)),
        ("lisa", TrainMethod::Lisa(LisaConfig::new(0.5, beta)?)),
    ];

    println!(
        "{:>16} {:>8} {:>12} {:>12}",
        "scheme", "seed", "avg acc", "worst group"
    );
    for seed in [0u64, 1, 2] {
        let root = SeededRng::new(7000, seed);
        let mut train_rng = root.child(0);
        let mut test_rng = root.child(1);
        let train_set = make_cmnist_analog(6000, 0.9, 0.25, &mut train_rng)?;
        let test_set = make_cmnist_analog(6000, 0.1, 0.25, &mut test_rng)?;
        for (name, method) in &methods {
            let config = TrainConfig {
                method: method.clone(),
                model: ModelKind::Logistic,
                loss: Loss::CrossEntropy,
                learning_rate: 0.15,
                epochs: 150,
                batch_size: 128,
                group_balanced: !matches!(method, TrainMethod::Erm | TrainMethod::Uw),
                seed: 7100 + seed,
                weight_decay: 1e-4,
            };
            let (model, _) = train(&train_set, &config)?;
            let report = evaluate(&model, &test_set)?;
            println!(
                "{name:>16} {seed:>8} {:>12.4} {:>12.4}",
                report.average_accuracy, report.worst_group_accuracy
            );
        }
        println!();
    }
    Ok(())
}
