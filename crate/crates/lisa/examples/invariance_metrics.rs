//! Predictor-invariance metrics of trained models: domain predictability of
//! logits, pairwise KL of per-domain logit densities, risk variance and the
//! dummy-scale gradient norm, plus the Cramér's V of the training split.
//!
//! ```text
//! cargo run --release --example invariance_metrics
//! ```

use lisa::metrics::{
    cramers_v, ip_adp, ip_norm, ip_var, pairwise_kl, ContingencyTable, ScoreSet, DEFAULT_SPLIT,
};
use lisa::mixing::LisaConfig;
use lisa::train::{evaluate, make_cmnist_analog, train, Loss, ModelKind, TrainConfig, TrainMethod};
use lisa::{BetaParams, SeededRng};

fn main() -> lisa::Result<()> {
    let beta = BetaParams::new(2.0, 2.0)?;
    let root = SeededRng::new(7000, 0);
    let mut train_rng = root.child(0);
    let mut test_rng = root.child(1);
    let train_set = make_cmnist_analog(6000, 0.9, 0.25, &mut train_rng)?;
    let test_set = make_cmnist_analog(6000, 0.1, 0.25, &mut test_rng)?;
    let v = cramers_v(&ContingencyTable::from_dataset(&train_set))?;
    println!("training split Cramér's V = {v:.4}\n");
    println!(
        "{:>8} {:>10} {:>10} {:>12} {:>12}",
        "scheme", "ip_adp", "ip_kl", "ip_var", "ip_norm"
    );
    for (name, method) in [
        ("erm", TrainMethod::Erm),
        ("lisa", TrainMethod::Lisa(LisaConfig::new(0.5, beta)?)),
    ] {
        let config = TrainConfig {
            method,
            model: ModelKind::Logistic,
            loss: Loss::CrossEntropy,
            learning_rate: 0.15,
            epochs: 150,
            batch_size: 128,
            group_balanced: name == "lisa",
            seed: 7100,
            weight_decay: 1e-4,
        };
        let (model, _) = train(&train_set, &config)?;
        let report = evaluate(&model, &test_set)?;
        let scores = ScoreSet::from_model(&model, &test_set)?;
        println!(
            "{name:>8} {:>10.4} {:>10.4} {:>12.6} {:>12.6}",
            ip_adp(&scores, 1234, DEFAULT_SPLIT)?,
            pairwise_kl(&scores)?,
            ip_var(&report.per_domain_risk)?,
            ip_norm(&model, &test_set, Loss::CrossEntropy)?,
        );
    }
    println!("\nlower values mean a more domain-invariant predictor");
    Ok(())
}
