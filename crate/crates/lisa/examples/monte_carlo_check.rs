//! Cross-check the exact group-error formulas against Monte Carlo draws.
//!
//! ```text
//! cargo run --release --example monte_carlo_check [-- N]
//! ```

use lisa::data::GroupKey;
use lisa::theory::{
    group_error, monte_carlo_error, population_classifier, MethodTag, ModelFixture,
};
use lisa::{BetaParams, SeededRng};

fn main() -> lisa::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("N must be an integer"))
        .unwrap_or(200_000);
    let fixture = ModelFixture::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/f1.toml"))?;
    let beta = BetaParams::new(2.0, 2.0)?;
    let root = SeededRng::new(11, 0);

    println!("{n} draws per cell");
    println!(
        "{:>8} {:>6} {:>10} {:>10} {:>10} {:>8}",
        "scheme", "group", "exact", "estimate", "stderr", "z"
    );
    let mut worst_z = 0.0f64;
    for (i, method) in MethodTag::ALL.into_iter().enumerate() {
        let clf = population_classifier(&fixture.params, method, &beta)?;
        for domain in 0..2 {
            for label in 0..2 {
                let key = GroupKey::new(domain, label);
                let exact = group_error(&clf, &fixture.params, key)?;
                let mut rng = root.child((i * 4 + domain * 2 + label) as u64);
                let (estimate, stderr) =
                    monte_carlo_error(&clf, &fixture.params, key, n, &mut rng)?;
                let z = (estimate - exact) / stderr;
                worst_z = worst_z.max(z.abs());
                println!(
                    "{:>8} {:>6} {exact:>10.6} {estimate:>10.6} {stderr:>10.6} {z:>8.2}",
                    method.to_string(),
                    format!("({domain},{label})")
                );
            }
        }
    }
    println!("\nmax |z| = {worst_z:.2}");
    Ok(())
}
