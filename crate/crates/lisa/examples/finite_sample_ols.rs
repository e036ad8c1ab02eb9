//! Convergence of the finite-sample estimators toward their population
//! slopes: sample the mixture, fit each scheme's least squares, and watch the
//! angle to the closed-form direction shrink with n.
//!
//! ```text
//! cargo run --release --example finite_sample_ols
//! ```

use lisa::build_group_index;
use lisa::theory::{
    angle_between, empirical_ols, erm_design, lisa_d_design, lisa_l_design, population_classifier,
    sample_model, vanilla_mixup_design, MethodTag, ModelFixture,
};
use lisa::{BetaParams, SeededRng};

fn main() -> lisa::Result<()> {
    let fixture = ModelFixture::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/f1.toml"))?;
    let params = fixture.params;
    let beta = BetaParams::new(2.0, 2.0)?;
    let sizes = [2_000usize, 8_000, 32_000];

    println!("median angle (radians, 20 seeds) between the fitted and population slopes");
    print!("{:>16}", "scheme");
    for n in sizes {
        print!("{:>12}", format!("n={n}"));
    }
    println!();
    for method in MethodTag::ALL {
        let pop = population_classifier(&params, method, &beta)?;
        print!("{:>16}", method.to_string());
        for (si, &n) in sizes.iter().enumerate() {
            let mut angles: Vec<f64> = (0..20u64)
                .map(|seed| -> lisa::Result<f64> {
                    let mut rng = SeededRng::new(600 + seed, si as u64);
                    let ds = sample_model(&params, n, &mut rng)?;
                    let index = build_group_index(&ds);
                    let (x, y) = match method {
                        MethodTag::Erm => erm_design(&ds),
                        MethodTag::VanillaMixup => vanilla_mixup_design(&ds, &beta, &mut rng),
                        MethodTag::LisaL => lisa_l_design(&ds, &index, &beta, &mut rng)?,
                        MethodTag::LisaD => lisa_d_design(&ds, &index, &beta, &mut rng)?,
                    };
                    let clf = empirical_ols(&x, &y)?;
                    Ok(angle_between(&clf.slope, &pop.slope))
                })
                .collect::<lisa::Result<_>>()?;
            angles.sort_by(f64::total_cmp);
            print!("{:>12.5}", 0.5 * (angles[9] + angles[10]));
        }
        println!();
    }
    Ok(())
}
