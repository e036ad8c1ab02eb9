//! The four experiment commands.
//!
//! Every command reads one config, writes its outputs under the given
//! directory only, prints a short summary to stdout, and reports `ok = false`
//! when a computation failed or a built-in sanity check did not hold.

use super::config::{
    beta_params, ConfigSource, GridSpec, McCheckConfig, MetricsConfig, SimulateConfig, TheoryConfig,
};
use super::table::{Cell, CsvTable};
use crate::data::{Dataset, GroupKey};
use crate::error::{Error, Result};
use crate::metrics::{cramers_v, ip_adp, ip_norm, ip_var, pairwise_kl, ContingencyTable, ScoreSet};
use crate::mixing::LisaConfig;
use crate::rng::SeededRng;
use crate::theory::sweep::{
    domain_shift_model, evaluate_point, subpopulation_model, DomainShiftPoint, SubpopulationPoint,
    SweepRow,
};
use crate::theory::{
    group_error, monte_carlo_error, population_classifier, MethodTag, ModelFixture, ModelParams,
    ShiftTarget,
};
use crate::train::{evaluate, make_cmnist_analog, train, TrainConfig, TrainMethod};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// What a command produced: a human summary and whether everything passed.
#[derive(Debug)]
pub struct CommandOutcome {
    pub ok: bool,
    pub summary: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn ensure_out_dir(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    Ok(())
}

fn provenance(table: &mut CsvTable, source: &ConfigSource) {
    table.comment("config_hash", &source.hash);
    table.comment("tool_version", format!("lisa {VERSION}"));
}

// ---------------------------------------------------------------------------
// theory
// ---------------------------------------------------------------------------

enum TheoryPoint {
    Grid(SubpopulationPoint),
    GridShift(DomainShiftPoint),
    Fixture(Box<(ModelParams, Option<ShiftTarget>)>),
}

fn theory_points(cfg: &TheoryConfig) -> Result<Vec<TheoryPoint>> {
    match (&cfg.fixture, &cfg.grid) {
        (Some(path), None) => {
            let fixture = ModelFixture::load(path)?;
            let target = match &fixture.target_means {
                Some((m0, m1)) => Some(ShiftTarget::new(&fixture.params, m0.clone(), m1.clone())?),
                None => None,
            };
            Ok(vec![TheoryPoint::Fixture(Box::new((
                fixture.params,
                target,
            )))])
        }
        (None, Some(grid)) => grid_points(grid),
        _ => Err(Error::Config(
            "theory config needs exactly one of `fixture` or `grid`".into(),
        )),
    }
}

fn grid_points(grid: &GridSpec) -> Result<Vec<TheoryPoint>> {
    if let Some(preset) = &grid.preset {
        return match preset.as_str() {
            "subpopulation" => Ok(crate::theory::sweep::default_subpopulation_grid()
                .into_iter()
                .map(TheoryPoint::Grid)
                .collect()),
            "domain_shift" => Ok(crate::theory::sweep::default_domain_shift_grid()
                .into_iter()
                .map(TheoryPoint::GridShift)
                .collect()),
            other => Err(Error::Config(format!("unknown grid preset {other:?}"))),
        };
    }
    for (name, list) in [
        ("xi", &grid.xi),
        ("alpha", &grid.alpha),
        ("delta_norm", &grid.delta_norm),
        ("delta_tilde_norm", &grid.delta_tilde_norm),
    ] {
        if list.is_empty() {
            return Err(Error::Config(format!(
                "grid.{name} must be non-empty (or use a preset)"
            )));
        }
    }
    let mut points = Vec::new();
    for &xi in &grid.xi {
        for &alpha in &grid.alpha {
            for &delta_norm in &grid.delta_norm {
                for &delta_tilde_norm in &grid.delta_tilde_norm {
                    let base = SubpopulationPoint {
                        xi,
                        alpha,
                        delta_norm,
                        delta_tilde_norm,
                    };
                    match &grid.shift {
                        None => points.push(TheoryPoint::Grid(base)),
                        Some(shift) => {
                            for &gamma in &shift.gamma {
                                for &frac in &shift.xi_star_frac {
                                    points.push(TheoryPoint::GridShift(DomainShiftPoint {
                                        base,
                                        gamma,
                                        xi_star_frac: frac,
                                        offset_norm: shift.offset_norm,
                                    }));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(points)
}

const THEORY_COLUMNS: &[&str] = &[
    "xi",
    "alpha",
    "norm_delta",
    "norm_delta_tilde",
    "moment_ok",
    "subpop_xi_ok",
    "subpopulation_ok",
    "gamma",
    "xi_star",
    "domain_shift_ok",
    "worst_erm",
    "worst_mixup",
    "worst_lisa_l",
    "worst_lisa_d",
    "gap_lisa_l",
    "gap_lisa_d",
    "shift_worst_erm",
    "shift_worst_mixup",
    "shift_worst_lisa_l",
    "shift_worst_lisa_d",
    "shift_gap_lisa_l",
    "shift_gap_lisa_d",
];

fn theory_row(alpha: f64, row: &SweepRow) -> Vec<Cell> {
    let shift = row.report.shift.as_ref();
    let sw = row.shift_worst;
    vec![
        row.report.xi.into(),
        alpha.into(),
        row.report.norm_delta.into(),
        row.report.norm_delta_tilde.into(),
        row.report.moment_ok.into(),
        row.report.subpop_xi_ok.into(),
        row.report.subpopulation_ok.into(),
        shift.map(|s| s.gamma).into(),
        shift.map(|s| s.xi_star).into(),
        shift.map_or(Cell::Blank, |s| s.domain_shift_ok.into()),
        row.worst_erm.into(),
        row.worst_mixup.into(),
        row.worst_lisa_l.into(),
        row.worst_lisa_d.into(),
        row.gap_lisa_l.into(),
        row.gap_lisa_d.into(),
        sw.map(|w| w[0]).into(),
        sw.map(|w| w[1]).into(),
        sw.map(|w| w[2]).into(),
        sw.map(|w| w[3]).into(),
        row.shift_gap_lisa_l.into(),
        row.shift_gap_lisa_d.into(),
    ]
}

/// Closed-form error comparison over a fixture or a grid.
pub fn cmd_theory(source: &ConfigSource, out_dir: &Path) -> Result<CommandOutcome> {
    let cfg: TheoryConfig = source.parse()?;
    let beta = beta_params(cfg.beta)?;
    let points = theory_points(&cfg)?;
    let evaluated: Vec<(f64, SweepRow)> = points
        .par_iter()
        .map(|point| -> Result<(f64, SweepRow)> {
            match point {
                TheoryPoint::Grid(pt) => {
                    let params = subpopulation_model(pt)?;
                    Ok((pt.alpha, evaluate_point(&params, &beta, None, cfg.margin)?))
                }
                TheoryPoint::GridShift(pt) => {
                    let (params, target) = domain_shift_model(pt)?;
                    Ok((
                        pt.base.alpha,
                        evaluate_point(&params, &beta, Some(&target), cfg.margin)?,
                    ))
                }
                TheoryPoint::Fixture(boxed) => {
                    let (params, target) = (&boxed.0, boxed.1.as_ref());
                    Ok((
                        params.alpha(),
                        evaluate_point(params, &beta, target, cfg.margin)?,
                    ))
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut table = CsvTable::new(THEORY_COLUMNS);
    provenance(&mut table, source);
    table.comment("margin", cfg.margin);
    let mut holds = 0usize;
    let mut in_regime = 0usize;
    let mut min_gap = f64::INFINITY;
    for (alpha, row) in &evaluated {
        table.push(theory_row(*alpha, row));
        let (regime, gap) = match &row.report.shift {
            Some(s) => (
                s.domain_shift_ok,
                row.shift_gap_lisa_l
                    .unwrap_or(f64::NAN)
                    .min(row.shift_gap_lisa_d.unwrap_or(f64::NAN)),
            ),
            None => (
                row.report.subpopulation_ok,
                row.gap_lisa_l.min(row.gap_lisa_d),
            ),
        };
        if regime {
            in_regime += 1;
            min_gap = min_gap.min(gap);
            if gap > 0.0 {
                holds += 1;
            }
        }
    }
    let out_path = out_dir.join(&cfg.out_name);
    ensure_out_dir(out_dir)?;
    table.write(&out_path)?;
    let ok = holds == in_regime;
    let summary = vec![
        format!("theory: {} points -> {}", evaluated.len(), out_path.display()),
        format!(
            "in-regime points: {in_regime}; selective mixing strictly better at {holds} (min gap {})",
            if in_regime > 0 { format!("{min_gap:.6}") } else { "n/a".into() }
        ),
    ];
    Ok(CommandOutcome {
        ok,
        summary,
        outputs: vec![out_path],
    })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

const SIMULATE_COLUMNS: &[&str] = &[
    "experiment",
    "method",
    "seed",
    "average_accuracy",
    "worst_group_accuracy",
    "ip_adp",
    "ip_kl",
    "ip_var",
    "ip_norm",
    "cramers_v_train",
    "final_loss",
    "diverged",
];

struct ArmResult {
    method: String,
    seed: u64,
    diverged: bool,
    average_accuracy: Option<f64>,
    worst_group_accuracy: Option<f64>,
    ip_adp: Option<f64>,
    ip_kl: Option<f64>,
    ip_var: Option<f64>,
    ip_norm: Option<f64>,
    cramers_v_train: f64,
    final_loss: Option<f64>,
}

fn train_method(cfg: &SimulateConfig, name: &str) -> Result<TrainMethod> {
    let beta = beta_params(cfg.train.beta)?;
    Ok(match name {
        "erm" => TrainMethod::Erm,
        "uw" => TrainMethod::Uw,
        "vanilla_mixup" => TrainMethod::VanillaMixup(beta),
        "in_group_mixup" => TrainMethod::InGroupMixup(beta),
        "lisa" => {
            let mut lisa = LisaConfig::new(cfg.train.p_sel, beta)?;
            lisa.per_batch_lambda = cfg.train.per_batch_lambda;
            lisa.fallback = cfg.train.fallback_policy()?;
            TrainMethod::Lisa(lisa)
        }
        other => return Err(Error::Config(format!("unknown method {other:?}"))),
    })
}

fn run_arm(
    cfg: &SimulateConfig,
    hash: &str,
    method_name: &str,
    seed: u64,
    train_set: &Dataset,
    test_set: &Dataset,
) -> Result<ArmResult> {
    let v_train = cramers_v(&ContingencyTable::from_dataset(train_set))?;
    let train_cfg = TrainConfig {
        method: train_method(cfg, method_name)?,
        model: cfg.train.model_kind()?,
        loss: cfg.train.loss_kind()?,
        learning_rate: cfg.train.learning_rate,
        epochs: cfg.train.epochs,
        batch_size: cfg.train.batch_size,
        group_balanced: matches!(method_name, "lisa" | "vanilla_mixup" | "in_group_mixup")
            && cfg.train.group_balanced_mixup,
        seed: splitmix_fold(cfg.seed, seed),
        weight_decay: cfg.train.weight_decay,
    };
    let (model, losses) = match train(train_set, &train_cfg) {
        Ok(out) => out,
        Err(Error::Diverged { epoch }) => {
            log::warn!("{hash}.{method_name}.{seed}: diverged at epoch {epoch}");
            return Ok(ArmResult {
                method: method_name.into(),
                seed,
                diverged: true,
                average_accuracy: None,
                worst_group_accuracy: None,
                ip_adp: None,
                ip_kl: None,
                ip_var: None,
                ip_norm: None,
                cramers_v_train: v_train,
                final_loss: None,
            });
        }
        Err(other) => return Err(other),
    };
    let report = evaluate(&model, test_set)?;
    let scores = ScoreSet::from_model(&model, test_set)?;
    let adp = ip_adp(
        &scores,
        cfg.metrics_split_seed,
        crate::metrics::DEFAULT_SPLIT,
    )?;
    let kl = pairwise_kl(&scores)?;
    let var = ip_var(&report.per_domain_risk)?;
    let norm = ip_norm(&model, test_set, cfg.train.loss_kind()?)?;
    Ok(ArmResult {
        method: method_name.into(),
        seed,
        diverged: false,
        average_accuracy: Some(report.average_accuracy),
        worst_group_accuracy: Some(report.worst_group_accuracy),
        ip_adp: Some(adp),
        ip_kl: Some(kl),
        ip_var: Some(var),
        ip_norm: Some(norm),
        cramers_v_train: v_train,
        final_loss: losses.last().copied(),
    })
}

fn splitmix_fold(master: u64, seed: u64) -> u64 {
    let mut x = master ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^ (x >> 31)
}

/// Desk-scale comparison of the training schemes on the two-feature
/// spurious-correlation task, with invariance metrics per arm.
pub fn cmd_simulate(source: &ConfigSource, out_dir: &Path) -> Result<CommandOutcome> {
    let cfg: SimulateConfig = source.parse()?;
    // datasets are shared across methods within one seed
    let datasets: Vec<(u64, Dataset, Dataset)> = cfg
        .seeds
        .iter()
        .map(|&seed| -> Result<(u64, Dataset, Dataset)> {
            let root = SeededRng::new(cfg.seed, 0).child(seed);
            let mut train_rng = root.child(0);
            let mut test_rng = root.child(1);
            let train_set = make_cmnist_analog(
                cfg.data.n_train,
                cfg.data.spurious_train,
                cfg.data.label_noise,
                &mut train_rng,
            )?;
            let test_set = make_cmnist_analog(
                cfg.data.n_test,
                cfg.data.spurious_test,
                cfg.data.label_noise,
                &mut test_rng,
            )?;
            Ok((seed, train_set, test_set))
        })
        .collect::<Result<_>>()?;
    let arms: Vec<(usize, String)> = datasets
        .iter()
        .enumerate()
        .flat_map(|(i, _)| cfg.methods.iter().map(move |m| (i, m.clone())))
        .collect();
    let results: Vec<ArmResult> = arms
        .par_iter()
        .map(|(i, method)| {
            let (seed, train_set, test_set) = &datasets[*i];
            run_arm(&cfg, &source.hash, method, *seed, train_set, test_set)
        })
        .collect::<Result<_>>()?;

    let mut table = CsvTable::new(SIMULATE_COLUMNS);
    provenance(&mut table, source);
    let experiment = &source.hash[..12];
    let mut report_text = String::new();
    for r in &results {
        table.push(vec![
            experiment.into(),
            r.method.as_str().into(),
            r.seed.into(),
            r.average_accuracy.into(),
            r.worst_group_accuracy.into(),
            r.ip_adp.into(),
            r.ip_kl.into(),
            r.ip_var.into(),
            r.ip_norm.into(),
            r.cramers_v_train.into(),
            r.final_loss.into(),
            r.diverged.into(),
        ]);
        for (key, value) in [
            ("average_accuracy", r.average_accuracy),
            ("worst_group_accuracy", r.worst_group_accuracy),
            ("ip_adp", r.ip_adp),
            ("ip_kl", r.ip_kl),
            ("ip_var", r.ip_var),
            ("ip_norm", r.ip_norm),
            ("cramers_v_train", Some(r.cramers_v_train)),
        ] {
            if let Some(v) = value {
                let _ = writeln!(
                    report_text,
                    "{experiment}.{}.{}.{key} = {}",
                    r.method,
                    r.seed,
                    crate::fmt_g17(v)
                );
            }
        }
    }
    ensure_out_dir(out_dir)?;
    let csv_path = out_dir.join(&cfg.out_name);
    table.write(&csv_path)?;
    let report_path = out_dir.join("simulate_report.txt");
    std::fs::write(&report_path, report_text)?;

    let diverged = results.iter().filter(|r| r.diverged).count();
    let mut summary = vec![format!(
        "simulate: {} arms ({} methods x {} seeds) -> {}",
        results.len(),
        cfg.methods.len(),
        cfg.seeds.len(),
        csv_path.display()
    )];
    for method in &cfg.methods {
        let worsts: Vec<f64> = results
            .iter()
            .filter(|r| &r.method == method)
            .filter_map(|r| r.worst_group_accuracy)
            .collect();
        if !worsts.is_empty() {
            let mean = worsts.iter().sum::<f64>() / worsts.len() as f64;
            summary.push(format!("  {method}: mean worst-group accuracy {mean:.4}"));
        }
    }
    if diverged > 0 {
        summary.push(format!("  {diverged} arm(s) diverged"));
    }
    Ok(CommandOutcome {
        ok: diverged == 0,
        summary,
        outputs: vec![csv_path, report_path],
    })
}

// ---------------------------------------------------------------------------
// mc-check
// ---------------------------------------------------------------------------

const MC_COLUMNS: &[&str] = &[
    "method", "domain", "label", "exact", "estimate", "stderr", "z",
];

/// z-statistic of a Monte Carlo estimate against the exact value. Degenerate
/// groups (estimate pinned at 0 or 1, zero standard error) score 0 when they
/// agree exactly and infinity otherwise.
fn z_score(estimate: f64, exact: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        (estimate - exact) / stderr
    } else if estimate == exact {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Monte Carlo cross-check of the closed-form group errors on a fixture.
pub fn cmd_mc_check(source: &ConfigSource, out_dir: &Path) -> Result<CommandOutcome> {
    let cfg: McCheckConfig = source.parse()?;
    let beta = beta_params(cfg.beta)?;
    let fixture = ModelFixture::load(&cfg.fixture)?;
    let params = fixture.params;
    let cases: Vec<(MethodTag, usize, usize)> = MethodTag::ALL
        .iter()
        .flat_map(|&m| (0..2).flat_map(move |d| (0..2).map(move |y| (m, d, y))))
        .collect();
    let root = SeededRng::new(cfg.seed, 0);
    let rows: Vec<(MethodTag, usize, usize, f64, f64, f64, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(method, domain, label))| -> Result<_> {
            let clf = population_classifier(&params, method, &beta)?;
            let key = GroupKey::new(domain, label);
            let exact = group_error(&clf, &params, key)?;
            let mut rng = root.child(i as u64);
            let (estimate, stderr) = monte_carlo_error(&clf, &params, key, cfg.n, &mut rng)?;
            Ok((
                method,
                domain,
                label,
                exact,
                estimate,
                stderr,
                z_score(estimate, exact, stderr),
            ))
        })
        .collect::<Result<_>>()?;

    let mut table = CsvTable::new(MC_COLUMNS);
    provenance(&mut table, source);
    table.comment("n", cfg.n);
    let mut worst_z = 0.0f64;
    for &(method, domain, label, exact, estimate, stderr, z) in &rows {
        worst_z = worst_z.max(z.abs());
        table.push(vec![
            method.as_str().into(),
            (domain as u64).into(),
            (label as u64).into(),
            exact.into(),
            estimate.into(),
            stderr.into(),
            z.into(),
        ]);
    }
    ensure_out_dir(out_dir)?;
    let out_path = out_dir.join(&cfg.out_name);
    table.write(&out_path)?;
    let ok = worst_z <= 4.0;
    let summary = vec![
        format!(
            "mc-check: {} cases at n = {} -> {}",
            rows.len(),
            cfg.n,
            out_path.display()
        ),
        format!(
            "max |z| = {worst_z:.3} ({})",
            if ok { "pass" } else { "FAIL" }
        ),
    ];
    Ok(CommandOutcome {
        ok,
        summary,
        outputs: vec![out_path],
    })
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

/// Spurious-correlation strength of a dataset file, plus the invariance
/// report when a score file is given.
pub fn cmd_metrics(source: &ConfigSource, out_dir: &Path) -> Result<CommandOutcome> {
    let cfg: MetricsConfig = source.parse()?;
    let dataset = Dataset::load(&cfg.dataset)?;
    let table_counts = ContingencyTable::from_dataset(&dataset);
    let v = cramers_v(&table_counts)?;
    let mut kv: Vec<(String, f64)> = vec![("cramers_v".into(), v)];
    for (y, row) in table_counts.counts().iter().enumerate() {
        for (d, &count) in row.iter().enumerate() {
            kv.push((format!("count.y{y}.d{d}"), count as f64));
        }
    }
    if let Some(path) = &cfg.scores {
        let scores = ScoreSet::load(path)?;
        kv.push((
            "ip_adp".into(),
            ip_adp(
                &scores,
                cfg.metrics_split_seed,
                crate::metrics::DEFAULT_SPLIT,
            )?,
        ));
        kv.push(("ip_kl".into(), pairwise_kl(&scores)?));
    }
    let mut table = CsvTable::new(&["key", "value"]);
    provenance(&mut table, source);
    let mut report_text = String::new();
    for (key, value) in &kv {
        table.push(vec![key.as_str().into(), (*value).into()]);
        let _ = writeln!(report_text, "{key} = {}", crate::fmt_g17(*value));
    }
    ensure_out_dir(out_dir)?;
    let csv_path = out_dir.join(&cfg.out_name);
    table.write(&csv_path)?;
    let report_path = out_dir.join("metrics_report.txt");
    std::fs::write(&report_path, report_text)?;
    let summary = vec![
        format!(
            "metrics: {} -> {}",
            cfg.dataset.display(),
            csv_path.display()
        ),
        format!("cramers_v = {v:.4}"),
    ];
    Ok(CommandOutcome {
        ok: true,
        summary,
        outputs: vec![csv_path, report_path],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_monte_carlo_groups_score_zero() {
        // a constant classifier pins the estimate at 0 or 1 with zero stderr;
        // exact agreement is z = 0, disagreement is flagged hard
        assert_eq!(z_score(1.0, 1.0, 0.0), 0.0);
        assert_eq!(z_score(0.0, 0.0, 0.0), 0.0);
        assert_eq!(z_score(1.0, 0.9999, 0.0), f64::INFINITY);
        assert!((z_score(0.52, 0.5, 0.01) - 2.0).abs() < 1e-12);
    }
}
