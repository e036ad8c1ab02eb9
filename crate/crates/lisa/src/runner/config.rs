//! Experiment configuration: TOML files, dotted-path overrides and a
//! provenance hash.

use crate::beta::BetaParams;
use crate::error::{Error, Result};
use crate::mixing::FallbackPolicy;
use crate::train::{Loss, ModelKind};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::PathBuf;

/// A parsed config file plus its provenance hash (taken after overrides, so
/// the hash pins exactly what ran).
#[derive(Debug, Clone)]
pub struct ConfigSource {
    table: toml::Table,
    pub hash: String,
}

impl ConfigSource {
    pub fn load(path: &std::path::Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, overrides)
    }

    pub fn from_text(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("config parse: {e}")))?;
        for (key, value) in overrides {
            apply_override(&mut table, key, value)?;
        }
        let canonical =
            toml::to_string(&table).map_err(|e| Error::Config(format!("config serialize: {e}")))?;
        let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
        Ok(ConfigSource { table, hash })
    }

    pub fn parse<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        T::deserialize(self.table.clone()).map_err(|e| Error::Config(format!("config schema: {e}")))
    }
}

/// Set `table[key path] = value`, creating intermediate tables. The value is
/// parsed as a TOML literal, falling back to a string.
fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let parsed: toml::Value = match format!("v = {value}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key v exists"),
        Err(_) => toml::Value::String(value.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key {key:?}")));
    }
    let mut current = table;
    for part in &parts[..parts.len() - 1] {
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?} descends into a non-table")))?;
    }
    current.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

fn default_beta() -> [f64; 2] {
    [2.0, 2.0]
}

fn default_margin() -> f64 {
    0.2
}

pub(crate) fn beta_params(pair: [f64; 2]) -> Result<BetaParams> {
    BetaParams::new(pair[0], pair[1])
}

// ---------------------------------------------------------------------------
// theory
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    /// Model fixture file; mutually exclusive with `grid`.
    pub fixture: Option<PathBuf>,
    pub grid: Option<GridSpec>,
    #[serde(default = "default_beta")]
    pub beta: [f64; 2],
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "TheoryConfig::default_out_name")]
    pub out_name: String,
}

impl TheoryConfig {
    fn default_out_name() -> String {
        "theory.csv".into()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// "subpopulation" or "domain_shift"; overrides the explicit lists.
    pub preset: Option<String>,
    #[serde(default)]
    pub xi: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub delta_norm: Vec<f64>,
    #[serde(default)]
    pub delta_tilde_norm: Vec<f64>,
    pub shift: Option<ShiftSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    pub gamma: Vec<f64>,
    pub xi_star_frac: Vec<f64>,
    #[serde(default = "ShiftSpec::default_offset_norm")]
    pub offset_norm: f64,
}

impl ShiftSpec {
    fn default_offset_norm() -> f64 {
        0.6
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Master seed for data generation; per-arm streams derive from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "SimulateConfig::default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "SimulateConfig::default_seeds")]
    pub seeds: Vec<u64>,
    pub data: DataSpec,
    #[serde(default)]
    pub train: TrainSpec,
    #[serde(default = "SimulateConfig::default_split_seed")]
    pub metrics_split_seed: u64,
    #[serde(default = "SimulateConfig::default_out_name")]
    pub out_name: String,
}

impl SimulateConfig {
    fn default_methods() -> Vec<String> {
        vec!["erm".into(), "uw".into(), "lisa".into()]
    }

    fn default_seeds() -> Vec<u64> {
        vec![0, 1, 2]
    }

    fn default_split_seed() -> u64 {
        1234
    }

    fn default_out_name() -> String {
        "simulate.csv".into()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub spurious_train: f64,
    pub spurious_test: f64,
    pub label_noise: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    #[serde(default = "TrainSpec::default_model")]
    pub model: String,
    #[serde(default)]
    pub hidden: usize,
    #[serde(default = "TrainSpec::default_loss")]
    pub loss: String,
    #[serde(default = "TrainSpec::default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "TrainSpec::default_epochs")]
    pub epochs: usize,
    #[serde(default = "TrainSpec::default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "TrainSpec::default_weight_decay")]
    pub weight_decay: f64,
    /// Group-balanced anchor sampling for the mixing methods.
    #[serde(default = "TrainSpec::default_true")]
    pub group_balanced_mixup: bool,
    #[serde(default = "TrainSpec::default_p_sel")]
    pub p_sel: f64,
    #[serde(default = "default_beta")]
    pub beta: [f64; 2],
    #[serde(default = "TrainSpec::default_fallback")]
    pub fallback: String,
    #[serde(default = "TrainSpec::default_true")]
    pub per_batch_lambda: bool,
}

impl Default for TrainSpec {
    fn default() -> Self {
        toml::Table::new()
            .try_into()
            .expect("all fields have defaults")
    }
}

impl TrainSpec {
    fn default_model() -> String {
        "logistic".into()
    }

    fn default_loss() -> String {
        "cross_entropy".into()
    }

    fn default_learning_rate() -> f64 {
        0.15
    }

    fn default_epochs() -> usize {
        150
    }

    fn default_batch_size() -> usize {
        128
    }

    fn default_weight_decay() -> f64 {
        1e-4
    }

    fn default_true() -> bool {
        true
    }

    fn default_p_sel() -> f64 {
        0.5
    }

    fn default_fallback() -> String {
        "skip".into()
    }

    pub fn model_kind(&self) -> Result<ModelKind> {
        match self.model.as_str() {
            "linear" => Ok(ModelKind::Linear),
            "logistic" => Ok(ModelKind::Logistic),
            "mlp" => {
                if self.hidden == 0 {
                    return Err(Error::Config("mlp model needs hidden > 0".into()));
                }
                Ok(ModelKind::Mlp {
                    hidden: self.hidden,
                })
            }
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }

    pub fn loss_kind(&self) -> Result<Loss> {
        match self.loss.as_str() {
            "squared" => Ok(Loss::Squared),
            "cross_entropy" => Ok(Loss::CrossEntropy),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }

    pub fn fallback_policy(&self) -> Result<FallbackPolicy> {
        match self.fallback.as_str() {
            "skip" => Ok(FallbackPolicy::Skip),
            "in_group" => Ok(FallbackPolicy::FallbackInGroup),
            "error" => Ok(FallbackPolicy::Error),
            other => Err(Error::Config(format!("unknown fallback {other:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// mc-check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McCheckConfig {
    pub fixture: PathBuf,
    #[serde(default = "McCheckConfig::default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_beta")]
    pub beta: [f64; 2],
    #[serde(default = "McCheckConfig::default_out_name")]
    pub out_name: String,
}

impl McCheckConfig {
    fn default_n() -> usize {
        1_000_000
    }

    fn default_out_name() -> String {
        "mc_check.csv".into()
    }
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    pub dataset: PathBuf,
    pub scores: Option<PathBuf>,
    #[serde(default = "SimulateConfig::default_split_seed")]
    pub metrics_split_seed: u64,
    #[serde(default = "MetricsConfig::default_out_name")]
    pub out_name: String,
}

impl MetricsConfig {
    fn default_out_name() -> String {
        "metrics.csv".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_nested_keys() {
        let src = ConfigSource::from_text(
            "seed = 1\n[data]\nn_train = 100\nn_test = 100\nspurious_train = 0.9\nspurious_test = 0.1\nlabel_noise = 0.25\n",
            &[
                ("seed".into(), "7".into()),
                ("data.n_train".into(), "500".into()),
                ("train.epochs".into(), "3".into()),
            ],
        )
        .unwrap();
        let cfg: SimulateConfig = src.parse().unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.data.n_train, 500);
        assert_eq!(cfg.train.epochs, 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let src = ConfigSource::from_text("margin = 0.2\nbogus = 1\n", &[]).unwrap();
        assert!(src.parse::<TheoryConfig>().is_err());
    }

    #[test]
    fn hash_tracks_overrides() {
        let a = ConfigSource::from_text("margin = 0.2\n", &[]).unwrap();
        let b =
            ConfigSource::from_text("margin = 0.2\n", &[("margin".into(), "0.3".into())]).unwrap();
        assert_ne!(a.hash, b.hash);
        let c = ConfigSource::from_text("margin = 0.3\n", &[]).unwrap();
        assert_eq!(b.hash, c.hash);
    }
}
