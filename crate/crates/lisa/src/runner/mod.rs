//! Configuration-driven experiment runner behind the `lisa` binary.
//!
//! Four commands: `theory` (closed-form error comparison over a fixture or
//! grid), `simulate` (desk-scale trainer comparison with invariance metrics),
//! `mc-check` (Monte Carlo cross-check of the error formulas) and `metrics`
//! (Cramér's V and score-invariance reports from files). Each command reads
//! one TOML config (with `--set key=value` overrides), writes CSV results
//! with the config hash and tool version embedded as comments, and prints a
//! summary to stdout. Work is dispatched to a worker pool; output order is
//! deterministic regardless of scheduling.

mod commands;
mod config;
mod table;

pub use commands::{cmd_mc_check, cmd_metrics, cmd_simulate, cmd_theory, CommandOutcome};
pub use config::{
    ConfigSource, DataSpec, GridSpec, McCheckConfig, MetricsConfig, ShiftSpec, SimulateConfig,
    TheoryConfig, TrainSpec,
};
pub use table::{Cell, CsvTable};
