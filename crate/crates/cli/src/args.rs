use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "tsvf-lab",
    version,
    about = "Weak traces of photons in interferometers"
)]
pub struct Cli {
    /// JSON object whose keys override the command's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weak values of every marked point and operator for one post-selection.
    WeakValues(WeakValuesArgs),
    /// Exact and first-order mean shift of one weakly coupled pointer.
    Pointer(PointerArgs),
    /// Monte Carlo ensemble with a pointer at every selected point.
    Ensemble(EnsembleArgs),
    /// Pointer shift over a range of coupling strengths or widths.
    Sweep(SweepArgs),
    /// Fraction of the flux leaking into a dark port.
    LeakRatio(LeakRatioArgs),
    /// List or inspect the built-in scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenariosAction,
    },
    /// Check a circuit definition file.
    Validate(ValidateArgs),
}

#[derive(Debug, Subcommand)]
pub enum ScenariosAction {
    List(ListArgs),
    Show(ShowArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointerMode {
    Exact,
    FirstOrder,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    Epsilon,
    Width,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakValuesArgs {
    #[arg(long)]
    pub scenario: Option<String>,
    /// Detector, with internal outcomes where needed (e.g. `D2:H`).
    #[arg(long)]
    pub post: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerArgs {
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub post: Option<String>,
    /// Marked point carrying the pointer.
    #[arg(long)]
    pub point: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Pointer width [default: 1].
    #[arg(long)]
    pub width: Option<f64>,
    /// [default: both]
    #[arg(long, value_enum)]
    pub mode: Option<PointerMode>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub post: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Pointer width [default: 1].
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Points to couple, comma separated [default: all marked points].
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<String>>,
    /// Output file [default: stdout].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub post: Option<String>,
    #[arg(long)]
    pub point: Option<String>,
    /// [default: epsilon]
    #[arg(long, value_enum)]
    pub param: Option<SweepParam>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    /// Number of rows, ends included.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fixed coupling strength when sweeping the width [default: 0.1].
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Fixed width when sweeping the coupling strength [default: 1].
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakRatioArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShowArgs {
    pub id: Option<String>,
    /// [default: json]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateArgs {
    pub file: Option<PathBuf>,
}

/// Reads a `--config` file: a JSON object of flag names to values.
pub fn load_config(path: &std::path::Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Usage(format!(
            "config {} must hold a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
    }
}

/// Overlays config values on parsed flags. Keys may use `-` or `_`.
pub fn apply_config<T: Serialize + DeserializeOwned>(
    args: &T,
    config: Option<&Map<String, Value>>,
) -> Result<T, CliError> {
    let Some(config) = config else {
        return Ok(
            serde_json::from_value(serde_json::to_value(args).expect("flags serialize"))
                .expect("flags round-trip"),
        );
    };
    let mut merged = match serde_json::to_value(args).expect("flags serialize") {
        Value::Object(m) => m,
        _ => unreachable!("argument structs serialize to objects"),
    };
    for (k, v) in config {
        merged.insert(k.replace('-', "_"), v.clone());
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("config: {e}")))
}

pub fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}
