//! JSON schemas for circuit files and every `--format json` output.

use jsonschema::{Retrieve, Uri, Validator};
use serde_json::Value;

pub const CIRCUIT: &str = include_str!("../../../docs/schemas/circuit.schema.json");
pub const EXPECTED_VALUES: &str = include_str!("../../../docs/schemas/expected-values.schema.json");
pub const RUN_RECORD: &str = include_str!("../../../docs/schemas/run-record.schema.json");
pub const WEAK_VALUES: &str = include_str!("../../../docs/schemas/weak-values.schema.json");
pub const POINTER: &str = include_str!("../../../docs/schemas/pointer.schema.json");
pub const ENSEMBLE: &str = include_str!("../../../docs/schemas/ensemble.schema.json");
pub const SWEEP: &str = include_str!("../../../docs/schemas/sweep.schema.json");
pub const LEAK_RATIO: &str = include_str!("../../../docs/schemas/leak-ratio.schema.json");
pub const SCENARIOS: &str = include_str!("../../../docs/schemas/scenarios.schema.json");
pub const SCENARIO: &str = include_str!("../../../docs/schemas/scenario.schema.json");

const ALL: &[(&str, &str)] = &[
    ("circuit.schema.json", CIRCUIT),
    ("expected-values.schema.json", EXPECTED_VALUES),
    ("run-record.schema.json", RUN_RECORD),
    ("weak-values.schema.json", WEAK_VALUES),
    ("pointer.schema.json", POINTER),
    ("ensemble.schema.json", ENSEMBLE),
    ("sweep.schema.json", SWEEP),
    ("leak-ratio.schema.json", LEAK_RATIO),
    ("scenarios.schema.json", SCENARIOS),
    ("scenario.schema.json", SCENARIO),
];

/// Resolves references between the bundled schemas by file name.
struct Bundled;

impl Retrieve for Bundled {
    fn retrieve(
        &self,
        uri: &Uri<String>,
    ) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let name = uri.as_str().rsplit('/').next().unwrap_or_default();
        let text = ALL
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| format!("no bundled schema named `{name}`"))?;
        Ok(serde_json::from_str(text)?)
    }
}

pub fn names() -> impl Iterator<Item = &'static str> {
    ALL.iter().map(|(n, _)| *n)
}

pub fn validator(schema: &str) -> Result<Validator, String> {
    let value: Value = serde_json::from_str(schema).map_err(|e| e.to_string())?;
    jsonschema::options()
        .with_retriever(Bundled)
        .build(&value)
        .map_err(|e| e.to_string())
}

pub fn validator_by_name(name: &str) -> Result<Validator, String> {
    let text = ALL
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| format!("no bundled schema named `{name}`"))?;
    validator(text)
}

/// Every violation as `path: message`.
pub fn violations(validator: &Validator, instance: &Value) -> Vec<String> {
    validator
        .iter_errors(instance)
        .map(|e| {
            let path = e.instance_path().to_string();
            let path = if path.is_empty() {
                "/".to_string()
            } else {
                path
            };
            format!("{path}: {e}")
        })
        .collect()
}
