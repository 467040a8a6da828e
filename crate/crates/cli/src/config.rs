//! Experiment configuration documents and their schema checks.

use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::scenarios::Scenario;

/// Top-level keys of a configuration document.
const TOP_LEVEL: [(&str, bool); 4] = [
    ("scenario", true),
    ("seed", true),
    ("parameters", true),
    ("output_path", false),
];

/// Environment variable that replaces the configured master seed.
pub const SEED_ENV: &str = "PROTECTIVE_SEED";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

pub(crate) fn diag(key: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub parameters: Map<String, Value>,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The document that identifies a run's scientific payload.
    pub fn canonical(&self) -> Value {
        serde_json::json!({
            "scenario": self.scenario.name(),
            "seed": self.seed,
            "parameters": Value::Object(self.parameters.clone()),
        })
    }

    /// SHA-256 of the canonical document in compact form with sorted keys.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.canonical()).expect("serializable");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn check_keys(map: &Map<String, Value>, keys: &[(&str, bool)], prefix: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (key, required) in keys {
        if *required && !map.contains_key(*key) {
            out.push(diag(format!("{prefix}{key}"), "missing required key"));
        }
    }
    for key in map.keys() {
        if !keys.iter().any(|(k, _)| k == key) {
            out.push(diag(format!("{prefix}{key}"), "unknown key"));
        }
    }
    out
}

/// Schema check without execution. An empty list means the document is valid.
pub fn validate(doc: &Value) -> Vec<Diagnostic> {
    match parse(doc) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

pub fn parse(doc: &Value) -> Result<ExperimentConfig, Vec<Diagnostic>> {
    let Some(map) = doc.as_object() else {
        return Err(vec![diag("<root>", "configuration must be a JSON object")]);
    };
    let mut diags = check_keys(map, &TOP_LEVEL, "");

    let scenario = match map.get("scenario") {
        Some(Value::String(name)) => match Scenario::from_name(name) {
            Some(s) => Some(s),
            None => {
                diags.push(diag(
                    "scenario",
                    format!(
                        "unknown scenario `{name}`; expected one of {}",
                        Scenario::names().join(", ")
                    ),
                ));
                None
            }
        },
        Some(_) => {
            diags.push(diag("scenario", "must be a string"));
            None
        }
        None => None,
    };
    let seed = match map.get("seed") {
        Some(v) => match v.as_u64() {
            Some(s) => Some(s),
            None => {
                diags.push(diag("seed", "must be an unsigned 64-bit integer"));
                None
            }
        },
        None => None,
    };
    let parameters = match map.get("parameters") {
        Some(Value::Object(p)) => Some(p.clone()),
        Some(_) => {
            diags.push(diag("parameters", "must be an object"));
            None
        }
        None => None,
    };
    let output_path = match map.get("output_path") {
        Some(Value::String(p)) => Some(PathBuf::from(p)),
        Some(_) => {
            diags.push(diag("output_path", "must be a string"));
            None
        }
        None => None,
    };
    if let (Some(s), Some(p)) = (scenario, parameters.as_ref()) {
        diags.extend(check_keys(p, s.parameter_keys(), "parameters."));
        if diags.is_empty() {
            if let Err(e) = s.check_parameters(p) {
                diags.push(diag("parameters", e));
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(ExperimentConfig {
        scenario: scenario.expect("checked"),
        seed: seed.expect("checked"),
        parameters: parameters.expect("checked"),
        output_path,
    })
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(vec![diag("<root>", format!("invalid JSON: {e}"))]))?;
    parse(&doc).map_err(CliError::Config)
}

/// Parses the seed override from the environment, if set.
pub fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse::<u64>().map(Some).map_err(|_| {
            CliError::Config(vec![diag(
                SEED_ENV,
                format!("`{s}` is not an unsigned 64-bit integer"),
            )])
        }),
        Err(_) => Ok(None),
    }
}
