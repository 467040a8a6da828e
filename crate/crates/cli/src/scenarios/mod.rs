//! The runnable scenarios and their parameter schemas.

mod gauss;
mod hamiltonian;
mod tomography;
mod toy;
mod zeno;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::diag;
use crate::error::CliError;
use crate::json::format_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ZenoCurves,
    ZenoSample,
    ZenoOracle,
    HamSolve,
    HamRegimes,
    TomoChannel,
    TomoHamiltonian,
    ToyRun,
    GaussRun,
    GaussEnsemble,
}

const ALL: [Scenario; 10] = [
    Scenario::ZenoCurves,
    Scenario::ZenoSample,
    Scenario::ZenoOracle,
    Scenario::HamSolve,
    Scenario::HamRegimes,
    Scenario::TomoChannel,
    Scenario::TomoHamiltonian,
    Scenario::ToyRun,
    Scenario::GaussRun,
    Scenario::GaussEnsemble,
];

/// `(key, required)` pairs accepted under `parameters`.
pub type ParameterKeys = &'static [(&'static str, bool)];

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::ZenoCurves => "zeno-curves",
            Scenario::ZenoSample => "zeno-sample",
            Scenario::ZenoOracle => "zeno-oracle",
            Scenario::HamSolve => "ham-solve",
            Scenario::HamRegimes => "ham-regimes",
            Scenario::TomoChannel => "tomo-channel",
            Scenario::TomoHamiltonian => "tomo-hamiltonian",
            Scenario::ToyRun => "toy-run",
            Scenario::GaussRun => "gauss-run",
            Scenario::GaussEnsemble => "gauss-ensemble",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn names() -> Vec<&'static str> {
        ALL.iter().map(|s| s.name()).collect()
    }

    pub fn parameter_keys(self) -> ParameterKeys {
        match self {
            Scenario::ZenoCurves => zeno::CURVES_KEYS,
            Scenario::ZenoSample => zeno::SAMPLE_KEYS,
            Scenario::ZenoOracle => zeno::ORACLE_KEYS,
            Scenario::HamSolve => hamiltonian::SOLVE_KEYS,
            Scenario::HamRegimes => hamiltonian::REGIMES_KEYS,
            Scenario::TomoChannel => tomography::CHANNEL_KEYS,
            Scenario::TomoHamiltonian => tomography::HAMILTONIAN_KEYS,
            Scenario::ToyRun => toy::RUN_KEYS,
            Scenario::GaussRun => gauss::RUN_KEYS,
            Scenario::GaussEnsemble => gauss::ENSEMBLE_KEYS,
        }
    }

    /// Type and range checks on the parameter values.
    pub fn check_parameters(self, p: &Map<String, Value>) -> Result<(), String> {
        match self {
            Scenario::ZenoCurves => parse::<zeno::CurvesParams>(p).map(drop),
            Scenario::ZenoSample => parse::<zeno::SampleParams>(p).map(drop),
            Scenario::ZenoOracle => parse::<zeno::OracleParams>(p).map(drop),
            Scenario::HamSolve => parse::<hamiltonian::SolveParams>(p).map(drop),
            Scenario::HamRegimes => parse::<hamiltonian::RegimesParams>(p).map(drop),
            Scenario::TomoChannel => parse::<tomography::ChannelParams>(p).map(drop),
            Scenario::TomoHamiltonian => parse::<tomography::HamiltonianParams>(p).map(drop),
            Scenario::ToyRun => parse::<toy::RunParams>(p).map(drop),
            Scenario::GaussRun => parse::<gauss::RunParams>(p).map(drop),
            Scenario::GaussEnsemble => parse::<gauss::EnsembleParams>(p).map(drop),
        }
    }

    pub fn run(self, p: &Map<String, Value>, seed: u64) -> Result<ScenarioOutput, CliError> {
        let bad = |e: String| CliError::Config(vec![diag("parameters", e)]);
        match self {
            Scenario::ZenoCurves => zeno::curves(&parse(p).map_err(bad)?),
            Scenario::ZenoSample => zeno::sample(&parse(p).map_err(bad)?, seed),
            Scenario::ZenoOracle => zeno::oracle(&parse(p).map_err(bad)?),
            Scenario::HamSolve => hamiltonian::solve(&parse(p).map_err(bad)?),
            Scenario::HamRegimes => hamiltonian::regimes(&parse(p).map_err(bad)?),
            Scenario::TomoChannel => tomography::channel(&parse(p).map_err(bad)?, seed),
            Scenario::TomoHamiltonian => tomography::hamiltonian(&parse(p).map_err(bad)?, seed),
            Scenario::ToyRun => toy::run(&parse(p).map_err(bad)?, seed),
            Scenario::GaussRun => gauss::run(&parse(p).map_err(bad)?, seed),
            Scenario::GaussEnsemble => gauss::ensemble(&parse(p).map_err(bad)?, seed),
        }
    }
}

pub(crate) trait Params: DeserializeOwned {
    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}

fn parse<T: Params>(p: &Map<String, Value>) -> Result<T, String> {
    let params: T = serde_json::from_value(Value::Object(p.clone())).map_err(|e| e.to_string())?;
    params.check()?;
    Ok(params)
}

/// A named pass/fail verification computed by a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Csv {
        file: String,
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
    Json {
        file: String,
        value: Value,
    },
}

impl Artifact {
    pub fn csv(file: &str, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Artifact::Csv {
            file: file.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
        }
    }

    pub fn file(&self) -> &str {
        match self {
            Artifact::Csv { file, .. } | Artifact::Json { file, .. } => file,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub results: Value,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

/// CSV cell for a float; empty when not finite.
pub(crate) fn cell(x: f64) -> String {
    if x.is_finite() {
        format_f64(x)
    } else {
        String::new()
    }
}

pub(crate) fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub(crate) fn histogram_rows(lo: f64, hi: f64, counts: &[u64]) -> Vec<Vec<String>> {
    let width = (hi - lo) / counts.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(k, c)| {
            vec![
                cell(lo + k as f64 * width),
                cell(lo + (k + 1) as f64 * width),
                c.to_string(),
            ]
        })
        .collect()
}

pub(crate) fn positive(name: &str, x: f64) -> Result<(), String> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive and finite, got {x}"))
    }
}

pub(crate) fn finite(name: &str, x: f64) -> Result<(), String> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be finite, got {x}"))
    }
}
