use protective_core::seeding::substream;
use protective_core::stats::histogram;
use protective_core::toybit::{
    expectation_table, flip_probability, prepare, protected_run, run_ensemble, success_probability,
    summarize, Axis, Sign, ToyRunConfig,
};
use serde::Deserialize;
use serde_json::json;

use super::{
    cell, histogram_rows, to_value, Artifact, Check, ParameterKeys, Params, ScenarioOutput,
};
use crate::error::CliError;

pub(crate) const RUN_KEYS: ParameterKeys = &[
    ("N", true),
    ("g", true),
    ("r", true),
    ("protect", true),
    ("measure", true),
    ("runs", true),
    ("initial", false),
    ("backaction", false),
    ("protect_at_start", false),
    ("record_paths", false),
    ("bins", false),
];

fn default_initial() -> String {
    "x+".into()
}

fn default_true() -> bool {
    true
}

fn default_bins() -> usize {
    40
}

fn parse_initial(s: &str) -> Result<(Axis, Sign), String> {
    match s {
        "x+" => Ok((Axis::X, Sign::Plus)),
        "x-" => Ok((Axis::X, Sign::Minus)),
        "y+" => Ok((Axis::Y, Sign::Plus)),
        "y-" => Ok((Axis::Y, Sign::Minus)),
        _ => Err(format!(
            "initial must be one of x+, x-, y+, y-, got \"{s}\""
        )),
    }
}

#[derive(Debug, Deserialize)]
pub(crate) struct RunParams {
    #[serde(rename = "N")]
    steps: usize,
    g: f64,
    r: f64,
    protect: Axis,
    measure: Axis,
    runs: usize,
    #[serde(default = "default_initial")]
    initial: String,
    backaction: Option<bool>,
    #[serde(default = "default_true")]
    protect_at_start: bool,
    #[serde(default)]
    record_paths: bool,
    #[serde(default = "default_bins")]
    bins: usize,
}

impl RunParams {
    fn config(&self) -> Result<ToyRunConfig, protective_core::Error> {
        let mut cfg = ToyRunConfig::new(self.steps, self.g, self.protect, self.measure)?;
        if self.backaction.unwrap_or(self.r > 0.0) {
            cfg = cfg.with_backaction(self.r)?;
        } else {
            cfg.r_rate = self.r;
            cfg.validate()?;
        }
        cfg.protect_at_start = self.protect_at_start;
        Ok(cfg)
    }
}

impl Params for RunParams {
    fn check(&self) -> Result<(), String> {
        self.config().map_err(|e| e.to_string())?;
        parse_initial(&self.initial)?;
        if self.runs == 0 {
            return Err("runs must be at least 1".into());
        }
        if self.bins == 0 {
            return Err("bins must be at least 1".into());
        }
        Ok(())
    }
}

/// Closed-form success probability where one is available.
fn predicted_success(cfg: &ToyRunConfig) -> Result<Option<f64>, CliError> {
    if !cfg.backaction_enabled || cfg.r_rate == 0.0 || cfg.protect == cfg.measure {
        return Ok(Some(1.0));
    }
    if cfg.protect_at_start {
        return Ok(Some(success_probability(cfg.steps, cfg.g, cfg.r_rate)?));
    }
    Ok(None)
}

pub(crate) fn run(p: &RunParams, seed: u64) -> Result<ScenarioOutput, CliError> {
    let cfg = p.config()?;
    let (axis, sign) =
        parse_initial(&p.initial).map_err(protective_core::Error::InvalidParameter)?;
    let initial = prepare(axis, sign);
    let results = run_ensemble(&cfg, &initial, p.runs, seed)?;
    let summary = summarize(&results);
    let predicted = predicted_success(&cfg)?;

    let mut checks = Vec::new();
    if let Some(prob) = predicted {
        let n = p.runs as f64;
        let se = (prob * (1.0 - prob) / n).sqrt().max(1.0 / n);
        checks.push(Check::new(
            "success-frequency",
            (summary.success_frequency - prob).abs() <= 3.0 * se,
            format!(
                "observed {:.6}, predicted {prob:.6} (3 standard errors)",
                summary.success_frequency
            ),
        ));
    }

    let qs: Vec<f64> = results.iter().map(|r| r.final_q).collect();
    // Readings are multiples of 1/N in [-1, 1]; nudge the upper edge so +1 is counted.
    let (lo, hi) = (-1.0, 1.0 + 1e-12);
    let counts = histogram(&qs, lo, hi, p.bins);
    let run_rows = results
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), r.success.to_string(), cell(r.final_q)])
        .collect();
    let mut artifacts = vec![
        Artifact::csv("toy_runs.csv", &["run", "success", "final_Q"], run_rows),
        Artifact::csv(
            "toy_histogram.csv",
            &["bin_lo", "bin_hi", "count"],
            histogram_rows(lo, hi, &counts),
        ),
    ];
    if p.record_paths {
        let recorded = ToyRunConfig {
            record_paths: true,
            ..cfg
        };
        let first = protected_run(&recorded, &initial, &mut substream(seed, 0))?;
        let pointer = first.pointer_path.unwrap_or_default();
        let rows = pointer
            .iter()
            .enumerate()
            .map(|(k, q)| vec![k.to_string(), cell(*q)])
            .collect();
        artifacts.push(Artifact::csv("toy_path.csv", &["step", "Q"], rows));
    }

    Ok(ScenarioOutput {
        results: json!({
            "config": to_value(&cfg),
            "initial": p.initial,
            "time_step": cfg.time_step(),
            "flip_probability": if cfg.backaction_enabled { flip_probability(cfg.r_rate, cfg.time_step()) } else { 0.0 },
            "summary": to_value(&summary),
            "predicted_success": predicted,
            "expectation_table": to_value(&expectation_table()),
        }),
        checks,
        artifacts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: f64) -> RunParams {
        serde_json::from_value(json!({
            "N": 20, "g": 1.0, "r": r, "protect": "x", "measure": "y", "runs": 200, "record_paths": true
        }))
        .unwrap()
    }

    #[test]
    fn no_backaction_always_succeeds() {
        let out = run(&params(0.0), 5).unwrap();
        assert_eq!(out.results["summary"]["successes"], 200);
        assert!(out.checks[0].passed);
        assert_eq!(out.artifacts.len(), 3);
    }

    #[test]
    fn histogram_counts_every_run() {
        let out = run(&params(0.0), 6).unwrap();
        let Artifact::Csv { rows, .. } = &out.artifacts[1] else {
            panic!("expected csv")
        };
        let total: u64 = rows.iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
        assert_eq!(total, 200);
    }

    #[test]
    fn unknown_initial_is_rejected() {
        let mut p = params(0.0);
        p.initial = "z+".into();
        assert!(p.check().is_err());
    }
}
