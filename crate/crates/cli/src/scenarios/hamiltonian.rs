use protective_core::hamgauss::{
    completion_map, heisenberg_map, ode_oracle, protected_limit_report, reading_through,
    AffinePhaseMap, OscillatorConfig, PointerPrep, RegimeCase,
};
use serde::Deserialize;
use serde_json::json;

use super::{cell, positive, to_value, Artifact, Check, ParameterKeys, Params, ScenarioOutput};
use crate::error::CliError;

pub(crate) const SOLVE_KEYS: ParameterKeys = &[
    ("c_q", true),
    ("c_p", true),
    ("theta", true),
    ("g", true),
    ("t", false),
    ("step", false),
];

pub(crate) const REGIMES_KEYS: ParameterKeys = &[
    ("c_q", true),
    ("c_p", true),
    ("theta", true),
    ("pointer_variance", true),
    ("periods", false),
    ("protected_g", false),
    ("von_neumann_g", false),
];

fn oscillator(c_q: f64, c_p: f64, theta: f64, g: f64) -> Result<OscillatorConfig, String> {
    OscillatorConfig::new(c_q, c_p, theta, g).map_err(|e| e.to_string())
}

#[derive(Debug, Deserialize)]
pub(crate) struct SolveParams {
    c_q: f64,
    c_p: f64,
    theta: f64,
    g: f64,
    t: Option<f64>,
    step: Option<f64>,
}

impl Params for SolveParams {
    fn check(&self) -> Result<(), String> {
        oscillator(self.c_q, self.c_p, self.theta, self.g)?;
        if let Some(t) = self.t {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(format!("t must be nonnegative and finite, got {t}"));
            }
        }
        if let Some(step) = self.step {
            positive("step", step)?;
        }
        Ok(())
    }
}

pub(crate) fn solve(p: &SolveParams) -> Result<ScenarioOutput, CliError> {
    let osc = OscillatorConfig::new(p.c_q, p.c_p, p.theta, p.g)?;
    let c_theta = osc.c_theta();
    let (t, exact) = match p.t {
        Some(t) => (t, heisenberg_map(t, p.g, c_theta)),
        None => (1.0 / p.g, completion_map(p.g, c_theta)?),
    };
    let step = p.step.unwrap_or(1e-3 * (1.0f64).min(1.0 / p.g));
    let oracle = ode_oracle(t, p.g, c_theta, step)?;
    let diff = exact.max_difference(&oracle);
    let symplectic = exact.symplectic_error();
    Ok(ScenarioOutput {
        results: json!({
            "c_theta": c_theta,
            "t": t,
            "step": step,
            "map": to_value(&exact.to_json()),
            "ode_map": to_value(&oracle.to_json()),
            "max_difference": diff,
            "symplectic_error": symplectic,
        }),
        checks: vec![
            Check::new(
                "map-matches-ode",
                diff < 1e-8,
                format!("max coefficient difference {diff:.3e} (< 1e-8)"),
            ),
            Check::new(
                "symplectic",
                symplectic < 1e-12,
                format!("max |LᵀJL - J| = {symplectic:.3e} (< 1e-12)"),
            ),
        ],
        artifacts: Vec::new(),
    })
}

fn default_periods() -> Vec<u32> {
    (1..=10).collect()
}

fn default_protected_g() -> f64 {
    1e-3
}

fn default_von_neumann_g() -> f64 {
    1e4
}

#[derive(Debug, Deserialize)]
pub(crate) struct RegimesParams {
    c_q: f64,
    c_p: f64,
    theta: f64,
    pointer_variance: f64,
    #[serde(default = "default_periods")]
    periods: Vec<u32>,
    #[serde(default = "default_protected_g")]
    protected_g: f64,
    #[serde(default = "default_von_neumann_g")]
    von_neumann_g: f64,
}

impl Params for RegimesParams {
    fn check(&self) -> Result<(), String> {
        oscillator(self.c_q, self.c_p, self.theta, 1.0)?;
        positive("pointer_variance", self.pointer_variance)?;
        positive("protected_g", self.protected_g)?;
        positive("von_neumann_g", self.von_neumann_g)?;
        if self.periods.contains(&0) {
            return Err("periods must be at least 1".into());
        }
        Ok(())
    }
}

fn is_identity_block(map: &AffinePhaseMap) -> bool {
    let b = map.system_block();
    b[(0, 0)] == 1.0 && b[(1, 1)] == 1.0 && b[(0, 1)] == 0.0 && b[(1, 0)] == 0.0
}

fn relative(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

pub(crate) fn regimes(p: &RegimesParams) -> Result<ScenarioOutput, CliError> {
    let mut cases = vec![(RegimeCase::VonNeumann, p.von_neumann_g)];
    for &n in &p.periods {
        let regime = RegimeCase::Semiprotected(n);
        cases.push((regime, regime.coupling().expect("fixed by regime")));
    }
    cases.push((RegimeCase::Protected, p.protected_g));

    let var = p.pointer_variance;
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (regime, g) in cases {
        let osc = OscillatorConfig::new(p.c_q, p.c_p, p.theta, g)?;
        let c_theta = osc.c_theta();
        let prep = match regime {
            RegimeCase::Semiprotected(_) => PointerPrep::sharp_in_q_minus_gp(g, var)?,
            _ => PointerPrep::minimum_uncertainty(0.0, 0.0, var)?,
        };
        let map = regime.limit_map(g, c_theta)?;
        let reading = reading_through(&map, &prep)?;
        let completed = reading_through(&completion_map(g, c_theta)?, &prep)?;
        let (label, n) = match regime {
            RegimeCase::VonNeumann => ("von-neumann", 0),
            RegimeCase::Semiprotected(n) => ("semiprotected", n),
            RegimeCase::Protected => ("protected", 0),
        };
        let check = match regime {
            RegimeCase::VonNeumann => {
                let expected = 0.5 + prep.var_q;
                Check::new(
                    label,
                    (reading.mean - c_theta).abs() < 1e-12 && relative(reading.variance, expected) < 1e-12,
                    format!("mean {:.6} vs {c_theta:.6}, variance {:.6e} vs {expected:.6e}", reading.mean, reading.variance),
                )
            }
            RegimeCase::Semiprotected(n) => Check::new(
                format!("{label}-{n}"),
                is_identity_block(&map) && reading.mean == c_theta && relative(reading.variance, var) < 1e-9,
                format!(
                    "system block identity: {}, mean {:.6} vs {c_theta:.6}, relative variance error {:.3e}",
                    is_identity_block(&map),
                    reading.mean,
                    relative(reading.variance, var)
                ),
            ),
            RegimeCase::Protected => Check::new(
                label,
                (reading.mean - c_theta).abs() < 1e-12 && relative(reading.variance, var) < 1e-12,
                format!("mean {:.6} vs {c_theta:.6}, variance {:.6e} vs {var:.6e}", reading.mean, reading.variance),
            ),
        };
        checks.push(check);
        rows.push(vec![
            label.to_string(),
            n.to_string(),
            cell(g),
            cell(reading.mean),
            cell(reading.variance),
            cell(completed.mean),
            cell(completed.variance),
        ]);
        entries.push(json!({
            "regime": to_value(&regime),
            "g": g,
            "c_theta": c_theta,
            "pointer": to_value(&prep),
            "limit_map": to_value(&map.to_json()),
            "reading": to_value(&reading),
            "completion_reading": to_value(&completed),
        }));
    }
    let osc = OscillatorConfig::new(p.c_q, p.c_p, p.theta, p.protected_g)?;
    let limit = protected_limit_report(p.protected_g, osc.c_theta())?;
    Ok(ScenarioOutput {
        results: json!({
            "regimes": entries,
            "protected_limit": {
                "g": p.protected_g,
                "periods": limit.periods,
                "time": limit.time,
                "residual": limit.residual,
            },
        }),
        checks,
        artifacts: vec![Artifact::csv(
            "regimes.csv",
            &[
                "regime",
                "n",
                "g",
                "mean",
                "variance",
                "completion_mean",
                "completion_variance",
            ],
            rows,
        )],
    })
}
