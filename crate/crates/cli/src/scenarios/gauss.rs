use protective_core::epigauss::{
    ensemble_statistics, evolve_with_map, run_trajectory, sample_pointer, sample_system,
    EnsembleConfig, Horizon, PhasePoint,
};
use protective_core::hamgauss::{completion_map, OscillatorConfig, PointerPrep, RegimeCase};
use protective_core::seeding::master_rng;
use serde::Deserialize;
use serde_json::json;

use super::{
    cell, histogram_rows, to_value, Artifact, Check, ParameterKeys, Params, ScenarioOutput,
};
use crate::error::CliError;

pub(crate) const RUN_KEYS: ParameterKeys = &[
    ("c_q", true),
    ("c_p", true),
    ("theta", true),
    ("g", true),
    ("point", false),
    ("pointer", false),
    ("samples", false),
];

pub(crate) const ENSEMBLE_KEYS: ParameterKeys = &[
    ("c_q", true),
    ("c_p", true),
    ("theta", true),
    ("g", true),
    ("runs", true),
    ("pointer", false),
    ("horizon", false),
];

fn default_samples() -> usize {
    201
}

fn default_pointer() -> PointerPrep {
    PointerPrep::minimum_uncertainty(0.0, 0.0, 0.01).expect("valid preparation")
}

fn default_horizon() -> String {
    "completion".into()
}

/// `completion`, `periods:<n>`, `von-neumann`, `semiprotected:<n>` or `protected`.
fn parse_horizon(s: &str) -> Result<Horizon, String> {
    let count = |n: &str| {
        n.parse::<u32>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("horizon count must be a positive integer, got \"{n}\""))
    };
    match s.split_once(':') {
        None => match s {
            "completion" => Ok(Horizon::Completion),
            "von-neumann" => Ok(Horizon::Limit(RegimeCase::VonNeumann)),
            "protected" => Ok(Horizon::Limit(RegimeCase::Protected)),
            _ => Err(format!("unknown horizon \"{s}\"")),
        },
        Some(("periods", n)) => Ok(Horizon::Periods(count(n)?)),
        Some(("semiprotected", n)) => Ok(Horizon::Limit(RegimeCase::Semiprotected(count(n)?))),
        Some(_) => Err(format!("unknown horizon \"{s}\"")),
    }
}

#[derive(Debug, Deserialize)]
pub(crate) struct RunParams {
    c_q: f64,
    c_p: f64,
    theta: f64,
    g: f64,
    point: Option<PhasePoint>,
    pointer: Option<PointerPrep>,
    #[serde(default = "default_samples")]
    samples: usize,
}

impl Params for RunParams {
    fn check(&self) -> Result<(), String> {
        OscillatorConfig::new(self.c_q, self.c_p, self.theta, self.g).map_err(|e| e.to_string())?;
        if let Some(pt) = self.point {
            PhasePoint::new(pt.q_sys, pt.p_sys, pt.pointer_q, pt.pointer_p)
                .map_err(|e| e.to_string())?;
        }
        if let Some(prep) = self.pointer {
            prep.validate().map_err(|e| e.to_string())?;
        }
        if self.samples < 2 {
            return Err("samples must be at least 2".into());
        }
        Ok(())
    }
}

pub(crate) fn run(p: &RunParams, seed: u64) -> Result<ScenarioOutput, CliError> {
    let osc = OscillatorConfig::new(p.c_q, p.c_p, p.theta, p.g)?;
    let start = match p.point {
        Some(pt) => pt,
        None => {
            let mut rng = master_rng(seed);
            let (q, pm) = sample_system(osc.c_q, osc.c_p, &mut rng);
            let (pq, pp) = sample_pointer(&p.pointer.unwrap_or_else(default_pointer), &mut rng);
            PhasePoint::new(q, pm, pq, pp)?
        }
    };
    let end = 1.0 / p.g;
    let last = (p.samples - 1) as f64;
    let times: Vec<f64> = (0..p.samples).map(|k| end * k as f64 / last).collect();
    let trajectory = run_trajectory(&osc, &start, &times)?;
    let completed = evolve_with_map(&start, &completion_map(p.g, osc.c_theta())?, &osc);
    let final_point = trajectory.last().expect("at least two samples").point;
    let gap = [
        final_point.q_sys - completed.q_sys,
        final_point.p_sys - completed.p_sys,
        final_point.pointer_q - completed.pointer_q,
        final_point.pointer_p - completed.pointer_p,
    ]
    .iter()
    .fold(0.0f64, |m, x| m.max(x.abs()));
    let rows = trajectory
        .iter()
        .map(|s| {
            vec![
                cell(s.t),
                cell(s.point.q_sys),
                cell(s.point.p_sys),
                cell(s.point.pointer_q),
                cell(s.point.pointer_p),
                cell(s.a_theta),
            ]
        })
        .collect();
    Ok(ScenarioOutput {
        results: json!({
            "c_theta": osc.c_theta(),
            "completion_time": end,
            "start": to_value(&start),
            "final": to_value(&final_point),
            "pointer_shift": final_point.pointer_q - start.pointer_q,
        }),
        checks: vec![Check::new(
            "trajectory-matches-completion-map",
            gap < 1e-9,
            format!("max coordinate gap {gap:.3e} (< 1e-9)"),
        )],
        artifacts: vec![Artifact::csv(
            "gauss_trajectory.csv",
            &["t", "q", "p", "Q", "P", "a_theta"],
            rows,
        )],
    })
}

#[derive(Debug, Deserialize)]
pub(crate) struct EnsembleParams {
    c_q: f64,
    c_p: f64,
    theta: f64,
    g: f64,
    runs: usize,
    pointer: Option<PointerPrep>,
    #[serde(default = "default_horizon")]
    horizon: String,
}

impl EnsembleParams {
    fn config(&self) -> Result<EnsembleConfig, String> {
        let cfg = EnsembleConfig {
            oscillator: OscillatorConfig::new(self.c_q, self.c_p, self.theta, self.g)
                .map_err(|e| e.to_string())?,
            pointer: self.pointer.unwrap_or_else(default_pointer),
            runs: self.runs,
            horizon: parse_horizon(&self.horizon)?,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

impl Params for EnsembleParams {
    fn check(&self) -> Result<(), String> {
        self.config().map(drop)
    }
}

pub(crate) fn ensemble(p: &EnsembleParams, seed: u64) -> Result<ScenarioOutput, CliError> {
    let cfg = p
        .config()
        .map_err(protective_core::Error::InvalidParameter)?;
    let stats = ensemble_statistics(&cfg, &mut master_rng(seed))?;
    let ok = stats.agrees_with(&stats.predicted, 4.0);
    let rows = histogram_rows(
        stats.histogram.lo,
        stats.histogram.hi,
        &stats.histogram.counts,
    );
    Ok(ScenarioOutput {
        results: json!({
            "c_theta": cfg.oscillator.c_theta(),
            "horizon": to_value(&cfg.horizon),
            "pointer": to_value(&cfg.pointer),
            "statistics": to_value(&stats),
        }),
        checks: vec![Check::new(
            "ensemble-matches-propagated-moments",
            ok,
            format!(
                "mean {:.6} vs {:.6}, variance {:.6e} vs {:.6e} (4 standard errors)",
                stats.mean_final_q,
                stats.predicted.mean,
                stats.var_final_q,
                stats.predicted.variance
            ),
        )],
        artifacts: vec![Artifact::csv(
            "gauss_histogram.csv",
            &["bin_lo", "bin_hi", "count"],
            rows,
        )],
    })
}
