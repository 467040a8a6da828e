use protective_core::qcore::{DensityOperator, Observable, OrthonormalBasis};
use protective_core::seeding::master_rng;
use protective_core::stats::mean_variance;
use protective_core::zeno::{
    f_exact, f_gauss, gamma, grid_oracle, outcome_pdf, GridSpec, PovmDensity, ZenoConfig,
    ZenoOutcome, ZenoSampler, ORACLE_MAX_STEPS,
};
use serde::Deserialize;
use serde_json::json;

use super::{cell, positive, to_value, Artifact, Check, ParameterKeys, Params, ScenarioOutput};
use crate::error::CliError;

pub(crate) const CURVES_KEYS: ParameterKeys = &[
    ("N", true),
    ("r", true),
    ("sigma", true),
    ("q_min", false),
    ("q_max", false),
    ("points", false),
];

pub(crate) const SAMPLE_KEYS: ParameterKeys = &[
    ("N", true),
    ("r", true),
    ("sigma", true),
    ("samples", true),
    ("g", false),
    ("state", false),
];

pub(crate) const ORACLE_KEYS: ParameterKeys = &[
    ("N", true),
    ("r", true),
    ("sigma", true),
    ("state", false),
    ("points", false),
    ("half_width", false),
];

fn default_q_min() -> f64 {
    -2.0
}

fn default_q_max() -> f64 {
    2.0
}

fn default_curve_points() -> usize {
    801
}

fn default_g() -> f64 {
    1.0
}

fn default_grid_points() -> usize {
    GridSpec::default().points
}

fn default_half_width() -> f64 {
    GridSpec::default().half_width
}

fn check_overlap(r: f64) -> Result<(), String> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(format!("r must lie in [0, 1], got {r}"))
    }
}

fn check_steps(n: usize) -> Result<(), String> {
    if n == 0 {
        Err("N must be at least 1".into())
    } else {
        Ok(())
    }
}

fn check_state(state: usize) -> Result<(), String> {
    if state < 2 {
        Ok(())
    } else {
        Err(format!("state must be 0 or 1, got {state}"))
    }
}

/// Qubit protected by `σ_z` in the real basis with `r = ⟨ψ₀|Π₊|ψ₀⟩`.
fn qubit_config(steps: usize, g: f64, r: f64, sigma: f64) -> Result<ZenoConfig, CliError> {
    let basis = OrthonormalBasis::qubit_rotated(r.sqrt().acos());
    Ok(ZenoConfig::new(
        steps,
        g,
        sigma,
        basis,
        Observable::pauli_z(),
    )?)
}

#[derive(Debug, Deserialize)]
pub(crate) struct CurvesParams {
    #[serde(rename = "N")]
    steps: Vec<usize>,
    r: Vec<f64>,
    sigma: f64,
    #[serde(default = "default_q_min")]
    q_min: f64,
    #[serde(default = "default_q_max")]
    q_max: f64,
    #[serde(default = "default_curve_points")]
    points: usize,
}

impl Params for CurvesParams {
    fn check(&self) -> Result<(), String> {
        if self.steps.is_empty() || self.r.is_empty() {
            return Err("N and r must be non-empty lists".into());
        }
        self.steps.iter().try_for_each(|&n| check_steps(n))?;
        self.r.iter().try_for_each(|&r| check_overlap(r))?;
        positive("sigma", self.sigma)?;
        if self.q_min.partial_cmp(&self.q_max) != Some(std::cmp::Ordering::Less) {
            return Err(format!(
                "q_min {} must be below q_max {}",
                self.q_min, self.q_max
            ));
        }
        if self.points < 2 {
            return Err("points must be at least 2".into());
        }
        Ok(())
    }
}

pub(crate) fn curves(p: &CurvesParams) -> Result<ScenarioOutput, CliError> {
    let h = (p.q_max - p.q_min) / (p.points - 1) as f64;
    let grid: Vec<f64> = (0..p.points).map(|k| p.q_min + k as f64 * h).collect();
    let mut rows = Vec::with_capacity(grid.len() * p.steps.len() * p.r.len());
    let mut curves = Vec::new();
    let mut checks = Vec::new();
    for &r in &p.r {
        let mut errors = Vec::new();
        for &n in &p.steps {
            let mut sup: f64 = 0.0;
            for &q in &grid {
                let (exact, approx) = (f_exact(n, r, p.sigma, q), f_gauss(n, r, p.sigma, q));
                sup = sup.max((exact - approx).abs());
                rows.push(vec![
                    n.to_string(),
                    cell(r),
                    cell(q),
                    cell(exact),
                    cell(approx),
                ]);
            }
            curves.push(json!({"N": n, "r": r, "gamma": gamma(n, r, p.sigma), "sup_error": sup}));
            errors.push((n, sup));
        }
        let fewest = errors.iter().min_by_key(|e| e.0).expect("non-empty");
        let most = errors.iter().max_by_key(|e| e.0).expect("non-empty");
        if fewest.0 != most.0 {
            checks.push(Check::new(
                format!("gaussian-approximation-improves r={r}"),
                most.1 <= fewest.1,
                format!(
                    "sup|f - f_gauss| is {:.3e} at N={} and {:.3e} at N={}",
                    fewest.1, fewest.0, most.1, most.0
                ),
            ));
        }
    }
    Ok(ScenarioOutput {
        results: json!({"sigma": p.sigma, "grid_points": grid.len(), "curves": curves}),
        checks,
        artifacts: vec![Artifact::csv(
            "zeno_curves.csv",
            &["N", "r", "Q", "f_exact", "f_gauss"],
            rows,
        )],
    })
}

#[derive(Debug, Deserialize)]
pub(crate) struct SampleParams {
    #[serde(rename = "N")]
    steps: usize,
    r: f64,
    sigma: f64,
    samples: usize,
    #[serde(default = "default_g")]
    g: f64,
    #[serde(default)]
    state: usize,
}

impl Params for SampleParams {
    fn check(&self) -> Result<(), String> {
        check_steps(self.steps)?;
        check_overlap(self.r)?;
        positive("sigma", self.sigma)?;
        positive("g", self.g)?;
        check_state(self.state)?;
        if self.samples == 0 {
            return Err("samples must be at least 1".into());
        }
        Ok(())
    }
}

pub(crate) fn sample(p: &SampleParams, seed: u64) -> Result<ScenarioOutput, CliError> {
    let config = qubit_config(p.steps, p.g, p.r, p.sigma)?;
    let rho = DensityOperator::pure(config.basis().get(p.state));
    let povm = PovmDensity::new(&config)?;
    let sampler = ZenoSampler::new(&povm, &rho)?;
    let moments = povm.outcome_moments(&rho)?;
    let mut rng = master_rng(seed);
    let outcomes: Vec<ZenoOutcome> = (0..p.samples).map(|_| sampler.sample(&mut rng)).collect();
    let readings: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match o {
            ZenoOutcome::Reading(q) => Some(*q),
            ZenoOutcome::Abort => None,
        })
        .collect();

    let n = p.samples as f64;
    let abort_p = sampler.abort_probability();
    let abort_freq = (p.samples - readings.len()) as f64 / n;
    let abort_se = (abort_p * (1.0 - abort_p) / n).sqrt().max(1.0 / n);
    let mut checks = vec![Check::new(
        "abort-frequency",
        (abort_freq - abort_p).abs() <= 4.0 * abort_se,
        format!("observed {abort_freq:.5}, predicted {abort_p:.5e} (4 standard errors)"),
    )];
    let (mean, var) = if readings.len() >= 2 {
        mean_variance(&readings)
    } else {
        (f64::NAN, f64::NAN)
    };
    if readings.len() >= 2 {
        let se = (moments.variance / readings.len() as f64).sqrt();
        checks.push(Check::new(
            "reading-mean",
            (mean - moments.mean).abs() <= 4.0 * se,
            format!(
                "observed {mean:.6}, predicted {:.6} (4 standard errors)",
                moments.mean
            ),
        ));
    }

    let rows = outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| match o {
            ZenoOutcome::Reading(q) => vec![i.to_string(), "reading".into(), cell(*q)],
            ZenoOutcome::Abort => vec![i.to_string(), "abort".into(), String::new()],
        })
        .collect();
    Ok(ScenarioOutput {
        results: json!({
            "time_step": config.time_step(),
            "overlaps": config.overlaps().as_slice(),
            "abort_probability": abort_p,
            "abort_frequency": abort_freq,
            "readings": readings.len(),
            "reading_mean": mean,
            "reading_variance": var,
            "predicted": to_value(&moments),
        }),
        checks,
        artifacts: vec![Artifact::csv(
            "zeno_samples.csv",
            &["index", "outcome", "Q"],
            rows,
        )],
    })
}

#[derive(Debug, Deserialize)]
pub(crate) struct OracleParams {
    #[serde(rename = "N")]
    steps: usize,
    r: f64,
    sigma: f64,
    #[serde(default)]
    state: usize,
    #[serde(default = "default_grid_points")]
    points: usize,
    #[serde(default = "default_half_width")]
    half_width: f64,
}

impl Params for OracleParams {
    fn check(&self) -> Result<(), String> {
        check_steps(self.steps)?;
        if self.steps > ORACLE_MAX_STEPS {
            return Err(format!(
                "N must be at most {ORACLE_MAX_STEPS} for the grid oracle"
            ));
        }
        check_overlap(self.r)?;
        positive("sigma", self.sigma)?;
        positive("half_width", self.half_width)?;
        check_state(self.state)?;
        if self.points < 2 {
            return Err("points must be at least 2".into());
        }
        Ok(())
    }
}

pub(crate) fn oracle(p: &OracleParams) -> Result<ScenarioOutput, CliError> {
    let config = qubit_config(p.steps, 1.0, p.r, p.sigma)?;
    let rho = DensityOperator::pure(config.basis().get(p.state));
    let grid = GridSpec {
        points: p.points,
        half_width: p.half_width,
    };
    let result = grid_oracle(&config, &rho, grid)?;
    let analytic_abort = PovmDensity::new(&config)?.abort_probability(&rho)?;
    let mut tv = (result.abort_probability - analytic_abort).abs();
    let mut rows = Vec::with_capacity(result.grid.len());
    for (q, mass) in result.grid.iter().zip(&result.cell_probabilities) {
        let analytic = outcome_pdf(&config, &rho, *q)? * result.spacing;
        tv += (mass - analytic).abs();
        rows.push(vec![cell(*q), cell(*mass), cell(analytic)]);
    }
    tv *= 0.5;
    Ok(ScenarioOutput {
        results: json!({
            "spacing": result.spacing,
            "total_variation": tv,
            "oracle_abort_probability": result.abort_probability,
            "analytic_abort_probability": analytic_abort,
        }),
        checks: vec![Check::new(
            "grid-oracle-agreement",
            tv < 1e-3,
            format!("total variation {tv:.3e} (< 1e-3)"),
        )],
        artifacts: vec![Artifact::csv(
            "zeno_oracle.csv",
            &["Q", "oracle_probability", "analytic_probability"],
            rows,
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_cover_every_combination() {
        let p = CurvesParams {
            steps: vec![1, 5],
            r: vec![0.5, 0.9],
            sigma: 0.1,
            q_min: -1.0,
            q_max: 1.0,
            points: 11,
        };
        let out = curves(&p).unwrap();
        let Artifact::Csv { rows, .. } = &out.artifacts[0] else {
            panic!("expected csv")
        };
        assert_eq!(rows.len(), 2 * 2 * 11);
        assert_eq!(out.checks.len(), 2);
        assert!(out.checks.iter().all(|c| c.passed));
    }

    #[test]
    fn oracle_rejects_large_n() {
        let p: Result<OracleParams, _> =
            serde_json::from_value(json!({"N": 65, "r": 0.5, "sigma": 0.1}));
        assert!(p.unwrap().check().is_err());
    }
}
