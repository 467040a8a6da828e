use protective_core::qcore::{c64, random_unitary, CMatrix};
use protective_core::seeding::master_rng;
use protective_core::tomography::{
    basis_fidelities, evolution_operator, fixed_point_basis, ground_state, identify_state,
    linear_inversion, random_dephasing, recover_hamiltonian, simulate_statistics, MeasurementSet,
    PreparationSet, Shots,
};
use protective_core::Error;
use serde::Deserialize;
use serde_json::json;

use super::{finite, positive, to_value, Artifact, Check, ParameterKeys, Params, ScenarioOutput};
use crate::error::CliError;

pub(crate) const CHANNEL_KEYS: ParameterKeys =
    &[("d", true), ("shots", true), ("identify_trials", false)];

pub(crate) const HAMILTONIAN_KEYS: ParameterKeys =
    &[("energies", true), ("times", true), ("energy_bound", true)];

/// `"exact"` or a positive shot count per preparation and basis.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ShotsParam {
    Count(u64),
    Label(String),
}

impl ShotsParam {
    fn shots(&self) -> Result<Shots, String> {
        match self {
            ShotsParam::Count(0) => Err("shots must be positive".into()),
            ShotsParam::Count(n) => Ok(Shots::Finite(*n)),
            ShotsParam::Label(s) if s == "exact" => Ok(Shots::Exact),
            ShotsParam::Label(s) => Err(format!(
                "shots must be a positive integer or \"exact\", got \"{s}\""
            )),
        }
    }
}

fn default_identify_trials() -> usize {
    1000
}

#[derive(Debug, Deserialize)]
pub(crate) struct ChannelParams {
    d: usize,
    shots: ShotsParam,
    #[serde(default = "default_identify_trials")]
    identify_trials: usize,
}

impl Params for ChannelParams {
    fn check(&self) -> Result<(), String> {
        if !(2..=6).contains(&self.d) {
            return Err(format!("d must lie in 2..=6, got {}", self.d));
        }
        self.shots.shots()?;
        Ok(())
    }
}

pub(crate) fn channel(p: &ChannelParams, seed: u64) -> Result<ScenarioOutput, CliError> {
    let shots = p.shots.shots().map_err(Error::InvalidParameter)?;
    let mut rng = master_rng(seed);
    let (truth, channel) = random_dephasing(p.d, &mut rng);
    let preps = PreparationSet::standard(p.d)?;
    let meas = MeasurementSet::standard(p.d)?;
    let table = simulate_statistics(&channel, &preps, &meas, shots, &mut rng)?;
    let estimate = linear_inversion(&table, &preps, &meas)?;
    let channel_error = (estimate.channel.superoperator() - channel.superoperator()).norm();
    let recovered = fixed_point_basis(&estimate.channel)?;
    let fidelities = basis_fidelities(&truth, &recovered);
    let min_fidelity = fidelities.iter().copied().fold(1.0, f64::min);

    // Born-rule identification of each true basis state against the recovered basis.
    let mut identification = Vec::with_capacity(p.d);
    for target in truth.vectors() {
        let expected = (0..p.d)
            .max_by(|&a, &b| {
                let fa = recovered.get(a).inner(target).norm_sqr();
                let fb = recovered.get(b).inner(target).norm_sqr();
                fa.total_cmp(&fb)
            })
            .expect("non-empty basis");
        let mut hits = 0usize;
        for _ in 0..p.identify_trials {
            hits += usize::from(identify_state(&recovered, target, &mut rng)? == expected);
        }
        identification.push(if p.identify_trials == 0 {
            f64::NAN
        } else {
            hits as f64 / p.identify_trials as f64
        });
    }

    let exact = shots == Shots::Exact;
    let fidelity_floor = if exact { 1.0 - 1e-8 } else { 0.9 };
    let mut checks = vec![Check::new(
        "fixed-point-basis",
        min_fidelity > fidelity_floor,
        format!("min fidelity {min_fidelity:.12} (> {fidelity_floor})"),
    )];
    if exact {
        checks.push(Check::new(
            "channel-recovered",
            channel_error < 1e-10,
            format!("Frobenius error {channel_error:.3e} (< 1e-10)"),
        ));
        if p.identify_trials > 0 {
            checks.push(Check::new(
                "identification",
                identification.iter().all(|&f| f == 1.0),
                format!("per-state hit rates {identification:?}"),
            ));
        }
    }
    Ok(ScenarioOutput {
        results: json!({
            "d": p.d,
            "shots": to_value(&shots),
            "channel_error": channel_error,
            "cptp_diagnostics": to_value(&estimate.diagnostics),
            "is_cptp": estimate.is_cptp,
            "normalization_error": table.normalization_error(),
            "fidelities": fidelities,
            "identification_rates": identification,
        }),
        checks,
        artifacts: vec![Artifact::Json {
            file: "probability_table.json".into(),
            value: to_value(&table),
        }],
    })
}

#[derive(Debug, Deserialize)]
pub(crate) struct HamiltonianParams {
    energies: Vec<f64>,
    times: Vec<f64>,
    energy_bound: f64,
}

impl Params for HamiltonianParams {
    fn check(&self) -> Result<(), String> {
        positive("energy_bound", self.energy_bound)?;
        if self.energies.len() < 2 {
            return Err("need at least two energies".into());
        }
        if self.times.is_empty() {
            return Err("need at least one time".into());
        }
        for &e in &self.energies {
            finite("energy", e)?;
            if e.abs() > self.energy_bound {
                return Err(format!(
                    "energy {e} exceeds energy_bound {}",
                    self.energy_bound
                ));
            }
        }
        self.times.iter().try_for_each(|&t| positive("time", t))
    }
}

pub(crate) fn hamiltonian(p: &HamiltonianParams, seed: u64) -> Result<ScenarioOutput, CliError> {
    let d = p.energies.len();
    let mut rng = master_rng(seed);
    let u = random_unitary(d, &mut rng);
    let diag = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            c64(p.energies[i], 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let truth = &u * diag * u.adjoint();
    let samples = p
        .times
        .iter()
        .map(|&t| Ok((t, evolution_operator(&truth, t)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut sorted = p.energies.clone();
    sorted.sort_by(f64::total_cmp);

    let (results, check) = match recover_hamiltonian(&samples, p.energy_bound) {
        Ok(est) => {
            let err = (&est.hamiltonian - &truth).norm();
            let ground = match (ground_state(&est.hamiltonian), ground_state(&truth)) {
                (Ok(a), Ok(b)) => a.inner(&b).norm_sqr(),
                _ => f64::NAN,
            };
            (
                json!({
                    "recovered": true,
                    "energies": est.energies,
                    "true_energies": sorted,
                    "hamiltonian_error": err,
                    "ground_state_fidelity": ground,
                }),
                Check::new(
                    "hamiltonian-recovered",
                    err < 1e-8,
                    format!("Frobenius error {err:.3e} (< 1e-8)"),
                ),
            )
        }
        Err(Error::PhaseAmbiguity {
            degenerate,
            candidates,
        }) => (
            json!({
                "recovered": false,
                "true_energies": sorted,
                "degenerate": degenerate,
                "candidates": candidates,
            }),
            Check::new(
                "hamiltonian-recovered",
                false,
                format!(
                    "eigenphases admit several spectra within the bound (degenerate: {degenerate})"
                ),
            ),
        ),
        Err(e) => return Err(e.into()),
    };
    Ok(ScenarioOutput {
        results,
        checks: vec![check],
        artifacts: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shots_parameter_forms() {
        let parse = |v| serde_json::from_value::<ShotsParam>(v).unwrap().shots();
        assert_eq!(parse(json!("exact")), Ok(Shots::Exact));
        assert_eq!(parse(json!(500)), Ok(Shots::Finite(500)));
        assert!(parse(json!(0)).is_err());
        assert!(parse(json!("many")).is_err());
    }

    #[test]
    fn wrapped_spectrum_is_reported_not_fatal() {
        let p = HamiltonianParams {
            energies: vec![-1.0, 1.0],
            times: vec![std::f64::consts::PI],
            energy_bound: 3.0,
        };
        let out = hamiltonian(&p, 3).unwrap();
        assert_eq!(out.results["recovered"], false);
        assert!(!out.checks[0].passed);
    }

    #[test]
    fn exact_channel_round_trip() {
        let p = ChannelParams {
            d: 3,
            shots: ShotsParam::Label("exact".into()),
            identify_trials: 50,
        };
        let out = channel(&p, 11).unwrap();
        for c in &out.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
