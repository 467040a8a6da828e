//! Gaussian epistemic model: the system ground state and the pointer become
//! classical phase-space distributions, and each sampled point follows the
//! same affine Hamiltonian flow as the Heisenberg operators.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hamgauss::{
    completion_map, heisenberg_map, periodic_map, reading_through, AffinePhaseMap,
    OscillatorConfig, PointerPrep, ReadingDistribution, RegimeCase, SYSTEM_VARIANCE,
};
use crate::seeding::substream;
use crate::stats::{histogram, ks_two_sample, mean_variance};

use nalgebra::Vector4;

/// A point of `(q', p', Q, P)`, system coordinates in the primed frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q_sys: f64,
    pub p_sys: f64,
    pub pointer_q: f64,
    pub pointer_p: f64,
}

impl PhasePoint {
    pub fn new(q_sys: f64, p_sys: f64, pointer_q: f64, pointer_p: f64) -> Result<Self> {
        let p = Self {
            q_sys,
            p_sys,
            pointer_q,
            pointer_p,
        };
        if ![q_sys, p_sys, pointer_q, pointer_p]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "phase point must be finite: {p:?}"
            )));
        }
        Ok(p)
    }

    fn to_rotated(self, config: &OscillatorConfig) -> Vector4<f64> {
        let (q, p) = config.to_rotated(self.q_sys, self.p_sys);
        Vector4::new(q, p, self.pointer_q, self.pointer_p)
    }

    fn from_rotated(x: &Vector4<f64>, config: &OscillatorConfig) -> Self {
        let (q_sys, p_sys) = config.from_rotated(x[0], x[1]);
        Self {
            q_sys,
            p_sys,
            pointer_q: x[2],
            pointer_p: x[3],
        }
    }
}

/// `P_{c_q,c_p}(q', p') = (1/π) exp(−(q'−c_q)² − (p'−c_p)²)`.
pub fn system_density(c_q: f64, c_p: f64, q: f64, p: f64) -> f64 {
    (-(q - c_q).powi(2) - (p - c_p).powi(2)).exp() / PI
}

/// Independent normals with means `(c_q, c_p)` and variance 1/2.
pub fn sample_system<R: Rng + ?Sized>(c_q: f64, c_p: f64, rng: &mut R) -> (f64, f64) {
    let sd = SYSTEM_VARIANCE.sqrt();
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    (c_q + sd * z1, c_p + sd * z2)
}

/// Bivariate normal `(Q, P)` drawn through the Cholesky factor of the preparation covariance.
pub fn sample_pointer<R: Rng + ?Sized>(prep: &PointerPrep, rng: &mut R) -> (f64, f64) {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let l11 = prep.var_q.sqrt();
    let l21 = prep.cov / l11;
    let l22 = (prep.var_p - l21 * l21).max(0.0).sqrt();
    (prep.mean_q + l11 * z1, prep.mean_p + l21 * z1 + l22 * z2)
}

/// Bhattacharyya overlap `∫ √(P₁ P₂)` of two system densities: `exp(−|Δc|²/4)`.
pub fn overlap(c1: (f64, f64), c2: (f64, f64)) -> f64 {
    (-((c1.0 - c2.0).powi(2) + (c1.1 - c2.1).powi(2)) / 4.0).exp()
}

/// Monte Carlo estimate of [`overlap`] as `E_{x∼P₁}[√(P₂(x)/P₁(x))]`.
pub fn overlap_monte_carlo<R: Rng + ?Sized>(
    c1: (f64, f64),
    c2: (f64, f64),
    samples: usize,
    rng: &mut R,
) -> f64 {
    let total: f64 = (0..samples)
        .map(|_| {
            let (q, p) = sample_system(c1.0, c1.1, rng);
            (system_density(c2.0, c2.1, q, p) / system_density(c1.0, c1.1, q, p)).sqrt()
        })
        .sum();
    total / samples as f64
}

/// Image of `point` under `map`, which acts in the rotated frame of `config`.
pub fn evolve_with_map(
    point: &PhasePoint,
    map: &AffinePhaseMap,
    config: &OscillatorConfig,
) -> PhasePoint {
    PhasePoint::from_rotated(&map.apply(&point.to_rotated(config)), config)
}

/// Exact classical flow for time `t`.
pub fn evolve(point: &PhasePoint, t: f64, config: &OscillatorConfig) -> PhasePoint {
    evolve_with_map(
        point,
        &heisenberg_map(t, config.g, config.c_theta()),
        config,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub point: PhasePoint,
    /// `c_θ + q(t)` with `q` the rotated-frame coordinate.
    pub a_theta: f64,
}

/// Samples the flow at sorted times in `[0, 1/g]`.
pub fn run_trajectory(
    config: &OscillatorConfig,
    point: &PhasePoint,
    times: &[f64],
) -> Result<Vec<TrajectorySample>> {
    let end = 1.0 / config.g;
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "sample times must be sorted".into(),
        ));
    }
    if let Some(&bad) = times
        .iter()
        .find(|&&t| !(t >= 0.0 && t <= end * (1.0 + 1e-12)))
    {
        return Err(Error::InvalidParameter(format!(
            "sample time {bad} outside [0, {end}]"
        )));
    }
    let c_theta = config.c_theta();
    let start = point.to_rotated(config);
    Ok(times
        .iter()
        .map(|&t| {
            let x = heisenberg_map(t, config.g, c_theta).apply(&start);
            TrajectorySample {
                t,
                point: PhasePoint::from_rotated(&x, config),
                a_theta: c_theta + x[0],
            }
        })
        .collect())
}

/// When the ensemble is read out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Horizon {
    /// `t = 1/g` under the exact flow.
    Completion,
    /// `t = 2πn` under the exact flow.
    Periods(u32),
    /// The completed-measurement map of a limiting regime.
    Limit(RegimeCase),
}

impl Horizon {
    pub fn map(&self, config: &OscillatorConfig) -> Result<AffinePhaseMap> {
        let c_theta = config.c_theta();
        match *self {
            Horizon::Completion => completion_map(config.g, c_theta),
            Horizon::Periods(n) => Ok(periodic_map(n, config.g, c_theta)),
            Horizon::Limit(regime) => regime.limit_map(config.g, c_theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub oscillator: OscillatorConfig,
    pub pointer: PointerPrep,
    pub runs: usize,
    pub horizon: Horizon,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        self.pointer.validate()?;
        if self.runs < 100 {
            return Err(Error::InvalidParameter(format!(
                "need at least 100 runs, got {}",
                self.runs
            )));
        }
        Ok(())
    }
}

/// Equal-width histogram over `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStatistics {
    pub runs: usize,
    pub mean_final_q: f64,
    pub var_final_q: f64,
    pub mean_standard_error: f64,
    /// Standard error of the sample variance under normality, `s²√(2/(n−1))`.
    pub var_standard_error: f64,
    /// Moments propagated through the same map.
    pub predicted: ReadingDistribution,
    pub histogram: Histogram,
}

impl EnsembleStatistics {
    /// Mean and variance each within `k` standard errors of `reference`.
    pub fn agrees_with(&self, reference: &ReadingDistribution, k: f64) -> bool {
        (self.mean_final_q - reference.mean).abs() <= k * self.mean_standard_error
            && (self.var_final_q - reference.variance).abs() <= k * self.var_standard_error
    }
}

pub const HISTOGRAM_BINS: usize = 50;

/// Initial and final points of every run; run `i` draws from substream `i` of `master_seed`.
pub fn ensemble_points(
    config: &EnsembleConfig,
    master_seed: u64,
) -> Result<Vec<(PhasePoint, PhasePoint)>> {
    config.validate()?;
    let osc = config.oscillator;
    let map = config.horizon.map(&osc)?;
    Ok((0..config.runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(master_seed, i as u64);
            let (q, p) = sample_system(osc.c_q, osc.c_p, &mut rng);
            let (pq, pp) = sample_pointer(&config.pointer, &mut rng);
            let start = PhasePoint {
                q_sys: q,
                p_sys: p,
                pointer_q: pq,
                pointer_p: pp,
            };
            (start, evolve_with_map(&start, &map, &osc))
        })
        .collect())
}

/// Monte Carlo moments and histogram of the final pointer position.
pub fn ensemble_statistics<R: Rng + ?Sized>(
    config: &EnsembleConfig,
    rng: &mut R,
) -> Result<EnsembleStatistics> {
    let seed: u64 = rng.random();
    let points = ensemble_points(config, seed)?;
    let qs: Vec<f64> = points.iter().map(|(_, end)| end.pointer_q).collect();
    let (mean, var) = mean_variance(&qs);
    let n = qs.len() as f64;
    let predicted = reading_through(&config.horizon.map(&config.oscillator)?, &config.pointer)?;
    let sd = predicted.variance.sqrt();
    let (lo, hi) = (predicted.mean - 5.0 * sd, predicted.mean + 5.0 * sd);
    Ok(EnsembleStatistics {
        runs: qs.len(),
        mean_final_q: mean,
        var_final_q: var,
        mean_standard_error: (var / n).sqrt(),
        var_standard_error: var * (2.0 / (n - 1.0)).sqrt(),
        predicted,
        histogram: Histogram {
            lo,
            hi,
            counts: histogram(&qs, lo, hi, HISTOGRAM_BINS),
        },
    })
}

/// Ontic disturbance against distributional invariance in the protected regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceReport {
    pub samples: usize,
    /// Fraction of runs whose system point at `t = 1/g` differs from the
    /// point reached by the same run with `P = 0`.
    pub disturbed_fraction: f64,
    /// Mean system-point displacement caused by the pointer momentum at `t = 1/g`.
    pub mean_kick: f64,
    pub periods: u32,
    /// Two-sample tests of the `q'` and `p'` marginals at `t = 2πn` against an
    /// independent draw from the initial distribution.
    pub ks_q_p_value: f64,
    pub ks_p_p_value: f64,
}

pub fn disturbance_check<R: Rng + ?Sized>(
    config: &OscillatorConfig,
    pointer: &PointerPrep,
    samples: usize,
    rng: &mut R,
) -> Result<DisturbanceReport> {
    pointer.validate()?;
    let periods = ((1.0 / config.g) / (2.0 * PI)).round().max(1.0) as u32;
    let c_theta = config.c_theta();
    let at_completion = completion_map(config.g, c_theta)?;
    let at_period = periodic_map(periods, config.g, c_theta);
    let seed: u64 = rng.random();
    let runs: Vec<(f64, PhasePoint)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let (q, p) = sample_system(config.c_q, config.c_p, &mut rng);
            let (pq, pp) = sample_pointer(pointer, &mut rng);
            let start = PhasePoint {
                q_sys: q,
                p_sys: p,
                pointer_q: pq,
                pointer_p: pp,
            };
            let end = evolve_with_map(&start, &at_completion, config);
            let free = evolve_with_map(
                &PhasePoint {
                    pointer_p: 0.0,
                    ..start
                },
                &at_completion,
                config,
            );
            let kick = (end.q_sys - free.q_sys).hypot(end.p_sys - free.p_sys);
            (kick, evolve_with_map(&start, &at_period, config))
        })
        .collect();
    let mut fresh_rng = substream(seed, samples as u64);
    let fresh: Vec<(f64, f64)> = (0..samples)
        .map(|_| sample_system(config.c_q, config.c_p, &mut fresh_rng))
        .collect();
    let final_q: Vec<f64> = runs.iter().map(|(_, p)| p.q_sys).collect();
    let final_p: Vec<f64> = runs.iter().map(|(_, p)| p.p_sys).collect();
    let fresh_q: Vec<f64> = fresh.iter().map(|x| x.0).collect();
    let fresh_p: Vec<f64> = fresh.iter().map(|x| x.1).collect();
    let disturbed = runs.iter().filter(|(k, _)| *k > 1e-12).count();
    Ok(DisturbanceReport {
        samples,
        disturbed_fraction: disturbed as f64 / samples as f64,
        mean_kick: runs.iter().map(|(k, _)| k).sum::<f64>() / samples as f64,
        periods,
        ks_q_p_value: ks_two_sample(&final_q, &fresh_q).p_value,
        ks_p_p_value: ks_two_sample(&final_p, &fresh_p).p_value,
    })
}
