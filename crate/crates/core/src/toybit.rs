//! Ball-in-a-box toy bit: four ontic states `(x, y) ∈ {±1}²`, strong X/Y
//! measurements that read one coordinate and randomise the other, a classical
//! pointer driven by the coupled coordinate, and optional Markovian
//! back-action flipping the uncoupled coordinate at rate `r`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::substream;

/// Tolerance on `Σ p = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OnticState {
    pub x: i8,
    pub y: i8,
}

impl OnticState {
    /// In the order `(+,+), (+,−), (−,+), (−,−)`.
    pub const ALL: [OnticState; 4] = [
        OnticState { x: 1, y: 1 },
        OnticState { x: 1, y: -1 },
        OnticState { x: -1, y: 1 },
        OnticState { x: -1, y: -1 },
    ];

    pub fn new(x: i8, y: i8) -> Result<Self> {
        if x.abs() != 1 || y.abs() != 1 {
            return Err(Error::InvalidParameter(format!(
                "ontic coordinates must be ±1, got ({x}, {y})"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn index(self) -> usize {
        2 * usize::from(self.x < 0) + usize::from(self.y < 0)
    }

    pub fn coordinate(self, axis: Axis) -> i8 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    pub fn with_coordinate(self, axis: Axis, value: i8) -> Self {
        match axis {
            Axis::X => Self { x: value, ..self },
            Axis::Y => Self { y: value, ..self },
        }
    }

    pub fn flipped(self, axis: Axis) -> Self {
        self.with_coordinate(axis, -self.coordinate(axis))
    }
}

/// Probability vector `(p₊₊, p₊₋, p₋₊, p₋₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpistemicState(pub [f64; 4]);

impl EpistemicState {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "negative or NaN probability in {p:?}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum}"
            )));
        }
        Ok(Self(p))
    }

    pub fn uniform() -> Self {
        Self([0.25; 4])
    }

    pub fn probabilities(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn probability(&self, state: OnticState) -> f64 {
        self.0[state.index()]
    }

    /// `P(coordinate(axis) = sign)`.
    pub fn marginal(&self, axis: Axis, sign: Sign) -> f64 {
        OnticState::ALL
            .iter()
            .filter(|s| s.coordinate(axis) == sign.value())
            .map(|&s| self.probability(s))
            .sum()
    }

    /// `Σ p(x, y) · coordinate(axis)`.
    pub fn expectation(&self, axis: Axis) -> f64 {
        OnticState::ALL
            .iter()
            .map(|&s| self.probability(s) * f64::from(s.coordinate(axis)))
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OnticState {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for s in OnticState::ALL {
            acc += self.probability(s);
            if u < acc {
                return s;
            }
        }
        // Rounding can leave u just above the final partial sum.
        *OnticState::ALL
            .iter()
            .rev()
            .find(|&&s| self.probability(s) > 0.0)
            .expect("normalized")
    }

    /// The preparation `(axis, sign)` this state equals, if any.
    pub fn as_preparation(&self) -> Option<(Axis, Sign)> {
        [Axis::X, Axis::Y]
            .into_iter()
            .flat_map(|a| [(a, Sign::Plus), (a, Sign::Minus)])
            .find(|&(a, s)| prepare(a, s) == *self)
    }
}

/// `p^{x±}` or `p^{y±}`: uniform over the two ontic states with the given coordinate.
pub fn prepare(axis: Axis, sign: Sign) -> EpistemicState {
    let mut p = [0.0; 4];
    for s in OnticState::ALL {
        if s.coordinate(axis) == sign.value() {
            p[s.index()] = 0.5;
        }
    }
    EpistemicState(p)
}

/// Reads `axis` and resamples the other coordinate uniformly.
pub fn strong_measure<R: Rng + ?Sized>(
    ontic: OnticState,
    axis: Axis,
    rng: &mut R,
) -> (i8, OnticState) {
    let other = if rng.random::<bool>() { 1 } else { -1 };
    (
        ontic.coordinate(axis),
        ontic.with_coordinate(axis.other(), other),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationRow {
    pub label: &'static str,
    pub state: EpistemicState,
    pub x: f64,
    pub y: f64,
}

/// Expectation values of X and Y for the four preparable states.
pub fn expectation_table() -> Vec<ExpectationRow> {
    [
        ("x+", Axis::X, Sign::Plus, 1.0, 0.0),
        ("x-", Axis::X, Sign::Minus, -1.0, 0.0),
        ("y+", Axis::Y, Sign::Plus, 0.0, 1.0),
        ("y-", Axis::Y, Sign::Minus, 0.0, -1.0),
    ]
    .into_iter()
    .map(|(label, axis, sign, x, y)| ExpectationRow {
        label,
        state: prepare(axis, sign),
        x,
        y,
    })
    .collect()
}

/// Closed-form back-action of a continuous `measured`-axis measurement over
/// time `t`: the other coordinate relaxes towards uniform as `e^{−2rt}`.
pub fn backaction_evolve(
    p: &EpistemicState,
    r_rate: f64,
    t: f64,
    measured: Axis,
) -> Result<EpistemicState> {
    if !(r_rate >= 0.0 && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need r ≥ 0 and t ≥ 0, got r = {r_rate}, t = {t}"
        )));
    }
    let decay = if r_rate == 0.0 || t == 0.0 {
        1.0
    } else {
        (-2.0 * r_rate * t).exp()
    };
    let flip = measured.other();
    let mut out = [0.0; 4];
    for s in OnticState::ALL {
        let stay = p.probability(s);
        let partner = p.probability(s.flipped(flip));
        out[s.index()] = 0.5 * (stay * (1.0 + decay) + partner * (1.0 - decay));
    }
    Ok(EpistemicState(out))
}

/// Probability that one back-action segment of length `Δt` flips the coordinate.
pub fn flip_probability(r_rate: f64, dt: f64) -> f64 {
    -0.5 * (-2.0 * r_rate * dt).exp_m1()
}

/// `[½(1 + e^{−2r/(gN)})]^N`, evaluated in the log domain.
pub fn success_probability(steps: usize, g: f64, r_rate: f64) -> Result<f64> {
    if steps == 0 || !(g > 0.0) || !(r_rate >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need N ≥ 1, g > 0, r ≥ 0; got N = {steps}, g = {g}, r = {r_rate}"
        )));
    }
    let n = steps as f64;
    let x = 2.0 * r_rate / (g * n);
    Ok((n * (0.5 * (-x).exp_m1()).ln_1p()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyRunConfig {
    pub steps: usize,
    pub g: f64,
    pub r_rate: f64,
    pub protect: Axis,
    pub measure: Axis,
    pub backaction_enabled: bool,
    /// Apply a protection measurement at `t₀ = 0` before the first segment.
    pub protect_at_start: bool,
    pub record_paths: bool,
}

impl ToyRunConfig {
    pub fn new(steps: usize, g: f64, protect: Axis, measure: Axis) -> Result<Self> {
        let cfg = Self {
            steps,
            g,
            r_rate: 0.0,
            protect,
            measure,
            backaction_enabled: false,
            protect_at_start: true,
            record_paths: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_backaction(mut self, r_rate: f64) -> Result<Self> {
        self.r_rate = r_rate;
        self.backaction_enabled = true;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "g must be positive, got {}",
                self.g
            )));
        }
        if !(self.r_rate >= 0.0 && self.r_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r must be nonnegative, got {}",
                self.r_rate
            )));
        }
        Ok(())
    }

    /// `Δt = 1/(gN)`.
    pub fn time_step(&self) -> f64 {
        1.0 / (self.g * self.steps as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyRunResult {
    pub success: bool,
    pub final_q: f64,
    /// `Q_n` for `n = 0..=N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer_path: Option<Vec<f64>>,
    /// Ontic state right after each protection measurement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ontic_path: Option<Vec<OnticState>>,
}

/// One protected run. Each of the `N` segments drifts the pointer by
/// `±1/N` according to the coupled coordinate, applies a back-action flip
/// with probability `½(1 − e^{−2rΔt})`, then measures the protected axis.
pub fn protected_run<R: Rng + ?Sized>(
    config: &ToyRunConfig,
    initial: &EpistemicState,
    rng: &mut R,
) -> Result<ToyRunResult> {
    config.validate()?;
    if initial.as_preparation().is_none() {
        return Err(Error::InvalidParameter(
            "initial state must be one of the four preparable states".into(),
        ));
    }
    let n = config.steps;
    let flip_p = if config.backaction_enabled {
        flip_probability(config.r_rate, config.time_step())
    } else {
        0.0
    };
    let flipped_axis = config.measure.other();
    let mut pointer_path = config.record_paths.then(|| Vec::with_capacity(n + 1));
    let mut ontic_path = config.record_paths.then(|| Vec::with_capacity(n + 1));

    let mut state = initial.sample(rng);
    let mut reference = None;
    let mut success = true;
    let mut protect = |state: &mut OnticState, rng: &mut R, path: &mut Option<Vec<OnticState>>| {
        let (outcome, next) = strong_measure(*state, config.protect, rng);
        *state = next;
        match reference {
            None => reference = Some(outcome),
            Some(r) if r != outcome => success = false,
            _ => {}
        }
        if let Some(p) = path.as_mut() {
            p.push(next);
        }
    };

    if config.protect_at_start {
        protect(&mut state, rng, &mut ontic_path);
    }
    let mut sum: i64 = 0;
    if let Some(p) = pointer_path.as_mut() {
        p.push(0.0);
    }
    for _ in 0..n {
        sum += i64::from(state.coordinate(config.measure));
        if let Some(p) = pointer_path.as_mut() {
            p.push(sum as f64 / n as f64);
        }
        if flip_p > 0.0 && rng.random::<f64>() < flip_p {
            state = state.flipped(flipped_axis);
        }
        protect(&mut state, rng, &mut ontic_path);
    }
    Ok(ToyRunResult {
        success,
        final_q: sum as f64 / n as f64,
        pointer_path,
        ontic_path,
    })
}

/// Independent runs, run `i` drawing from substream `i` of `master_seed`.
pub fn run_ensemble(
    config: &ToyRunConfig,
    initial: &EpistemicState,
    runs: usize,
    master_seed: u64,
) -> Result<Vec<ToyRunResult>> {
    (0..runs)
        .into_par_iter()
        .map(|i| protected_run(config, initial, &mut substream(master_seed, i as u64)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: usize,
    pub successes: usize,
    pub success_frequency: f64,
    pub mean_final_q: f64,
    pub var_final_q: f64,
}

pub fn summarize(results: &[ToyRunResult]) -> EnsembleSummary {
    let qs: Vec<f64> = results.iter().map(|r| r.final_q).collect();
    let (mean, var) = crate::stats::mean_variance(&qs);
    let successes = results.iter().filter(|r| r.success).count();
    EnsembleSummary {
        runs: results.len(),
        successes,
        success_frequency: successes as f64 / results.len() as f64,
        mean_final_q: mean,
        var_final_q: var,
    }
}
