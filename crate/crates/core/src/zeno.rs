//! Zeno-protected measurement of a two-outcome observable.
//!
//! A pointer with Gaussian wavefunction of width `σ` is coupled to `A` through
//! `g A ⊗ P` for a total time `1/g`, split into `N` steps of length `Δt = 1/(gN)`.
//! Before the first step and after every step the system is measured in the
//! protection basis `{|ψ_j⟩}`; any change of outcome aborts the run.
//!
//! With `r_j = ⟨ψ_j|Π₊|ψ_j⟩` the Kraus operators are
//! `M_Q = Σ_j f_{N,r_j}(Q) |ψ_j⟩⟨ψ_j|`, where
//! `f_{N,r}(Q) = Σ_n C(N,n) rⁿ (1−r)^{N−n} Φ(Q − (2n−N)/N)`, and the POVM is
//! `E_Q = M_Q† M_Q` together with `E_abort = I − ∫ E_Q dQ`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{weighted::WeightedIndex, Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::GaussKronrod;
use crate::qcore::{
    c64, eigh, matrix_to_json, spectral_split, CMatrix, CVector, DensityOperator, Observable,
    OrthonormalBasis,
};

/// Largest `N` for which sampling uses the exact Gaussian-mixture expansion of `f²`.
pub const MIXTURE_MAX_STEPS: usize = 64;
/// Quadrature tolerance for `∫ f² dQ`.
pub const QUADRATURE_TOL: f64 = 1e-9;
/// Half-width of the integration window beyond the shift range, in units of `σ`.
pub const WINDOW_SIGMAS: f64 = 8.0;

// Binomial terms below exp(-LOG_WEIGHT_CUTOFF) of the mode are dropped.
const LOG_WEIGHT_CUTOFF: f64 = 45.0;
// Gaussian terms farther than this many σ from Q are skipped in f(Q).
const EVAL_WINDOW_SIGMAS: f64 = 12.0;
// r within this distance of 0 or 1 is treated as an exact eigenstate.
const EIGEN_SNAP: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct ZenoConfig {
    steps: usize,
    coupling: f64,
    sigma: f64,
    basis: OrthonormalBasis,
    observable: Observable,
}

impl ZenoConfig {
    pub fn new(
        steps: usize,
        coupling: f64,
        sigma: f64,
        basis: OrthonormalBasis,
        observable: Observable,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "g must be positive, got {coupling}"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if basis.dim() != observable.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: observable.dim(),
            });
        }
        spectral_split(&observable)?;
        Ok(Self {
            steps,
            coupling,
            sigma,
            basis,
            observable,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `Δt = 1/(gN)`.
    pub fn time_step(&self) -> f64 {
        1.0 / (self.coupling * self.steps as f64)
    }

    pub fn overlaps(&self) -> OverlapVector {
        let (plus, _) = spectral_split(&self.observable).expect("validated on construction");
        OverlapVector(
            self.basis
                .vectors()
                .iter()
                .map(|v| {
                    let a = v.amplitudes();
                    (a.adjoint() * &plus * a)[(0, 0)].re.clamp(0.0, 1.0)
                })
                .collect(),
        )
    }

    pub fn profiles(&self) -> Vec<PointerProfile> {
        self.overlaps()
            .0
            .iter()
            .map(|&r| PointerProfile::new(self.steps, r, self.sigma))
            .collect()
    }
}

/// `r_j = ⟨ψ_j|Π₊|ψ_j⟩` for each protection basis element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapVector(pub Vec<f64>);

impl OverlapVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `⟨ψ_j|A|ψ_j⟩ = 2 r_j − 1`.
    pub fn expectations(&self) -> Vec<f64> {
        self.0.iter().map(|r| 2.0 * r - 1.0).collect()
    }
}

/// `Φ(Q) = (πσ²)^{-1/4} exp(−Q²/2σ²)`.
pub fn pointer_wavefunction(sigma: f64, q: f64) -> f64 {
    (PI * sigma * sigma).powf(-0.25) * (-q * q / (2.0 * sigma * sigma)).exp()
}

/// `γ_{N,r} = sqrt(4r(1−r)/N + σ²)`.
pub fn gamma(steps: usize, r: f64, sigma: f64) -> f64 {
    (4.0 * r * (1.0 - r) / steps as f64 + sigma * sigma).sqrt()
}

/// Large-`N` approximation `√σ/(π^{1/4} γ) exp(−[Q − (2r−1)]²/2γ²)`.
pub fn f_gauss(steps: usize, r: f64, sigma: f64, q: f64) -> f64 {
    let g = gamma(steps, r, sigma);
    let x = q - (2.0 * r - 1.0);
    sigma.sqrt() / (PI.powf(0.25) * g) * (-x * x / (2.0 * g * g)).exp()
}

/// `f_{N,r}(Q)` by direct binomial summation.
pub fn f_exact(steps: usize, r: f64, sigma: f64, q: f64) -> f64 {
    PointerProfile::new(steps, r, sigma).eval(q)
}

/// `f_{N,r}` with its binomial shift distribution precomputed.
///
/// Weights are built by a log-domain ratio recurrence outward from the mode,
/// truncated where they fall below `e^{-45}` of the peak, then normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerProfile {
    steps: usize,
    r: f64,
    sigma: f64,
    shifts: Vec<f64>,
    weights: Vec<f64>,
}

impl PointerProfile {
    pub fn new(steps: usize, r: f64, sigma: f64) -> Self {
        let n_total = steps;
        let nf = n_total as f64;
        let r = if r < EIGEN_SNAP {
            0.0
        } else if r > 1.0 - EIGEN_SNAP {
            1.0
        } else {
            r
        };
        let shift = |n: usize| (2.0 * n as f64 - nf) / nf;
        if r == 0.0 || r == 1.0 {
            let n = if r == 1.0 { n_total } else { 0 };
            return Self {
                steps,
                r,
                sigma,
                shifts: vec![shift(n)],
                weights: vec![1.0],
            };
        }
        let log_odds = (r / (1.0 - r)).ln();
        let mode = (((nf + 1.0) * r).floor() as usize).min(n_total);
        let mut logs = vec![(mode, 0.0f64)];
        let mut lw = 0.0;
        for n in mode..n_total {
            lw += ((nf - n as f64) / (n as f64 + 1.0)).ln() + log_odds;
            if lw < -LOG_WEIGHT_CUTOFF {
                break;
            }
            logs.push((n + 1, lw));
        }
        lw = 0.0;
        for n in (1..=mode).rev() {
            lw += (n as f64 / (nf - n as f64 + 1.0)).ln() - log_odds;
            if lw < -LOG_WEIGHT_CUTOFF {
                break;
            }
            logs.push((n - 1, lw));
        }
        logs.sort_by_key(|&(n, _)| n);
        let total: f64 = logs.iter().map(|&(_, l)| l.exp()).sum();
        Self {
            steps,
            r,
            sigma,
            shifts: logs.iter().map(|&(n, _)| shift(n)).collect(),
            weights: logs.iter().map(|&(_, l)| l.exp() / total).collect(),
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn term_count(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_eigenstate(&self) -> bool {
        self.shifts.len() == 1
    }

    pub fn eval(&self, q: f64) -> f64 {
        let reach = EVAL_WINDOW_SIGMAS * self.sigma;
        let lo = self.shifts.partition_point(|&s| s < q - reach);
        let hi = self.shifts.partition_point(|&s| s <= q + reach);
        self.shifts[lo..hi]
            .iter()
            .zip(&self.weights[lo..hi])
            .fold(0.0, |acc, (&s, &w)| {
                acc + w * pointer_wavefunction(self.sigma, q - s)
            })
    }

    pub fn eval_gauss(&self, q: f64) -> f64 {
        f_gauss(self.steps, self.r, self.sigma, q)
    }

    pub fn gamma(&self) -> f64 {
        gamma(self.steps, self.r, self.sigma)
    }

    /// Interval outside of which `f²` is negligible.
    pub fn window(&self) -> (f64, f64) {
        let pad = WINDOW_SIGMAS * self.sigma;
        (-1.0 - pad, 1.0 + pad)
    }

    /// `∫ f² dQ` by adaptive Gauss–Kronrod quadrature.
    pub fn norm_quadrature(&self) -> Result<f64> {
        if self.is_eigenstate() {
            return Ok(1.0);
        }
        let (a, b) = self.window();
        let panels = ((b - a) / (0.5 * self.sigma)).ceil() as usize;
        GaussKronrod::with_tolerance(QUADRATURE_TOL)
            .initial_intervals(panels)
            .integrate(|q| self.eval(q).powi(2), a, b)
            .map(|i| i.value)
    }

    /// Gaussian components `(weight, mean)` of `f²`, each with standard
    /// deviation `σ/√2`. The product of two shifted pointer wavefunctions is
    /// `Φ(Q−a)Φ(Q−b) = exp(−(a−b)²/4σ²) N(Q; (a+b)/2, σ²/2)`.
    pub fn mixture_components(&self) -> Vec<(f64, f64)> {
        let k = self.shifts.len();
        let four_s2 = 4.0 * self.sigma * self.sigma;
        let mut comps = Vec::with_capacity(k * (k + 1) / 2);
        for n in 0..k {
            for m in n..k {
                let ds = self.shifts[n] - self.shifts[m];
                let mult = if n == m { 1.0 } else { 2.0 };
                let w = mult * self.weights[n] * self.weights[m] * (-ds * ds / four_s2).exp();
                comps.push((w, 0.5 * (self.shifts[n] + self.shifts[m])));
            }
        }
        comps
    }
}

/// The POVM density `Q ↦ E_Q` and the abort element of a Zeno configuration.
#[derive(Debug, Clone)]
pub struct PovmDensity {
    basis: OrthonormalBasis,
    profiles: Vec<PointerProfile>,
    abort: Vec<f64>,
}

impl PovmDensity {
    pub fn new(config: &ZenoConfig) -> Result<Self> {
        let profiles = config.profiles();
        let mut abort = Vec::with_capacity(profiles.len());
        for p in &profiles {
            let norm = p.norm_quadrature()?;
            let a = 1.0 - norm;
            if a < -10.0 * QUADRATURE_TOL {
                return Err(Error::Quadrature(format!(
                    "∫f² = {norm} exceeds 1; abort element would not be positive"
                )));
            }
            abort.push(a.max(0.0));
        }
        Ok(Self {
            basis: config.basis().clone(),
            profiles,
            abort,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn profiles(&self) -> &[PointerProfile] {
        &self.profiles
    }

    /// Eigenvalues `f²_{N,r_j}(Q)` of `E_Q` in the protection basis.
    pub fn element_diagonal(&self, q: f64) -> Vec<f64> {
        self.profiles.iter().map(|p| p.eval(q).powi(2)).collect()
    }

    /// `E_Q = Σ_j f²_{N,r_j}(Q) |ψ_j⟩⟨ψ_j|`.
    pub fn element(&self, q: f64) -> CMatrix {
        self.in_basis(&self.element_diagonal(q))
    }

    /// `⟨ψ_j|E_abort|ψ_j⟩ = 1 − ∫ f²_{N,r_j}`.
    pub fn abort_diagonal(&self) -> &[f64] {
        &self.abort
    }

    pub fn abort_element(&self) -> CMatrix {
        self.in_basis(&self.abort)
    }

    fn in_basis(&self, diag: &[f64]) -> CMatrix {
        let b = self.basis.matrix();
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| c64(x, 0.0)),
        ));
        &b * d * b.adjoint()
    }

    fn check_dim(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(())
    }

    /// `⟨ψ_j|ρ|ψ_j⟩` for each basis element.
    pub fn populations(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        self.check_dim(rho)?;
        Ok(self
            .basis
            .vectors()
            .iter()
            .map(|v| rho.population(v).max(0.0))
            .collect())
    }

    /// `tr(E_Q ρ)`.
    pub fn outcome_pdf(&self, rho: &DensityOperator, q: f64) -> Result<f64> {
        let pops = self.populations(rho)?;
        Ok(pops
            .iter()
            .zip(&self.profiles)
            .map(|(w, p)| w * p.eval(q).powi(2))
            .sum())
    }

    /// `tr(E_abort ρ)`.
    pub fn abort_probability(&self, rho: &DensityOperator) -> Result<f64> {
        let pops = self.populations(rho)?;
        Ok(pops.iter().zip(&self.abort).map(|(w, a)| w * a).sum())
    }

    /// Mass, mean and variance of `Q` under `tr(E_Q ρ)`, the latter two
    /// conditional on not aborting.
    pub fn outcome_moments(&self, rho: &DensityOperator) -> Result<OutcomeMoments> {
        let pops = self.populations(rho)?;
        let sigma = self.profiles[0].sigma();
        let (a, b) = self.profiles[0].window();
        let panels = ((b - a) / (0.5 * sigma)).ceil() as usize;
        let quad = GaussKronrod {
            abs_tol: 1e-11,
            rel_tol: 1e-13,
            ..GaussKronrod::default()
        }
        .initial_intervals(panels);
        let pdf = |q: f64| -> f64 {
            pops.iter()
                .zip(&self.profiles)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, p)| w * p.eval(q).powi(2))
                .sum()
        };
        let mass = quad.integrate(pdf, a, b)?.value;
        let first = quad.integrate(|q| q * pdf(q), a, b)?.value;
        let mean = first / mass;
        let second = quad.integrate(|q| (q - mean).powi(2) * pdf(q), a, b)?.value;
        Ok(OutcomeMoments {
            mass,
            mean,
            variance: second / mass,
        })
    }

    /// Probability mass of readings in `[lo, hi]`.
    pub fn mass_between(&self, rho: &DensityOperator, lo: f64, hi: f64) -> Result<f64> {
        let pops = self.populations(rho)?;
        let sigma = self.profiles[0].sigma();
        let panels = ((hi - lo) / (0.5 * sigma)).ceil().max(1.0) as usize;
        GaussKronrod::with_tolerance(1e-11)
            .initial_intervals(panels)
            .integrate(
                |q| {
                    pops.iter()
                        .zip(&self.profiles)
                        .map(|(w, p)| w * p.eval(q).powi(2))
                        .sum()
                },
                lo,
                hi,
            )
            .map(|i| i.value)
    }

    pub fn to_json(&self, grid: &[f64]) -> PovmJson {
        PovmJson {
            basis: matrix_to_json(&self.basis.matrix()),
            overlaps: self.profiles.iter().map(PointerProfile::r).collect(),
            abort_element: matrix_to_json(&self.abort_element()),
            elements: grid
                .iter()
                .map(|&q| PovmElementJson {
                    q,
                    matrix: matrix_to_json(&self.element(q)),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeMoments {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PovmElementJson {
    pub q: f64,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PovmJson {
    pub basis: Vec<Vec<[f64; 2]>>,
    pub overlaps: Vec<f64>,
    pub abort_element: Vec<Vec<[f64; 2]>>,
    pub elements: Vec<PovmElementJson>,
}

/// `tr(E_Q ρ)` without computing the abort element.
pub fn outcome_pdf(config: &ZenoConfig, rho: &DensityOperator, q: f64) -> Result<f64> {
    if rho.dim() != config.dim() {
        return Err(Error::DimensionMismatch {
            expected: config.dim(),
            found: rho.dim(),
        });
    }
    Ok(config
        .basis()
        .vectors()
        .iter()
        .zip(config.profiles())
        .map(|(v, p)| rho.population(v).max(0.0) * p.eval(q).powi(2))
        .sum())
}

pub fn abort_probability(config: &ZenoConfig, rho: &DensityOperator) -> Result<f64> {
    PovmDensity::new(config)?.abort_probability(rho)
}

pub fn povm_density(config: &ZenoConfig) -> Result<PovmDensity> {
    PovmDensity::new(config)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "q")]
pub enum ZenoOutcome {
    Reading(f64),
    Abort,
}

enum BranchSampler {
    Mixture {
        index: WeightedIndex<f64>,
        means: Vec<f64>,
        spread: Normal<f64>,
    },
    Grid {
        grid: Vec<f64>,
        cdf: Vec<f64>,
    },
}

impl BranchSampler {
    fn for_profile(p: &PointerProfile) -> Result<Self> {
        if p.steps() <= MIXTURE_MAX_STEPS {
            let comps = p.mixture_components();
            let index = WeightedIndex::new(comps.iter().map(|c| c.0))
                .map_err(|e| Error::InvalidParameter(format!("mixture weights: {e}")))?;
            let spread = Normal::new(0.0, p.sigma() / 2f64.sqrt())
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(Self::Mixture {
                index,
                means: comps.into_iter().map(|c| c.1).collect(),
                spread,
            })
        } else {
            let (a, b) = p.window();
            let h = p.sigma().min(p.gamma()) / 40.0;
            let n = ((b - a) / h).ceil() as usize + 1;
            let grid: Vec<f64> = (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect();
            let dens: Vec<f64> = grid.iter().map(|&q| p.eval(q).powi(2)).collect();
            let mut cdf = vec![0.0; n];
            for i in 1..n {
                cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
            }
            let total = cdf[n - 1];
            cdf.iter_mut().for_each(|c| *c /= total);
            Ok(Self::Grid { grid, cdf })
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Mixture {
                index,
                means,
                spread,
            } => means[index.sample(rng)] + spread.sample(rng),
            Self::Grid { grid, cdf } => {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[k - 1], cdf[k]);
                let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                grid[k - 1] + t * (grid[k] - grid[k - 1])
            }
        }
    }
}

/// Draws outcomes distributed as `tr(E_Q ρ)` and `tr(E_abort ρ)`.
///
/// Abort is decided first. Otherwise a protection branch `j` is chosen with
/// probability proportional to `⟨ψ_j|ρ|ψ_j⟩ ∫f²_j`, and `Q` is drawn from
/// `f²_j`: exactly from its Gaussian-mixture expansion when `N ≤ 64`,
/// otherwise by inverse CDF on a fine grid.
pub struct ZenoSampler {
    abort_probability: f64,
    branch: Option<WeightedIndex<f64>>,
    branches: Vec<BranchSampler>,
}

impl ZenoSampler {
    pub fn new(povm: &PovmDensity, rho: &DensityOperator) -> Result<Self> {
        let pops = povm.populations(rho)?;
        let abort_probability = povm.abort_probability(rho)?;
        let weights: Vec<f64> = pops
            .iter()
            .zip(povm.abort_diagonal())
            .map(|(w, a)| w * (1.0 - a))
            .collect();
        let branch = if weights.iter().any(|&w| w > 0.0) {
            Some(
                WeightedIndex::new(&weights)
                    .map_err(|e| Error::InvalidParameter(format!("branch weights: {e}")))?,
            )
        } else {
            None
        };
        let branches = povm
            .profiles()
            .iter()
            .zip(&weights)
            .map(|(p, &w)| {
                if w > 0.0 {
                    BranchSampler::for_profile(p)
                } else {
                    Ok(BranchSampler::Grid {
                        grid: vec![0.0, 0.0],
                        cdf: vec![0.0, 1.0],
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            abort_probability,
            branch,
            branches,
        })
    }

    pub fn abort_probability(&self) -> f64 {
        self.abort_probability
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ZenoOutcome {
        let u: f64 = rng.random();
        if u < self.abort_probability {
            return ZenoOutcome::Abort;
        }
        match &self.branch {
            Some(index) => ZenoOutcome::Reading(self.branches[index.sample(rng)].sample(rng)),
            None => ZenoOutcome::Abort,
        }
    }
}

pub fn sample_outcome<R: Rng + ?Sized>(
    povm: &PovmDensity,
    rho: &DensityOperator,
    rng: &mut R,
) -> Result<ZenoOutcome> {
    Ok(ZenoSampler::new(povm, rho)?.sample(rng))
}

/// Uniform pointer grid `Q_k = −half_width + k·h`, `h = 2·half_width/points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub half_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 4096,
            half_width: 4.0,
        }
    }
}

impl GridSpec {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points)
            .map(|k| -self.half_width + k as f64 * h)
            .collect()
    }
}

/// Per-grid-point probability mass of readings after successful protection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub grid: Vec<f64>,
    pub spacing: f64,
    pub cell_probabilities: Vec<f64>,
    pub abort_probability: f64,
}

/// Largest `N` accepted by [`grid_oracle`].
pub const ORACLE_MAX_STEPS: usize = 64;

/// Brute-force joint evolution of system ⊗ discretised pointer.
///
/// The joint wavefunction `Ψ(Q) ∈ C^d` is projected onto `|ψ_j⟩` at `t₀` and
/// after each of the `N` steps `U(Δt) = Π₊ ⊗ e^{−iP/N} + Π₋ ⊗ e^{+iP/N}`,
/// where the momentum exponentials act as exact lattice translations by
/// `±1/N`. Branch probabilities are summed over `j`; the lost norm is the
/// abort probability. Mixed inputs are unravelled into eigenvectors.
pub fn grid_oracle(
    config: &ZenoConfig,
    rho: &DensityOperator,
    grid: GridSpec,
) -> Result<OracleResult> {
    let n_steps = config.steps();
    if n_steps > ORACLE_MAX_STEPS {
        return Err(Error::InvalidParameter(format!(
            "grid oracle supports N <= {ORACLE_MAX_STEPS}, got {n_steps}"
        )));
    }
    if rho.dim() != config.dim() {
        return Err(Error::DimensionMismatch {
            expected: config.dim(),
            found: rho.dim(),
        });
    }
    let h = grid.spacing();
    let cells = 1.0 / (n_steps as f64 * h);
    let shift = cells.round() as usize;
    if shift == 0 || (cells - shift as f64).abs() > 1e-9 {
        return Err(Error::GridTooCoarse {
            spacing: h,
            steps: n_steps,
        });
    }
    let d = config.dim();
    let g_pts = grid.points;
    let nodes = grid.nodes();
    let mut phi: Vec<f64> = nodes
        .iter()
        .map(|&q| pointer_wavefunction(config.sigma(), q))
        .collect();
    let norm = (phi.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
    phi.iter_mut().for_each(|x| *x /= norm);

    let (pi_plus, pi_minus) = spectral_split(config.observable())?;
    let projectors = config.basis().projectors();
    let (weights, vectors) = eigh(rho.matrix());

    // Joint state stored as d rows of g_pts pointer amplitudes.
    let apply_local =
        |op: &CMatrix, psi: &[Vec<crate::qcore::C64>]| -> Vec<Vec<crate::qcore::C64>> {
            let mut out = vec![vec![c64(0.0, 0.0); g_pts]; d];
            for a in 0..d {
                for b in 0..d {
                    let m = op[(a, b)];
                    if m.norm() == 0.0 {
                        continue;
                    }
                    for k in 0..g_pts {
                        out[a][k] += m * psi[b][k];
                    }
                }
            }
            out
        };
    let translate = |psi: &[Vec<crate::qcore::C64>], right: bool| -> Vec<Vec<crate::qcore::C64>> {
        psi.iter()
            .map(|row| {
                let mut out = vec![c64(0.0, 0.0); g_pts];
                if right {
                    out[shift..].copy_from_slice(&row[..g_pts - shift]);
                } else {
                    out[..g_pts - shift].copy_from_slice(&row[shift..]);
                }
                out
            })
            .collect()
    };

    let mut density = vec![0.0; g_pts];
    for (lambda, col) in weights.iter().zip(vectors.column_iter()) {
        if *lambda <= 1e-15 {
            continue;
        }
        for proj in &projectors {
            let mut psi: Vec<Vec<crate::qcore::C64>> = (0..d)
                .map(|a| phi.iter().map(|&p| col[a] * p).collect())
                .collect();
            psi = apply_local(proj, &psi);
            for _ in 0..n_steps {
                let plus = translate(&apply_local(&pi_plus, &psi), true);
                let minus = translate(&apply_local(&pi_minus, &psi), false);
                psi = plus
                    .into_iter()
                    .zip(minus)
                    .map(|(p, m)| p.into_iter().zip(m).map(|(x, y)| x + y).collect())
                    .collect();
                psi = apply_local(proj, &psi);
            }
            for k in 0..g_pts {
                let amp2: f64 = (0..d).map(|a| psi[a][k].norm_sqr()).sum();
                density[k] += lambda * amp2;
            }
        }
    }
    let cell_probabilities: Vec<f64> = density.iter().map(|p| p * h).collect();
    let kept: f64 = cell_probabilities.iter().sum();
    Ok(OracleResult {
        grid: nodes,
        spacing: h,
        cell_probabilities,
        abort_probability: 1.0 - kept,
    })
}
