//! Black-box reconstruction of a protection channel or system Hamiltonian,
//! followed by identification of the protected state.
//!
//! Process tomography feeds each preparation `|φ_j⟩` through the channel and
//! measures in each basis `{|ξ^(k)_m⟩}`. Linear inversion runs in two stages:
//! state tomography of every output `C(|φ_j⟩⟨φ_j|)`, then the superoperator
//! `S = Out · In⁺` with the vectorised inputs and outputs as columns.

use rand::Rng;
use rand_distr::{weighted::WeightedIndex, Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    c64, eigh, hermitian_deviation, numerical_rank, unvectorize, vectorize, CMatrix, CVector,
    CptpDiagnostics, OrthonormalBasis, QuantumChannel, StateVector, CHANNEL_TOL,
    DEFAULT_MATCH_THRESHOLD,
};
use crate::seeding::{master_rng, substream};

/// Relative singular-value cutoff for spanning checks and pseudo-inverses.
pub const RANK_TOL: f64 = 1e-10;
/// Singular values of `S − I` below this count as fixed-point directions.
pub const FIXED_POINT_TOL: f64 = 0.1;
/// Required relative spectral gap of the fixed-point operator used to read off the basis.
pub const FIXED_POINT_GAP: f64 = 1e-3;
/// Two energies closer than this are treated as the same candidate.
pub const ENERGY_MATCH_TOL: f64 = 1e-7;
/// Gap below which the ground space counts as degenerate.
pub const GROUND_GAP_TOL: f64 = 1e-8;
/// Allowed deviation of `U†U` from the identity.
pub const UNITARY_TOL: f64 = 1e-8;

const BASIS_ATTEMPTS: u64 = 32;
const BASIS_SEED: u64 = 0x5eed_f1c5;
const PHASE_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shots {
    /// Exact Born probabilities.
    Exact,
    Finite(u64),
}

fn spanning_rank(projectors: &[CMatrix]) -> usize {
    let cols: Vec<CVector> = projectors.iter().map(vectorize).collect();
    numerical_rank(&CMatrix::from_columns(&cols), RANK_TOL)
}

fn largest_entry(v: &CVector) -> usize {
    (0..v.len())
        .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
        .unwrap_or(0)
}

/// Phase convention: the largest-magnitude amplitude is real and positive.
fn fix_phase(v: CVector) -> CVector {
    let k = largest_entry(&v);
    let a = v[k];
    if a.norm() == 0.0 {
        return v;
    }
    v * (a.conj() / a.norm())
}

/// Input states whose projectors span the `d²`-dimensional operator space.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationSet {
    states: Vec<StateVector>,
}

impl PreparationSet {
    pub fn new(states: Vec<StateVector>) -> Result<Self> {
        let d = states.first().map(StateVector::dim).unwrap_or(0);
        if let Some(bad) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        let projectors: Vec<CMatrix> = states.iter().map(StateVector::projector).collect();
        let rank = if d == 0 {
            0
        } else {
            spanning_rank(&projectors)
        };
        if rank < d * d || d == 0 {
            return Err(Error::RankDeficient {
                rank,
                needed: d * d,
            });
        }
        Ok(Self { states })
    }

    /// `|k⟩` for every `k`, then `(|j⟩+|k⟩)/√2` and `(|j⟩+i|k⟩)/√2` for `j < k`.
    /// For a qubit this is `{|0⟩, |1⟩, |+⟩, |+i⟩}`.
    pub fn standard(d: usize) -> Result<Self> {
        let mut states = (0..d)
            .map(|k| StateVector::basis_state(d, k))
            .collect::<Result<Vec<_>>>()?;
        for j in 0..d {
            for k in j + 1..d {
                for phase in [c64(1.0, 0.0), c64(0.0, 1.0)] {
                    let mut v = CVector::zeros(d);
                    v[j] = c64(1.0, 0.0);
                    v[k] = phase;
                    states.push(StateVector::normalized(v)?);
                }
            }
        }
        Self::new(states)
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Measurement bases whose projectors jointly span operator space.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    bases: Vec<OrthonormalBasis>,
}

impl MeasurementSet {
    pub fn new(bases: Vec<OrthonormalBasis>) -> Result<Self> {
        let d = bases.first().map(OrthonormalBasis::dim).unwrap_or(0);
        if let Some(bad) = bases.iter().find(|b| b.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        let projectors: Vec<CMatrix> = bases.iter().flat_map(|b| b.projectors()).collect();
        let rank = if d == 0 {
            0
        } else {
            spanning_rank(&projectors)
        };
        if rank < d * d || d == 0 {
            return Err(Error::RankDeficient {
                rank,
                needed: d * d,
            });
        }
        Ok(Self { bases })
    }

    /// The computational basis plus, for every pair `j < k`, the bases
    /// `{(|j⟩ ± |k⟩)/√2}` and `{(|j⟩ ± i|k⟩)/√2}` completed by the remaining
    /// computational vectors. For a qubit these are the Z, X and Y bases.
    pub fn standard(d: usize) -> Result<Self> {
        let mut bases = vec![OrthonormalBasis::computational(d)];
        for j in 0..d {
            for k in j + 1..d {
                for phase in [c64(1.0, 0.0), c64(0.0, 1.0)] {
                    let mut vectors = Vec::with_capacity(d);
                    for sign in [1.0, -1.0] {
                        let mut v = CVector::zeros(d);
                        v[j] = c64(1.0, 0.0);
                        v[k] = phase * sign;
                        vectors.push(StateVector::normalized(v)?);
                    }
                    for l in (0..d).filter(|&l| l != j && l != k) {
                        vectors.push(StateVector::basis_state(d, l)?);
                    }
                    bases.push(OrthonormalBasis::new(vectors)?);
                }
            }
        }
        Self::new(bases)
    }

    pub fn bases(&self) -> &[OrthonormalBasis] {
        &self.bases
    }

    pub fn dim(&self) -> usize {
        self.bases[0].dim()
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }
}

/// `p(m|j,k)` indexed as `probabilities[j][k][m]`, with raw counts when sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub dim: usize,
    pub shots: Shots,
    pub probabilities: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<Vec<u64>>>>,
}

impl ProbabilityTable {
    pub fn preparations(&self) -> usize {
        self.probabilities.len()
    }

    pub fn bases(&self) -> usize {
        self.probabilities.first().map(Vec::len).unwrap_or(0)
    }

    pub fn probability(&self, m: usize, j: usize, k: usize) -> f64 {
        self.probabilities[j][k][m]
    }

    /// Largest `|Σ_m p(m|j,k) − 1|` over all cells.
    pub fn normalization_error(&self) -> f64 {
        self.probabilities
            .iter()
            .flatten()
            .map(|cell| (cell.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Born probabilities `⟨ξ^(k)_m| C(|φ_j⟩⟨φ_j|) |ξ^(k)_m⟩`.
pub fn exact_probabilities(
    channel: &QuantumChannel,
    preps: &PreparationSet,
    meas: &MeasurementSet,
) -> Result<Vec<Vec<Vec<f64>>>> {
    check_dims(channel.dim(), preps, meas)?;
    preps
        .states()
        .iter()
        .map(|phi| {
            let out = channel.apply_matrix(&phi.projector())?;
            Ok(meas
                .bases()
                .iter()
                .map(|basis| {
                    basis
                        .vectors()
                        .iter()
                        .map(|xi| (xi.amplitudes().adjoint() * &out * xi.amplitudes())[(0, 0)].re)
                        .collect()
                })
                .collect())
        })
        .collect()
}

fn check_dims(d: usize, preps: &PreparationSet, meas: &MeasurementSet) -> Result<()> {
    for found in [preps.dim(), meas.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    Ok(())
}

fn multinomial<R: Rng + ?Sized>(shots: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass_left = 1.0;
    let mut counts = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        let p = p.max(0.0);
        let c = if i + 1 == probs.len() || mass_left <= 0.0 {
            remaining
        } else {
            let q = (p / mass_left).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("probability in [0, 1]")
                .sample(rng)
        };
        counts.push(c);
        remaining -= c;
        mass_left -= p;
    }
    counts
}

/// Simulated tomography data. Each `(j, k)` cell draws from its own substream
/// of a seed taken from `rng`, so the table does not depend on scheduling.
pub fn simulate_statistics<R: Rng + ?Sized>(
    channel: &QuantumChannel,
    preps: &PreparationSet,
    meas: &MeasurementSet,
    shots: Shots,
    rng: &mut R,
) -> Result<ProbabilityTable> {
    let exact = exact_probabilities(channel, preps, meas)?;
    let n = match shots {
        Shots::Exact => {
            return Ok(ProbabilityTable {
                dim: channel.dim(),
                shots,
                probabilities: exact,
                counts: None,
            })
        }
        Shots::Finite(0) => return Err(Error::InvalidParameter("shots must be at least 1".into())),
        Shots::Finite(n) => n,
    };
    let seed: u64 = rng.random();
    let n_bases = meas.len();
    let counts: Vec<Vec<Vec<u64>>> = exact
        .par_iter()
        .enumerate()
        .map(|(j, row)| {
            row.iter()
                .enumerate()
                .map(|(k, cell)| {
                    let mut cell_rng = substream(seed, (j * n_bases + k) as u64);
                    multinomial(n, cell, &mut cell_rng)
                })
                .collect()
        })
        .collect();
    let probabilities = counts
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| cell.iter().map(|&c| c as f64 / n as f64).collect())
                .collect()
        })
        .collect();
    Ok(ProbabilityTable {
        dim: channel.dim(),
        shots,
        probabilities,
        counts: Some(counts),
    })
}

fn pseudo_inverse(a: &CMatrix, needed: usize) -> Result<CMatrix> {
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.max();
    let cutoff = RANK_TOL * max.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < needed {
        return Err(Error::RankDeficient { rank, needed });
    }
    svd.pseudo_inverse(cutoff)
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// Linear-inversion estimate, which may fail complete positivity at finite shots.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub channel: QuantumChannel,
    pub diagnostics: CptpDiagnostics,
    pub is_cptp: bool,
}

pub fn linear_inversion(
    table: &ProbabilityTable,
    preps: &PreparationSet,
    meas: &MeasurementSet,
) -> Result<ChannelEstimate> {
    let d = table.dim;
    check_dims(d, preps, meas)?;
    if table.preparations() != preps.len()
        || table
            .probabilities
            .iter()
            .any(|row| row.len() != meas.len() || row.iter().any(|cell| cell.len() != d))
    {
        return Err(Error::InvalidParameter(
            "probability table does not match the preparation and measurement sets".into(),
        ));
    }
    let d2 = d * d;

    // Row (k, m) of the design matrix is vec(Π_km)†, so design · vec(ρ) = p.
    let effects: Vec<CMatrix> = meas.bases().iter().flat_map(|b| b.projectors()).collect();
    let design = CMatrix::from_fn(effects.len(), d2, |row, col| {
        effects[row][(col % d, col / d)].conj()
    });
    let state_inverse = pseudo_inverse(&design, d2)?;

    let outputs: Vec<CVector> = table
        .probabilities
        .iter()
        .map(|row| {
            let p =
                CVector::from_iterator(effects.len(), row.iter().flatten().map(|&x| c64(x, 0.0)));
            &state_inverse * p
        })
        .collect();
    let inputs: Vec<CVector> = preps
        .states()
        .iter()
        .map(|s| vectorize(&s.projector()))
        .collect();
    let input_matrix = CMatrix::from_columns(&inputs);
    let output_matrix = CMatrix::from_columns(&outputs);
    let superoperator = output_matrix * pseudo_inverse(&input_matrix, d2)?;

    let channel = QuantumChannel::new_unchecked(superoperator)?;
    let diagnostics = channel.diagnostics();
    Ok(ChannelEstimate {
        is_cptp: diagnostics.is_cptp(CHANNEL_TOL),
        channel,
        diagnostics,
    })
}

/// Basis in which every fixed point of `channel` is diagonal.
///
/// The eigenvalue-1 eigenspace of the superoperator is taken from the null
/// space of `S − I`. A random Hermitian element with a well-separated spectrum
/// is drawn from it (from a fixed internal seed, redrawing when the gap is
/// too small) and its eigenbasis is returned, phases fixed so the
/// largest-magnitude amplitude is real positive.
pub fn fixed_point_basis(channel: &QuantumChannel) -> Result<OrthonormalBasis> {
    let d = channel.dim();
    let d2 = d * d;
    let shifted = channel.superoperator() - CMatrix::identity(d2, d2);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let fixed: Vec<CMatrix> = (0..d2)
        .filter(|&i| svd.singular_values[i] < FIXED_POINT_TOL)
        .map(|i| unvectorize(&v_t.row(i).adjoint(), d))
        .collect();
    if fixed.len() != d {
        return Err(Error::NotProtectionChannel(format!(
            "fixed-point space has dimension {}, expected {d}",
            fixed.len()
        )));
    }

    let mut rng = master_rng(BASIS_SEED);
    let mut best: Option<(f64, CMatrix)> = None;
    for _ in 0..BASIS_ATTEMPTS {
        let mut x = CMatrix::zeros(d, d);
        for f in &fixed {
            x += f * c64(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        let h = (&x + x.adjoint()).scale(0.5);
        let (values, vectors) = eigh(&h);
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gap = values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let rel_gap = if scale > 0.0 { gap / scale } else { 0.0 };
        if best.as_ref().is_none_or(|(g, _)| rel_gap > *g) {
            best = Some((rel_gap, vectors));
        }
        if rel_gap > FIXED_POINT_GAP {
            break;
        }
    }
    let (gap, vectors) = best.expect("at least one attempt");
    if gap <= FIXED_POINT_GAP {
        return Err(Error::NotProtectionChannel(format!(
            "no fixed-point operator with a nondegenerate spectrum (relative gap {gap:.3e})"
        )));
    }

    // Every fixed point must be diagonal in the recovered basis.
    for f in &fixed {
        let rotated = vectors.adjoint() * f * &vectors;
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| rotated[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off > FIXED_POINT_TOL * f.norm() {
            return Err(Error::NotProtectionChannel(format!(
                "fixed points do not commute (off-diagonal weight {off:.3e})"
            )));
        }
    }

    let states = (0..d)
        .map(|j| StateVector::normalized(fix_phase(vectors.column(j).into_owned())))
        .collect::<Result<Vec<_>>>()?;
    OrthonormalBasis::new(states)
}

/// Measures `state` in `basis`. A state matching a basis element (squared
/// overlap above the default threshold) yields that index without drawing;
/// otherwise the index is Born-sampled.
pub fn identify_state<R: Rng + ?Sized>(
    basis: &OrthonormalBasis,
    state: &StateVector,
    rng: &mut R,
) -> Result<usize> {
    if basis.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: state.dim(),
        });
    }
    if let Some(j) = basis.position_of(state, DEFAULT_MATCH_THRESHOLD) {
        return Ok(j);
    }
    let weights: Vec<f64> = basis
        .vectors()
        .iter()
        .map(|v| v.inner(state).norm_sqr())
        .collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(dist.sample(rng))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianEstimate {
    pub hamiltonian: CMatrix,
    pub energies: Vec<f64>,
    pub energy_bound: f64,
}

fn candidate_energies(phase: f64, t: f64, bound: f64) -> Vec<f64> {
    // e^{−iEt} = e^{iφ}  ⇔  E = (−φ + 2πk)/t.
    let tau = std::f64::consts::TAU;
    let k_lo = ((-bound * t + phase) / tau).floor() as i64 - 1;
    let k_hi = ((bound * t + phase) / tau).ceil() as i64 + 1;
    (k_lo..=k_hi)
        .map(|k| (-phase + tau * k as f64) / t)
        .filter(|e| e.abs() <= bound + ENERGY_MATCH_TOL)
        .collect()
}

/// Recovers `H` from samples of `U(t) = exp(−iHt)`, given `|E_j| ≤ energy_bound`.
///
/// All samples are diagonalised jointly through a fixed generic combination
/// of their Hermitian and anti-Hermitian parts. For each common eigenvector
/// the energies compatible with its eigenphase are listed per sample and
/// intersected; a unique survivor is required. One sample with
/// `t · energy_bound < π` always suffices; otherwise two times with an
/// irrational ratio usually do.
pub fn recover_hamiltonian(
    samples: &[(f64, CMatrix)],
    energy_bound: f64,
) -> Result<HamiltonianEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no unitary samples".into()));
    }
    if !(energy_bound > 0.0 && energy_bound.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "energy bound must be positive, got {energy_bound}"
        )));
    }
    let d = samples[0].1.nrows();
    for (t, u) in samples {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: u.nrows(),
            });
        }
        if !(*t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample time must be positive, got {t}"
            )));
        }
        let dev = (u.adjoint() * u - CMatrix::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > UNITARY_TOL {
            return Err(Error::InvalidParameter(format!(
                "sample at t = {t} is not unitary (deviation {dev:.3e})"
            )));
        }
    }

    let mut combo = CMatrix::zeros(d, d);
    for (s, (_, u)) in samples.iter().enumerate() {
        let a = 1.0 + 0.618_033_988_749_895 * s as f64;
        let b = 0.414_213_562_373_095 + 0.732_050_807_568_877 * s as f64;
        let re = (u + u.adjoint()).scale(0.5);
        let im = (u - u.adjoint()) * c64(0.0, -0.5);
        combo += re.scale(a) + im.scale(b);
    }
    let (_, vectors) = eigh(&combo);

    let degenerate = samples.iter().any(|(_, u)| {
        let eig: Vec<_> = (0..d)
            .map(|j| {
                let v = vectors.column(j);
                (v.adjoint() * u * v)[(0, 0)]
            })
            .collect();
        (0..d).any(|i| (i + 1..d).any(|j| (eig[i] - eig[j]).norm() < PHASE_DEGENERACY_TOL))
    });

    let mut energies = Vec::with_capacity(d);
    let mut all_candidates = Vec::with_capacity(d);
    let mut ambiguous = false;
    for j in 0..d {
        let v = vectors.column(j);
        let per_sample: Vec<(f64, Vec<f64>)> = samples
            .iter()
            .map(|(t, u)| {
                let phase = (v.adjoint() * u * v)[(0, 0)].arg();
                (*t, candidate_energies(phase, *t, energy_bound))
            })
            .collect();
        let surviving: Vec<f64> = per_sample[0]
            .1
            .iter()
            .copied()
            .filter(|&e| {
                per_sample[1..].iter().all(|(t, cands)| {
                    cands
                        .iter()
                        .any(|&c| (c - e).abs() * t < ENERGY_MATCH_TOL * t.max(1.0))
                })
            })
            .collect();
        if surviving.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no energy within the bound {energy_bound} is consistent with all samples"
            )));
        }
        if surviving.len() > 1 {
            ambiguous = true;
        } else {
            // Average the matching candidate from every sample.
            let e0 = surviving[0];
            let matched: Vec<f64> = per_sample
                .iter()
                .map(|(_, cands)| {
                    *cands
                        .iter()
                        .min_by(|a, b| (*a - e0).abs().total_cmp(&(*b - e0).abs()))
                        .expect("non-empty")
                })
                .collect();
            energies.push(matched.iter().sum::<f64>() / matched.len() as f64);
        }
        all_candidates.push(surviving);
    }
    if ambiguous {
        return Err(Error::PhaseAmbiguity {
            degenerate,
            candidates: all_candidates,
        });
    }
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        energies.iter().map(|&e| c64(e, 0.0)),
    ));
    let hamiltonian = &vectors * diag * vectors.adjoint();
    let hamiltonian = (&hamiltonian + hamiltonian.adjoint()).scale(0.5);
    Ok(HamiltonianEstimate {
        hamiltonian,
        energies,
        energy_bound,
    })
}

/// `exp(−iHt)` for Hermitian `H`.
pub fn evolution_operator(hamiltonian: &CMatrix, t: f64) -> Result<CMatrix> {
    let dev = hermitian_deviation(hamiltonian);
    if dev > crate::qcore::HERMITIAN_REJECT_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let (values, vectors) = eigh(&(hamiltonian + hamiltonian.adjoint()).scale(0.5));
    let phases =
        CVector::from_iterator(values.len(), values.iter().map(|&e| c64(0.0, -e * t).exp()));
    Ok(&vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint())
}

/// Eigenvector of the smallest eigenvalue, largest-magnitude amplitude real positive.
pub fn ground_state(hamiltonian: &CMatrix) -> Result<StateVector> {
    let dev = hermitian_deviation(hamiltonian);
    if dev > crate::qcore::HERMITIAN_REJECT_TOL || hamiltonian.nrows() != hamiltonian.ncols() {
        return Err(Error::NotHermitian(dev));
    }
    let (values, vectors) = eigh(&(hamiltonian + hamiltonian.adjoint()).scale(0.5));
    if values.len() > 1 {
        let gap = values[1] - values[0];
        if gap <= GROUND_GAP_TOL {
            return Err(Error::DegenerateGroundState(gap));
        }
    }
    StateVector::normalized(fix_phase(vectors.column(0).into_owned()))
}

/// `½[(q − c_q)² + (p − c_p)²]` on the lowest `dim` Fock states, built as
/// `a†a + ½ − c_q q − c_p p + (c_q² + c_p²)/2` so the number part is exact.
pub fn displaced_oscillator_hamiltonian(dim: usize, c_q: f64, c_p: f64) -> CMatrix {
    let mut h = CMatrix::zeros(dim, dim);
    let offset = 0.5 + 0.5 * (c_q * c_q + c_p * c_p);
    for n in 0..dim {
        h[(n, n)] = c64(n as f64 + offset, 0.0);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for n in 0..dim.saturating_sub(1) {
        // ⟨n|a|n+1⟩ = √(n+1); q = (a + a†)/√2, p = i(a† − a)/√2.
        let amp = ((n + 1) as f64).sqrt() * s;
        let q = c64(amp, 0.0);
        let p_upper = c64(0.0, -amp);
        h[(n, n + 1)] -= q * c_q + p_upper * c_p;
        h[(n + 1, n)] -= q * c_q + p_upper.conj() * c_p;
    }
    h
}

/// Deterministic random dephasing channel for tests and scenarios.
pub fn random_dephasing<R: Rng + ?Sized>(
    d: usize,
    rng: &mut R,
) -> (OrthonormalBasis, QuantumChannel) {
    let basis = OrthonormalBasis::random(d, rng);
    let channel = crate::qcore::dephasing_channel(&basis);
    (basis, channel)
}

/// `max_j |⟨a_j|b_{π(j)}⟩|²` matched greedily: for each element of `truth`,
/// the best squared overlap with any element of `estimate`.
pub fn basis_fidelities(truth: &OrthonormalBasis, estimate: &OrthonormalBasis) -> Vec<f64> {
    truth
        .vectors()
        .iter()
        .map(|t| {
            estimate
                .vectors()
                .iter()
                .map(|e| t.inner(e).norm_sqr())
                .fold(0.0, f64::max)
        })
        .collect()
}
