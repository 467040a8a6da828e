//! Finite-dimensional quantum primitives.
//!
//! Superoperators act on density operators vectorised by column stacking:
//! `vec(X)[i + j*d] = X[(i, j)]`, which is also nalgebra's storage order. With
//! this convention `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, so a Kraus operator `K`
//! contributes `conj(K) ⊗ K` to the superoperator.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const STATE_NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_REJECT_TOL: f64 = 1e-8;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const SPECTRUM_TOL: f64 = 1e-10;
pub const ORTHONORMAL_TOL: f64 = 1e-10;
pub const CHANNEL_TOL: f64 = 1e-10;
/// Default overlap above which a state is treated as a basis element.
pub const DEFAULT_MATCH_THRESHOLD: f64 = 1.0 - 1e-10;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Largest entry of `|M - M†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn symmetrized(m: CMatrix) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let dev = hermitian_deviation(&m);
    if dev > HERMITIAN_REJECT_TOL || !dev.is_finite() {
        return Err(Error::NotHermitian(dev));
    }
    let adj = m.adjoint();
    Ok((m + adj).scale(0.5))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending
/// order; eigenvectors are the matching columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.nrows(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Column-stacking vectorisation.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter()
        .filter(|&&s| s > tol * max.max(f64::MIN_POSITIVE))
        .count()
}

fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(d, d, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            c64(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Pure state with unit 2-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "state dimension must be at least 2, got {}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm before validating.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(CVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&a| c64(a, 0.0)),
        ))
    }

    pub fn basis_state(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::InvalidParameter(format!(
                "basis index {k} out of range for d = {d}"
            )));
        }
        let mut v = CVector::zeros(d);
        v[k] = c64(1.0, 0.0);
        Self::new(v)
    }

    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let v = CVector::from_fn(d, |_, _| {
            c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::normalized(v).expect("Gaussian vector is nonzero")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> CMatrix {
        outer(&self.amplitudes, &self.amplitudes)
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let matrix = symmetrized(matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace {} differs from 1",
                tr.re
            )));
        }
        let (values, _) = eigh(&matrix);
        if values[0] < -PSD_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {:.3e}",
                values[0]
            )));
        }
        Ok(Self { matrix })
    }

    pub fn pure(state: &StateVector) -> Self {
        Self {
            matrix: state.projector(),
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: CMatrix::identity(d, d).unscale(d as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `⟨v|ρ|v⟩`.
    pub fn population(&self, v: &StateVector) -> f64 {
        (v.amplitudes().adjoint() * &self.matrix * v.amplitudes())[(0, 0)].re
    }
}

/// Hermitian observable, optionally certified to have spectrum in `{+1, -1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
    two_outcome: bool,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Ok(Self {
            matrix: symmetrized(matrix)?,
            two_outcome: false,
        })
    }

    /// Hermitian observable whose every eigenvalue is within `SPECTRUM_TOL` of ±1.
    pub fn two_outcome(matrix: CMatrix) -> Result<Self> {
        let matrix = symmetrized(matrix)?;
        let (values, _) = eigh(&matrix);
        if let Some(bad) = values
            .iter()
            .find(|&&e| (e.abs() - 1.0).abs() > SPECTRUM_TOL)
        {
            return Err(Error::NotTwoOutcome(*bad));
        }
        Ok(Self {
            matrix,
            two_outcome: true,
        })
    }

    pub fn pauli_x() -> Self {
        Self::two_outcome(CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        ))
        .expect("Pauli X")
    }

    pub fn pauli_y() -> Self {
        Self::two_outcome(CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)],
        ))
        .expect("Pauli Y")
    }

    pub fn pauli_z() -> Self {
        Self::two_outcome(CMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)],
        ))
        .expect("Pauli Z")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_two_outcome(&self) -> bool {
        self.two_outcome
    }
}

/// `⟨ψ|A|ψ⟩`.
pub fn expectation(obs: &Observable, state: &StateVector) -> Result<f64> {
    if obs.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            found: state.dim(),
        });
    }
    let psi = state.amplitudes();
    let value = (psi.adjoint() * obs.matrix() * psi)[(0, 0)];
    if value.im.abs() > 1e-12 {
        return Err(Error::NotHermitian(value.im.abs()));
    }
    Ok(value.re)
}

/// Projectors onto the ±1 eigenspaces, `Π± = (I ± A)/2`.
pub fn spectral_split(obs: &Observable) -> Result<(CMatrix, CMatrix)> {
    if !obs.is_two_outcome() {
        let (values, _) = eigh(obs.matrix());
        let bad = values
            .into_iter()
            .max_by(|a, b| (a.abs() - 1.0).abs().total_cmp(&(b.abs() - 1.0).abs()))
            .unwrap_or(f64::NAN);
        if (bad.abs() - 1.0).abs() > SPECTRUM_TOL {
            return Err(Error::NotTwoOutcome(bad));
        }
    }
    let d = obs.dim();
    let id = CMatrix::identity(d, d);
    let plus = (&id + obs.matrix()).scale(0.5);
    let minus = (&id - obs.matrix()).scale(0.5);
    Ok((plus, minus))
}

/// Orthonormal basis of `C^d`, stored as `d` state vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    vectors: Vec<StateVector>,
}

impl OrthonormalBasis {
    pub fn new(vectors: Vec<StateVector>) -> Result<Self> {
        let d = vectors.first().map(StateVector::dim).unwrap_or(0);
        if vectors.len() != d || d == 0 {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: vectors.len(),
            });
        }
        let mut dev: f64 = 0.0;
        for (j, a) in vectors.iter().enumerate() {
            if a.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.dim(),
                });
            }
            for (k, b) in vectors.iter().enumerate() {
                let target = if j == k { 1.0 } else { 0.0 };
                dev = dev.max((a.inner(b) - c64(target, 0.0)).norm());
            }
        }
        if dev > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { vectors })
    }

    pub fn computational(d: usize) -> Self {
        Self {
            vectors: (0..d)
                .map(|k| StateVector::basis_state(d, k).expect("index in range"))
                .collect(),
        }
    }

    /// Basis formed by the columns of a unitary matrix.
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        let vectors = (0..u.ncols())
            .map(|j| StateVector::new(u.column(j).into_owned()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }

    /// Real qubit basis `{cos a|0⟩ + sin a|1⟩, −sin a|0⟩ + cos a|1⟩}`.
    pub fn qubit_rotated(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(vec![
            StateVector::from_real(&[c, s]).expect("unit"),
            StateVector::from_real(&[-s, c]).expect("unit"),
        ])
        .expect("rotation is orthogonal")
    }

    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self::from_unitary(&random_unitary(d, rng)).expect("Haar unitary is orthonormal")
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn get(&self, j: usize) -> &StateVector {
        &self.vectors[j]
    }

    /// Matrix whose columns are the basis vectors.
    pub fn matrix(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| self.vectors[j].amplitudes()[i])
    }

    pub fn projectors(&self) -> Vec<CMatrix> {
        self.vectors.iter().map(StateVector::projector).collect()
    }

    /// Index of the basis element whose squared overlap with `state` exceeds
    /// `threshold`, if any.
    pub fn position_of(&self, state: &StateVector, threshold: f64) -> Option<usize> {
        self.vectors
            .iter()
            .position(|v| v.inner(state).norm_sqr() > threshold)
    }
}

/// Completely positive, trace-preserving map on `d × d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim: usize,
    superoperator: CMatrix,
}

/// How far a superoperator is from being CPTP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptpDiagnostics {
    pub choi_min_eigenvalue: f64,
    pub trace_preservation_error: f64,
}

impl CptpDiagnostics {
    pub fn is_cptp(&self, tol: f64) -> bool {
        self.choi_min_eigenvalue >= -tol && self.trace_preservation_error <= tol
    }
}

impl QuantumChannel {
    pub fn new(superoperator: CMatrix) -> Result<Self> {
        let ch = Self::new_unchecked(superoperator)?;
        let diag = ch.diagnostics();
        if !diag.is_cptp(CHANNEL_TOL) {
            return Err(Error::NotCptp(format!(
                "Choi min eigenvalue {:.3e}, trace error {:.3e}",
                diag.choi_min_eigenvalue, diag.trace_preservation_error
            )));
        }
        Ok(ch)
    }

    /// Wraps a superoperator without the CPTP check; dimensions are still validated.
    pub fn new_unchecked(superoperator: CMatrix) -> Result<Self> {
        let n = superoperator.nrows();
        let dim = (n as f64).sqrt().round() as usize;
        if dim * dim != n || superoperator.ncols() != n || dim < 1 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: superoperator.ncols(),
            });
        }
        Ok(Self { dim, superoperator })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim: d,
            superoperator: CMatrix::identity(d * d, d * d),
        }
    }

    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let d = kraus
            .first()
            .map(|k| k.nrows())
            .ok_or_else(|| Error::InvalidParameter("empty Kraus family".into()))?;
        let mut s = CMatrix::zeros(d * d, d * d);
        for k in kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: k.nrows(),
                });
            }
            s += k.map(|z| z.conj()).kronecker(k);
        }
        Self::new(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superoperator(&self) -> &CMatrix {
        &self.superoperator
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ C(|i⟩⟨j|)`.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut choi = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                // C(|i⟩⟨j|) is column i + j d of the superoperator.
                let out = unvectorize(&self.superoperator.column(i + j * d).into_owned(), d);
                choi.view_mut((i * d, j * d), (d, d)).copy_from(&out);
            }
        }
        choi
    }

    pub fn diagnostics(&self) -> CptpDiagnostics {
        let d = self.dim;
        let choi = self.choi();
        let herm = (&choi + choi.adjoint()).scale(0.5);
        let (values, _) = eigh(&herm);
        let anti = hermitian_deviation(&choi);
        let vec_id = vectorize(&CMatrix::identity(d, d));
        let lhs = vec_id.adjoint() * &self.superoperator;
        let trace_err = (lhs - vec_id.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        CptpDiagnostics {
            choi_min_eigenvalue: values[0] - anti,
            trace_preservation_error: trace_err,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim != next.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: next.dim,
            });
        }
        Ok(QuantumChannel {
            dim: self.dim,
            superoperator: &next.superoperator * &self.superoperator,
        })
    }

    /// Applies the superoperator to an arbitrary matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        Ok(unvectorize(&(&self.superoperator * vectorize(m)), self.dim))
    }
}

pub fn apply_channel(ch: &QuantumChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    DensityOperator::new(ch.apply_matrix(rho.matrix())?)
}

/// Non-selective projective measurement in `basis`: `ρ ↦ Σ_j P_j ρ P_j`.
pub fn dephasing_channel(basis: &OrthonormalBasis) -> QuantumChannel {
    let d = basis.dim();
    let mut s = CMatrix::zeros(d * d, d * d);
    for p in basis.projectors() {
        s += p.map(|z| z.conj()).kronecker(&p);
    }
    QuantumChannel {
        dim: d,
        superoperator: s,
    }
}

/// Complex matrix as nested rows of `[re, im]` pairs.
pub fn matrix_to_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidParameter("ragged matrix rows".into()));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| {
        c64(rows[i][j][0], rows[i][j][1])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::master_rng;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> StateVector {
        StateVector::from_real(&[1.0, 1.0]).unwrap()
    }

    #[test]
    fn expectation_examples() {
        assert!((expectation(&Observable::pauli_x(), &plus()).unwrap() - 1.0).abs() < 1e-15);
        assert!(expectation(&Observable::pauli_z(), &plus()).unwrap().abs() < 1e-15);
        let psi = StateVector::from_real(&[0.3f64.cos(), 0.3f64.sin()]).unwrap();
        // Direct contraction ⟨ψ|Z|ψ⟩ = |ψ0|² − |ψ1|².
        let direct = psi.amplitudes()[0].norm_sqr() - psi.amplitudes()[1].norm_sqr();
        let e = expectation(&Observable::pauli_z(), &psi).unwrap();
        assert!((e - direct).abs() < 1e-15);
        assert!((e - 0.6f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_mismatch_and_non_hermitian() {
        let qutrit = StateVector::basis_state(3, 0).unwrap();
        assert!(matches!(
            expectation(&Observable::pauli_z(), &qutrit),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad =
            CMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)]);
        assert!(matches!(Observable::new(bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn small_hermitian_noise_is_absorbed() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c64(1., 0.), c64(1e-10, 0.), c64(0., 0.), c64(-1., 0.)],
        );
        let obs = Observable::two_outcome(m).unwrap();
        assert_eq!(hermitian_deviation(obs.matrix()), 0.0);
    }

    #[test]
    fn spectral_split_pauli() {
        let (p, m) = spectral_split(&Observable::pauli_z()).unwrap();
        assert_eq!(p, StateVector::basis_state(2, 0).unwrap().projector());
        assert_eq!(m, StateVector::basis_state(2, 1).unwrap().projector());
        let (p, m) = spectral_split(&Observable::pauli_x()).unwrap();
        let minus = StateVector::from_real(&[1.0, -1.0]).unwrap();
        assert!((p - plus().projector()).norm() < 1e-15);
        assert!((m - minus.projector()).norm() < 1e-15);
    }

    #[test]
    fn spectral_split_rejects_other_spectra() {
        let obs = Observable::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c64(1.0, 0.0),
            c64(0.5, 0.0),
        ])))
        .unwrap();
        assert!(matches!(spectral_split(&obs), Err(Error::NotTwoOutcome(_))));
        assert!(Observable::two_outcome(obs.matrix().clone()).is_err());
    }

    #[test]
    fn spectral_split_degenerate_qutrit() {
        let mut rng = master_rng(11);
        let u = random_unitary(3, &mut rng);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c64(1., 0.),
            c64(1., 0.),
            c64(-1., 0.),
        ]));
        let obs = Observable::two_outcome(&u * d * u.adjoint()).unwrap();
        let (p, _) = spectral_split(&obs).unwrap();
        assert!((p.trace().re - 2.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn spectral_split_round_trip(seed in any::<u64>(), d in 2usize..5, k in 1usize..4) {
            // Eigendecomposition oracle: build U diag(±1) U†, split, reconstruct.
            let mut rng = master_rng(seed);
            let u = random_unitary(d, &mut rng);
            let signs = CVector::from_fn(d, |i, _| c64(if i < k.min(d - 1) { 1.0 } else { -1.0 }, 0.0));
            let a = &u * CMatrix::from_diagonal(&signs) * u.adjoint();
            let obs = Observable::two_outcome(a.clone()).unwrap();
            let (p, m) = spectral_split(&obs).unwrap();
            prop_assert!((&p - &m - &a).norm() < 1e-10);
            prop_assert!((&p + &m - CMatrix::identity(d, d)).norm() < 1e-10);
            prop_assert!((&p * &p - &p).norm() < 1e-10);
            prop_assert!((&m * &m - &m).norm() < 1e-10);
        }

        #[test]
        fn dephasing_channel_is_cptp_idempotent_and_fixes_diagonals(seed in any::<u64>(), d in 2usize..4) {
            let mut rng = master_rng(seed);
            let basis = OrthonormalBasis::random(d, &mut rng);
            let ch = dephasing_channel(&basis);
            prop_assert!(ch.diagnostics().is_cptp(1e-10));
            let twice = ch.then(&ch).unwrap();
            prop_assert!((twice.superoperator() - ch.superoperator()).norm() < 1e-12);
            let weights: Vec<f64> = (0..d).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
            let total: f64 = weights.iter().sum();
            let mut rho = CMatrix::zeros(d, d);
            for (w, p) in weights.iter().zip(basis.projectors()) {
                rho += p.scale(w / total);
            }
            let out = ch.apply_matrix(&rho).unwrap();
            prop_assert!((out - rho).norm() < 1e-12);
        }
    }

    #[test]
    fn dephasing_examples() {
        let ch = dephasing_channel(&OrthonormalBasis::computational(2));
        let diag = DensityOperator::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c64(0.3, 0.),
            c64(0.7, 0.),
        ])))
        .unwrap();
        assert_eq!(apply_channel(&ch, &diag).unwrap(), diag);
        let out = apply_channel(&ch, &DensityOperator::pure(&plus())).unwrap();
        assert!((out.matrix() - DensityOperator::maximally_mixed(2).matrix()).norm() < 1e-15);
    }

    #[test]
    fn dephasing_matches_direct_sum_for_qutrit() {
        let mut rng = master_rng(5);
        let basis = OrthonormalBasis::random(3, &mut rng);
        let psi = StateVector::random(3, &mut rng);
        let rho = DensityOperator::pure(&psi);
        let out = apply_channel(&dephasing_channel(&basis), &rho).unwrap();
        let mut direct = CMatrix::zeros(3, 3);
        for v in basis.vectors() {
            let p = v.projector();
            direct += &p * rho.matrix() * &p;
        }
        assert!((out.matrix() - direct).norm() < 1e-12);
    }

    #[test]
    fn identity_channel_and_composition() {
        let mut rng = master_rng(9);
        let rho = DensityOperator::pure(&StateVector::random(2, &mut rng));
        assert_eq!(
            apply_channel(&QuantumChannel::identity(2), &rho).unwrap(),
            rho
        );

        let a = dephasing_channel(&OrthonormalBasis::computational(2));
        let b = dephasing_channel(&OrthonormalBasis::qubit_rotated(0.4));
        let composed = apply_channel(&a.then(&b).unwrap(), &rho).unwrap();
        let sequential = apply_channel(&b, &apply_channel(&a, &rho).unwrap()).unwrap();
        assert!((composed.matrix() - sequential.matrix()).norm() < 1e-12);
    }

    #[test]
    fn kraus_construction_matches_dephasing() {
        let basis = OrthonormalBasis::qubit_rotated(0.9);
        let from_kraus = QuantumChannel::from_kraus(&basis.projectors()).unwrap();
        assert!(
            (from_kraus.superoperator() - dephasing_channel(&basis).superoperator()).norm() < 1e-14
        );
    }

    #[test]
    fn non_cptp_is_rejected() {
        // Transpose map is positive but not completely positive.
        let mut s = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                s[(j + i * 2, i + j * 2)] = c64(1.0, 0.0);
            }
        }
        assert!(matches!(QuantumChannel::new(s), Err(Error::NotCptp(_))));
    }

    #[test]
    fn density_validation() {
        let bad_trace = CMatrix::identity(2, 2);
        assert!(matches!(
            DensityOperator::new(bad_trace),
            Err(Error::InvalidDensity(_))
        ));
        let negative =
            CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.5, 0.), c64(-0.5, 0.)]));
        assert!(matches!(
            DensityOperator::new(negative),
            Err(Error::InvalidDensity(_))
        ));
    }

    #[test]
    fn basis_validation_and_lookup() {
        let bad = vec![plus(), StateVector::basis_state(2, 0).unwrap()];
        assert!(matches!(
            OrthonormalBasis::new(bad),
            Err(Error::NotOrthonormal(_))
        ));
        let basis = OrthonormalBasis::qubit_rotated(0.25);
        let state = basis.get(1).clone();
        assert_eq!(basis.position_of(&state, DEFAULT_MATCH_THRESHOLD), Some(1));
        let off = StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert_eq!(basis.position_of(&off, DEFAULT_MATCH_THRESHOLD), None);
    }

    #[test]
    fn json_round_trip() {
        let m = Observable::pauli_y().matrix().clone();
        assert_eq!(matrix_from_json(&matrix_to_json(&m)).unwrap(), m);
    }
}
