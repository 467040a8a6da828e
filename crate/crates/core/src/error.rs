use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("observable spectrum is not contained in {{+1, -1}} (found eigenvalue {0})")]
    NotTwoOutcome(f64),

    #[error("basis is not orthonormal (max deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("channel is not completely positive and trace preserving: {0}")]
    NotCptp(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("linear system is rank deficient (rank {rank}, need {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("not a protection channel: {0}")]
    NotProtectionChannel(String),

    #[error(
        "eigenphases do not determine the spectrum{}; candidate energies per eigenvector: {candidates:?}",
        if *degenerate { " (degenerate unitary eigenvalue)" } else { "" }
    )]
    PhaseAmbiguity {
        degenerate: bool,
        candidates: Vec<Vec<f64>>,
    },

    #[error("ground space is degenerate (gap {0:.3e})")]
    DegenerateGroundState(f64),

    #[error("pointer covariance violates the uncertainty bound (det = {0}, need >= 1/4)")]
    UncertaintyViolation(f64),

    #[error("grid spacing {spacing} cannot represent the pointer shift 1/{steps}")]
    GridTooCoarse { spacing: f64, steps: usize },
}
