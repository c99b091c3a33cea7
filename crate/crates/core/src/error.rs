use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:e})")]
    NonHermitianInput { max_asymmetry: f64 },

    #[error("basis is not unitary (max deviation from identity {max_deviation:e})")]
    NonUnitaryBasis { max_deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid dimension {0}: need at least 2")]
    InvalidDimension(usize),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("energy levels are degenerate or unordered (min gap {min_gap:e})")]
    DegenerateSpectrum { min_gap: f64 },

    #[error("operation requires a 3-level system, got {0} levels")]
    RequiresThreeLevels(usize),

    #[error("population {index} is {value:e}; the (alpha, beta) parametrization is singular")]
    ZeroPopulation { index: usize, value: f64 },

    #[error("invalid populations: {0}")]
    InvalidPopulations(String),

    #[error("projection direction vanishes; cannot extract alpha")]
    DegenerateDirection,

    #[error("invalid protocol specification: {0}")]
    InvalidSpec(String),

    #[error("characteristic function is not normalized: G(0) = {g0}")]
    NotNormalized { g0: f64 },

    #[error("no bracket for G(eps) = 1 inside the search range (G({boundary}) = {g_at_boundary})")]
    BracketNotFound { boundary: f64, g_at_boundary: f64 },

    #[error("root residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}
