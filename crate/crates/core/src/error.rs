use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("mass matrix is not symmetric (entry {row},{col} differs from its transpose by {diff:e})")]
    AsymmetricMass { row: usize, col: usize, diff: f64 },

    #[error("stiffness matrix is not symmetric (entry {row},{col} differs from its transpose by {diff:e})")]
    AsymmetricStiffness { row: usize, col: usize, diff: f64 },

    #[error("mass matrix is not positive definite")]
    MassNotPositiveDefinite,

    #[error("stiffness matrix is singular (normalized determinant {0:e})")]
    SingularStiffness(f64),

    #[error("bad symmetry entry {value} at {field}[{index}]; expected -1 or +1")]
    BadSignature {
        field: &'static str,
        index: usize,
        value: i64,
    },

    #[error("spectra are not strictly interlaced: {0}")]
    Interlacing(String),

    #[error("degenerate spectrum: eigenvalues {i} and {j} have relative gap {gap:e}")]
    DegenerateSpectrum { i: usize, j: usize, gap: f64 },

    #[error("zero eigenvalue at index {index} is not supported by the generic pipeline")]
    ZeroMode { index: usize },

    #[error("mode normalization is degenerate: last-coordinate component of column {column} vanishes")]
    NormalizationDegenerate { column: usize },

    #[error("near-singular Cauchy nodes: lambda[{i}] - lambda'[{j}] = {gap:e}")]
    NearSingularSpectrum { i: usize, j: usize, gap: f64 },

    #[error("time-dependence ratio has a pole: phase {phase} is {distance:e} from the nearest pole")]
    Pole { phase: f64, distance: f64 },

    #[error("no root of tan y = {a} tanh({b} y) in branch {n}")]
    NoRoot { a: f64, b: f64, n: usize },

    #[error("Newton refinement did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton iterate left the positive quadrant at ({o_n}, {o_prime})")]
    LeftQuadrant { o_n: f64, o_prime: f64 },

    #[error("root at ({o_n}, {o_prime}) coincides with a pole of the impact matrix")]
    PoleCrossing { o_n: f64, o_prime: f64 },

    #[error("mode amplitudes overflow at tau = {tau}, tau' = {tau_prime}")]
    Overflow { tau: f64, tau_prime: f64 },

    #[error("weight system is singular at the impact times")]
    SingularWeightSystem,

    #[error("no sign change of the critical determinant in the search window up to tau = {tau_max}")]
    NoBracket { tau_max: f64 },

    #[error("empty grid: {0}")]
    EmptyGrid(String),

    #[error("model and trajectory disagree: {0}")]
    Mismatch(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
