use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition of a constructor.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Requested bump family is not one of the built-in analytic families.
    #[error("unknown bump family `{0}` (expected one of: polynomial, quartic, skew)")]
    UnknownFamily(String),

    /// Grid nodes do not line up with the waveguide cell boundaries.
    #[error("grid/spec mismatch: {0}")]
    GridAlignment(String),

    /// Iterative eigensolver hit its iteration cap before reaching tolerance.
    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// Zero (or numerically zero) pivot during LDL^T factorization.
    #[error("singular factorization at pivot {0}")]
    SingularFactorization(usize),

    /// Resolvent requested at an energy too close to the computed spectrum.
    #[error("lambda = {lambda} lies within {distance:.3e} of the spectrum (required gap {required:.3e})")]
    LambdaInSpectrum {
        lambda: f64,
        distance: f64,
        required: f64,
    },

    /// Energy outside the analyticity ball of the modified resolvent.
    #[error("lambda = {lambda} is outside the ball |lambda - 1| < {radius:.6e}")]
    OutsideBall { lambda: f64, radius: f64 },

    /// A mathematical precondition of a theorem-level operation fails.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A Monte Carlo trial aborted the whole run.
    #[error("monte carlo trial {trial} failed: {source}")]
    McTrial { trial: usize, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
