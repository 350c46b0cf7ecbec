use thiserror::Error;

/// Errors raised by the Gaussian toolbox, channel models and rate routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument lies outside the domain of the operation.
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The matrix does not describe a valid (physical, positive definite) Gaussian state.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A matrix claimed to be symplectic fails `S Ω Sᵀ = Ω`.
    #[error("matrix is not symplectic (max deviation {deviation:e})")]
    NotSymplectic { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mode index {index} out of range for a {modes}-mode state")]
    ModeOutOfRange { index: usize, modes: usize },

    /// The measured quadrature has (numerically) zero variance.
    #[error("degenerate homodyne measurement on mode {mode} (variance {variance:e})")]
    DegenerateMeasurement { mode: usize, variance: f64 },

    /// The eavesdropper's joint covariance matrix violates the uncertainty principle.
    #[error("attack rejected: {0}")]
    AttackRejected(String),

    /// The PLOB bound of a perfect channel (η = 1) is unbounded.
    #[error("infinite capacity at unit transmissivity")]
    InfiniteCapacity,

    /// A closed-form expression diverges to −∞ at the requested point.
    #[error("{0} diverges at this point")]
    Divergent(&'static str),

    #[error("invalid search interval [{lo}, {hi}] with tolerance {tolerance}")]
    InvalidInterval { lo: f64, hi: f64, tolerance: f64 },

    #[error("unsupported quadrature order {0} (expected 1..=512)")]
    QuadratureOrder(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected,
        })
    }
}
