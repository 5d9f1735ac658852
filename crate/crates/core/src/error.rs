use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the solvers and model constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    /// The requested share is never reached from the given initial state.
    #[error("share {target} is never reached")]
    NeverReached { target: f64 },

    #[error("integration diverged after t = {last_valid_t}")]
    IntegrationDiverged { last_valid_t: f64 },

    #[error("integration invariant violated at t = {t}: {what}")]
    IntegrationInvariant { what: &'static str, t: f64 },

    #[error("root not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    BracketInvalid {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("quadrature accuracy not reached (estimate {estimate}, error {error_estimate})")]
    AccuracyNotReached { estimate: f64, error_estimate: f64 },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(&'static str),

    /// Two or more suppliers never lose customers, so the equilibrium
    /// cannot be read off the balance equations.
    #[error("degenerate market: churn balance matrix is singular; solve the dynamic problem instead")]
    DegenerateMarket,

    #[error("infeasible market: {0}")]
    InfeasibleMarket(&'static str),

    #[error("inconsistent churn specification: {0}")]
    InconsistentSpec(&'static str),

    #[error("initiation condition violated: {0}")]
    Initiation(&'static str),

    #[error("calibration infeasible: {0}")]
    CalibrationInfeasible(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::IntegrationDiverged { .. }
                | Error::IntegrationInvariant { .. }
                | Error::BracketInvalid { .. }
                | Error::AccuracyNotReached { .. }
                | Error::SingularMatrix
                | Error::DegenerateMarket
                | Error::InfeasibleMarket(_)
                | Error::InconsistentSpec(_)
        )
    }
}
