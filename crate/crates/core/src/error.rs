use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha and beta must be nonempty and of equal length (got {alpha} and {beta})")]
    LengthMismatch { alpha: usize, beta: usize },

    /// `alpha[i] - beta[j]` is an integer; indices are 0-based.
    #[error("alpha[{0}] and beta[{1}] coincide modulo integers; the equation is reducible")]
    ResonantPair(usize, usize),

    #[error("cannot parse exponent {0:?}: expected p/q or a decimal")]
    Parse(String),

    #[error("matrix is numerically singular (condition estimate {0:.3e})")]
    SingularMatrix(f64),

    #[error("a branch of log z (arg z) must be supplied")]
    BranchRequired,

    #[error("series did not converge within {0} terms")]
    Convergence(usize),

    #[error("point z = {0} is outside the convergence region of the series")]
    OutsideConvergence(String),

    #[error("quadrature failed to reach tolerance: estimate {estimate:.3e} > {tol:.3e}")]
    Quadrature { estimate: f64, tol: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("evaluation too close to a singular point at z = {0}")]
    NearSingularity(String),

    #[error("path passes within {margin:.2e} of singular point {point}")]
    SingularityApproach { point: String, margin: f64 },

    #[error("integrator step failure at tau = {tau:.6} (step {step:.3e})")]
    StepFailure { tau: f64, step: f64 },
}

impl Error {
    /// Errors caused by bad user input as opposed to numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::LengthMismatch { .. }
                | Error::ResonantPair(..)
                | Error::Parse(_)
                | Error::BranchRequired
                | Error::OutsideConvergence(_)
                | Error::Precondition(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
