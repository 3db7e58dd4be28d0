use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scalar iteration (root finding, minimization) failed to converge.
    #[error("{what} did not converge after {iterations} iterations (last x = {last_x:e}, residual = {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        last_x: f64,
        residual: f64,
    },

    /// The Stieltjes fixed point could not be solved at `z`.
    #[error("Stieltjes solve failed at z = {z}: last iterate {last}, residual {residual:e}")]
    Stieltjes {
        z: Complex64,
        last: Complex64,
        residual: f64,
    },

    /// Adaptive quadrature ran out of subdivisions before reaching tolerance.
    #[error("quadrature on [{lo}, {hi}] stalled with error estimate {error:e}")]
    Quadrature { lo: f64, hi: f64, error: f64 },

    /// A model-based detector found every eigenvalue above the threshold.
    #[error("inconsistent detection: all {p} eigenvalues lie above the noise threshold")]
    Inconsistent { p: usize },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::Stieltjes { .. } | Error::Quadrature { .. }
        )
    }
}
