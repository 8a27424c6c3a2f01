use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested point is not in the sub-Rayleigh regime.
    #[error("regime violation: {0}")]
    Regime(String),

    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("quadrature did not converge: estimate {value} with error {error:e}")]
    Quadrature { value: Complex64, error: f64 },

    #[error("series acceleration did not converge after {terms} terms")]
    Acceleration { terms: usize },

    #[error("pole at {0}")]
    Pole(Complex64),

    #[error("branch error: {0}")]
    Branch(String),

    #[error("coefficients changed by {change:e} under radius halving (function not analytic on the disc?)")]
    Analyticity { change: f64 },

    #[error("Liouville constant cross-check failed: F = {f}, F_alt = {f_alt}")]
    CrossCheck { f: Complex64, f_alt: Complex64 },

    #[error("expected a real result, got {0}")]
    NotReal(Complex64),

    #[error("dispersion root lost after x = {last_x} (m_R = {last_m})")]
    RootLoss { last_x: f64, last_m: f64 },
}

impl Error {
    pub fn is_regime(&self) -> bool {
        matches!(self, Error::Regime(_))
    }

    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
