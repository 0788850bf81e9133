use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument |z| = {modulus} outside the supported range |z| <= {limit}")]
    Range { modulus: f64, limit: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time {t} lies outside the configured window [0, {t_max}]")]
    OutsideWindow { t: f64, t_max: f64 },

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    ZeroPivot { row: usize },

    #[error("propagation diverged at step {step} (t = {t})")]
    Divergence { step: usize, t: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}
