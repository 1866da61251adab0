use thiserror::Error;

use crate::dimacs::DimacsError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable {var} out of range 1..={n}")]
    VariableOutOfRange { var: usize, n: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("refusing to enumerate 2^{n} assignments (limit is n <= {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("branching process is supercritical (lambda1 = {lambda1})")]
    Supercritical { lambda1: f64 },

    #[error("bisection bracket failure: {message}\nprobes: {probes:?}")]
    Bracket {
        message: String,
        probes: Vec<(f64, bool)>,
    },

    #[error("integration became unstable at x = {x}")]
    Integration { x: f64, last_valid: Box<crate::ode::ClauseDensityState> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Dimacs(#[from] DimacsError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
