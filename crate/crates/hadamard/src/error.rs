use thiserror::Error;

use crate::models::Point;

#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Option<Point>,
    },

    #[error("horoball intersection appears empty (max violation {violation:.3e})")]
    Infeasible { violation: f64 },

    #[error("orbit coordinates overflowed at n = {n}; retry with a smaller n_max")]
    Overflow { n: u64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("at grid point t = {t:?}: {source}")]
    AtGridPoint {
        t: Vec<f64>,
        #[source]
        source: Box<GeometryError>,
    },
}

pub type Result<T> = std::result::Result<T, GeometryError>;
