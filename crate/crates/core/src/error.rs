use crate::splitting::IterationTrace;
use crate::Vector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator is set-valued and has no pointwise value")]
    NotSingleValued,

    #[error("linear part is not monotone: smallest eigenvalue of its symmetric part is {min_eigenvalue:e}")]
    NotMonotone { min_eigenvalue: f64 },

    #[error("operator is not firmly nonexpansive: max violation {max_violation:e} over {samples} sample pairs")]
    NotFirmlyNonexpansive { max_violation: f64, samples: usize },

    #[error("singular linear system (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    RootFinding { iterations: usize, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("map is not affine")]
    NotAffine,

    #[error("no fixed point reached within {} iterations (last step norm {:e})", trace.iterations, trace.last_step_norm().unwrap_or(f64::NAN))]
    NotConverged { trace: Box<IterationTrace> },

    #[error("iteration aborted after {} iterations: {source}", trace.iterations)]
    Aborted {
        source: Box<Error>,
        trace: Box<IterationTrace>,
    },

    #[error("numeric overflow after {iterations} iterations")]
    Overflow {
        iterations: usize,
        partial: Option<Vector>,
    },

    #[error("unknown scenario `{id}`; available: {}", available.join(", "))]
    UnknownScenario { id: String, available: Vec<String> },
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
