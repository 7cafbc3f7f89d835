use thiserror::Error;

/// Failures reported by the solvers and iteration drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RicciError {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no real root of the c-function cubic yields a positive solution")]
    RootSelectionAmbiguous,

    #[error("continuation stalled at lambda = {last_lambda} of {target}: {reason}")]
    PathFailure {
        last_lambda: f64,
        target: f64,
        reason: String,
    },

    #[error(
        "cannot scale the SU(2) solution onto the first equation: c = {c} is not below {bound}"
    )]
    ScalingFailure { c: f64, bound: f64 },

    #[error("denominator (4n+8) - 2(x1+x2+x3) vanishes at {point:?}")]
    SingularDenominator { point: [f64; 3] },

    #[error("point lies {distance} from (1,1,1), outside the configured radius {radius}")]
    OutsideDomain { distance: f64, radius: f64 },

    #[error("solve failed at step {step}: {source}")]
    SolveFailed {
        step: usize,
        #[source]
        source: Box<RicciError>,
    },
}

impl RicciError {
    /// Variant name, used by the command line front end when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            RicciError::InvalidMetric(_) => "InvalidMetric",
            RicciError::NoConvergence { .. } => "NoConvergence",
            RicciError::RootSelectionAmbiguous => "RootSelectionAmbiguous",
            RicciError::PathFailure { .. } => "PathFailure",
            RicciError::ScalingFailure { .. } => "ScalingFailure",
            RicciError::SingularDenominator { .. } => "SingularDenominator",
            RicciError::OutsideDomain { .. } => "OutsideDomain",
            RicciError::SolveFailed { .. } => "SolveFailed",
        }
    }
}

pub type Result<T> = std::result::Result<T, RicciError>;
