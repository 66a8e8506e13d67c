use std::fmt;

/// Stage of a coupled time step, used to report where a step aborted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Velocity,
    BoundaryUpdate,
    GaugeVelocity,
    GaugeRefresh,
    Coefficients,
    HeatSolve,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Velocity => "velocity",
            Stage::BoundaryUpdate => "boundary_update",
            Stage::GaugeVelocity => "gauge_velocity",
            Stage::GaugeRefresh => "gauge_refresh",
            Stage::Coefficients => "coefficients",
            Stage::HeatSolve => "heat_solve",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid reference domain: {0}")]
    InvalidDomain(String),

    #[error("derivative order {order} exceeds {max} per call; compose calls for higher orders")]
    DerivativeOrder { order: usize, max: usize },

    #[error("invalid elliptic problem: {0}")]
    InvalidProblem(String),

    #[error("linear solver failed after {iterations} iterations (residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("gauge breakdown: {0}")]
    GaugeBreakdown(String),

    #[error("initial temperature is not positive at node (r = {r}, theta = {theta}): q0 = {value:e}")]
    NonPositiveInitialData { r: f64, theta: f64, value: f64 },

    #[error("step failed during {stage}: {source}")]
    StepFailed {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid Pucci parameters: {0}")]
    InvalidParams(String),

    #[error("coefficient field outside the declared Pucci class: {0}")]
    OutsideClass(String),

    #[error("series value at index {index} is not positive ({value:e})")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("insufficient history: {0}")]
    InsufficientHistory(&'static str),

    #[error("initial temperature vanishes identically")]
    ZeroData,

    #[error("configuration key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |source| Error::StepFailed {
            stage,
            source: Box::new(source),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Error {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
