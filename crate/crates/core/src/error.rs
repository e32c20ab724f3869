use thiserror::Error;

/// Errors shared by all engine modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter |t| = {abs_t} is outside the disc of definition (radius {radius})")]
    OutsideDefinitionRadius { abs_t: f64, radius: f64 },

    #[error("Green kernel argument `{which}` outside the open unit disc (|{which}| = {abs})")]
    OutsideUnitDisc { which: char, abs: f64 },

    #[error("expression not differentiable here: {node}")]
    NonDifferentiable { node: String },

    #[error("disc centered in the singular set of the current")]
    SingularCenter,

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("point lies outside the delta-shrunken domain")]
    OutsideShrunkenDomain,

    #[error("obstacle is -inf on {percent:.2}% of grid nodes; problem ill-posed on this grid")]
    OracleIllPosed { percent: f64 },

    #[error("optimizer exhausted without a strictly feasible disc")]
    NoFeasibleDisc,

    #[error("every quadrature sample was rejected")]
    AllSamplesRejected,

    #[error("invalid construction: {0}")]
    Invalid(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("unsupported dimension {0} (grid oracle supports n = 1, 2)")]
    UnsupportedDimension(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
