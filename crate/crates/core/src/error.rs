use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),

    #[error("invalid scheme design: {0}")]
    InvalidDesign(String),

    #[error("assignment shape is not integral: {0}")]
    NonIntegralShape(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("stopping set unreachable: {0}")]
    UnreachableStoppingSet(String),

    #[error("a retained product has zero spatial diversity")]
    ZeroDiversity,

    #[error("no edge node available to transmit (M = 0)")]
    NoActiveNodes,

    #[error("no feasible design for {0}")]
    NoFeasibleDesign(String),

    #[error("no degree-distribution candidate meets the failure target {target:e}")]
    ConstraintInfeasible { target: f64 },
}
