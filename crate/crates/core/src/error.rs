use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("points are not causally related")]
    NotCausalPair,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid needs at least two distinct endpoints and n >= 2 (got n = {0})")]
    BadGrid(usize),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("no causal coupling exists between the marginals")]
    Infeasible,
    #[error("brute-force oracle is capped at {cap} atoms per side (got {got})")]
    TooLarge { cap: usize, got: usize },
    #[error("mu-atom {0} is not reachable by any chain from the root pair")]
    UnreachableAtom(usize),
    #[error("positive cycle through mu-atom {atom} (excess {excess:e}): support is not cyclically monotone")]
    PositiveCycle { atom: usize, excess: f64 },
    #[error("root pair ({0}, {1}) is not in the coupling support")]
    RootNotInSupport(usize, usize),
    #[error("interval union has measure {available} < required {required}")]
    InsufficientMeasure { available: f64, required: f64 },
    #[error("invalid interval set: {0}")]
    BadIntervals(String),
    #[error("profile validation failed at condition ({condition}): {detail}")]
    ValidationFailed { condition: u8, detail: String },
    #[error("critical-point equation has no bracketed root at theta = {0}")]
    RootNotBracketed(f64),
    #[error("coupling support violates cyclical monotonicity between entries {0} and {1}")]
    MonotonicityViolation(usize, usize),
    #[error("monotone rearrangement cost {map} differs from the optimum {optimum}")]
    CostMismatch { map: f64, optimum: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
