use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight model: {0}")]
    InvalidModel(String),

    #[error("expectation undefined for generator family `{family}` at q = {q}")]
    UndefinedForGenerator { family: &'static str, q: f64 },

    #[error("expectation diverges at q = {q}, t = {t}")]
    Divergent { q: f64, t: f64 },

    #[error("no bracket found for root of {what}")]
    NoBracket { what: String },

    #[error("depth overflow: {nodes} grid points exceed the node budget {budget}")]
    DepthOverflow { nodes: u128, budget: u64 },

    #[error("level {level} exceeds realization depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("composition requires strictly increasing abscissae (violated at index {index})")]
    NonMonotone { index: usize },

    #[error("grid functions have mismatched levels {0} and {1}")]
    LevelMismatch(usize, usize),

    #[error("sequence of length {len} too short for order {order} with step {step}")]
    LengthUnderflow { len: usize, order: usize, step: usize },

    #[error("interval [{lo}, {hi}] outside sample range [{min}, {max}]")]
    OutOfRange { lo: f64, hi: f64, min: f64, max: f64 },

    #[error("too few usable radii ({used} < 4)")]
    TooFewRadii { used: usize },

    #[error("q = {q} lies outside the interval J = [{lower}, {upper}]")]
    OutsideJ { q: f64, lower: f64, upper: f64 },

    #[error("no usable level for empirical estimate at q = {q}")]
    NoUsableLevel { q: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed realization dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
