use std::time::Duration;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // network structure and inference
    #[error("cycle detected among variables: {0}")]
    CycleDetected(String),
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },
    #[error("state index {index} out of range for variable `{variable}`")]
    StateOutOfRange { variable: String, index: usize },
    #[error("evidence has zero probability")]
    ZeroProbabilityEvidence,
    #[error("joint state space of {states} exceeds the enumeration cap of {cap}")]
    TooLarge { states: u128, cap: u128 },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid CPT for `{child}`: {reason}")]
    InvalidCpt { child: String, reason: String },

    // measures
    #[error("distribution support is not numeric: {0}")]
    NonNumericSupport(String),
    #[error("empty input")]
    EmptyInput,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    // models, losses, datasets
    #[error("model input `{0}` is missing")]
    MissingInput(String),
    #[error("model input `{0}` is continuous; cannot attach as a CPT node")]
    ContinuousInputUnsupported(String),
    #[error("incompatible loss kind: {0}")]
    IncompatibleLossKind(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("external model did not answer within {0:?}")]
    Timeout(Duration),
    #[error("external model returned a non-finite output at position {0}")]
    NonFiniteOutput(usize),

    // games and engine
    #[error("network has no loss node")]
    LossNodeMissing,
    #[error("network has no model node")]
    ModelNodeMissing,
    #[error("network has no target node")]
    TargetNodeMissing,
    #[error("global expected-value games are identically zero; use var, entropy or cpe")]
    ExpectedValueGlobalRejected,
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("{players} players exceed the exact-mode cap of {cap}")]
    TooManyPlayers { players: usize, cap: usize },
    #[error("player {0} is already in the coalition")]
    PlayerInCoalition(usize),
    #[error("regression system is singular: {distinct} distinct coalitions for {players} players")]
    SingularSystem { distinct: usize, players: usize },
    #[error("invalid regression plan: {0}")]
    InvalidPlan(String),

    // evaluation harness
    #[error("response has zero variance; R^2 is undefined")]
    DegenerateResponse,
    #[error("background dataset is empty")]
    EmptyBackground,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse grouping used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Inference,
    Protocol,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            Protocol(_) | Timeout(_) | NonFiniteOutput(_) => ErrorCategory::Protocol,
            UnboundVariable(_)
            | ZeroProbabilityEvidence
            | TooLarge { .. }
            | NonNumericSupport(_)
            | EmptyInput
            | InvalidDistribution(_)
            | MissingInput(_)
            | TooManyPlayers { .. }
            | PlayerInCoalition(_)
            | SingularSystem { .. }
            | DegenerateResponse
            | EmptyBackground => ErrorCategory::Inference,
            _ => ErrorCategory::Config,
        }
    }
}
