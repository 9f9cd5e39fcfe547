use thiserror::Error;

/// Errors from parsing, constructing, or validating a network.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("line {line}, col {col}: undeclared identifier `{name}`")]
    Undeclared { line: usize, col: usize, name: String },

    #[error("line {line}, col {col}: duplicate name `{name}`")]
    Duplicate { line: usize, col: usize, name: String },

    #[error("line {line}, col {col}: malformed range: {msg}")]
    MalformedRange { line: usize, col: usize, msg: String },

    #[error("model declares no species")]
    NoSpecies,

    #[error("model has no reactions")]
    NoReactions,

    #[error("missing init range for species `{0}`")]
    MissingInit(String),

    #[error("invalid model structure: {0}")]
    Structure(String),

    #[error("reaction `{reaction}` failed boundary validation: {msg}")]
    BoundaryCheck { reaction: String, msg: String },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("unknown built-in model `{0}`")]
    UnknownBuiltin(String),
}

/// Errors from evaluating a propensity expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero with nonzero numerator")]
    DivisionByZero,

    #[error("state or parameter vector length does not match the network")]
    Arity,

    #[error("propensity evaluated to a non-finite value")]
    NonFinite,

    #[error("propensity evaluated to a negative rate")]
    Negative,
}
