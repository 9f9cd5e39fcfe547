use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("setting does not match the network: {0}")]
    Setting(String),

    #[error("propensity evaluation failed during simulation: {0}")]
    Eval(#[from] popdyn_model::EvalError),

    #[error("initial constraint set is infeasible: {0}")]
    Infeasible(String),

    #[error("constraint set too large to enumerate: {0}")]
    ConstraintTooLarge(String),

    #[error("invalid tau {tau}: need 0 < tau <= dt = {dt}")]
    BadTau { tau: f64, dt: f64 },

    #[error("numeric divergence: {0}")]
    Diverged(String),

    #[error("invalid projection: {0}")]
    Projection(String),

    #[error("invalid trajectory shape: {0}")]
    Shape(String),
}
