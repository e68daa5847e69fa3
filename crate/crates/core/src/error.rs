use alloc::boxed::Box;
use alloc::string::String;

use crate::design::DesignResult;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error(
        "no stable interval for lambda = {lambda_re}{lambda_im:+}i in mu range [{lo}, {hi}]; try a wider range"
    )]
    NoStableInterval {
        lambda_re: f64,
        lambda_im: f64,
        lo: f64,
        hi: f64,
    },

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("plant network is not normal (commutator norm {0:e})")]
    NonNormalNetwork(f64),

    /// Branch and bound ran out of budget; carries the best design found, if any.
    #[error("time limit reached before optimality was proven")]
    TimedOut(Option<Box<DesignResult>>),
}
