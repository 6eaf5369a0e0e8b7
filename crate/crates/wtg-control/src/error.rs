use thiserror::Error;

use crate::frt::FrtMode;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ControlError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operating point needs |i| = {magnitude:.4} pu above I_max = {i_max} pu")]
    InfeasibleEquilibrium { magnitude: f64, i_max: f64 },
    #[error("illegal FRT transition {from:?} -> {to:?}")]
    IllegalTransition { from: FrtMode, to: FrtMode },
    #[error("unknown FRT mode code {0}")]
    UnknownMode(i64),
    #[error("non-finite measurement {0}")]
    NonFinite(&'static str),
    #[error("trace ends at {end} s but the envelope needs data until {needed} s")]
    TraceTooShort { end: f64, needed: f64 },
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),
}
