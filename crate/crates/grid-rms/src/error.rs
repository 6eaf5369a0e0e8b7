use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GridError {
    #[error("bus {0} appears more than once")]
    DuplicateBus(u32),
    #[error("unknown bus {0}")]
    UnknownBus(u32),
    #[error("network needs exactly one slack bus, found {0}")]
    SlackCount(usize),
    #[error("bus {0} is isolated")]
    IsolatedBus(u32),
    #[error("branch {from}-{to} has zero series impedance")]
    ZeroImpedance { from: u32, to: u32 },
    #[error("branch {from}-{to}: {reason}")]
    InvalidBranch { from: u32, to: u32, reason: String },
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("power flow diverged after {iterations} iterations (mismatch {mismatch:e} pu)")]
    Divergence { iterations: usize, mismatch: f64 },
    #[error("power flow Jacobian is singular at iteration {0}")]
    SingularJacobian(usize),
    #[error("augmented admittance matrix is singular")]
    SingularNetwork,
    #[error("numerical overflow in machine states at t = {0} s")]
    NumericalOverflow(f64),
    #[error("simulator used before initialization")]
    NotInitialized,
}
