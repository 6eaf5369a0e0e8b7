use scenario::ScenarioError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed trace {path}: {message}")]
    Format { path: String, message: String },
    #[error("time axes differ: {0}")]
    AxisMismatch(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Control(#[from] wtg_control::ControlError),
}

impl HarnessError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Process exit code: 1 for bad input, 2 when a simulation fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Scenario(e) => match e {
                ScenarioError::Grid(_) | ScenarioError::Master(_) | ScenarioError::Control(_) => 2,
                _ => 1,
            },
            HarnessError::Control(wtg_control::ControlError::TraceTooShort { .. }) => 1,
            HarnessError::Control(_) => 2,
            _ => 1,
        }
    }
}
