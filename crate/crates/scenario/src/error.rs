use cosim::MasterError;
use grid_rms::GridError;
use thiserror::Error;
use wtg_control::ControlError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("unresolved {kind} reference `{id}`")]
    UnresolvedReference { kind: &'static str, id: String },
    #[error("invalid scenario: {0}")]
    Invariant(String),
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error("serialization failed: {0}")]
    Serialize(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ScenarioError {
    /// Stable identifier of the error class.
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::Parse { .. } => "parse",
            ScenarioError::UnresolvedReference { .. } => "unresolved_reference",
            ScenarioError::Invariant(_) => "invariant",
            ScenarioError::Layout(_) => "layout",
            ScenarioError::Grid(_) => "grid",
            ScenarioError::Control(_) => "control",
            ScenarioError::Master(_) => "master",
            ScenarioError::Serialize(_) => "serialize",
            ScenarioError::Io { .. } => "io",
        }
    }
}
