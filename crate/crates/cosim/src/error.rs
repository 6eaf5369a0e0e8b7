use thiserror::Error;

use crate::variable::Kind;

/// Failure reported by a component from inside one of its contract calls.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{0}")]
pub struct ComponentError(pub String);

impl ComponentError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MasterError {
    #[error("component id `{0}` is already registered")]
    DuplicateId(String),
    #[error("priority {priority} is already taken by `{holder}`")]
    DuplicatePriority { priority: i64, holder: String },
    #[error("malformed variable reference `{0}` (expected component.variable)")]
    MalformedReference(String),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("component `{component}` has no variable `{variable}`")]
    UnknownVariable { component: String, variable: String },
    #[error("connection {source_ref} -> {sink}: source must be an output and sink an input")]
    DirectionMismatch { source_ref: String, sink: String },
    #[error("connection {source_ref} -> {sink}: kind {source_kind:?} does not match {sink_kind:?}")]
    KindMismatch {
        source_ref: String,
        sink: String,
        source_kind: Kind,
        sink_kind: Kind,
    },
    #[error("input {0} already has an incoming connection")]
    SinkAlreadyDriven(String),
    #[error("invalid transform (gain {gain}, offset {offset})")]
    InvalidTransform { gain: f64, offset: f64 },
    #[error("transform on non-real connection {0}")]
    TransformOnNonReal(String),
    #[error("invalid master configuration: {0}")]
    InvalidConfig(String),
    #[error("master is not initialized")]
    NotInitialized,
    #[error("master is already initialized; topology is frozen")]
    AlreadyInitialized,
    #[error("horizon reached at t = {0} s")]
    HorizonReached(f64),
    #[error("initialization of `{id}` failed: {source}")]
    Initialization {
        id: String,
        #[source]
        source: ComponentError,
    },
    #[error("`{id}` failed stepping from t = {time} s: {source}")]
    Step {
        id: String,
        time: f64,
        #[source]
        source: ComponentError,
    },
    #[error("`{id}` rejected input `{variable}`: {source}")]
    SetInput {
        id: String,
        variable: String,
        #[source]
        source: ComponentError,
    },
    #[error("output {variable} of `{id}` is not finite at t = {time} s")]
    NonFiniteOutput {
        id: String,
        variable: String,
        time: f64,
    },
}
