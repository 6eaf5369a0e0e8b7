//! Co-simulation master for FMI-style components.
//!
//! Components implement [`Component`]; the [`Master`] wires their scalar
//! variables together and advances them in lockstep macro steps using either
//! the serial (prioritized, time-shifted) or the parallel (latched) scheme.

pub mod component;
pub mod error;
pub mod master;
pub mod mock;
pub mod trace;
pub mod variable;

pub use component::{Component, ComponentHandle, InitRole};
pub use error::{ComponentError, MasterError};
pub use master::{Connection, Master, MasterConfig, RecordSpec, RunOutput, Scheme};
pub use trace::{Channel, RunMeta, TraceSet};
pub use variable::{Direction, Kind, Transform, Value, VariableDecl, VariableRef};
