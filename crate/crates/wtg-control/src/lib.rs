//! Wind-turbine converter control and fault-ride-through supervision.

pub mod component;
pub mod converter;
pub mod envelope;
pub mod error;
pub mod frt;
pub mod limiter;

pub use component::{ConverterComponent, FrtComponent};
pub use converter::{Converter, ConverterParams, ConverterState, Measurements, OuterQMode};
pub use envelope::{envelope_check, EnvelopeReport, FrtEnvelope};
pub use error::ControlError;
pub use frt::{FrtMode, FrtOverrides, FrtParams, FrtState, FrtSupervisor, TransitionCounts};
pub use limiter::{current_limit, Priority};
