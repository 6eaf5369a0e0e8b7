//! Positive-sequence RMS simulation of transmission networks with classical
//! machines and current-controlled static generators.

pub mod component;
pub mod dynamics;
pub mod error;
pub mod network;
pub mod powerflow;
pub mod ybus;

pub use component::{EmbeddedController, GridComponent, Measurement, PccOutput};
pub use dynamics::{GridSimulator, PowerBalance, Terminal};
pub use error::GridError;
pub use network::{
    Branch, Bus, BusKind, FaultEvent, Network, StaticGenerator, SynchronousMachine, EVENT_EPS,
};
pub use powerflow::{power_flow, power_flow_with, BusInjection, PowerFlowOptions, PowerFlowSolution};
pub use ybus::{assemble_ybus, SparseMatrix};
