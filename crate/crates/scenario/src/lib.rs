//! Scenario files and the builders for the three study configurations:
//! monolithic, small-scale co-simulation and large-scale co-simulation.

pub mod assemble;
pub mod builders;
pub mod data;
pub mod embedded;
pub mod error;
pub mod layout;
pub mod schema;

pub use assemble::{assemble, build_network, faults, run_scenario, Run};
pub use builders::{
    build_large_scale, build_large_scale_with, build_monolithic, build_small_scale, unit_connections,
};
pub use embedded::EmbeddedWtg;
pub use error::ScenarioError;
pub use layout::{equivalence_collector, equivalent_impedance, CableParams, WppLayout};
pub use schema::*;
