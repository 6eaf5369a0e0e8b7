//! Experiment harness: runs scenarios, writes and reads traces, compares
//! runs, checks ride-through envelopes and times scenarios. The
//! `windcosim` binary is a thin shell over [`run_cli`].

pub mod analysis;
pub mod bench;
pub mod cli;
pub mod compare;
pub mod error;
pub mod plot;
pub mod trace_io;

pub use analysis::{dominant_frequency, first_reach, oscillation_decay, DecayReport};
pub use bench::{bench_scaling, bench_scenario, format_table, BenchRow};
pub use cli::{resolve_scenario, run_cli, EXIT_OK, EXIT_RUN, EXIT_TOLERANCE, EXIT_USAGE};
pub use compare::{compare_traces, event_mask, ChannelDeviation, ComparisonReport, DEFAULT_EXCLUDE_STEPS};
pub use error::HarnessError;
pub use trace_io::{load, read_csv, save, write_csv};
