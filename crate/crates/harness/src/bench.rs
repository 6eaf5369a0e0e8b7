//! Wall-clock timing of scenario runs.

use std::time::Instant;

use cosim::TraceSet;
use scenario::{run_scenario, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: String,
    pub components: usize,
    pub steps: u64,
    pub repetitions: usize,
    pub median_s: f64,
    pub mean_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub steps_per_s: f64,
}

pub const MIN_REPETITIONS: usize = 3;

/// Runs a scenario `reps` times back to back, timing assembly plus run, and
/// returns the timing row with the trace of the first repetition. Every
/// repetition must take the same number of steps.
pub fn bench_scenario(s: &Scenario, reps: usize) -> Result<(BenchRow, TraceSet), HarnessError> {
    if reps < MIN_REPETITIONS {
        return Err(HarnessError::Invalid(format!("need at least {MIN_REPETITIONS} repetitions, got {reps}")));
    }
    let mut times = Vec::with_capacity(reps);
    let mut first: Option<TraceSet> = None;
    for _ in 0..reps {
        let start = Instant::now();
        let run = run_scenario(s)?;
        times.push(start.elapsed().as_secs_f64());
        match &first {
            None => first = Some(run.trace),
            Some(t) if t.meta.steps != run.trace.meta.steps => {
                return Err(HarnessError::Invalid(format!(
                    "{}: step count changed between repetitions ({} vs {})",
                    s.name, t.meta.steps, run.trace.meta.steps
                )));
            }
            Some(_) => {}
        }
    }
    let trace = first.expect("at least one repetition");
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if reps % 2 == 1 {
        sorted[reps / 2]
    } else {
        0.5 * (sorted[reps / 2 - 1] + sorted[reps / 2])
    };
    let row = BenchRow {
        scenario: s.name.clone(),
        components: trace.meta.components,
        steps: trace.meta.steps,
        repetitions: reps,
        median_s: median,
        mean_s: times.iter().sum::<f64>() / reps as f64,
        min_s: sorted[0],
        max_s: sorted[reps - 1],
        steps_per_s: trace.meta.steps as f64 / median,
    };
    Ok((row, trace))
}

/// Benchmarks the scenarios one after another; never concurrently.
pub fn bench_scaling(scenarios: &[Scenario], reps: usize) -> Result<Vec<BenchRow>, HarnessError> {
    scenarios.iter().map(|s| bench_scenario(s, reps).map(|(row, _)| row)).collect()
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<16} {:>10} {:>8} {:>5} {:>10} {:>10} {:>10} {:>10} {:>12}\n",
        "scenario", "components", "steps", "reps", "median_s", "mean_s", "min_s", "max_s", "steps_per_s"
    );
    for r in rows {
        out += &format!(
            "{:<16} {:>10} {:>8} {:>5} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>12.1}\n",
            r.scenario, r.components, r.steps, r.repetitions, r.median_s, r.mean_s, r.min_s, r.max_s, r.steps_per_s
        );
    }
    out
}
