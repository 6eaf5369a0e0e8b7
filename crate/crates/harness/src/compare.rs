//! Pointwise comparison of two runs on a shared time axis.

use std::fmt;

use cosim::TraceSet;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::trace_io::channel;

/// Default half-width of the exclusion window around each event, in steps.
pub const DEFAULT_EXCLUDE_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDeviation {
    pub channel: String,
    /// Over every sample.
    pub max_abs: f64,
    pub rms: f64,
    /// Over samples outside the event windows; the verdict uses these.
    pub max_abs_outside: f64,
    pub rms_outside: f64,
    /// Largest deviation inside the event windows (0 when there are none).
    pub max_abs_inside: f64,
    /// Time of `max_abs_outside`.
    pub worst_time: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub exclude_steps: usize,
    pub event_times: Vec<f64>,
    pub excluded_samples: usize,
    pub samples: usize,
    pub channels: Vec<ChannelDeviation>,
}

impl ComparisonReport {
    pub fn pass(&self) -> bool {
        self.channels.iter().all(|c| c.pass)
    }

    pub fn get(&self, channel: &str) -> Option<&ChannelDeviation> {
        self.channels.iter().find(|c| c.channel == channel)
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "samples {} (excluded {} within ±{} steps of events {:?})",
            self.samples, self.excluded_samples, self.exclude_steps, self.event_times
        )?;
        writeln!(
            f,
            "{:<18} {:>12} {:>12} {:>12} {:>12} {:>12} {:>10}  verdict",
            "channel", "max_abs", "rms", "max_outside", "rms_outside", "max_inside", "tolerance"
        )?;
        for c in &self.channels {
            writeln!(
                f,
                "{:<18} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.3e}  {}",
                c.channel,
                c.max_abs,
                c.rms,
                c.max_abs_outside,
                c.rms_outside,
                c.max_abs_inside,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.pass() { "PASS" } else { "FAIL" })
    }
}

fn check_axes(a: &TraceSet, b: &TraceSet) -> Result<(), HarnessError> {
    if a.len() != b.len() {
        return Err(HarnessError::AxisMismatch(format!("{} vs {} samples", a.len(), b.len())));
    }
    for (i, (ta, tb)) in a.time.iter().zip(&b.time).enumerate() {
        if (ta - tb).abs() > 1e-9 * ta.abs().max(1.0) {
            return Err(HarnessError::AxisMismatch(format!("sample {i}: t = {ta} vs {tb}")));
        }
    }
    Ok(())
}

/// Mask of samples lying within `steps` samples of an event instant.
pub fn event_mask(time: &[f64], events: &[f64], steps: usize) -> Vec<bool> {
    let h = if time.len() > 1 { time[1] - time[0] } else { 0.0 };
    let half = steps as f64 * h + 1e-9;
    time.iter().map(|t| events.iter().any(|e| (t - e).abs() <= half)).collect()
}

/// Compares the listed channels of two traces. `tolerances` holds one value
/// for all channels or one per channel. Event windows come from the event
/// instants recorded in either trace's metadata.
pub fn compare_traces(
    a: &TraceSet,
    b: &TraceSet,
    channels: &[String],
    tolerances: &[f64],
    exclude_steps: usize,
) -> Result<ComparisonReport, HarnessError> {
    check_axes(a, b)?;
    if tolerances.len() != 1 && tolerances.len() != channels.len() {
        return Err(HarnessError::Invalid(format!(
            "{} tolerances for {} channels",
            tolerances.len(),
            channels.len()
        )));
    }
    let mut events: Vec<f64> = a.meta.event_times.iter().chain(&b.meta.event_times).copied().collect();
    events.sort_by(f64::total_cmp);
    events.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let mask = event_mask(&a.time, &events, exclude_steps);

    let mut out = Vec::with_capacity(channels.len());
    for (k, name) in channels.iter().enumerate() {
        let (xa, xb) = (channel(a, name)?, channel(b, name)?);
        let tol = tolerances[if tolerances.len() == 1 { 0 } else { k }];
        let mut all = Stats::default();
        let mut outside = Stats::default();
        let mut inside = Stats::default();
        for (i, (p, q)) in xa.iter().zip(xb).enumerate() {
            let d = (p - q).abs();
            all.add(d, a.time[i]);
            if mask[i] { inside.add(d, a.time[i]) } else { outside.add(d, a.time[i]) }
        }
        out.push(ChannelDeviation {
            channel: name.clone(),
            max_abs: all.max,
            rms: all.rms(),
            max_abs_outside: outside.max,
            rms_outside: outside.rms(),
            max_abs_inside: inside.max,
            worst_time: outside.at,
            tolerance: tol,
            pass: outside.max <= tol,
        });
    }
    Ok(ComparisonReport {
        exclude_steps,
        event_times: events,
        excluded_samples: mask.iter().filter(|m| **m).count(),
        samples: a.len(),
        channels: out,
    })
}

#[derive(Default)]
struct Stats {
    max: f64,
    at: Option<f64>,
    sum_sq: f64,
    n: usize,
}

impl Stats {
    fn add(&mut self, d: f64, t: f64) {
        // NaN deviations must not pass silently.
        let d = if d.is_nan() { f64::INFINITY } else { d };
        if self.at.is_none() || d > self.max {
            self.max = d;
            self.at = Some(t);
        }
        self.sum_sq += d * d;
        self.n += 1;
    }

    fn rms(&self) -> f64 {
        if self.n == 0 { 0.0 } else { (self.sum_sq / self.n as f64).sqrt() }
    }
}
