//! Recorded signals of a run.

use serde::{Deserialize, Serialize};

use crate::master::Scheme;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

/// Run metadata stored alongside the trace.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMeta {
    pub scenario: String,
    pub scheme: Option<Scheme>,
    pub macro_step: f64,
    pub t_end: f64,
    pub steps: u64,
    pub components: usize,
    pub wall_clock_s: f64,
    /// Instants of discrete events (fault application and clearance).
    #[serde(default)]
    pub event_times: Vec<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Time-indexed recorded channels sharing one uniform time axis.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceSet {
    pub time: Vec<f64>,
    pub channels: Vec<Channel>,
    pub meta: RunMeta,
}

impl TraceSet {
    pub fn new(names: impl IntoIterator<Item = String>) -> Self {
        Self {
            time: Vec::new(),
            channels: names
                .into_iter()
                .map(|name| Channel {
                    name,
                    values: Vec::new(),
                })
                .collect(),
            meta: RunMeta::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|c| c.name.as_str())
    }

    /// Appends one row; `values` must follow channel order.
    pub fn push_row(&mut self, t: f64, values: &[f64]) {
        assert_eq!(values.len(), self.channels.len(), "row width mismatch");
        self.time.push(t);
        for (c, v) in self.channels.iter_mut().zip(values) {
            c.values.push(*v);
        }
    }

    /// Index of the sample closest to `t`.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        if self.time.is_empty() {
            return None;
        }
        let mut best = 0;
        for (i, &ti) in self.time.iter().enumerate() {
            if (ti - t).abs() < (self.time[best] - t).abs() {
                best = i;
            }
        }
        Some(best)
    }

    /// Checks the shape invariants: equal channel lengths and a strictly
    /// increasing, uniformly spaced time axis.
    pub fn validate(&self, spacing: f64) -> Result<(), String> {
        for c in &self.channels {
            if c.values.len() != self.time.len() {
                return Err(format!(
                    "channel {} has {} samples, time axis has {}",
                    c.name,
                    c.values.len(),
                    self.time.len()
                ));
            }
        }
        for w in self.time.windows(2) {
            let dt = w[1] - w[0];
            if dt <= 0.0 {
                return Err(format!("time axis not increasing at {}", w[1]));
            }
            if (dt - spacing).abs() > 1e-9 * spacing.max(1.0) {
                return Err(format!("non-uniform spacing {dt} at {}", w[1]));
            }
        }
        Ok(())
    }
}
