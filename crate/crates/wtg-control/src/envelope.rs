//! Voltage-time ride-through envelope and compliance check.

use serde::{Deserialize, Serialize};

use crate::error::ControlError;

/// Piecewise-linear minimum voltage against time since dip onset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct FrtEnvelope {
    points: Vec<(f64, f64)>,
}

impl Default for FrtEnvelope {
    fn default() -> Self {
        Self {
            points: vec![(0.0, 0.0), (0.2, 0.0), (1.5, 0.9)],
        }
    }
}

impl TryFrom<Vec<(f64, f64)>> for FrtEnvelope {
    type Error = ControlError;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<FrtEnvelope> for Vec<(f64, f64)> {
    fn from(e: FrtEnvelope) -> Self {
        e.points
    }
}

impl FrtEnvelope {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ControlError> {
        let bad = |m: &str| Err(ControlError::InvalidEnvelope(m.to_string()));
        if points.is_empty() {
            return bad("needs at least one breakpoint");
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return bad("breakpoint times must be strictly increasing");
        }
        if points.iter().any(|&(t, v)| !t.is_finite() || !(0.0..=1.0).contains(&v)) {
            return bad("voltages must lie in [0, 1] and times be finite");
        }
        Ok(Self { points })
    }

    /// Like [`FrtEnvelope::new`], also requiring the final voltage to reach
    /// the supervisor's exit threshold.
    pub fn with_exit(points: Vec<(f64, f64)>, v_exit: f64) -> Result<Self, ControlError> {
        let e = Self::new(points)?;
        if e.points.last().map(|p| p.1) < Some(v_exit) {
            return Err(ControlError::InvalidEnvelope(format!(
                "last breakpoint must be at least v_exit = {v_exit}"
            )));
        }
        Ok(e)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Time after onset up to which the envelope is defined.
    pub fn horizon(&self) -> f64 {
        self.points.last().map(|p| p.0).unwrap_or(0.0)
    }

    /// Minimum voltage `dt` seconds after onset. Before the first breakpoint
    /// the first value applies, after the last the last one.
    pub fn min_voltage(&self, dt: f64) -> f64 {
        let p = &self.points;
        if dt <= p[0].0 {
            return p[0].1;
        }
        for w in p.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if dt <= t1 {
                return v0 + (v1 - v0) * (dt - t0) / (t1 - t0);
            }
        }
        p[p.len() - 1].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeReport {
    pub compliant: bool,
    pub first_violation: Option<f64>,
    /// Smallest `V - envelope` seen over the horizon.
    pub min_margin: f64,
}

/// Checks `V(t) >= envelope(t - onset)` for every sample with
/// `onset <= t <= onset + horizon`.
pub fn envelope_check(
    time: &[f64],
    voltage: &[f64],
    onset: f64,
    envelope: &FrtEnvelope,
) -> Result<EnvelopeReport, ControlError> {
    assert_eq!(time.len(), voltage.len(), "time and voltage lengths differ");
    const EPS: f64 = 1e-9;
    let needed = onset + envelope.horizon();
    let end = time.last().copied().unwrap_or(f64::NEG_INFINITY);
    if end < needed - EPS {
        return Err(ControlError::TraceTooShort { end, needed });
    }
    let mut report = EnvelopeReport {
        compliant: true,
        first_violation: None,
        min_margin: f64::INFINITY,
    };
    for (&t, &v) in time.iter().zip(voltage) {
        if t < onset - EPS || t > needed + EPS {
            continue;
        }
        let margin = v - envelope.min_voltage(t - onset);
        report.min_margin = report.min_margin.min(margin);
        if margin < 0.0 && report.first_violation.is_none() {
            report.compliant = false;
            report.first_violation = Some(t);
        }
    }
    Ok(report)
}
