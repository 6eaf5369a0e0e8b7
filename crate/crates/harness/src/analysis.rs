//! Signal measures used on recorded traces.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Decay of the dominant oscillation in a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub frequency_hz: f64,
    /// Amplitude of one cycle over the next, from a log-linear fit of the
    /// per-cycle RMS. Above 1 the oscillation decays.
    pub per_cycle_ratio: f64,
    /// RMS about a straight-line fit, one entry per full cycle.
    pub cycle_rms: Vec<f64>,
}

fn detrend(t: &[f64], x: &[f64]) -> Vec<f64> {
    let n = t.len() as f64;
    let (mt, mx) = (t.iter().sum::<f64>() / n, x.iter().sum::<f64>() / n);
    let sxx: f64 = t.iter().map(|v| (v - mt).powi(2)).sum();
    let sxy: f64 = t.iter().zip(x).map(|(a, b)| (a - mt) * (b - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    t.iter().zip(x).map(|(a, b)| b - mx - slope * (a - mt)).collect()
}

/// Frequency in `[f_lo, f_hi]` with the largest discrete-time Fourier
/// magnitude, searched on a 0.005 Hz grid.
pub fn dominant_frequency(t: &[f64], x: &[f64], f_lo: f64, f_hi: f64) -> f64 {
    let y = detrend(t, x);
    let mut best = (f_lo, -1.0);
    let mut f = f_lo;
    while f <= f_hi + 1e-12 {
        let w = 2.0 * PI * f;
        let (mut re, mut im) = (0.0, 0.0);
        for (ti, yi) in t.iter().zip(&y) {
            re += yi * (w * ti).cos();
            im += yi * (w * ti).sin();
        }
        let mag = re.hypot(im);
        if mag > best.1 {
            best = (f, mag);
        }
        f += 0.005;
    }
    best.0
}

/// Measures how fast the dominant oscillation of `x` decays between `t0`
/// and `t1`, searching for it between `f_lo` and `f_hi`.
pub fn oscillation_decay(
    time: &[f64],
    x: &[f64],
    t0: f64,
    t1: f64,
    (f_lo, f_hi): (f64, f64),
) -> Result<DecayReport, HarnessError> {
    let idx: Vec<usize> = (0..time.len()).filter(|&i| time[i] >= t0 && time[i] <= t1).collect();
    if idx.len() < 8 {
        return Err(HarnessError::Invalid(format!("window [{t0}, {t1}] holds too few samples")));
    }
    let t: Vec<f64> = idx.iter().map(|&i| time[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let f = dominant_frequency(&t, &y, f_lo, f_hi);
    let period = 1.0 / f;
    let cycles = ((t[t.len() - 1] - t[0]) / period).floor() as usize;
    if cycles < 3 {
        return Err(HarnessError::Invalid(format!(
            "window [{t0}, {t1}] holds {cycles} cycles of {f} Hz, need 3"
        )));
    }
    let mut cycle_rms = Vec::with_capacity(cycles);
    for c in 0..cycles {
        let (a, b) = (t[0] + c as f64 * period, t[0] + (c + 1) as f64 * period);
        let (st, sy): (Vec<f64>, Vec<f64>) = t.iter().zip(&y).filter(|(ti, _)| **ti >= a && **ti < b).unzip();
        let r = detrend(&st, &sy);
        cycle_rms.push((r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt());
    }
    let k: Vec<f64> = (0..cycles).map(|c| c as f64).collect();
    let ln: Vec<f64> = cycle_rms.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
    let (mk, ml) = (k.iter().sum::<f64>() / cycles as f64, ln.iter().sum::<f64>() / cycles as f64);
    let slope = k.iter().zip(&ln).map(|(a, b)| (a - mk) * (b - ml)).sum::<f64>()
        / k.iter().map(|a| (a - mk).powi(2)).sum::<f64>();
    Ok(DecayReport { frequency_hz: f, per_cycle_ratio: (-slope).exp(), cycle_rms })
}

/// First time in `[from, ..)` at which `x` reaches `target` within `tol`.
pub fn first_reach(time: &[f64], x: &[f64], from: f64, target: f64, tol: f64) -> Option<f64> {
    time.iter().zip(x).find(|(t, v)| **t >= from - 1e-12 && (**v - target).abs() <= tol).map(|(t, _)| *t)
}
