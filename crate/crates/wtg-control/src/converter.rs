//! Converter current controller: a d-axis active-power PI, a q-axis PI on
//! voltage or reactive power, and the current limiter.

use serde::{Deserialize, Serialize};

use crate::error::ControlError;
use crate::frt::{FrtMode, FrtOverrides};
use crate::limiter::{current_limit, Priority};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterQMode {
    VoltageMagnitude,
    ReactivePower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterParams {
    pub kp_d: f64,
    pub ki_d: f64,
    /// Gains of the q-axis loop in reactive-power mode.
    pub kp_q: f64,
    pub ki_q: f64,
    /// Gains of the q-axis loop in voltage mode.
    pub kp_v: f64,
    pub ki_v: f64,
    pub i_max: f64,
    /// Limiter priority in NORMAL mode. FAULT and RECOVERY always favour
    /// reactive current.
    pub priority: Priority,
    /// Outer q-axis loop in NORMAL mode. FAULT and RECOVERY always regulate
    /// voltage.
    pub outer_q_mode: OuterQMode,
    /// Active power reference (machine-base pu).
    pub p_ref: f64,
    /// Reactive power reference (machine-base pu), used in Q mode and to seed
    /// the initial power flow.
    pub q_ref: f64,
}

impl Default for ConverterParams {
    fn default() -> Self {
        Self {
            kp_d: 0.5,
            ki_d: 150.0,
            kp_q: 0.5,
            ki_q: 150.0,
            kp_v: 2.0,
            ki_v: 750.0,
            i_max: 1.1,
            priority: Priority::Active,
            outer_q_mode: OuterQMode::VoltageMagnitude,
            p_ref: 1.0,
            q_ref: 0.0,
        }
    }
}

impl ConverterParams {
    pub fn validate(&self) -> Result<(), ControlError> {
        let gains = [self.kp_d, self.ki_d, self.kp_q, self.ki_q, self.kp_v, self.ki_v];
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(ControlError::InvalidParameter(
                "controller gains must be finite and >= 0".into(),
            ));
        }
        if !(self.kp_d > 0.0 || self.ki_d > 0.0) {
            return Err(ControlError::InvalidParameter(
                "the d-axis loop needs kp_d or ki_d positive".into(),
            ));
        }
        if !(self.i_max > 0.0 && self.i_max.is_finite()) {
            return Err(ControlError::InvalidParameter("i_max must be positive".into()));
        }
        if !(self.p_ref.is_finite() && self.q_ref.is_finite()) {
            return Err(ControlError::InvalidParameter("references must be finite".into()));
        }
        Ok(())
    }

    /// Currents at nominal voltage for the references.
    pub fn nominal_currents(&self) -> (f64, f64) {
        (self.p_ref, self.q_ref)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConverterState {
    pub integ_d: f64,
    pub integ_q: f64,
    pub i_d_cmd: f64,
    pub i_q_cmd: f64,
    pub v_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurements {
    pub v_mag: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone)]
pub struct Converter {
    params: ConverterParams,
    state: ConverterState,
}

impl Converter {
    pub fn new(params: ConverterParams) -> Result<Self, ControlError> {
        params.validate()?;
        let (i_d, i_q) = params.nominal_currents();
        Ok(Self {
            state: ConverterState {
                integ_d: i_d,
                integ_q: i_q,
                i_d_cmd: i_d,
                i_q_cmd: i_q,
                v_ref: 1.0,
            },
            params,
        })
    }

    pub fn params(&self) -> &ConverterParams {
        &self.params
    }

    pub fn state(&self) -> &ConverterState {
        &self.state
    }

    pub fn commands(&self) -> (f64, f64) {
        (self.state.i_d_cmd, self.state.i_q_cmd)
    }

    pub fn set_p_ref(&mut self, p_ref: f64) {
        self.params.p_ref = p_ref;
    }

    pub fn set_q_ref(&mut self, q_ref: f64) {
        self.params.q_ref = q_ref;
    }

    /// Back-solves the equilibrium at the measured operating point: the
    /// currents that deliver the references, integrators holding them, and the
    /// voltage reference at the measured voltage.
    pub fn settle(&mut self, m: &Measurements) -> Result<(f64, f64), ControlError> {
        check(m)?;
        if !(m.v_mag > 0.0) {
            return Err(ControlError::InvalidParameter(
                "cannot settle at zero terminal voltage".into(),
            ));
        }
        let i_d = self.params.p_ref / m.v_mag;
        let i_q = self.params.q_ref / m.v_mag;
        let magnitude = i_d.hypot(i_q);
        if magnitude > self.params.i_max {
            return Err(ControlError::InfeasibleEquilibrium {
                magnitude,
                i_max: self.params.i_max,
            });
        }
        self.state = ConverterState {
            integ_d: i_d,
            integ_q: i_q,
            i_d_cmd: i_d,
            i_q_cmd: i_q,
            v_ref: m.v_mag,
        };
        Ok((i_d, i_q))
    }

    /// One controller step. Integrators use forward Euler and freeze while
    /// their axis is clipped by the limiter or overridden by the FRT.
    pub fn step(&mut self, m: &Measurements, ov: &FrtOverrides, dt: f64) -> Result<(f64, f64), ControlError> {
        check(m)?;
        let p = &self.params;
        let s = &mut self.state;
        let normal = ov.mode == FrtMode::Normal;
        let outer = if normal { p.outer_q_mode } else { OuterQMode::VoltageMagnitude };
        let priority = if normal { p.priority } else { Priority::Reactive };

        let e_d = p.p_ref - m.p;
        let cand_d = s.integ_d + p.ki_d * e_d * dt;
        let pi_d = p.kp_d * e_d + cand_d;
        let (pre_d, overridden) = if ov.block_active {
            (0.0, true)
        } else if ov.mode == FrtMode::Recovery && ov.i_d_ref_limited < pi_d {
            (ov.i_d_ref_limited, true)
        } else {
            (pi_d, false)
        };

        let (kp, ki, e_q) = match outer {
            OuterQMode::VoltageMagnitude => (p.kp_v, p.ki_v, s.v_ref - m.v_mag),
            OuterQMode::ReactivePower => (p.kp_q, p.ki_q, p.q_ref - m.q),
        };
        let cand_q = s.integ_q + ki * e_q * dt;
        let pre_q = kp * e_q + cand_q + if ov.block_active { ov.i_q_boost } else { 0.0 };

        let (i_d, i_q) = current_limit(pre_d, pre_q, p.i_max, priority);
        if !overridden && i_d == pre_d {
            s.integ_d = cand_d;
        }
        if i_q == pre_q {
            s.integ_q = cand_q;
        }
        s.i_d_cmd = i_d;
        s.i_q_cmd = i_q;
        Ok((i_d, i_q))
    }
}

fn check(m: &Measurements) -> Result<(), ControlError> {
    if !m.v_mag.is_finite() {
        return Err(ControlError::NonFinite("V_mag"));
    }
    if !m.p.is_finite() {
        return Err(ControlError::NonFinite("P_meas"));
    }
    if !m.q.is_finite() {
        return Err(ControlError::NonFinite("Q_meas"));
    }
    Ok(())
}
