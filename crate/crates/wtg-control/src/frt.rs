//! Fault-ride-through supervisor: a three-mode state machine on top of the
//! converter controller.

use serde::{Deserialize, Serialize};

use crate::error::ControlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum FrtMode {
    #[default]
    Normal,
    Fault,
    Recovery,
}

impl FrtMode {
    pub const ALL: [FrtMode; 3] = [FrtMode::Normal, FrtMode::Fault, FrtMode::Recovery];

    /// Integer code used on traces: 0 normal, 1 fault, 2 recovery.
    pub fn code(self) -> i64 {
        match self {
            FrtMode::Normal => 0,
            FrtMode::Fault => 1,
            FrtMode::Recovery => 2,
        }
    }

    pub fn from_code(code: i64) -> Result<Self, ControlError> {
        match code {
            0 => Ok(FrtMode::Normal),
            1 => Ok(FrtMode::Fault),
            2 => Ok(FrtMode::Recovery),
            c => Err(ControlError::UnknownMode(c)),
        }
    }

    /// Whether `self -> to` is an edge of the transition graph. Self-loops
    /// are always allowed.
    pub fn can_transition(self, to: FrtMode) -> bool {
        use FrtMode::*;
        matches!(
            (self, to),
            (Normal, Normal)
                | (Fault, Fault)
                | (Recovery, Recovery)
                | (Normal, Fault)
                | (Fault, Recovery)
                | (Recovery, Normal)
                | (Recovery, Fault)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrtParams {
    pub v_enter: f64,
    pub v_exit: f64,
    pub k_boost: f64,
    pub ramp_rate: f64,
    pub ramp_enabled: bool,
    /// Time the voltage must stay at or above `v_exit` before leaving FAULT.
    pub deglitch: f64,
}

impl Default for FrtParams {
    fn default() -> Self {
        Self {
            v_enter: 0.9,
            v_exit: 0.9,
            k_boost: 2.0,
            ramp_rate: 1.0,
            ramp_enabled: true,
            deglitch: 0.02,
        }
    }
}

impl FrtParams {
    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |m: &str| Err(ControlError::InvalidParameter(m.to_string()));
        if !(self.v_enter > 0.0 && self.v_enter <= self.v_exit && self.v_exit < 1.0) {
            return bad("need 0 < v_enter <= v_exit < 1");
        }
        if !(self.k_boost >= 0.0 && self.k_boost.is_finite()) {
            return bad("k_boost must be finite and >= 0");
        }
        if self.ramp_enabled && !(self.ramp_rate > 0.0 && self.ramp_rate.is_finite()) {
            return bad("ramp_rate must be positive when the ramp is enabled");
        }
        if !(self.deglitch >= 0.0 && self.deglitch.is_finite()) {
            return bad("deglitch must be finite and >= 0");
        }
        Ok(())
    }

    /// Reactive boost for a terminal voltage: `k_boost * max(0, v_enter - v)`.
    pub fn boost(&self, v_mag: f64) -> f64 {
        self.k_boost * (self.v_enter - v_mag).max(0.0)
    }
}

/// What the supervisor hands to the converter each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrtOverrides {
    pub mode: FrtMode,
    pub block_active: bool,
    pub i_q_boost: f64,
    pub i_d_ref_limited: f64,
}

impl FrtOverrides {
    pub fn none(i_d: f64) -> Self {
        Self {
            mode: FrtMode::Normal,
            block_active: false,
            i_q_boost: 0.0,
            i_d_ref_limited: i_d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrtState {
    pub mode: FrtMode,
    pub prefault_i_d: f64,
    pub ramp_target_reached: bool,
    pub i_d_ref_limited: f64,
    /// Time spent at or above `v_exit` while in FAULT.
    pub healthy_for: f64,
}

/// Mode-transition counters, indexed `[from][to]` by mode code.
pub type TransitionCounts = [[u64; 3]; 3];

const SNAP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FrtSupervisor {
    params: FrtParams,
    state: FrtState,
    transitions: TransitionCounts,
}

impl FrtSupervisor {
    pub fn new(params: FrtParams) -> Result<Self, ControlError> {
        params.validate()?;
        Ok(Self {
            params,
            state: FrtState::default(),
            transitions: [[0; 3]; 3],
        })
    }

    pub fn params(&self) -> &FrtParams {
        &self.params
    }

    pub fn state(&self) -> &FrtState {
        &self.state
    }

    pub fn transitions(&self) -> &TransitionCounts {
        &self.transitions
    }

    /// Starts in NORMAL with the pass-through reference at `i_d_cmd`.
    pub fn settle(&mut self, i_d_cmd: f64) -> FrtOverrides {
        self.state = FrtState {
            i_d_ref_limited: i_d_cmd,
            prefault_i_d: i_d_cmd,
            ..FrtState::default()
        };
        self.overrides(0.0)
    }

    fn go(&mut self, to: FrtMode) -> Result<(), ControlError> {
        let from = self.state.mode;
        if !from.can_transition(to) {
            return Err(ControlError::IllegalTransition { from, to });
        }
        self.transitions[from.code() as usize][to.code() as usize] += 1;
        self.state.mode = to;
        Ok(())
    }

    fn enter_fault(&mut self) -> Result<(), ControlError> {
        self.go(FrtMode::Fault)?;
        self.state.healthy_for = 0.0;
        self.state.ramp_target_reached = false;
        self.state.i_d_ref_limited = 0.0;
        Ok(())
    }

    /// One supervisor step with the measured terminal voltage and the
    /// converter's latest active-current command.
    pub fn step(&mut self, v_mag: f64, i_d_cmd: f64, dt: f64) -> Result<FrtOverrides, ControlError> {
        if !v_mag.is_finite() {
            return Err(ControlError::NonFinite("V_mag"));
        }
        if !i_d_cmd.is_finite() {
            return Err(ControlError::NonFinite("i_d_cmd"));
        }
        let p = self.params.clone();
        match self.state.mode {
            FrtMode::Normal => {
                if v_mag < p.v_enter {
                    // The only place the pre-fault current is written.
                    self.state.prefault_i_d = i_d_cmd;
                    self.enter_fault()?;
                } else {
                    self.go(FrtMode::Normal)?;
                    self.state.i_d_ref_limited = i_d_cmd;
                }
            }
            FrtMode::Fault => {
                if v_mag >= p.v_exit {
                    self.state.healthy_for += dt;
                } else {
                    self.state.healthy_for = 0.0;
                }
                if self.state.healthy_for >= p.deglitch - SNAP {
                    self.go(FrtMode::Recovery)?;
                    let target = self.state.prefault_i_d;
                    let start = i_d_cmd.min(target);
                    self.state.i_d_ref_limited = if p.ramp_enabled {
                        approach(start, target, p.ramp_rate * dt)
                    } else {
                        target
                    };
                    self.state.ramp_target_reached = false;
                } else {
                    self.go(FrtMode::Fault)?;
                }
            }
            FrtMode::Recovery => {
                if v_mag < p.v_enter {
                    self.enter_fault()?;
                } else if self.state.i_d_ref_limited >= self.state.prefault_i_d - SNAP {
                    self.state.ramp_target_reached = true;
                    self.go(FrtMode::Normal)?;
                    self.state.i_d_ref_limited = i_d_cmd;
                } else {
                    let target = self.state.prefault_i_d;
                    self.state.i_d_ref_limited =
                        approach(self.state.i_d_ref_limited, target, p.ramp_rate * dt);
                    if self.state.i_d_ref_limited >= target - SNAP {
                        self.state.ramp_target_reached = true;
                        self.go(FrtMode::Normal)?;
                    } else {
                        self.go(FrtMode::Recovery)?;
                    }
                }
            }
        }
        Ok(self.overrides(v_mag))
    }

    fn overrides(&self, v_mag: f64) -> FrtOverrides {
        let mode = self.state.mode;
        FrtOverrides {
            mode,
            block_active: mode == FrtMode::Fault,
            i_q_boost: if mode == FrtMode::Fault { self.params.boost(v_mag) } else { 0.0 },
            i_d_ref_limited: self.state.i_d_ref_limited,
        }
    }
}

/// Moves `from` toward `target` by at most `max_step`, landing exactly on the
/// target when within rounding distance.
fn approach(from: f64, target: f64, max_step: f64) -> f64 {
    let next = if target > from {
        (from + max_step).min(target)
    } else {
        (from - max_step).max(target)
    };
    if (next - target).abs() <= SNAP {
        target
    } else {
        next
    }
}
