//! Network description: buses, branches, machines, static generators, faults.

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::GridError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

/// Bus data. Powers are in pu on the system base.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: u32,
    pub kind: BusKind,
    pub base_kv: f64,
    /// Voltage magnitude setpoint for slack and PV buses.
    pub v_set: f64,
    /// Scheduled generation for PV buses.
    pub p_gen: f64,
    pub p_load: f64,
    pub q_load: f64,
    /// Latest solved phasor.
    pub voltage: Complex64,
}

impl Bus {
    pub fn pq(id: u32, p_load: f64, q_load: f64) -> Self {
        Self {
            id,
            kind: BusKind::Pq,
            base_kv: 1.0,
            v_set: 1.0,
            p_gen: 0.0,
            p_load,
            q_load,
            voltage: Complex64::new(1.0, 0.0),
        }
    }

    pub fn slack(id: u32, v_set: f64) -> Self {
        Self {
            kind: BusKind::Slack,
            v_set,
            ..Self::pq(id, 0.0, 0.0)
        }
    }

    pub fn pv(id: u32, v_set: f64, p_gen: f64) -> Self {
        Self {
            kind: BusKind::Pv,
            v_set,
            p_gen,
            ..Self::pq(id, 0.0, 0.0)
        }
    }
}

/// Pi-model branch; a tap other than 1 makes it a transformer with the
/// off-nominal ratio on the `from` side.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: u32,
    pub to: u32,
    pub r: f64,
    pub x: f64,
    /// Total line charging susceptance.
    pub b: f64,
    pub tap: f64,
}

impl Branch {
    pub fn line(from: u32, to: u32, r: f64, x: f64, b: f64) -> Self {
        Self {
            from,
            to,
            r,
            x,
            b,
            tap: 1.0,
        }
    }

    pub fn series_admittance(&self) -> Complex64 {
        Complex64::new(self.r, self.x).inv()
    }

    /// Two-port admittances `(y_ff, y_ft, y_tf, y_tt)`.
    pub fn two_port(&self) -> (Complex64, Complex64, Complex64, Complex64) {
        let y = self.series_admittance();
        let ysh = Complex64::new(0.0, self.b / 2.0);
        let t = self.tap;
        ((y + ysh) / (t * t), -y / t, -y / t, y + ysh)
    }

    fn validate(&self) -> Result<(), GridError> {
        let bad = |reason: &str| GridError::InvalidBranch {
            from: self.from,
            to: self.to,
            reason: reason.to_string(),
        };
        if self.x == 0.0 && self.r == 0.0 {
            return Err(GridError::ZeroImpedance {
                from: self.from,
                to: self.to,
            });
        }
        if self.x == 0.0 {
            return Err(bad("reactance must be nonzero"));
        }
        if !(self.r >= 0.0) {
            return Err(bad("resistance must be non-negative"));
        }
        if !(self.tap > 0.0) {
            return Err(bad("tap ratio must be positive"));
        }
        if self.from == self.to {
            return Err(bad("branch connects a bus to itself"));
        }
        Ok(())
    }
}

/// Converter interface: injects a commanded current phasor expressed in the
/// terminal-voltage frame.
///
/// Positive `i_d` injects active power and positive `i_q` injects reactive
/// power: the network-frame current is `(i_d - j i_q) e^{j theta_V}` scaled
/// from the machine base to the system base, so `S = |V| (i_d + j i_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticGenerator {
    pub id: String,
    pub bus: u32,
    pub mva_base: f64,
    pub i_d: f64,
    pub i_q: f64,
    pub connected: bool,
}

impl StaticGenerator {
    pub fn new(id: impl Into<String>, bus: u32, mva_base: f64) -> Self {
        Self {
            id: id.into(),
            bus,
            mva_base,
            i_d: 0.0,
            i_q: 0.0,
            connected: true,
        }
    }

    /// Network-frame current in system-base pu for a terminal angle.
    pub fn network_current(&self, theta: f64, system_mva: f64) -> Complex64 {
        if !self.connected {
            return Complex64::new(0.0, 0.0);
        }
        let scale = self.mva_base / system_mva;
        Complex64::new(self.i_d, -self.i_q) * Complex64::from_polar(scale, theta)
    }
}

/// Classical machine: constant EMF behind transient reactance.
#[derive(Debug, Clone, PartialEq)]
pub struct SynchronousMachine {
    pub name: String,
    pub bus: u32,
    /// Inertia constant on the system base (s). `f64::INFINITY` gives an
    /// infinite bus.
    pub h: f64,
    pub d: f64,
    pub xd_prime: f64,
    pub e_prime: f64,
    pub delta: f64,
    pub speed_dev: f64,
    pub p_mech: f64,
}

impl SynchronousMachine {
    pub fn new(name: impl Into<String>, bus: u32, h: f64, d: f64, xd_prime: f64) -> Self {
        Self {
            name: name.into(),
            bus,
            h,
            d,
            xd_prime,
            e_prime: 1.0,
            delta: 0.0,
            speed_dev: 0.0,
            p_mech: 0.0,
        }
    }

    pub fn norton_admittance(&self) -> Complex64 {
        Complex64::new(0.0, -1.0 / self.xd_prime)
    }

    pub fn internal_emf(&self, delta: f64) -> Complex64 {
        Complex64::from_polar(self.e_prime, delta)
    }

    /// Stator current for a given rotor angle and terminal voltage.
    pub fn current(&self, delta: f64, v_term: Complex64) -> Complex64 {
        (self.internal_emf(delta) - v_term) / Complex64::new(0.0, self.xd_prime)
    }

    pub fn electrical_power(&self, delta: f64, v_term: Complex64) -> f64 {
        (self.internal_emf(delta) * self.current(delta, v_term).conj()).re
    }
}

/// Three-phase shunt fault applied as a conductance at a bus.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultEvent {
    pub bus: u32,
    pub start: f64,
    pub duration: f64,
    pub admittance: f64,
}

/// Tolerance used when comparing event instants with step boundaries.
pub const EVENT_EPS: f64 = 1e-9;

impl FaultEvent {
    pub fn bolted(bus: u32, start: f64, duration: f64) -> Self {
        Self {
            bus,
            start,
            duration,
            admittance: 1e6,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// Whether the shunt is present at time `t` (active on `[start, end)`).
    pub fn is_active(&self, t: f64) -> bool {
        t >= self.start - EVENT_EPS && t < self.end() - EVENT_EPS
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    pub frequency_hz: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub machines: Vec<SynchronousMachine>,
    pub static_generators: Vec<StaticGenerator>,
}

impl Network {
    pub fn new(base_mva: f64, frequency_hz: f64) -> Self {
        Self {
            base_mva,
            frequency_hz,
            buses: Vec::new(),
            branches: Vec::new(),
            machines: Vec::new(),
            static_generators: Vec::new(),
        }
    }

    pub fn bus_index(&self) -> HashMap<u32, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn index_of(&self, id: u32) -> Result<usize, GridError> {
        self.buses
            .iter()
            .position(|b| b.id == id)
            .ok_or(GridError::UnknownBus(id))
    }

    pub fn slack_index(&self) -> Result<usize, GridError> {
        let slacks: Vec<usize> = self
            .buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.kind == BusKind::Slack)
            .map(|(i, _)| i)
            .collect();
        match slacks.as_slice() {
            [i] => Ok(*i),
            other => Err(GridError::SlackCount(other.len())),
        }
    }

    /// Checks references, parameter ranges, a single slack and connectivity.
    pub fn validate(&self) -> Result<(), GridError> {
        let mut index = HashMap::new();
        for (i, b) in self.buses.iter().enumerate() {
            if index.insert(b.id, i).is_some() {
                return Err(GridError::DuplicateBus(b.id));
            }
        }
        self.slack_index()?;
        if !(self.base_mva > 0.0) {
            return Err(GridError::InvalidElement("base_mva must be positive".into()));
        }
        for br in &self.branches {
            for id in [br.from, br.to] {
                if !index.contains_key(&id) {
                    return Err(GridError::UnknownBus(id));
                }
            }
            br.validate()?;
        }
        let mut machine_buses = Vec::new();
        for m in &self.machines {
            if !index.contains_key(&m.bus) {
                return Err(GridError::UnknownBus(m.bus));
            }
            if machine_buses.contains(&m.bus) {
                return Err(GridError::InvalidElement(format!(
                    "more than one machine at bus {}",
                    m.bus
                )));
            }
            machine_buses.push(m.bus);
            if !(m.xd_prime > 0.0) || !(m.h > 0.0) || !(m.d >= 0.0) {
                return Err(GridError::InvalidElement(format!(
                    "machine {} needs x'd > 0, H > 0, D >= 0",
                    m.name
                )));
            }
        }
        for sg in &self.static_generators {
            if !index.contains_key(&sg.bus) {
                return Err(GridError::UnknownBus(sg.bus));
            }
            if !(sg.mva_base > 0.0) {
                return Err(GridError::InvalidElement(format!(
                    "static generator {} needs a positive MVA base",
                    sg.id
                )));
            }
        }
        self.check_connected(&index)
    }

    fn check_connected(&self, index: &HashMap<u32, usize>) -> Result<(), GridError> {
        let n = self.buses.len();
        if n <= 1 {
            return Ok(());
        }
        let mut adj = vec![Vec::new(); n];
        for br in &self.branches {
            let (f, t) = (index[&br.from], index[&br.to]);
            adj[f].push(t);
            adj[t].push(f);
        }
        if let Some(i) = adj.iter().position(|a| a.is_empty()) {
            return Err(GridError::IsolatedBus(self.buses[i].id));
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(GridError::IsolatedBus(self.buses[i].id)),
            None => Ok(()),
        }
    }

    /// Nominal angular frequency (rad/s).
    pub fn omega_s(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency_hz
    }
}
