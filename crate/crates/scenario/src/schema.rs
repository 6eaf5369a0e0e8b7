//! Scenario document: the TOML structure and its validation.

use std::collections::{BTreeMap, HashSet};

use cosim::{Scheme, VariableRef};
use grid_rms::BusKind;
use serde::{Deserialize, Serialize};
use wtg_control::{ConverterParams, FrtParams};

use crate::error::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Controllers run inside the grid component's own time loop.
    Monolithic,
    /// Grid and controllers are separate components joined by the master.
    Cosim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    pub master: MasterSection,
    pub network: NetworkSection,
    pub wtg: WtgSection,
    pub controller: ControllerSection,
    #[serde(default)]
    pub connections: Vec<ConnectionSpec>,
    #[serde(default)]
    pub events: Vec<EventSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MasterSection {
    pub scheme: Scheme,
    pub macro_step: f64,
    /// Grid integration step; the grid subdivides each macro step.
    pub micro_step: f64,
    pub t_end: f64,
    /// Component ids in serial execution order. Defaults to the grid, then
    /// every FRT supervisor, then every converter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    #[serde(default)]
    pub record: Vec<RecordEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordEntry {
    pub channel: String,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub base_mva: f64,
    pub frequency_hz: f64,
    pub pcc_bus: u32,
    /// `[from, to]` of the branch feeding the PCC; PCC power is measured on
    /// it. Without it PCC power is the static generation at the PCC bus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pcc_branch: Option<[u32; 2]>,
    pub buses: Vec<BusSpec>,
    pub branches: Vec<BranchSpec>,
    #[serde(default)]
    pub machines: Vec<MachineSpec>,
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusSpec {
    pub id: u32,
    pub kind: BusKind,
    pub base_kv: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub v_set: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub p_gen: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub p_load: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub q_load: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    pub from: u32,
    pub to: u32,
    pub r: f64,
    pub x: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub b: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub tap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpec {
    pub name: String,
    pub bus: u32,
    pub h: f64,
    pub d: f64,
    pub xd_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WtgSection {
    pub wpp_rating_mva: f64,
    pub units: Vec<WtgUnit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WtgUnit {
    pub id: String,
    pub bus: u32,
    pub rating_mva: f64,
    /// Key into `[controller.converter]`.
    pub converter: String,
    /// Key into `[controller.frt]`.
    pub frt: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    #[serde(default)]
    pub converter: BTreeMap<String, ConverterParams>,
    #[serde(default)]
    pub frt: BTreeMap<String, FrtParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSpec {
    pub from: String,
    pub to: String,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub gain: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub offset: f64,
}

impl ConnectionSpec {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            gain: 1.0,
            offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Fault,
}

fn bolted() -> f64 {
    1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub kind: EventKind,
    pub bus: u32,
    pub start: f64,
    pub duration: f64,
    /// Fault conductance (pu).
    #[serde(default = "bolted")]
    pub admittance: f64,
}

/// Id of the grid component.
pub const GRID_ID: &str = "grid";

pub fn converter_id(unit: &str) -> String {
    format!("conv_{unit}")
}

pub fn frt_id(unit: &str) -> String {
    format!("frt_{unit}")
}

/// Absolute tolerance on the sum of unit ratings.
pub const RATING_TOL: f64 = 1e-9;

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.span().map(|sp| text[..sp.start].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String, ScenarioError> {
        toml::to_string(self).map_err(|e| ScenarioError::Serialize(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Ids of every component the scenario instantiates.
    pub fn component_ids(&self) -> Vec<String> {
        let mut ids = vec![GRID_ID.to_string()];
        if self.mode == Mode::Cosim {
            ids.extend(self.wtg.units.iter().map(|u| frt_id(&u.id)));
            ids.extend(self.wtg.units.iter().map(|u| converter_id(&u.id)));
        }
        ids
    }

    pub fn fault_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .events
            .iter()
            .flat_map(|e| [e.start, e.start + e.duration])
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    /// Checks cross-references and invariants that do not need the
    /// components themselves.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let inv = |m: String| Err(ScenarioError::Invariant(m));
        let m = &self.master;
        for (name, v) in [("macro_step", m.macro_step), ("micro_step", m.micro_step), ("t_end", m.t_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return inv(format!("master.{name} must be positive, got {v}"));
            }
        }

        let buses: HashSet<u32> = self.network.buses.iter().map(|b| b.id).collect();
        let bus_ref = |id: u32| {
            if buses.contains(&id) {
                Ok(())
            } else {
                Err(ScenarioError::UnresolvedReference { kind: "bus", id: id.to_string() })
            }
        };
        bus_ref(self.network.pcc_bus)?;
        for br in &self.network.branches {
            bus_ref(br.from)?;
            bus_ref(br.to)?;
        }
        for mc in &self.network.machines {
            bus_ref(mc.bus)?;
        }
        if let Some([f, t]) = self.network.pcc_branch {
            let found = self
                .network
                .branches
                .iter()
                .any(|b| (b.from, b.to) == (f, t) || (b.from, b.to) == (t, f));
            if !found {
                return Err(ScenarioError::UnresolvedReference { kind: "branch", id: format!("{f}-{t}") });
            }
            if f != self.network.pcc_bus && t != self.network.pcc_bus {
                return inv(format!("pcc_branch {f}-{t} does not touch the PCC bus"));
            }
        }

        let mut unit_ids = HashSet::new();
        let mut total = 0.0;
        for u in &self.wtg.units {
            if u.id.is_empty() || u.id.contains('.') {
                return inv(format!("unit id `{}` must be non-empty and dot-free", u.id));
            }
            if !unit_ids.insert(u.id.as_str()) {
                return inv(format!("duplicate unit id `{}`", u.id));
            }
            bus_ref(u.bus)?;
            if !(u.rating_mva > 0.0) {
                return inv(format!("unit {} needs a positive rating", u.id));
            }
            total += u.rating_mva;
            let conv = self.controller.converter.get(&u.converter).ok_or_else(|| {
                ScenarioError::UnresolvedReference { kind: "converter parameter set", id: u.converter.clone() }
            })?;
            conv.validate()?;
            let frt = self.controller.frt.get(&u.frt).ok_or_else(|| {
                ScenarioError::UnresolvedReference { kind: "frt parameter set", id: u.frt.clone() }
            })?;
            frt.validate()?;
        }
        if !self.wtg.units.is_empty() && (total - self.wtg.wpp_rating_mva).abs() > RATING_TOL {
            return inv(format!(
                "unit ratings sum to {total} MVA, plant rating is {} MVA",
                self.wtg.wpp_rating_mva
            ));
        }

        for e in &self.events {
            bus_ref(e.bus)?;
            if !(e.duration > 0.0 && e.start >= 0.0 && e.admittance > 0.0) {
                return inv(format!("fault at bus {} needs start >= 0, duration > 0, admittance > 0", e.bus));
            }
        }

        let ids = self.component_ids();
        let known: HashSet<&str> = ids.iter().map(String::as_str).collect();
        let comp_ref = |r: &str| -> Result<VariableRef, ScenarioError> {
            let v: VariableRef = r.parse().map_err(|_| ScenarioError::Parse {
                line: None,
                message: format!("malformed variable reference `{r}`"),
            })?;
            if !known.contains(v.component.as_str()) {
                return Err(ScenarioError::UnresolvedReference { kind: "component", id: v.component });
            }
            Ok(v)
        };
        if self.mode == Mode::Monolithic && !self.connections.is_empty() {
            return inv("a monolithic scenario has no connections".into());
        }
        for c in &self.connections {
            comp_ref(&c.from)?;
            comp_ref(&c.to)?;
            if !(c.gain.is_finite() && c.gain != 0.0 && c.offset.is_finite()) {
                return inv(format!("connection {} -> {} has an invalid transform", c.from, c.to));
            }
        }
        for r in &self.master.record {
            comp_ref(&r.var)?;
        }
        if let Some(order) = &self.master.order {
            for id in order {
                if !known.contains(id.as_str()) {
                    return Err(ScenarioError::UnresolvedReference { kind: "component", id: id.clone() });
                }
            }
            let given: HashSet<&str> = order.iter().map(String::as_str).collect();
            if given.len() != order.len() || given != known {
                return inv("master.order must list every component exactly once".into());
            }
        }
        if self.mode == Mode::Cosim {
            self.check_inputs_driven()?;
        }
        Ok(())
    }

    /// Every mandatory controller and grid command input has a driver.
    fn check_inputs_driven(&self) -> Result<(), ScenarioError> {
        let sinks: HashSet<&str> = self.connections.iter().map(|c| c.to.as_str()).collect();
        for u in &self.wtg.units {
            let mut needed = vec![
                format!("{GRID_ID}.{}.i_d", u.id),
                format!("{GRID_ID}.{}.i_q", u.id),
            ];
            let conv = converter_id(&u.id);
            for v in ["V_mag", "P_meas", "Q_meas", "block_active", "i_q_boost", "i_d_ref_limited", "frt_mode"] {
                needed.push(format!("{conv}.{v}"));
            }
            let frt = frt_id(&u.id);
            for v in ["V_mag", "i_d_cmd"] {
                needed.push(format!("{frt}.{v}"));
            }
            if let Some(missing) = needed.iter().find(|n| !sinks.contains(n.as_str())) {
                return Err(ScenarioError::Invariant(format!("input {missing} is not connected")));
            }
        }
        Ok(())
    }
}
