//! Turning a scenario into a ready-to-run master.

use cosim::{Component, Master, MasterConfig, RecordSpec, TraceSet, Transform, VariableRef};
use grid_rms::{
    Branch, Bus, EmbeddedController, FaultEvent, GridComponent, Network, PccOutput, StaticGenerator,
    SynchronousMachine,
};
use wtg_control::{ConverterComponent, FrtComponent};

use crate::embedded::EmbeddedWtg;
use crate::error::ScenarioError;
use crate::schema::{converter_id, frt_id, Mode, Scenario, GRID_ID};

/// Grid network with one static generator per unit, plus the index of the
/// PCC branch if one is configured.
pub fn build_network(s: &Scenario) -> Result<(Network, Option<usize>), ScenarioError> {
    let ns = &s.network;
    let mut n = Network::new(ns.base_mva, ns.frequency_hz);
    for b in &ns.buses {
        n.buses.push(Bus {
            kind: b.kind,
            base_kv: b.base_kv,
            v_set: b.v_set,
            p_gen: b.p_gen,
            ..Bus::pq(b.id, b.p_load, b.q_load)
        });
    }
    for br in &ns.branches {
        n.branches.push(Branch { tap: br.tap, ..Branch::line(br.from, br.to, br.r, br.x, br.b) });
    }
    for m in &ns.machines {
        n.machines.push(SynchronousMachine::new(&m.name, m.bus, m.h, m.d, m.xd_prime));
    }
    for u in &s.wtg.units {
        n.static_generators.push(StaticGenerator::new(&u.id, u.bus, u.rating_mva));
    }
    let pcc_branch = match ns.pcc_branch {
        None => None,
        Some([f, t]) => Some(
            ns.branches
                .iter()
                .position(|b| (b.from, b.to) == (f, t) || (b.from, b.to) == (t, f))
                .ok_or_else(|| ScenarioError::UnresolvedReference { kind: "branch", id: format!("{f}-{t}") })?,
        ),
    };
    n.validate()?;
    Ok((n, pcc_branch))
}

pub fn faults(s: &Scenario) -> Vec<FaultEvent> {
    s.events
        .iter()
        .map(|e| FaultEvent { bus: e.bus, start: e.start, duration: e.duration, admittance: e.admittance })
        .collect()
}

/// Builds every component, registers them in execution order and wires the
/// connections. The master is not yet initialized.
pub fn assemble(s: &Scenario) -> Result<Master, ScenarioError> {
    s.validate()?;
    let (network, branch) = build_network(s)?;
    let pcc = PccOutput { bus: s.network.pcc_bus, branch };

    let mut components: Vec<Box<dyn Component>> = Vec::new();
    let mut embedded: Vec<(String, Box<dyn EmbeddedController>)> = Vec::new();
    for u in &s.wtg.units {
        let conv = s.controller.converter[&u.converter].clone();
        let frt = s.controller.frt[&u.frt].clone();
        match s.mode {
            Mode::Monolithic => embedded.push((u.id.clone(), Box::new(EmbeddedWtg::new(&u.id, conv, frt)?))),
            Mode::Cosim => {
                components.push(Box::new(FrtComponent::new(frt_id(&u.id), frt)?));
                components.push(Box::new(ConverterComponent::new(converter_id(&u.id), conv)?));
            }
        }
    }
    let grid = GridComponent::new(GRID_ID, network, faults(s), s.master.micro_step, pcc, embedded)?;
    components.push(Box::new(grid));

    let order = s.master.order.clone().unwrap_or_else(|| s.component_ids());
    let record = s
        .master
        .record
        .iter()
        .map(|r| Ok(RecordSpec::new(&r.channel, r.var.parse::<VariableRef>()?)))
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let mut master = Master::new(MasterConfig {
        macro_step: s.master.macro_step,
        scheme: s.master.scheme,
        t_end: s.master.t_end,
        record,
    })?;
    for c in components {
        let priority = order
            .iter()
            .position(|id| id == c.id())
            .ok_or_else(|| ScenarioError::UnresolvedReference { kind: "component", id: c.id().to_string() })?;
        master.register(c, priority as i64)?;
    }
    for c in &s.connections {
        let t = Transform::new(c.gain, c.offset)?;
        master.connect(c.from.parse()?, c.to.parse()?, (!t.is_identity()).then_some(t))?;
    }
    Ok(master)
}

/// A finished run: the trace and the master holding the final component
/// states.
pub struct Run {
    pub trace: TraceSet,
    pub master: Master,
}

impl Run {
    /// The grid component after the run.
    pub fn grid(&self) -> Option<&GridComponent> {
        self.component(GRID_ID)
    }

    pub fn component<T: 'static>(&self, id: &str) -> Option<&T> {
        self.master
            .handles()
            .iter()
            .find(|h| h.id() == id)
            .and_then(|h| h.component().as_any())
            .and_then(|a| a.downcast_ref::<T>())
    }
}

pub fn run_scenario(s: &Scenario) -> Result<Run, ScenarioError> {
    let mut master = assemble(s)?;
    let out = master.run()?;
    let mut trace = out.trace;
    trace.meta.scenario = s.name.clone();
    trace.meta.event_times = s.fault_times();
    Ok(Run { trace, master })
}
