//! The grid simulator wrapped as a co-simulation component.

use cosim::{Component, ComponentError, InitRole, Kind, Value, VariableDecl};
use num_complex::Complex64;

use crate::dynamics::GridSimulator;
use crate::error::GridError;
use crate::network::{FaultEvent, Network};

/// Terminal measurement handed to an embedded controller (machine base).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub v_mag: f64,
    pub p: f64,
    pub q: f64,
}

/// Controller evaluated inside the grid's own time loop, for monolithic runs.
/// It replaces the `i_d`/`i_q` inputs of one static generator.
pub trait EmbeddedController: Send {
    /// Currents at nominal voltage used to seed the power flow.
    fn nominal_currents(&self) -> (f64, f64);

    /// Back-solves internal state at the initial operating point and returns
    /// the equilibrium currents.
    fn settle(&mut self, m: &Measurement) -> Result<(f64, f64), ComponentError>;

    /// Advances by `dt` after a grid step and returns the new commands.
    fn step(&mut self, m: &Measurement, dt: f64) -> Result<(f64, f64), ComponentError>;

    /// Extra outputs exposed on the grid component, unprefixed.
    fn output_decls(&self) -> Vec<(String, Kind)>;

    fn output(&self, index: usize) -> Value;
}

/// Where the point-of-common-coupling outputs are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PccOutput {
    pub bus: u32,
    /// If set, `P_pcc`/`Q_pcc` are the flow out of this branch into the PCC
    /// bus. Otherwise they are the total static generation at the bus.
    pub branch: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
enum Input {
    Id(usize),
    Iq(usize),
    Status(usize),
}

#[derive(Debug, Clone, Copy)]
enum Output {
    SgV(usize),
    SgTheta(usize),
    SgP(usize),
    SgQ(usize),
    VPcc,
    ThetaPcc,
    PPcc,
    QPcc,
    Delta(usize),
    Speed(usize),
    BusV(usize),
    Balance,
    Loss,
    Ctrl(usize, usize),
}

pub struct GridComponent {
    id: String,
    template: Network,
    faults: Vec<FaultEvent>,
    micro_step: f64,
    pcc: PccOutput,
    embedded: Vec<Option<Box<dyn EmbeddedController>>>,
    sim: Option<GridSimulator>,
    decls: Vec<VariableDecl>,
    values: Vec<Value>,
    inputs: Vec<(usize, Input)>,
    outputs: Vec<(usize, Output)>,
    pcc_index: usize,
    /// Commands from embedded controllers, applied at the next micro step so
    /// published outputs stay consistent with the solved network.
    pending: Vec<Option<(f64, f64)>>,
}

/// Tolerance on the static generator powers when the controllers' settled
/// currents are fed back after the power flow.
const SETTLE_TOL: f64 = 1e-6;

impl GridComponent {
    pub fn new(
        id: impl Into<String>,
        network: Network,
        faults: Vec<FaultEvent>,
        micro_step: f64,
        pcc: PccOutput,
        mut embedded: Vec<(String, Box<dyn EmbeddedController>)>,
    ) -> Result<Self, GridError> {
        network.validate()?;
        if !(micro_step > 0.0 && micro_step.is_finite()) {
            return Err(GridError::InvalidElement(format!(
                "micro step must be positive, got {micro_step}"
            )));
        }
        let pcc_index = network.index_of(pcc.bus)?;
        if let Some(b) = pcc.branch {
            let br = network.branches.get(b).ok_or_else(|| {
                GridError::InvalidElement(format!("PCC branch index {b} out of range"))
            })?;
            if br.from != pcc.bus && br.to != pcc.bus {
                return Err(GridError::InvalidElement(format!(
                    "PCC branch {}-{} does not touch bus {}",
                    br.from, br.to, pcc.bus
                )));
            }
        }
        for f in &faults {
            network.index_of(f.bus)?;
            if !(f.duration >= 0.0 && f.admittance > 0.0) {
                return Err(GridError::InvalidElement(format!(
                    "fault at bus {} needs duration >= 0 and admittance > 0",
                    f.bus
                )));
            }
        }

        let mut slots: Vec<Option<Box<dyn EmbeddedController>>> =
            network.static_generators.iter().map(|_| None).collect();
        for (sg_id, ctrl) in embedded.drain(..) {
            let k = network
                .static_generators
                .iter()
                .position(|sg| sg.id == sg_id)
                .ok_or_else(|| {
                    GridError::InvalidElement(format!("no static generator named {sg_id}"))
                })?;
            slots[k] = Some(ctrl);
        }

        let mut decls = Vec::new();
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        let mut out = |decls: &mut Vec<VariableDecl>, name: String, kind: Kind, src: Output| {
            outputs.push((decls.len(), src));
            decls.push(VariableDecl::output(name, kind));
        };
        for (k, sg) in network.static_generators.iter().enumerate() {
            if slots[k].is_none() {
                for (suffix, kind, src) in [
                    ("i_d", Kind::Real, Input::Id(k)),
                    ("i_q", Kind::Real, Input::Iq(k)),
                    ("status", Kind::Boolean, Input::Status(k)),
                ] {
                    inputs.push((decls.len(), src));
                    decls.push(VariableDecl::input(format!("{}.{suffix}", sg.id), kind));
                }
            }
            out(&mut decls, format!("{}.V", sg.id), Kind::Real, Output::SgV(k));
            out(&mut decls, format!("{}.theta", sg.id), Kind::Real, Output::SgTheta(k));
            out(&mut decls, format!("{}.P", sg.id), Kind::Real, Output::SgP(k));
            out(&mut decls, format!("{}.Q", sg.id), Kind::Real, Output::SgQ(k));
            if let Some(ctrl) = &slots[k] {
                for (j, (name, kind)) in ctrl.output_decls().into_iter().enumerate() {
                    out(&mut decls, name, kind, Output::Ctrl(k, j));
                }
            }
        }
        out(&mut decls, "V_pcc".into(), Kind::Real, Output::VPcc);
        out(&mut decls, "theta_pcc".into(), Kind::Real, Output::ThetaPcc);
        out(&mut decls, "P_pcc".into(), Kind::Real, Output::PPcc);
        out(&mut decls, "Q_pcc".into(), Kind::Real, Output::QPcc);
        for (j, m) in network.machines.iter().enumerate() {
            out(&mut decls, format!("{}.delta", m.name), Kind::Real, Output::Delta(j));
            out(&mut decls, format!("{}.speed", m.name), Kind::Real, Output::Speed(j));
        }
        for (i, b) in network.buses.iter().enumerate() {
            out(&mut decls, format!("bus{}.V", b.id), Kind::Real, Output::BusV(i));
        }
        out(&mut decls, "balance_residual".into(), Kind::Real, Output::Balance);
        out(&mut decls, "P_loss".into(), Kind::Real, Output::Loss);

        let mut names = std::collections::HashSet::new();
        for d in &decls {
            if !names.insert(d.name.as_str()) {
                return Err(GridError::InvalidElement(format!(
                    "duplicate variable name {}",
                    d.name
                )));
            }
        }

        let mut values: Vec<Value> = decls.iter().map(|d| Value::zero(d.kind)).collect();
        for &(idx, src) in &inputs {
            if let Input::Status(_) = src {
                values[idx] = Value::Boolean(true);
            }
        }

        Ok(Self {
            id: id.into(),
            template: network,
            faults,
            micro_step,
            pcc,
            embedded: slots,
            sim: None,
            decls,
            values,
            inputs,
            outputs,
            pcc_index,
            pending: Vec::new(),
        })
    }

    pub fn simulator(&self) -> Option<&GridSimulator> {
        self.sim.as_ref()
    }

    pub fn micro_step(&self) -> f64 {
        self.micro_step
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    /// Fault application and clearance instants, sorted.
    pub fn event_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .faults
            .iter()
            .flat_map(|f| [f.start, f.end()])
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    fn sim(&self) -> Result<&GridSimulator, ComponentError> {
        self.sim
            .as_ref()
            .ok_or_else(|| ComponentError::new(GridError::NotInitialized.to_string()))
    }

    fn sim_mut(&mut self) -> Result<&mut GridSimulator, ComponentError> {
        self.sim
            .as_mut()
            .ok_or_else(|| ComponentError::new(GridError::NotInitialized.to_string()))
    }

    /// Commands and connection status currently on the inputs.
    fn input_commands(&self) -> Vec<(f64, f64, bool)> {
        let mut cmd = vec![(0.0, 0.0, true); self.template.static_generators.len()];
        for &(idx, src) in &self.inputs {
            let v = self.values[idx];
            match src {
                Input::Id(k) => cmd[k].0 = v.as_f64(),
                Input::Iq(k) => cmd[k].1 = v.as_f64(),
                Input::Status(k) => cmd[k].2 = v.as_bool().unwrap_or(true),
            }
        }
        cmd
    }

    fn apply_inputs(&mut self) -> Result<(), ComponentError> {
        let cmd = self.input_commands();
        let embedded: Vec<bool> = self.embedded.iter().map(Option::is_some).collect();
        let sim = self.sim_mut()?;
        for (k, &(i_d, i_q, on)) in cmd.iter().enumerate() {
            if embedded[k] {
                continue;
            }
            sim.set_command(k, i_d, i_q);
            sim.set_connected(k, on);
        }
        Ok(())
    }

    fn measurement(sim: &GridSimulator, k: usize) -> Measurement {
        let t = sim.terminal(k);
        Measurement {
            v_mag: t.voltage.norm(),
            p: t.p,
            q: t.q,
        }
    }

    fn pcc_power(&self, sim: &GridSimulator) -> Complex64 {
        match self.pcc.branch {
            Some(b) => sim.branch_power_into(b, self.pcc.bus),
            None => {
                let base = sim.network().base_mva;
                sim.network()
                    .static_generators
                    .iter()
                    .enumerate()
                    .filter(|(_, sg)| sg.bus == self.pcc.bus)
                    .map(|(k, sg)| {
                        let t = sim.terminal(k);
                        Complex64::new(t.p, t.q) * (sg.mva_base / base)
                    })
                    .sum()
            }
        }
    }

    fn publish(&mut self) -> Result<(), ComponentError> {
        let sim = self.sim()?;
        let terminals: Vec<_> = (0..sim.network().static_generators.len())
            .map(|k| sim.terminal(k))
            .collect();
        let v_pcc = sim.voltages()[self.pcc_index];
        let s_pcc = self.pcc_power(sim);
        let balance = sim.power_balance();
        let machines = &sim.network().machines;
        let mut updates = Vec::with_capacity(self.outputs.len());
        for &(idx, src) in &self.outputs {
            let v = match src {
                Output::SgV(k) => Value::Real(terminals[k].voltage.norm()),
                Output::SgTheta(k) => Value::Real(terminals[k].voltage.arg()),
                Output::SgP(k) => Value::Real(terminals[k].p),
                Output::SgQ(k) => Value::Real(terminals[k].q),
                Output::VPcc => Value::Real(v_pcc.norm()),
                Output::ThetaPcc => Value::Real(v_pcc.arg()),
                Output::PPcc => Value::Real(s_pcc.re),
                Output::QPcc => Value::Real(s_pcc.im),
                Output::Delta(j) => Value::Real(machines[j].delta),
                Output::Speed(j) => Value::Real(machines[j].speed_dev),
                Output::BusV(i) => Value::Real(sim.voltages()[i].norm()),
                Output::Balance => Value::Real(balance.residual()),
                Output::Loss => Value::Real(balance.losses),
                Output::Ctrl(k, j) => self.embedded[k]
                    .as_ref()
                    .map(|c| c.output(j))
                    .unwrap_or(Value::Real(0.0)),
            };
            updates.push((idx, v));
        }
        for (idx, v) in updates {
            self.values[idx] = v;
        }
        Ok(())
    }
}

fn grid_err(e: GridError) -> ComponentError {
    ComponentError::new(e.to_string())
}

impl Component for GridComponent {
    fn id(&self) -> &str {
        &self.id
    }

    fn variables(&self) -> &[VariableDecl] {
        &self.decls
    }

    fn get(&self, index: usize) -> Value {
        self.values[index]
    }

    fn set(&mut self, index: usize, value: Value) -> Result<(), ComponentError> {
        let decl = self
            .decls
            .get(index)
            .ok_or_else(|| ComponentError::new(format!("no variable at index {index}")))?;
        if decl.direction != cosim::Direction::Input {
            return Err(ComponentError::new(format!("{} is not an input", decl.name)));
        }
        if value.kind() != decl.kind {
            return Err(ComponentError::new(format!("{} expects {:?}", decl.name, decl.kind)));
        }
        if !value.is_finite() {
            return Err(ComponentError::new(format!("non-finite value on {}", decl.name)));
        }
        self.values[index] = value;
        Ok(())
    }

    fn init_role(&self) -> InitRole {
        InitRole::Solver
    }

    fn as_any(&self) -> Option<&dyn std::any::Any> {
        Some(self)
    }

    fn solve_initial(&mut self) -> Result<(), ComponentError> {
        let cmd = self.input_commands();
        let mut network = self.template.clone();
        let mut injections = Vec::with_capacity(cmd.len());
        for (k, &(i_d, i_q, on)) in cmd.iter().enumerate() {
            let (i_d, i_q) = match &self.embedded[k] {
                Some(c) => c.nominal_currents(),
                None => (i_d, i_q),
            };
            network.static_generators[k].connected = on || self.embedded[k].is_some();
            injections.push(Complex64::new(i_d, i_q));
        }
        let (sim, _) =
            GridSimulator::initialize(network, &injections, self.faults.clone()).map_err(grid_err)?;
        self.sim = Some(sim);
        self.publish()
    }

    fn settle_initial(&mut self) -> Result<(), ComponentError> {
        let before: Vec<_> = {
            let sim = self.sim()?;
            (0..self.embedded.len()).map(|k| sim.terminal(k)).collect()
        };
        self.apply_inputs()?;
        let mut embedded = std::mem::take(&mut self.embedded);
        let result = (|| {
            let sim = self.sim.as_mut().expect("checked above");
            for (k, slot) in embedded.iter_mut().enumerate() {
                if let Some(ctrl) = slot {
                    let (i_d, i_q) = ctrl.settle(&Self::measurement(sim, k))?;
                    sim.set_command(k, i_d, i_q);
                }
            }
            sim.resolve().map_err(grid_err)?;
            for (k, b) in before.iter().enumerate() {
                let a = sim.terminal(k);
                let err = f64::max((a.p - b.p).abs(), (a.q - b.q).abs());
                if err > SETTLE_TOL {
                    return Err(ComponentError::new(format!(
                        "static generator {} settled {err:e} pu away from the power flow",
                        sim.network().static_generators[k].id
                    )));
                }
            }
            sim.rebalance_mechanical_power();
            Ok(())
        })();
        self.embedded = embedded;
        result?;
        self.publish()
    }

    fn do_step(&mut self, t: f64, h: f64) -> Result<(), ComponentError> {
        self.apply_inputs()?;
        let n = ((h / self.micro_step) - 1e-9).ceil().max(1.0) as usize;
        let dt = h / n as f64;
        let mut embedded = std::mem::take(&mut self.embedded);
        let mut pending = std::mem::take(&mut self.pending);
        pending.resize(embedded.len(), None);
        let result = (|| {
            let sim = self.sim.as_mut().ok_or_else(|| grid_err(GridError::NotInitialized))?;
            for s in 0..n {
                for (k, cmd) in pending.iter_mut().enumerate() {
                    if let Some((i_d, i_q)) = cmd.take() {
                        sim.set_command(k, i_d, i_q);
                    }
                }
                sim.integrate_step(t + s as f64 * dt, dt).map_err(grid_err)?;
                for (k, slot) in embedded.iter_mut().enumerate() {
                    if let Some(ctrl) = slot {
                        pending[k] = Some(ctrl.step(&Self::measurement(sim, k), dt)?);
                    }
                }
            }
            Ok(())
        })();
        self.pending = pending;
        self.embedded = embedded;
        result?;
        self.publish()
    }
}
