//! Master algorithm: registration, wiring, initialization and fixed-step
//! orchestration of components.
//!
//! Cyclic dependencies are resolved without iteration:
//!
//! * **Serial**: components step one after another in ascending priority.
//!   Each refreshes its inputs right before stepping, so an edge whose source
//!   runs earlier delivers the same-step value, and a back-edge delivers the
//!   value from the previous macro step.
//! * **Parallel**: every input is latched from the previous macro step before
//!   any component steps; steps may then run concurrently.
//!
//! Neither scheme rolls back time, so a run always takes exactly
//! `t_end / macro_step` steps whatever the topology.

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::component::{Component, ComponentHandle, InitRole};
use crate::error::{ComponentError, MasterError};
use crate::trace::{RunMeta, TraceSet};
use crate::variable::{Direction, Kind, Transform, Value, VariableRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Serial,
    Parallel,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serial" => Ok(Scheme::Serial),
            "parallel" => Ok(Scheme::Parallel),
            other => Err(format!("unknown scheme `{other}` (serial|parallel)")),
        }
    }
}

/// A variable to trace, with the channel name it is recorded under.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSpec {
    pub channel: String,
    pub variable: VariableRef,
}

impl RecordSpec {
    pub fn new(channel: impl Into<String>, variable: VariableRef) -> Self {
        Self {
            channel: channel.into(),
            variable,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterConfig {
    pub macro_step: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    pub record: Vec<RecordSpec>,
}

impl Default for MasterConfig {
    fn default() -> Self {
        Self {
            macro_step: 1e-3,
            scheme: Scheme::Serial,
            t_end: 1.0,
            record: Vec::new(),
        }
    }
}

impl MasterConfig {
    /// Number of macro steps in the horizon, rounding `t_end` down to a
    /// multiple of the macro step. Returns a warning when rounding happened.
    pub fn step_count(&self) -> Result<(u64, Option<String>), MasterError> {
        if !(self.macro_step.is_finite() && self.macro_step > 0.0) {
            return Err(MasterError::InvalidConfig(format!(
                "macro_step must be positive, got {}",
                self.macro_step
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(MasterError::InvalidConfig(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        let ratio = self.t_end / self.macro_step;
        let n = (ratio + 1e-9).floor();
        let warning = ((ratio - n).abs() > 1e-9).then(|| {
            format!(
                "t_end {} is not a multiple of macro_step {}; rounded down to {}",
                self.t_end,
                self.macro_step,
                n * self.macro_step
            )
        });
        Ok((n as u64, warning))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub source: VariableRef,
    pub sink: VariableRef,
    pub transform: Transform,
}

#[derive(Debug, Clone, Copy)]
struct Resolved {
    src: usize,
    src_var: usize,
    sink: usize,
    sink_var: usize,
    transform: Transform,
    kind: Kind,
}

impl Resolved {
    fn carry(&self, v: Value) -> Value {
        match (self.kind, v) {
            (Kind::Real, Value::Real(x)) => Value::Real(self.transform.apply(x)),
            _ => v,
        }
    }
}

/// Output of a complete run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: TraceSet,
    pub steps: u64,
    pub wall_clock_s: f64,
}

pub struct Master {
    config: MasterConfig,
    handles: Vec<ComponentHandle>,
    connections: Vec<Connection>,
    driven: HashSet<VariableRef>,
    resolved: Vec<Resolved>,
    incoming: Vec<Vec<usize>>,
    records: Vec<(usize, usize)>,
    initialized: bool,
    steps_taken: u64,
    horizon: u64,
    warnings: Vec<String>,
}

impl Master {
    pub fn new(config: MasterConfig) -> Result<Self, MasterError> {
        let (horizon, warning) = config.step_count()?;
        Ok(Self {
            config,
            handles: Vec::new(),
            connections: Vec::new(),
            driven: HashSet::new(),
            resolved: Vec::new(),
            incoming: Vec::new(),
            records: Vec::new(),
            initialized: false,
            steps_taken: 0,
            horizon,
            warnings: warning.into_iter().collect(),
        })
    }

    pub fn config(&self) -> &MasterConfig {
        &self.config
    }

    /// Adds a component. Lower priority steps earlier in the serial scheme.
    pub fn register(
        &mut self,
        component: Box<dyn Component>,
        priority: i64,
    ) -> Result<(), MasterError> {
        if self.initialized {
            return Err(MasterError::AlreadyInitialized);
        }
        let id = component.id().to_string();
        if id.is_empty() || id.contains('.') {
            return Err(MasterError::InvalidConfig(format!(
                "component id `{id}` must be non-empty and dot-free"
            )));
        }
        if self.handles.iter().any(|h| h.id() == id) {
            return Err(MasterError::DuplicateId(id));
        }
        if let Some(h) = self.handles.iter().find(|h| h.priority == priority) {
            return Err(MasterError::DuplicatePriority {
                priority,
                holder: h.id().to_string(),
            });
        }
        let mut names = HashSet::new();
        for v in component.variables() {
            if !names.insert(v.name.as_str()) {
                return Err(MasterError::InvalidConfig(format!(
                    "component `{id}` declares `{}` twice",
                    v.name
                )));
            }
        }
        let pos = self
            .handles
            .partition_point(|h| h.priority < priority);
        self.handles.insert(
            pos,
            ComponentHandle {
                component,
                priority,
                current_time: 0.0,
            },
        );
        Ok(())
    }

    /// Component ids in scheduler order.
    pub fn order(&self) -> Vec<&str> {
        self.handles.iter().map(|h| h.id()).collect()
    }

    pub fn handles(&self) -> &[ComponentHandle] {
        &self.handles
    }

    pub fn component_count(&self) -> usize {
        self.handles.len()
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    fn locate(&self, r: &VariableRef) -> Result<(usize, usize), MasterError> {
        let ci = self
            .handles
            .iter()
            .position(|h| h.id() == r.component)
            .ok_or_else(|| MasterError::UnknownComponent(r.component.clone()))?;
        let vi = self.handles[ci]
            .component
            .find(&r.variable)
            .ok_or_else(|| MasterError::UnknownVariable {
                component: r.component.clone(),
                variable: r.variable.clone(),
            })?;
        Ok((ci, vi))
    }

    /// Wires an output to an input. Cycles are allowed.
    pub fn connect(
        &mut self,
        source: VariableRef,
        sink: VariableRef,
        transform: Option<Transform>,
    ) -> Result<(), MasterError> {
        if self.initialized {
            return Err(MasterError::AlreadyInitialized);
        }
        let (sc, sv) = self.locate(&source)?;
        let (kc, kv) = self.locate(&sink)?;
        let sdecl = &self.handles[sc].component.variables()[sv];
        let kdecl = &self.handles[kc].component.variables()[kv];
        if sdecl.direction != Direction::Output || kdecl.direction != Direction::Input {
            return Err(MasterError::DirectionMismatch {
                source_ref: source.to_string(),
                sink: sink.to_string(),
            });
        }
        if sdecl.kind != kdecl.kind {
            return Err(MasterError::KindMismatch {
                source_ref: source.to_string(),
                sink: sink.to_string(),
                source_kind: sdecl.kind,
                sink_kind: kdecl.kind,
            });
        }
        let transform = match transform {
            Some(t) => {
                let t = Transform::new(t.gain, t.offset)?;
                if sdecl.kind != Kind::Real && !t.is_identity() {
                    return Err(MasterError::TransformOnNonReal(sink.to_string()));
                }
                t
            }
            None => Transform::IDENTITY,
        };
        if self.driven.contains(&sink) {
            return Err(MasterError::SinkAlreadyDriven(sink.to_string()));
        }
        self.driven.insert(sink.clone());
        self.connections.push(Connection {
            source,
            sink,
            transform,
        });
        Ok(())
    }

    fn resolve(&mut self) -> Result<(), MasterError> {
        let mut resolved = Vec::with_capacity(self.connections.len());
        for c in &self.connections {
            let (src, src_var) = self.locate(&c.source)?;
            let (sink, sink_var) = self.locate(&c.sink)?;
            let kind = self.handles[src].component.variables()[src_var].kind;
            resolved.push(Resolved {
                src,
                src_var,
                sink,
                sink_var,
                transform: c.transform,
                kind,
            });
        }
        let mut incoming = vec![Vec::new(); self.handles.len()];
        for (i, r) in resolved.iter().enumerate() {
            incoming[r.sink].push(i);
        }
        let mut records = Vec::with_capacity(self.config.record.len());
        for spec in &self.config.record {
            records.push(self.locate(&spec.variable)?);
        }
        self.resolved = resolved;
        self.incoming = incoming;
        self.records = records;
        Ok(())
    }

    fn set_input(&mut self, r: Resolved, v: Value) -> Result<(), MasterError> {
        let h = &mut self.handles[r.sink];
        h.component
            .set(r.sink_var, r.carry(v))
            .map_err(|source| MasterError::SetInput {
                id: h.component.id().to_string(),
                variable: h.component.variables()[r.sink_var].name.clone(),
                source,
            })
    }

    /// Pulls the latest available source values into component `i`.
    fn refresh_inputs(&mut self, i: usize) -> Result<(), MasterError> {
        for k in 0..self.incoming[i].len() {
            let r = self.resolved[self.incoming[i][k]];
            let v = self.handles[r.src].component.get(r.src_var);
            self.set_input(r, v)?;
        }
        Ok(())
    }

    fn init_call(
        &mut self,
        i: usize,
        f: impl FnOnce(&mut dyn Component) -> Result<(), ComponentError>,
    ) -> Result<(), MasterError> {
        let h = &mut self.handles[i];
        f(h.component.as_mut()).map_err(|source| MasterError::Initialization {
            id: h.component.id().to_string(),
            source,
        })
    }

    /// Two-phase initialization: sources publish their injections, solvers
    /// compute the operating point, then everyone back-solves to equilibrium.
    pub fn initialize(&mut self) -> Result<(), MasterError> {
        if self.initialized {
            return Err(MasterError::AlreadyInitialized);
        }
        self.resolve()?;
        let n = self.handles.len();
        let role = |m: &Self, i: usize| m.handles[i].component.init_role();

        for i in 0..n {
            if role(self, i) == InitRole::Source {
                self.init_call(i, |c| c.publish_initial())?;
            }
        }
        for i in 0..n {
            if role(self, i) == InitRole::Solver {
                self.refresh_inputs(i)?;
                self.init_call(i, |c| c.solve_initial())?;
            }
        }
        // Two sweeps so back-edges between non-solvers also see settled values.
        for _ in 0..2 {
            for i in 0..n {
                if role(self, i) != InitRole::Solver {
                    self.refresh_inputs(i)?;
                    self.init_call(i, |c| c.settle_initial())?;
                }
            }
        }
        for i in 0..n {
            if role(self, i) == InitRole::Solver {
                self.refresh_inputs(i)?;
                self.init_call(i, |c| c.settle_initial())?;
            }
        }
        for i in 0..n {
            self.refresh_inputs(i)?;
            self.handles[i].current_time = 0.0;
        }
        self.check_outputs(0.0)?;
        self.initialized = true;
        self.steps_taken = 0;
        Ok(())
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn horizon_steps(&self) -> u64 {
        self.horizon
    }

    pub fn time(&self) -> f64 {
        self.steps_taken as f64 * self.config.macro_step
    }

    fn check_outputs(&self, time: f64) -> Result<(), MasterError> {
        for h in &self.handles {
            for (i, v) in h.component.variables().iter().enumerate() {
                if v.direction == Direction::Output && !h.component.get(i).is_finite() {
                    return Err(MasterError::NonFiniteOutput {
                        id: h.id().to_string(),
                        variable: v.name.clone(),
                        time,
                    });
                }
            }
        }
        Ok(())
    }

    /// Advances every component by one macro step.
    pub fn step_macro(&mut self) -> Result<(), MasterError> {
        if !self.initialized {
            return Err(MasterError::NotInitialized);
        }
        let h = self.config.macro_step;
        let t = self.steps_taken as f64 * h;
        if self.steps_taken >= self.horizon {
            return Err(MasterError::HorizonReached(t));
        }
        match self.config.scheme {
            Scheme::Serial => {
                for i in 0..self.handles.len() {
                    self.refresh_inputs(i)?;
                    let handle = &mut self.handles[i];
                    handle
                        .component
                        .do_step(t, h)
                        .map_err(|source| MasterError::Step {
                            id: handle.id().to_string(),
                            time: t,
                            source,
                        })?;
                    handle.current_time = t + h;
                }
            }
            Scheme::Parallel => {
                let latched: Vec<Value> = self
                    .resolved
                    .iter()
                    .map(|r| self.handles[r.src].component.get(r.src_var))
                    .collect();
                for (k, v) in latched.into_iter().enumerate() {
                    self.set_input(self.resolved[k], v)?;
                }
                let results: Vec<Result<(), ComponentError>> = self
                    .handles
                    .par_iter_mut()
                    .map(|handle| {
                        let r = handle.component.do_step(t, h);
                        handle.current_time = t + h;
                        r
                    })
                    .collect();
                for (handle, r) in self.handles.iter().zip(results) {
                    r.map_err(|source| MasterError::Step {
                        id: handle.id().to_string(),
                        time: t,
                        source,
                    })?;
                }
            }
        }
        self.steps_taken += 1;
        self.check_outputs(self.time())
    }

    /// Current value of any registered variable.
    pub fn value(&self, r: &VariableRef) -> Result<Value, MasterError> {
        let (c, v) = self.locate(r)?;
        Ok(self.handles[c].component.get(v))
    }

    fn record_row(&self, trace: &mut TraceSet) {
        let row: Vec<f64> = self
            .records
            .iter()
            .map(|&(c, v)| self.handles[c].component.get(v).as_f64())
            .collect();
        trace.push_row(self.time(), &row);
    }

    /// Initializes (if needed) and steps to the horizon, recording the
    /// configured channels at t = 0 and after every macro step.
    pub fn run(&mut self) -> Result<RunOutput, MasterError> {
        let start = Instant::now();
        if !self.initialized {
            self.initialize()?;
        }
        let mut trace = TraceSet::new(self.config.record.iter().map(|r| r.channel.clone()));
        self.record_row(&mut trace);
        while self.steps_taken < self.horizon {
            self.step_macro()?;
            self.record_row(&mut trace);
        }
        let wall_clock_s = start.elapsed().as_secs_f64();
        trace.meta = RunMeta {
            scenario: String::new(),
            scheme: Some(self.config.scheme),
            macro_step: self.config.macro_step,
            t_end: self.config.t_end,
            steps: self.steps_taken,
            components: self.handles.len(),
            wall_clock_s,
            event_times: Vec::new(),
            warnings: self.warnings.clone(),
        };
        Ok(RunOutput {
            trace,
            steps: self.steps_taken,
            wall_clock_s,
        })
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

impl std::fmt::Debug for Master {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Master")
            .field("order", &self.order())
            .field("connections", &self.connections.len())
            .field("initialized", &self.initialized)
            .field("steps_taken", &self.steps_taken)
            .finish()
    }
}
