//! Instrumented mock component for exercising the master on arbitrary
//! topologies.

use std::sync::{Arc, Mutex};

use crate::component::{Component, InitRole};
use crate::error::ComponentError;
use crate::variable::{Kind, Value, VariableDecl};

/// Values seen and produced by a [`Probe`], one row per step.
#[derive(Debug, Clone, Default)]
pub struct ProbeLog {
    /// `consumed[k]` holds the inputs used for step k+1.
    pub consumed: Vec<Vec<f64>>,
    /// `published[0]` is the post-initialization output; `published[k]` the
    /// output after step k.
    pub published: Vec<Vec<f64>>,
}

pub type SharedLog = Arc<Mutex<ProbeLog>>;

/// A real-valued component whose outputs depend on its step count and inputs.
pub struct Probe {
    id: String,
    vars: Vec<VariableDecl>,
    n_in: usize,
    values: Vec<f64>,
    seed: f64,
    steps: u64,
    log: SharedLog,
    fail_at: Option<u64>,
}

impl Probe {
    pub fn new(id: impl Into<String>, n_inputs: usize, n_outputs: usize, seed: f64) -> Self {
        let mut vars = Vec::with_capacity(n_inputs + n_outputs);
        for i in 0..n_inputs {
            vars.push(VariableDecl::input(format!("in{i}"), Kind::Real));
        }
        for j in 0..n_outputs {
            vars.push(VariableDecl::output(format!("out{j}"), Kind::Real));
        }
        let mut values = vec![0.0; n_inputs + n_outputs];
        for j in 0..n_outputs {
            values[n_inputs + j] = seed + j as f64;
        }
        Self {
            id: id.into(),
            vars,
            n_in: n_inputs,
            values,
            seed,
            steps: 0,
            log: SharedLog::default(),
            fail_at: None,
        }
    }

    /// Makes `do_step` fail on the given (1-based) step.
    pub fn failing_at(mut self, step: u64) -> Self {
        self.fail_at = Some(step);
        self
    }

    pub fn log(&self) -> SharedLog {
        Arc::clone(&self.log)
    }

    fn publish(&self) {
        self.log
            .lock()
            .unwrap()
            .published
            .push(self.values[self.n_in..].to_vec());
    }
}

impl Component for Probe {
    fn id(&self) -> &str {
        &self.id
    }

    fn variables(&self) -> &[VariableDecl] {
        &self.vars
    }

    fn get(&self, index: usize) -> Value {
        Value::Real(self.values[index])
    }

    fn set(&mut self, index: usize, value: Value) -> Result<(), ComponentError> {
        let v = value
            .as_real()
            .ok_or_else(|| ComponentError::new("probe inputs are real"))?;
        self.values[index] = v;
        Ok(())
    }

    fn init_role(&self) -> InitRole {
        InitRole::Follower
    }

    fn settle_initial(&mut self) -> Result<(), ComponentError> {
        let mut log = self.log.lock().unwrap();
        log.published.clear();
        log.consumed.clear();
        log.published.push(self.values[self.n_in..].to_vec());
        Ok(())
    }

    fn do_step(&mut self, _t: f64, _h: f64) -> Result<(), ComponentError> {
        self.steps += 1;
        if self.fail_at == Some(self.steps) {
            return Err(ComponentError::new(format!("probe failure at step {}", self.steps)));
        }
        let inputs = self.values[..self.n_in].to_vec();
        self.log.lock().unwrap().consumed.push(inputs.clone());
        let drive: f64 = inputs.iter().sum();
        let k = self.steps as f64;
        for j in 0..self.values.len() - self.n_in {
            self.values[self.n_in + j] =
                self.seed + j as f64 + 1e-3 * k + 0.5 * (drive + 0.1 * j as f64).tanh();
        }
        self.publish();
        Ok(())
    }
}

/// Component with mixed-kind ports for contract tests.
pub struct TypedPorts {
    id: String,
    vars: Vec<VariableDecl>,
    values: Vec<Value>,
}

impl TypedPorts {
    pub fn new(id: impl Into<String>) -> Self {
        let vars = vec![
            VariableDecl::input("x", Kind::Real),
            VariableDecl::input("flag", Kind::Boolean),
            VariableDecl::input("mode", Kind::Integer),
            VariableDecl::output("y", Kind::Real),
            VariableDecl::output("flag_out", Kind::Boolean),
            VariableDecl::output("mode_out", Kind::Integer),
        ];
        let values = vars.iter().map(|v| Value::zero(v.kind)).collect();
        Self {
            id: id.into(),
            vars,
            values,
        }
    }
}

impl Component for TypedPorts {
    fn id(&self) -> &str {
        &self.id
    }

    fn variables(&self) -> &[VariableDecl] {
        &self.vars
    }

    fn get(&self, index: usize) -> Value {
        self.values[index]
    }

    fn set(&mut self, index: usize, value: Value) -> Result<(), ComponentError> {
        self.values[index] = value;
        Ok(())
    }

    fn do_step(&mut self, _t: f64, _h: f64) -> Result<(), ComponentError> {
        self.values[3] = self.values[0];
        self.values[4] = self.values[1];
        self.values[5] = self.values[2];
        Ok(())
    }
}
