//! The component contract every simulator unit implements.

use crate::error::ComponentError;
use crate::variable::{Direction, Value, VariableDecl};

/// Which side of the two-phase initialization a component takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitRole {
    /// Publishes its steady-state injections first (turbine controllers).
    Source,
    /// Solves for the operating point given the sources' injections (the grid).
    Solver,
    /// Only back-solves its state from the final operating point.
    Follower,
}

/// A simulatable unit with FMI co-simulation semantics: scalar inputs and
/// outputs addressed by index, an initialization protocol, and fixed
/// communication steps.
///
/// Components must be `Send` so the parallel scheme can step them on worker
/// threads.
pub trait Component: Send {
    fn id(&self) -> &str;

    /// All declared variables. Indices into this slice address `get`/`set`.
    fn variables(&self) -> &[VariableDecl];

    /// Current value of any variable (inputs report the last value set).
    fn get(&self, index: usize) -> Value;

    /// Writes an input. Called by the master only with matching kinds.
    fn set(&mut self, index: usize, value: Value) -> Result<(), ComponentError>;

    fn init_role(&self) -> InitRole {
        InitRole::Follower
    }

    /// Phase 1 for sources: make steady-state injections readable on the outputs.
    fn publish_initial(&mut self) -> Result<(), ComponentError> {
        Ok(())
    }

    /// Phase 2 for solvers: compute the operating point from current inputs
    /// and publish it.
    fn solve_initial(&mut self) -> Result<(), ComponentError> {
        Ok(())
    }

    /// Final phase: back-solve internal state so that outputs are at
    /// equilibrium with the current inputs. Must be idempotent.
    fn settle_initial(&mut self) -> Result<(), ComponentError> {
        Ok(())
    }

    /// Advances from `t` to `t + h`. Inputs are held constant over the step.
    fn do_step(&mut self, t: f64, h: f64) -> Result<(), ComponentError>;

    /// Concrete-type access for inspection after a run.
    fn as_any(&self) -> Option<&dyn std::any::Any> {
        None
    }

    fn find(&self, name: &str) -> Option<usize> {
        self.variables().iter().position(|v| v.name == name)
    }

    fn inputs(&self) -> Vec<&VariableDecl> {
        self.variables()
            .iter()
            .filter(|v| v.direction == Direction::Input)
            .collect()
    }

    fn outputs(&self) -> Vec<&VariableDecl> {
        self.variables()
            .iter()
            .filter(|v| v.direction == Direction::Output)
            .collect()
    }
}

/// A registered component together with its scheduling metadata.
pub struct ComponentHandle {
    pub(crate) component: Box<dyn Component>,
    pub(crate) priority: i64,
    pub(crate) current_time: f64,
}

impl ComponentHandle {
    pub fn id(&self) -> &str {
        self.component.id()
    }

    pub fn priority(&self) -> i64 {
        self.priority
    }

    pub fn current_time(&self) -> f64 {
        self.current_time
    }

    pub fn component(&self) -> &dyn Component {
        self.component.as_ref()
    }

    pub fn component_mut(&mut self) -> &mut dyn Component {
        self.component.as_mut()
    }
}

impl std::fmt::Debug for ComponentHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComponentHandle")
            .field("id", &self.id())
            .field("priority", &self.priority)
            .field("current_time", &self.current_time)
            .finish()
    }
}
