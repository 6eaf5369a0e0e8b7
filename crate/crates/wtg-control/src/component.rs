//! Converter and FRT controllers as co-simulation components.

use cosim::{Component, ComponentError, Direction, InitRole, Kind, Value, VariableDecl};

use crate::converter::{Converter, ConverterParams, Measurements};
use crate::error::ControlError;
use crate::frt::{FrtMode, FrtOverrides, FrtParams, FrtSupervisor, TransitionCounts};

fn err(e: ControlError) -> ComponentError {
    ComponentError::new(e.to_string())
}

fn checked_set(
    decls: &[VariableDecl],
    values: &mut [Value],
    index: usize,
    value: Value,
) -> Result<(), ComponentError> {
    let d = decls
        .get(index)
        .ok_or_else(|| ComponentError::new(format!("no variable at index {index}")))?;
    if d.direction != Direction::Input {
        return Err(ComponentError::new(format!("{} is not an input", d.name)));
    }
    if value.kind() != d.kind {
        return Err(ComponentError::new(format!("{} expects {:?}", d.name, d.kind)));
    }
    values[index] = value;
    Ok(())
}

// Converter variable indices.
const C_V: usize = 0;
const C_P: usize = 1;
const C_Q: usize = 2;
const C_BLOCK: usize = 3;
const C_BOOST: usize = 4;
const C_IDREF: usize = 5;
const C_MODE: usize = 6;
const C_ID: usize = 7;
const C_IQ: usize = 8;

/// Converter controller: measurements and FRT overrides in, dq current
/// commands out.
pub struct ConverterComponent {
    id: String,
    ctrl: Converter,
    decls: Vec<VariableDecl>,
    values: Vec<Value>,
}

impl ConverterComponent {
    pub fn new(id: impl Into<String>, params: ConverterParams) -> Result<Self, ControlError> {
        let ctrl = Converter::new(params)?;
        let decls = vec![
            VariableDecl::input("V_mag", Kind::Real),
            VariableDecl::input("P_meas", Kind::Real),
            VariableDecl::input("Q_meas", Kind::Real),
            VariableDecl::input("block_active", Kind::Boolean),
            VariableDecl::input("i_q_boost", Kind::Real),
            VariableDecl::input("i_d_ref_limited", Kind::Real),
            VariableDecl::input("frt_mode", Kind::Integer),
            VariableDecl::output("i_d_cmd", Kind::Real),
            VariableDecl::output("i_q_cmd", Kind::Real),
        ];
        let mut values: Vec<Value> = decls.iter().map(|d| Value::zero(d.kind)).collect();
        values[C_V] = Value::Real(1.0);
        let (i_d, i_q) = ctrl.commands();
        values[C_ID] = Value::Real(i_d);
        values[C_IQ] = Value::Real(i_q);
        values[C_IDREF] = Value::Real(i_d);
        Ok(Self {
            id: id.into(),
            ctrl,
            decls,
            values,
        })
    }

    pub fn controller(&self) -> &Converter {
        &self.ctrl
    }

    fn real(&self, i: usize) -> f64 {
        self.values[i].as_f64()
    }

    fn measurements(&self) -> Measurements {
        Measurements {
            v_mag: self.real(C_V),
            p: self.real(C_P),
            q: self.real(C_Q),
        }
    }

    fn publish(&mut self) {
        let (i_d, i_q) = self.ctrl.commands();
        self.values[C_ID] = Value::Real(i_d);
        self.values[C_IQ] = Value::Real(i_q);
    }
}

impl Component for ConverterComponent {
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
        checked_set(&self.decls, &mut self.values, index, value)
    }

    fn init_role(&self) -> InitRole {
        InitRole::Source
    }

    fn as_any(&self) -> Option<&dyn std::any::Any> {
        Some(self)
    }

    fn publish_initial(&mut self) -> Result<(), ComponentError> {
        let (i_d, i_q) = self.ctrl.params().nominal_currents();
        self.values[C_ID] = Value::Real(i_d);
        self.values[C_IQ] = Value::Real(i_q);
        Ok(())
    }

    fn settle_initial(&mut self) -> Result<(), ComponentError> {
        self.ctrl.settle(&self.measurements()).map_err(err)?;
        self.publish();
        Ok(())
    }

    fn do_step(&mut self, _t: f64, h: f64) -> Result<(), ComponentError> {
        let mode = FrtMode::from_code(self.values[C_MODE].as_integer().unwrap_or(0)).map_err(err)?;
        let ov = FrtOverrides {
            mode,
            block_active: self.values[C_BLOCK].as_bool().unwrap_or(false),
            i_q_boost: self.real(C_BOOST),
            i_d_ref_limited: self.real(C_IDREF),
        };
        self.ctrl.step(&self.measurements(), &ov, h).map_err(err)?;
        self.publish();
        Ok(())
    }
}

const F_V: usize = 0;
const F_ID: usize = 1;
const F_MODE: usize = 2;
const F_BLOCK: usize = 3;
const F_BOOST: usize = 4;
const F_IDREF: usize = 5;

/// FRT supervisor: terminal voltage and the converter's active-current
/// command in, mode and overrides out.
pub struct FrtComponent {
    id: String,
    frt: FrtSupervisor,
    decls: Vec<VariableDecl>,
    values: Vec<Value>,
}

impl FrtComponent {
    pub fn new(id: impl Into<String>, params: FrtParams) -> Result<Self, ControlError> {
        let frt = FrtSupervisor::new(params)?;
        let decls = vec![
            VariableDecl::input("V_mag", Kind::Real),
            VariableDecl::input("i_d_cmd", Kind::Real),
            VariableDecl::output("mode", Kind::Integer),
            VariableDecl::output("block_active", Kind::Boolean),
            VariableDecl::output("i_q_boost", Kind::Real),
            VariableDecl::output("i_d_ref_limited", Kind::Real),
        ];
        let mut values: Vec<Value> = decls.iter().map(|d| Value::zero(d.kind)).collect();
        values[F_V] = Value::Real(1.0);
        Ok(Self {
            id: id.into(),
            frt,
            decls,
            values,
        })
    }

    pub fn supervisor(&self) -> &FrtSupervisor {
        &self.frt
    }

    pub fn transitions(&self) -> &TransitionCounts {
        self.frt.transitions()
    }

    fn publish(&mut self, ov: FrtOverrides) {
        self.values[F_MODE] = Value::Integer(ov.mode.code());
        self.values[F_BLOCK] = Value::Boolean(ov.block_active);
        self.values[F_BOOST] = Value::Real(ov.i_q_boost);
        self.values[F_IDREF] = Value::Real(ov.i_d_ref_limited);
    }
}

impl Component for FrtComponent {
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
        checked_set(&self.decls, &mut self.values, index, value)
    }

    fn as_any(&self) -> Option<&dyn std::any::Any> {
        Some(self)
    }

    fn settle_initial(&mut self) -> Result<(), ComponentError> {
        let ov = self.frt.settle(self.values[F_ID].as_f64());
        self.publish(ov);
        Ok(())
    }

    fn do_step(&mut self, _t: f64, h: f64) -> Result<(), ComponentError> {
        let ov = self
            .frt
            .step(self.values[F_V].as_f64(), self.values[F_ID].as_f64(), h)
            .map_err(err)?;
        self.publish(ov);
        Ok(())
    }
}
