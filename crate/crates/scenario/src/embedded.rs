//! Converter and FRT logic packaged to run inside the grid component.

use cosim::{ComponentError, Kind, Value};
use grid_rms::{EmbeddedController, Measurement};
use wtg_control::{Converter, ConverterParams, FrtParams, FrtSupervisor, Measurements, TransitionCounts};

pub struct EmbeddedWtg {
    names: [String; 3],
    conv: Converter,
    frt: FrtSupervisor,
    mode: i64,
}

fn err(e: wtg_control::ControlError) -> ComponentError {
    ComponentError::new(e.to_string())
}

fn meas(m: &Measurement) -> Measurements {
    Measurements { v_mag: m.v_mag, p: m.p, q: m.q }
}

impl EmbeddedWtg {
    pub fn new(unit: &str, conv: ConverterParams, frt: FrtParams) -> Result<Self, wtg_control::ControlError> {
        Ok(Self {
            names: [
                format!("{unit}.i_d_cmd"),
                format!("{unit}.i_q_cmd"),
                format!("{unit}.frt_mode"),
            ],
            conv: Converter::new(conv)?,
            frt: FrtSupervisor::new(frt)?,
            mode: 0,
        })
    }

    pub fn converter(&self) -> &Converter {
        &self.conv
    }

    pub fn transitions(&self) -> &TransitionCounts {
        self.frt.transitions()
    }
}

impl EmbeddedController for EmbeddedWtg {
    fn nominal_currents(&self) -> (f64, f64) {
        self.conv.params().nominal_currents()
    }

    fn settle(&mut self, m: &Measurement) -> Result<(f64, f64), ComponentError> {
        let cmd = self.conv.settle(&meas(m)).map_err(err)?;
        self.mode = self.frt.settle(cmd.0).mode.code();
        Ok(cmd)
    }

    /// Supervisor first, on the command the converter last issued, then the
    /// converter with the fresh overrides.
    fn step(&mut self, m: &Measurement, dt: f64) -> Result<(f64, f64), ComponentError> {
        let (i_d, _) = self.conv.commands();
        let ov = self.frt.step(m.v_mag, i_d, dt).map_err(err)?;
        self.mode = ov.mode.code();
        self.conv.step(&meas(m), &ov, dt).map_err(err)
    }

    fn output_decls(&self) -> Vec<(String, Kind)> {
        vec![
            (self.names[0].clone(), Kind::Real),
            (self.names[1].clone(), Kind::Real),
            (self.names[2].clone(), Kind::Integer),
        ]
    }

    fn output(&self, index: usize) -> Value {
        let (i_d, i_q) = self.conv.commands();
        match index {
            0 => Value::Real(i_d),
            1 => Value::Real(i_q),
            _ => Value::Integer(self.mode),
        }
    }
}
