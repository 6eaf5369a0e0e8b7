//! RMS dynamic simulation: partitioned network solve plus RK4 swing
//! integration.

use nalgebra::{DVector, Dyn, LU};
use num_complex::Complex64;

use crate::error::GridError;
use crate::network::{FaultEvent, Network};
use crate::powerflow::{power_flow, BusInjection, PowerFlowSolution};
use crate::ybus::{assemble_ybus, SparseMatrix};

const FRAME_TOL: f64 = 1e-13;
const FRAME_MAX_ITER: usize = 100;
/// Speed deviations beyond this (pu) can only come from a blown-up integration.
const SPEED_LIMIT: f64 = 1e3;

/// Terminal quantities of a static generator, powers on its machine base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terminal {
    pub voltage: Complex64,
    pub p: f64,
    pub q: f64,
}

/// Active-power bookkeeping of one network solution (system-base pu).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerBalance {
    pub generation: f64,
    pub load: f64,
    pub losses: f64,
    pub fault: f64,
}

impl PowerBalance {
    pub fn residual(&self) -> f64 {
        self.generation - self.load - self.losses - self.fault
    }
}

/// Dynamic state of a network: machine rotor states, constant-impedance
/// loads, static generator commands and scheduled faults.
pub struct GridSimulator {
    network: Network,
    ybus: SparseMatrix,
    load_y: Vec<Complex64>,
    machine_bus: Vec<usize>,
    sg_bus: Vec<usize>,
    faults: Vec<FaultEvent>,
    fault_bus: Vec<usize>,
    active: Vec<bool>,
    y_aug: SparseMatrix,
    lu: LU<Complex64, Dyn, Dyn>,
    voltages: Vec<Complex64>,
    sg_theta: Vec<f64>,
    frame_holds: usize,
    time: f64,
}

impl GridSimulator {
    /// Runs the power flow with the given static generator injections and
    /// builds the dynamic state at that operating point.
    ///
    /// `injections[k]` is the complex power (machine-base pu) of static
    /// generator `k`; disconnected generators are ignored.
    pub fn initialize(
        mut network: Network,
        injections: &[Complex64],
        faults: Vec<FaultEvent>,
    ) -> Result<(Self, PowerFlowSolution), GridError> {
        assert_eq!(injections.len(), network.static_generators.len());
        let ybus = assemble_ybus(&network)?;
        let index = network.bus_index();
        let base = network.base_mva;
        let pf_inj: Vec<BusInjection> = network
            .static_generators
            .iter()
            .zip(injections)
            .filter(|(sg, _)| sg.connected)
            .map(|(sg, s)| BusInjection {
                bus: sg.bus,
                p: s.re * sg.mva_base / base,
                q: s.im * sg.mva_base / base,
            })
            .collect();
        let pf = power_flow(&network, &pf_inj)?;
        let v = &pf.voltages;
        for (b, vb) in network.buses.iter_mut().zip(v) {
            b.voltage = *vb;
        }

        let n = network.buses.len();
        let load_y: Vec<Complex64> = network
            .buses
            .iter()
            .zip(v)
            .map(|(b, vb)| Complex64::new(b.p_load, -b.q_load) / vb.norm_sqr())
            .collect();

        let sg_bus: Vec<usize> = network
            .static_generators
            .iter()
            .map(|sg| index[&sg.bus])
            .collect();
        let mut sg_s = vec![Complex64::new(0.0, 0.0); n];
        for ((sg, s), &i) in network.static_generators.iter_mut().zip(injections).zip(&sg_bus) {
            let vm = v[i].norm();
            sg.i_d = s.re / vm;
            sg.i_q = s.im / vm;
            if sg.connected {
                sg_s[i] += s * sg.mva_base / base;
            }
        }

        let machine_bus: Vec<usize> = network.machines.iter().map(|m| index[&m.bus]).collect();
        for (m, &i) in network.machines.iter_mut().zip(&machine_bus) {
            // Machine supplies the bus injection plus local load minus any
            // static generation at the same bus.
            let load = Complex64::new(network.buses[i].p_load, network.buses[i].q_load);
            let s_gen = pf.injections[i] + load - sg_s[i];
            let i_gen = (s_gen / v[i]).conj();
            let e = v[i] + Complex64::new(0.0, m.xd_prime) * i_gen;
            m.e_prime = e.norm();
            m.delta = e.arg();
            m.speed_dev = 0.0;
            m.p_mech = (e * i_gen.conj()).re;
        }

        let fault_bus = faults
            .iter()
            .map(|f| index.get(&f.bus).copied().ok_or(GridError::UnknownBus(f.bus)))
            .collect::<Result<Vec<_>, _>>()?;
        let active = vec![false; faults.len()];
        let sg_theta = sg_bus.iter().map(|&i| v[i].arg()).collect();

        let mut sim = Self {
            y_aug: ybus.clone(),
            lu: nalgebra::DMatrix::<Complex64>::identity(1, 1).lu(),
            ybus,
            load_y,
            machine_bus,
            sg_bus,
            faults,
            fault_bus,
            active,
            voltages: v.clone(),
            sg_theta,
            frame_holds: 0,
            time: 0.0,
            network,
        };
        sim.refactor()?;
        sim.apply_faults(0.0)?;
        let deltas = sim.deltas();
        sim.voltages = sim.solve_network(&deltas)?;
        // The power flow stops at a finite mismatch; balance the shafts
        // against the exact network solution so the start is stationary.
        sim.rebalance_mechanical_power();
        Ok((sim, pf))
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn voltages(&self) -> &[Complex64] {
        &self.voltages
    }

    pub fn ybus(&self) -> &SparseMatrix {
        &self.ybus
    }

    pub fn faults(&self) -> &[FaultEvent] {
        &self.faults
    }

    pub fn load_admittances(&self) -> &[Complex64] {
        &self.load_y
    }

    /// Nodal admittance matrix including the currently active fault shunts.
    /// Rebuilt from the pre-fault matrix, so clearing a fault restores it
    /// bit for bit.
    pub fn effective_ybus(&self) -> SparseMatrix {
        let shunts: Vec<(usize, Complex64)> = self
            .faults
            .iter()
            .zip(&self.fault_bus)
            .zip(&self.active)
            .filter(|(_, &a)| a)
            .map(|((f, &i), _)| (i, Complex64::new(f.admittance, 0.0)))
            .collect();
        if shunts.is_empty() {
            self.ybus.clone()
        } else {
            self.ybus.with_diagonal(&shunts)
        }
    }

    /// Ybus plus loads, machine Norton admittances and active faults.
    fn augmented(&self) -> SparseMatrix {
        let mut shunts: Vec<(usize, Complex64)> =
            self.load_y.iter().copied().enumerate().collect();
        for (m, &i) in self.network.machines.iter().zip(&self.machine_bus) {
            shunts.push((i, m.norton_admittance()));
        }
        for ((f, &i), &a) in self.faults.iter().zip(&self.fault_bus).zip(&self.active) {
            if a {
                shunts.push((i, Complex64::new(f.admittance, 0.0)));
            }
        }
        self.ybus.with_diagonal(&shunts)
    }

    fn refactor(&mut self) -> Result<(), GridError> {
        self.y_aug = self.augmented();
        let lu = self.y_aug.to_dense().lu();
        if !lu.is_invertible() {
            return Err(GridError::SingularNetwork);
        }
        self.lu = lu;
        Ok(())
    }

    /// Sets fault shunts according to time `now`. Returns whether the
    /// admittance matrix changed. Re-applying at the same instant is a no-op.
    pub fn apply_faults(&mut self, now: f64) -> Result<bool, GridError> {
        let next: Vec<bool> = self.faults.iter().map(|f| f.is_active(now)).collect();
        if next == self.active {
            return Ok(false);
        }
        self.active = next;
        self.refactor()?;
        Ok(true)
    }

    pub fn active_faults(&self) -> &[bool] {
        &self.active
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.network.machines.iter().map(|m| m.delta).collect()
    }

    /// Direct access to a machine, e.g. to perturb its rotor angle. Call
    /// [`GridSimulator::resolve`] afterwards.
    pub fn machine_mut(&mut self, j: usize) -> &mut crate::network::SynchronousMachine {
        &mut self.network.machines[j]
    }

    pub fn set_command(&mut self, k: usize, i_d: f64, i_q: f64) {
        let sg = &mut self.network.static_generators[k];
        sg.i_d = i_d;
        sg.i_q = i_q;
    }

    pub fn set_connected(&mut self, k: usize, connected: bool) {
        self.network.static_generators[k].connected = connected;
    }

    fn norton_currents(&self, deltas: &[f64]) -> Vec<Complex64> {
        let mut inj = vec![Complex64::new(0.0, 0.0); self.network.buses.len()];
        for ((m, &i), &d) in self.network.machines.iter().zip(&self.machine_bus).zip(deltas) {
            inj[i] += m.internal_emf(d) * m.norton_admittance();
        }
        inj
    }

    /// Solves `Y_aug V = I` for the given rotor angles. Static generator
    /// currents follow their terminal angle, found by fixed-point iteration.
    ///
    /// When a terminal voltage collapses (a fault electrically at the
    /// converter) the iteration has no fixed point. The generators then keep
    /// the last accepted frame angle, like a PLL holding its lock, and the
    /// event is counted in [`GridSimulator::frame_holds`].
    pub fn solve_network(&mut self, deltas: &[f64]) -> Result<Vec<Complex64>, GridError> {
        let base_inj = self.norton_currents(deltas);
        let mut theta = self.sg_theta.clone();
        for _ in 0..FRAME_MAX_ITER {
            let v = self.linear_solve(&base_inj, &theta)?;
            let mut residual: f64 = 0.0;
            for (th, &i) in theta.iter_mut().zip(&self.sg_bus) {
                if v[i].norm() > 1e-9 {
                    let new = v[i].arg();
                    residual = residual.max(wrap(new - *th).abs());
                    *th = new;
                }
            }
            if residual < FRAME_TOL {
                self.sg_theta = theta;
                return Ok(v);
            }
        }
        self.frame_holds += 1;
        let held = self.sg_theta.clone();
        self.linear_solve(&base_inj, &held)
    }

    fn linear_solve(&self, base_inj: &[Complex64], theta: &[f64]) -> Result<Vec<Complex64>, GridError> {
        let base = self.network.base_mva;
        let mut inj = base_inj.to_vec();
        for ((sg, &i), &th) in self.network.static_generators.iter().zip(&self.sg_bus).zip(theta) {
            inj[i] += sg.network_current(th, base);
        }
        let v = self
            .lu
            .solve(&DVector::from_vec(inj))
            .ok_or(GridError::SingularNetwork)?;
        if v.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(GridError::SingularNetwork);
        }
        Ok(v.iter().copied().collect())
    }

    /// Number of network solves that fell back to a held frame angle.
    pub fn frame_holds(&self) -> usize {
        self.frame_holds
    }

    /// Frame angle currently applied to static generator `k`.
    pub fn frame_angle(&self, k: usize) -> f64 {
        self.sg_theta[k]
    }

    /// Current injections at the given rotor angles and present frame angles.
    pub fn injections_for(&self, deltas: &[f64]) -> Vec<Complex64> {
        let mut inj = self.norton_currents(deltas);
        let base = self.network.base_mva;
        for ((sg, &i), &th) in self.network.static_generators.iter().zip(&self.sg_bus).zip(&self.sg_theta) {
            inj[i] += sg.network_current(th, base);
        }
        inj
    }

    /// `max_i |(Y_aug V - I)_i|` for the current solution.
    pub fn solve_residual(&self) -> f64 {
        let deltas = self.deltas();
        let yv = self.y_aug.mul_vec(&self.voltages);
        let inj = self.injections_for(&deltas);
        yv.iter()
            .zip(&inj)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn derivatives(&mut self, deltas: &[f64], speeds: &[f64]) -> Result<(Vec<f64>, Vec<f64>), GridError> {
        let v = self.solve_network(deltas)?;
        let ws = self.network.omega_s();
        let mut dd = Vec::with_capacity(deltas.len());
        let mut dw = Vec::with_capacity(deltas.len());
        for (((m, &i), &d), &w) in self
            .network
            .machines
            .iter()
            .zip(&self.machine_bus)
            .zip(deltas)
            .zip(speeds)
        {
            let pe = m.electrical_power(d, v[i]);
            dd.push(ws * w);
            dw.push((m.p_mech - pe - m.d * w) / (2.0 * m.h));
        }
        Ok((dd, dw))
    }

    /// Advances machine states from `t` to `t + dt` with classical RK4. The
    /// fault configuration at `t` holds over the whole step; the returned
    /// solution reflects the configuration at `t + dt`.
    pub fn integrate_step(&mut self, t: f64, dt: f64) -> Result<(), GridError> {
        assert!(dt > 0.0, "step must be positive");
        self.apply_faults(t)?;
        let d0 = self.deltas();
        let w0: Vec<f64> = self.network.machines.iter().map(|m| m.speed_dev).collect();
        let axpy = |x: &[f64], k: &[f64], a: f64| -> Vec<f64> {
            x.iter().zip(k).map(|(x, k)| x + a * k).collect()
        };
        let (k1d, k1w) = self.derivatives(&d0, &w0)?;
        let (k2d, k2w) = self.derivatives(&axpy(&d0, &k1d, dt / 2.0), &axpy(&w0, &k1w, dt / 2.0))?;
        let (k3d, k3w) = self.derivatives(&axpy(&d0, &k2d, dt / 2.0), &axpy(&w0, &k2w, dt / 2.0))?;
        let (k4d, k4w) = self.derivatives(&axpy(&d0, &k3d, dt), &axpy(&w0, &k3w, dt))?;
        for (j, m) in self.network.machines.iter_mut().enumerate() {
            m.delta = d0[j] + dt / 6.0 * (k1d[j] + 2.0 * k2d[j] + 2.0 * k3d[j] + k4d[j]);
            m.speed_dev = w0[j] + dt / 6.0 * (k1w[j] + 2.0 * k2w[j] + 2.0 * k3w[j] + k4w[j]);
            if !(m.delta.is_finite() && m.speed_dev.abs() < SPEED_LIMIT) {
                return Err(GridError::NumericalOverflow(t + dt));
            }
        }
        self.time = t + dt;
        self.apply_faults(self.time)?;
        let deltas = self.deltas();
        self.voltages = self.solve_network(&deltas)?;
        Ok(())
    }

    /// Re-solves the network at the present state (e.g. after new commands).
    pub fn resolve(&mut self) -> Result<(), GridError> {
        let deltas = self.deltas();
        self.voltages = self.solve_network(&deltas)?;
        Ok(())
    }

    /// Sets every machine's mechanical power to its present electrical power.
    pub fn rebalance_mechanical_power(&mut self) {
        for (m, &i) in self.network.machines.iter_mut().zip(&self.machine_bus) {
            m.p_mech = m.electrical_power(m.delta, self.voltages[i]);
        }
    }

    pub fn terminal(&self, k: usize) -> Terminal {
        let sg = &self.network.static_generators[k];
        let v = self.voltages[self.sg_bus[k]];
        let s = v * sg.network_current(self.sg_theta[k], self.network.base_mva).conj()
            * (self.network.base_mva / sg.mva_base);
        Terminal {
            voltage: v,
            p: s.re,
            q: s.im,
        }
    }

    /// Complex power flowing out of the branch into bus `into` (system base).
    pub fn branch_power_into(&self, branch: usize, into: u32) -> Complex64 {
        let br = &self.network.branches[branch];
        let idx = |id| self.network.index_of(id).expect("validated");
        let (f, t) = (idx(br.from), idx(br.to));
        let (yff, yft, ytf, ytt) = br.two_port();
        let (vf, vt) = (self.voltages[f], self.voltages[t]);
        if into == br.to {
            -(vt * (ytf * vf + ytt * vt).conj())
        } else {
            -(vf * (yff * vf + yft * vt).conj())
        }
    }

    pub fn branch_losses(&self) -> Vec<f64> {
        let index = self.network.bus_index();
        self.network
            .branches
            .iter()
            .map(|br| {
                let (f, t) = (index[&br.from], index[&br.to]);
                let (yff, yft, ytf, ytt) = br.two_port();
                let (vf, vt) = (self.voltages[f], self.voltages[t]);
                let sf = vf * (yff * vf + yft * vt).conj();
                let st = vt * (ytf * vf + ytt * vt).conj();
                (sf + st).re
            })
            .collect()
    }

    pub fn power_balance(&self) -> PowerBalance {
        let v = &self.voltages;
        let mut pb = PowerBalance::default();
        for (m, &i) in self.network.machines.iter().zip(&self.machine_bus) {
            pb.generation += (v[i] * m.current(m.delta, v[i]).conj()).re;
        }
        for (k, &i) in self.sg_bus.iter().enumerate() {
            let sg = &self.network.static_generators[k];
            pb.generation += (v[i] * sg.network_current(self.sg_theta[k], self.network.base_mva).conj()).re;
        }
        pb.load = self
            .load_y
            .iter()
            .zip(v)
            .map(|(y, v)| y.re * v.norm_sqr())
            .sum();
        pb.losses = self.branch_losses().iter().sum();
        for ((f, &i), &a) in self.faults.iter().zip(&self.fault_bus).zip(&self.active) {
            if a {
                pb.fault += f.admittance * v[i].norm_sqr();
            }
        }
        pb
    }

    pub fn bus_voltage(&self, id: u32) -> Result<Complex64, GridError> {
        Ok(self.voltages[self.network.index_of(id)?])
    }
}

fn wrap(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}
