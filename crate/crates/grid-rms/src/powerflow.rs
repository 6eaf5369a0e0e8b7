//! Newton-Raphson power flow on the polar mismatch equations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::GridError;
use crate::network::{BusKind, Network};
use crate::ybus::{assemble_ybus, SparseMatrix};

/// Extra power injected at a bus (system-base pu), e.g. by a static generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusInjection {
    pub bus: u32,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PowerFlowOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowSolution {
    pub voltages: Vec<Complex64>,
    pub iterations: usize,
    pub max_mismatch: f64,
    /// Net complex power injected into the network at each bus.
    pub injections: Vec<Complex64>,
}

pub fn power_flow(
    network: &Network,
    injections: &[BusInjection],
) -> Result<PowerFlowSolution, GridError> {
    power_flow_with(network, injections, PowerFlowOptions::default())
}

pub fn power_flow_with(
    network: &Network,
    injections: &[BusInjection],
    opts: PowerFlowOptions,
) -> Result<PowerFlowSolution, GridError> {
    let ybus = assemble_ybus(network)?;
    let index = network.bus_index();
    let n = network.buses.len();

    let mut s_spec = vec![Complex64::new(0.0, 0.0); n];
    for (i, b) in network.buses.iter().enumerate() {
        s_spec[i] = Complex64::new(-b.p_load, -b.q_load);
        if b.kind == BusKind::Pv {
            s_spec[i].re += b.p_gen;
        }
    }
    for inj in injections {
        let i = *index.get(&inj.bus).ok_or(GridError::UnknownBus(inj.bus))?;
        s_spec[i] += Complex64::new(inj.p, inj.q);
    }

    let pv_pq: Vec<usize> = (0..n)
        .filter(|&i| network.buses[i].kind != BusKind::Slack)
        .collect();
    let pq: Vec<usize> = (0..n)
        .filter(|&i| network.buses[i].kind == BusKind::Pq)
        .collect();

    let mut vm: Vec<f64> = network
        .buses
        .iter()
        .map(|b| if b.kind == BusKind::Pq { 1.0 } else { b.v_set })
        .collect();
    let mut va = vec![0.0; n];

    let compose = |vm: &[f64], va: &[f64]| -> Vec<Complex64> {
        vm.iter()
            .zip(va)
            .map(|(&m, &a)| Complex64::from_polar(m, a))
            .collect()
    };

    let mismatch = |v: &[Complex64]| -> (Vec<Complex64>, DVector<f64>) {
        let s_calc = calc_injections(&ybus, v);
        let mut f = DVector::zeros(pv_pq.len() + pq.len());
        for (k, &i) in pv_pq.iter().enumerate() {
            f[k] = s_spec[i].re - s_calc[i].re;
        }
        for (k, &i) in pq.iter().enumerate() {
            f[pv_pq.len() + k] = s_spec[i].im - s_calc[i].im;
        }
        (s_calc, f)
    };

    let mut v = compose(&vm, &va);
    let (mut s_calc, mut f) = mismatch(&v);
    let mut norm = f.amax();
    let mut iterations = 0;
    while norm >= opts.tolerance {
        if iterations >= opts.max_iterations || !norm.is_finite() {
            return Err(GridError::Divergence {
                iterations,
                mismatch: norm,
            });
        }
        iterations += 1;
        let jac = jacobian(&ybus, &v, &pv_pq, &pq);
        let dx = jac
            .lu()
            .solve(&f)
            .ok_or(GridError::SingularJacobian(iterations))?;
        for (k, &i) in pv_pq.iter().enumerate() {
            va[i] += dx[k];
        }
        for (k, &i) in pq.iter().enumerate() {
            vm[i] += dx[pv_pq.len() + k];
        }
        v = compose(&vm, &va);
        (s_calc, f) = mismatch(&v);
        norm = f.amax();
    }
    Ok(PowerFlowSolution {
        voltages: v,
        iterations,
        max_mismatch: norm,
        injections: s_calc,
    })
}

/// `S_i = V_i conj((Y V)_i)`.
pub fn calc_injections(ybus: &SparseMatrix, v: &[Complex64]) -> Vec<Complex64> {
    ybus.mul_vec(v)
        .iter()
        .zip(v)
        .map(|(i, v)| v * i.conj())
        .collect()
}

/// Polar Jacobian of the injections with respect to (angle of pv/pq buses,
/// magnitude of pq buses).
fn jacobian(ybus: &SparseMatrix, v: &[Complex64], pv_pq: &[usize], pq: &[usize]) -> DMatrix<f64> {
    let n = v.len();
    let ibus = ybus.mul_vec(v);
    let vn: Vec<Complex64> = v.iter().map(|x| x / x.norm()).collect();
    let j = Complex64::new(0.0, 1.0);
    // Dense partials; networks here are small.
    let mut ds_dva = DMatrix::<Complex64>::zeros(n, n);
    let mut ds_dvm = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for (k, y) in ybus.row(i) {
            ds_dva[(i, k)] = j * v[i] * (-(y * v[k])).conj();
            ds_dvm[(i, k)] = v[i] * (y * vn[k]).conj();
        }
        ds_dva[(i, i)] += j * v[i] * ibus[i].conj();
        ds_dvm[(i, i)] += ibus[i].conj() * vn[i];
    }
    let (a, b) = (pv_pq.len(), pq.len());
    let mut jac = DMatrix::zeros(a + b, a + b);
    for (r, &i) in pv_pq.iter().enumerate() {
        for (c, &k) in pv_pq.iter().enumerate() {
            jac[(r, c)] = ds_dva[(i, k)].re;
        }
        for (c, &k) in pq.iter().enumerate() {
            jac[(r, a + c)] = ds_dvm[(i, k)].re;
        }
    }
    for (r, &i) in pq.iter().enumerate() {
        for (c, &k) in pv_pq.iter().enumerate() {
            jac[(a + r, c)] = ds_dva[(i, k)].im;
        }
        for (c, &k) in pq.iter().enumerate() {
            jac[(a + r, a + c)] = ds_dvm[(i, k)].im;
        }
    }
    jac
}
