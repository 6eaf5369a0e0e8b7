//! Base network: the WSCC 3-machine 9-bus system with the bus 3 generator
//! replaced by the wind power plant.

use grid_rms::BusKind;

use crate::schema::{BranchSpec, BusSpec, MachineSpec, NetworkSection};

pub const BASE_MVA: f64 = 100.0;
pub const FREQUENCY_HZ: f64 = 60.0;
pub const PCC_BUS: u32 = 3;
pub const FAULT_BUS: u32 = 6;
pub const FAULT_START: f64 = 1.0;
pub const FAULT_DURATION: f64 = 0.18;
pub const WPP_MVA: f64 = 85.0;

fn bus(id: u32, kind: BusKind, base_kv: f64, v_set: f64, p_gen: f64, p_load: f64, q_load: f64) -> BusSpec {
    BusSpec { id, kind, base_kv, v_set, p_gen, p_load, q_load }
}

pub fn nine_bus() -> NetworkSection {
    use BusKind::*;
    let buses = vec![
        bus(1, Slack, 16.5, 1.04, 0.0, 0.0, 0.0),
        bus(2, Pv, 18.0, 1.025, 1.63, 0.0, 0.0),
        bus(3, Pq, 13.8, 1.0, 0.0, 0.0, 0.0),
        bus(4, Pq, 230.0, 1.0, 0.0, 0.0, 0.0),
        bus(5, Pq, 230.0, 1.0, 0.0, 1.25, 0.5),
        bus(6, Pq, 230.0, 1.0, 0.0, 0.9, 0.3),
        bus(7, Pq, 230.0, 1.0, 0.0, 0.0, 0.0),
        bus(8, Pq, 230.0, 1.0, 0.0, 1.0, 0.35),
        bus(9, Pq, 230.0, 1.0, 0.0, 0.0, 0.0),
    ];
    let branches = [
        (1, 4, 0.0, 0.0576, 0.0),
        (2, 7, 0.0, 0.0625, 0.0),
        (3, 9, 0.0, 0.0586, 0.0),
        (4, 5, 0.010, 0.085, 0.176),
        (4, 6, 0.017, 0.092, 0.158),
        (5, 7, 0.032, 0.161, 0.306),
        (6, 9, 0.039, 0.170, 0.358),
        (7, 8, 0.0085, 0.072, 0.149),
        (8, 9, 0.0119, 0.1008, 0.209),
    ]
    .into_iter()
    .map(|(from, to, r, x, b)| BranchSpec { from, to, r, x, b, tap: 1.0 })
    .collect();
    let machines = vec![
        MachineSpec { name: "G1".into(), bus: 1, h: 23.64, d: 2.0, xd_prime: 0.0608 },
        MachineSpec { name: "G2".into(), bus: 2, h: 6.4, d: 2.0, xd_prime: 0.1198 },
    ];
    NetworkSection {
        base_mva: BASE_MVA,
        frequency_hz: FREQUENCY_HZ,
        pcc_bus: PCC_BUS,
        pcc_branch: None,
        buses,
        branches,
        machines,
    }
}
