mod common;

use common::{dense_ybus, nine_bus};
use grid_rms::{
    assemble_ybus, power_flow, Branch, Bus, BusInjection, BusKind, GridError, Network,
};
use num_complex::Complex64;

#[test]
fn nine_bus_ybus_matches_dense_stamp() {
    let net = nine_bus();
    let y = assemble_ybus(&net).unwrap();
    let oracle = dense_ybus(&net);
    for (i, row) in oracle.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((y.get(i, j) - v).norm() < 1e-12, "entry ({i},{j})");
        }
    }
    // Structurally symmetric, and symmetric in value without phase shifters.
    let d = y.to_dense();
    assert_eq!(d, d.transpose());
}

#[test]
fn tap_changer_stamp_matches_dense_stamp() {
    let mut net = nine_bus();
    net.branches[0].tap = 1.05;
    let y = assemble_ybus(&net).unwrap();
    let oracle = dense_ybus(&net);
    for (i, row) in oracle.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((y.get(i, j) - v).norm() < 1e-12);
        }
    }
}

#[test]
fn assembly_rejects_isolated_bus_and_zero_impedance() {
    let mut net = nine_bus();
    net.buses.push(Bus::pq(10, 0.0, 0.0));
    assert_eq!(assemble_ybus(&net), Err(GridError::IsolatedBus(10)));

    let mut net = nine_bus();
    net.branches.push(Branch::line(4, 5, 0.0, 0.0, 0.0));
    assert!(matches!(
        assemble_ybus(&net),
        Err(GridError::ZeroImpedance { from: 4, to: 5 })
    ));
}

/// Plain Gauss-Seidel on the same bus data, iterated far past the NR
/// tolerance.
fn gauss_seidel(net: &Network, inj: &[BusInjection]) -> Vec<Complex64> {
    let y = dense_ybus(net);
    let n = net.buses.len();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for (i, b) in net.buses.iter().enumerate() {
        p[i] = -b.p_load + if b.kind == BusKind::Pv { b.p_gen } else { 0.0 };
        q[i] = -b.q_load;
        for s in inj.iter().filter(|s| s.bus == b.id) {
            p[i] += s.p;
            q[i] += s.q;
        }
    }
    let mut v: Vec<Complex64> = net
        .buses
        .iter()
        .map(|b| Complex64::new(if b.kind == BusKind::Pq { 1.0 } else { b.v_set }, 0.0))
        .collect();
    for _ in 0..100_000 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let kind = net.buses[i].kind;
            if kind == BusKind::Slack {
                continue;
            }
            let sum_all: Complex64 = (0..n).map(|k| y[i][k] * v[k]).sum();
            if kind == BusKind::Pv {
                q[i] = (v[i] * sum_all.conj()).im;
            }
            let others = sum_all - y[i][i] * v[i];
            let mut new = (Complex64::new(p[i], -q[i]) / v[i].conj() - others) / y[i][i];
            if kind == BusKind::Pv {
                new = new / new.norm() * net.buses[i].v_set;
            }
            change = change.max((new - v[i]).norm());
            v[i] = new;
        }
        if change < 1e-14 {
            return v;
        }
    }
    panic!("Gauss-Seidel oracle did not converge");
}

#[test]
fn nine_bus_with_wpp_matches_gauss_seidel() {
    let net = nine_bus();
    let inj = [BusInjection { bus: 3, p: 0.85, q: 0.0 }];
    let sol = power_flow(&net, &inj).unwrap();
    assert!(sol.iterations <= 10, "{} iterations", sol.iterations);
    assert!(sol.max_mismatch < 1e-8);
    let oracle = gauss_seidel(&net, &inj);
    for (a, b) in sol.voltages.iter().zip(&oracle) {
        assert!((a - b).norm() < 1e-6, "{a} vs {b}");
    }
    // 85 MW at the PCC is 0.85 pu on the 100 MVA base.
    assert!((sol.injections[2].re - 0.85).abs() < 1e-8);
    assert!(sol.injections[2].im.abs() < 1e-8);
}

#[test]
fn unmodified_wscc_case_reproduces_published_profile() {
    // Original case: bus 3 is a PV generator at 0.85 pu, 1.025 pu.
    let mut net = nine_bus();
    net.buses[2] = Bus::pv(3, 1.025, 0.85);
    net.static_generators.clear();
    let sol = power_flow(&net, &[]).unwrap();
    let published = [
        (4, 1.0258, -2.2168),
        (5, 0.9956, -3.9888),
        (6, 1.0127, -3.6874),
        (7, 1.0258, 3.7197),
        (8, 1.0159, 0.7275),
        (9, 1.0324, 1.9667),
    ];
    for (bus, vm, deg) in published {
        let v = sol.voltages[bus - 1];
        assert!((v.norm() - vm).abs() < 1e-3, "bus {bus}: {}", v.norm());
        assert!((v.arg().to_degrees() - deg).abs() < 0.02, "bus {bus}: {}", v.arg().to_degrees());
    }
}

#[test]
fn power_flow_reports_unknown_injection_bus() {
    let err = power_flow(&nine_bus(), &[BusInjection { bus: 42, p: 1.0, q: 0.0 }]).unwrap_err();
    assert_eq!(err, GridError::UnknownBus(42));
}
