#![allow(dead_code)]

use grid_rms::{Branch, Bus, Network, StaticGenerator, SynchronousMachine};
use num_complex::Complex64;

/// WSCC 3-machine 9-bus data with the bus 3 generator replaced by a single
/// 85 MVA static generator (bus 3 becomes PQ).
pub fn nine_bus() -> Network {
    let mut n = Network::new(100.0, 60.0);
    n.buses.push(Bus { base_kv: 16.5, ..Bus::slack(1, 1.04) });
    n.buses.push(Bus { base_kv: 18.0, ..Bus::pv(2, 1.025, 1.63) });
    n.buses.push(Bus { base_kv: 13.8, ..Bus::pq(3, 0.0, 0.0) });
    n.buses.push(Bus { base_kv: 230.0, ..Bus::pq(4, 0.0, 0.0) });
    n.buses.push(Bus { base_kv: 230.0, ..Bus::pq(5, 1.25, 0.5) });
    n.buses.push(Bus { base_kv: 230.0, ..Bus::pq(6, 0.9, 0.3) });
    n.buses.push(Bus { base_kv: 230.0, ..Bus::pq(7, 0.0, 0.0) });
    n.buses.push(Bus { base_kv: 230.0, ..Bus::pq(8, 1.0, 0.35) });
    n.buses.push(Bus { base_kv: 230.0, ..Bus::pq(9, 0.0, 0.0) });
    for (f, t, r, x, b) in [
        (1, 4, 0.0, 0.0576, 0.0),
        (2, 7, 0.0, 0.0625, 0.0),
        (3, 9, 0.0, 0.0586, 0.0),
        (4, 5, 0.010, 0.085, 0.176),
        (4, 6, 0.017, 0.092, 0.158),
        (5, 7, 0.032, 0.161, 0.306),
        (6, 9, 0.039, 0.170, 0.358),
        (7, 8, 0.0085, 0.072, 0.149),
        (8, 9, 0.0119, 0.1008, 0.209),
    ] {
        n.branches.push(Branch::line(f, t, r, x, b));
    }
    n.machines.push(SynchronousMachine::new("G1", 1, 23.64, 2.0, 0.0608));
    n.machines.push(SynchronousMachine::new("G2", 2, 6.4, 2.0, 0.1198));
    n.static_generators.push(StaticGenerator::new("wpp", 3, 85.0));
    n
}

/// Static generator at 1 pu active current (85 MW), no reactive current.
pub fn wpp_injection() -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0)]
}

/// Single machine against a stiff source: bus 1 holds an infinite-inertia
/// machine behind `x_inf`, bus 2 a machine delivering `p`.
pub fn smib(p: f64, h: f64, x_gen: f64, x_line: f64, x_inf: f64) -> Network {
    let mut n = Network::new(100.0, 60.0);
    n.buses.push(Bus::slack(1, 1.0));
    n.buses.push(Bus::pv(2, 1.0, p));
    n.branches.push(Branch::line(1, 2, 0.0, x_line, 0.0));
    n.machines
        .push(SynchronousMachine::new("inf", 1, f64::INFINITY, 0.0, x_inf));
    n.machines.push(SynchronousMachine::new("gen", 2, h, 0.0, x_gen));
    n
}

/// Naive dense Ybus: every branch stamped with the textbook pi/transformer
/// formulas into a full matrix.
pub fn dense_ybus(n: &Network) -> Vec<Vec<Complex64>> {
    let size = n.buses.len();
    let pos = |id: u32| n.buses.iter().position(|b| b.id == id).unwrap();
    let mut y = vec![vec![Complex64::new(0.0, 0.0); size]; size];
    for br in &n.branches {
        let (f, t) = (pos(br.from), pos(br.to));
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
        let half = Complex64::new(0.0, br.b / 2.0);
        let a = br.tap;
        y[f][f] += (ys + half) / (a * a);
        y[t][t] += ys + half;
        y[f][t] -= ys / a;
        y[t][f] -= ys / a;
    }
    y
}

/// Gaussian elimination with partial pivoting on a dense complex system.
pub fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
            let v = b[c];
            b[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}
