//! Turbine array layout and loss-equivalent collector lumping.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

/// Per-km cable data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CableParams {
    pub r_ohm_per_km: f64,
    pub x_ohm_per_km: f64,
    pub c_uf_per_km: f64,
    /// Frequency the capacitance is converted to susceptance at.
    pub frequency_hz: f64,
}

impl Default for CableParams {
    fn default() -> Self {
        Self {
            r_ohm_per_km: 0.10,
            x_ohm_per_km: 0.12,
            c_uf_per_km: 0.19,
            frequency_hz: 50.0,
        }
    }
}

/// Rectangular turbine array wired as radial feeders: each column is one
/// feeder of `rows` turbines, the first one `spacing_m` away from the
/// collector bus and each further one `spacing_m` beyond the previous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WppLayout {
    pub rows: usize,
    pub columns: usize,
    pub spacing_m: f64,
    pub cable: CableParams,
    pub collector_kv: f64,
    pub turbine_mva: f64,
}

impl Default for WppLayout {
    fn default() -> Self {
        Self {
            rows: 8,
            columns: 4,
            spacing_m: 700.0,
            cable: CableParams::default(),
            collector_kv: 33.0,
            turbine_mva: 85.0 / 32.0,
        }
    }
}

impl WppLayout {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::Layout(m.to_string()));
        if self.rows == 0 || self.columns == 0 {
            return bad("rows and columns must be positive");
        }
        let c = &self.cable;
        let positive = [self.spacing_m, self.collector_kv, self.turbine_mva, c.frequency_hz];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return bad("spacing, collector voltage, turbine rating and frequency must be positive");
        }
        if [c.r_ohm_per_km, c.x_ohm_per_km, c.c_uf_per_km].iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return bad("cable parameters must be finite and >= 0");
        }
        if c.r_ohm_per_km == 0.0 && c.x_ohm_per_km == 0.0 {
            return bad("cable impedance must be non-zero");
        }
        Ok(())
    }

    pub fn turbine_count(&self) -> usize {
        self.rows * self.columns
    }

    pub fn turbines_per_feeder(&self) -> usize {
        self.rows
    }

    pub fn feeders(&self) -> usize {
        self.columns
    }

    /// Series impedance and total charging susceptance of one segment, in pu
    /// on `base_mva` at the collector voltage.
    pub fn segment_pu(&self, base_mva: f64) -> (Complex64, f64) {
        let z_base = self.collector_kv * self.collector_kv / base_mva;
        let km = self.spacing_m / 1000.0;
        let c = &self.cable;
        let z = Complex64::new(c.r_ohm_per_km, c.x_ohm_per_km) * km / z_base;
        let b = 2.0 * std::f64::consts::PI * c.frequency_hz * c.c_uf_per_km * 1e-6 * km * z_base;
        (z, b)
    }

    /// Collector tree: edges `(upstream, downstream, Z)` with node 0 as the
    /// collector bus and turbine `t` (0-based) as node `t + 1`, ordered
    /// feeder by feeder from the collector outward.
    pub fn tree(&self, base_mva: f64) -> (Vec<(usize, usize, Complex64)>, Vec<usize>) {
        let (z, _) = self.segment_pu(base_mva);
        let mut edges = Vec::with_capacity(self.turbine_count());
        for f in 0..self.feeders() {
            for k in 0..self.rows {
                let node = f * self.rows + k + 1;
                let up = if k == 0 { 0 } else { node - 1 };
                edges.push((up, node, z));
            }
        }
        (edges, (1..=self.turbine_count()).collect())
    }
}

/// Loss-equivalent impedance of a radial collector tree rooted at `root`
/// with one unit current injected at each turbine node: every edge carrying
/// `m` turbines' current contributes `m² Z`, and the sum is divided by `N²`.
/// Parallel feeders therefore combine like parallel impedances.
pub fn equivalent_impedance(
    root: usize,
    edges: &[(usize, usize, Complex64)],
    turbines: &[usize],
) -> Result<Complex64, ScenarioError> {
    if turbines.is_empty() {
        return Err(ScenarioError::Layout("no turbines".into()));
    }
    let mut adj: HashMap<usize, Vec<(usize, Complex64)>> = HashMap::new();
    for &(a, b, z) in edges {
        if a == b {
            return Err(ScenarioError::Layout(format!("self-loop at node {a}")));
        }
        adj.entry(a).or_default().push((b, z));
        adj.entry(b).or_default().push((a, z));
    }
    let nodes: HashSet<usize> = adj.keys().copied().chain([root]).collect();
    if edges.len() + 1 != nodes.len() {
        return Err(ScenarioError::Layout(format!(
            "{} edges over {} nodes is not a tree",
            edges.len(),
            nodes.len()
        )));
    }

    // Depth-first order from the root; a tree with |E| = |V| - 1 that reaches
    // every node has no cycle.
    let mut parent: HashMap<usize, (usize, Complex64)> = HashMap::new();
    let mut order = vec![root];
    let mut seen = HashSet::from([root]);
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        for &(m, z) in adj.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(m) {
                parent.insert(m, (n, z));
                order.push(m);
                stack.push(m);
            }
        }
    }
    if seen.len() != nodes.len() {
        return Err(ScenarioError::Layout("collector topology is not connected".into()));
    }
    let mut downstream: HashMap<usize, f64> = HashMap::new();
    for &t in turbines {
        if !seen.contains(&t) {
            return Err(ScenarioError::Layout(format!("turbine node {t} is not on the collector")));
        }
        *downstream.entry(t).or_default() += 1.0;
    }
    let n = turbines.len() as f64;
    let mut z_eq = Complex64::new(0.0, 0.0);
    for &node in order.iter().rev() {
        if let Some(&(up, z)) = parent.get(&node) {
            let m = downstream.get(&node).copied().unwrap_or(0.0);
            z_eq += z * (m * m);
            *downstream.entry(up).or_default() += m;
        }
    }
    Ok(z_eq / (n * n))
}

/// Loss-equivalent series impedance of the whole array (pu on `base_mva`).
pub fn equivalence_collector(layout: &WppLayout, base_mva: f64) -> Result<Complex64, ScenarioError> {
    layout.validate()?;
    let (edges, turbines) = layout.tree(base_mva);
    equivalent_impedance(0, &edges, &turbines)
}
