//! Sparse nodal admittance matrix.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::GridError;
use crate::network::Network;

/// Compressed sparse row matrix of complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseMatrix {
    /// Builds an `n x n` matrix, summing duplicate entries in input order.
    pub fn from_triplets(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Self {
        let mut rows: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in triplets {
            *rows[i].entry(j).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Copy with `y` added on the given diagonal positions.
    pub fn with_diagonal(&self, shunts: &[(usize, Complex64)]) -> Self {
        let mut triplets: Vec<(usize, usize, Complex64)> = (0..self.n)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect();
        triplets.extend(shunts.iter().map(|&(i, y)| (i, i, y)));
        Self::from_triplets(self.n, triplets)
    }
}

/// Stamps every branch into the nodal admittance matrix. Bus order follows
/// `network.buses`.
pub fn assemble_ybus(network: &Network) -> Result<SparseMatrix, GridError> {
    network.validate()?;
    let index = network.bus_index();
    let n = network.buses.len();
    let mut triplets = Vec::with_capacity(4 * network.branches.len() + n);
    for i in 0..n {
        triplets.push((i, i, Complex64::new(0.0, 0.0)));
    }
    for br in &network.branches {
        let (f, t) = (index[&br.from], index[&br.to]);
        let (yff, yft, ytf, ytt) = br.two_port();
        triplets.push((f, f, yff));
        triplets.push((f, t, yft));
        triplets.push((t, f, ytf));
        triplets.push((t, t, ytt));
    }
    Ok(SparseMatrix::from_triplets(n, triplets))
}
