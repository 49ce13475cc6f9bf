// SPDX-License-Identifier: Apache-2.0

//! Directed graphs in compressed sparse row layout and their symmetrizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An unweighted directed graph. `A(u, v) = 1` iff `v` is an out-neighbor of `u`.
///
/// Rows are sorted and deduplicated. Self-loops are kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl DirectedGraph {
    /// Builds a graph from `(src, dst)` pairs. Duplicate pairs collapse to one edge.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            if u >= n {
                return Err(Error::IndexOutOfRange { index: u, n });
            }
            if v >= n {
                return Err(Error::IndexOutOfRange { index: v, n });
            }
            pairs.push((u, v));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut row_ptr = vec![0usize; n + 1];
        for &(u, _) in &pairs {
            row_ptr[u + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = pairs.into_iter().map(|(_, v)| v).collect();
        Ok(DirectedGraph { n, row_ptr, col_idx })
    }

    pub fn empty(n: usize) -> Self {
        DirectedGraph {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.col_idx.len()
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out_neighbors(u).binary_search(&v).is_ok()
    }

    /// `A(u, v)` as 0.0 or 1.0.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        if self.has_edge(u, v) {
            1.0
        } else {
            0.0
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn self_loop_count(&self) -> usize {
        (0..self.n).filter(|&u| self.has_edge(u, u)).count()
    }

    /// True when every edge has its reverse, i.e. the input is undirected.
    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(u, v)| self.has_edge(v, u))
    }

    pub fn transpose(&self) -> DirectedGraph {
        DirectedGraph::from_edges(self.n, self.edges().map(|(u, v)| (v, u)))
            .expect("transpose keeps indices in range")
    }

    /// Row-major dense 0/1 adjacency.
    pub fn dense_adjacency(&self) -> ndarray::Array2<f64> {
        let mut a = ndarray::Array2::zeros((self.n, self.n));
        for (u, v) in self.edges() {
            a[(u, v)] = 1.0;
        }
        a
    }
}

/// How `A_s` is formed from `A`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetrization {
    /// `A_s = (A + Aᵀ) / 2`
    #[default]
    HalfSum,
    /// `A_s(u, v) = max(A(u, v), A(v, u))`
    Max,
}

/// Symmetric real weighted adjacency `A_s` with its degree vector `D_s`.
#[derive(Clone, Debug)]
pub struct SymmetrizedGraph {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    convention: Symmetrization,
}

impl SymmetrizedGraph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn convention(&self) -> Symmetrization {
        self.convention
    }

    /// Number of stored entries of `A_s`, diagonal included.
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// `(neighbor, weight)` pairs of row `u`, sorted by neighbor. May include `u` itself.
    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[u]..self.row_ptr[u + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    /// Neighbors of `u` excluding `u` itself.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(u).map(|(v, _)| v).filter(move |&v| v != u)
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        let r = self.row_ptr[u]..self.row_ptr[u + 1];
        match self.col_idx[r.clone()].binary_search(&v) {
            Ok(i) => self.weights[r.start + i],
            Err(_) => 0.0,
        }
    }

    /// Diagonal of `D_s`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.degrees.iter().sum::<f64>() / self.n as f64
    }

    pub fn dense(&self) -> ndarray::Array2<f64> {
        let mut a = ndarray::Array2::zeros((self.n, self.n));
        for u in 0..self.n {
            for (v, w) in self.row(u) {
                a[(u, v)] = w;
            }
        }
        a
    }
}

/// Forms `A_s` and `D_s` under the chosen convention.
pub fn symmetrize(g: &DirectedGraph, convention: Symmetrization) -> SymmetrizedGraph {
    let n = g.node_count();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * g.edge_count());
    for (u, v) in g.edges() {
        match convention {
            Symmetrization::HalfSum => {
                triplets.push((u, v, 0.5));
                triplets.push((v, u, 0.5));
            }
            Symmetrization::Max => {
                triplets.push((u, v, 1.0));
                triplets.push((v, u, 1.0));
            }
        }
    }
    triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

    let mut row_ptr = vec![0usize; n + 1];
    let mut col_idx = Vec::with_capacity(triplets.len());
    let mut weights: Vec<f64> = Vec::with_capacity(triplets.len());
    let mut last: Option<(usize, usize)> = None;
    for (u, v, w) in triplets {
        if last == Some((u, v)) {
            let slot = weights.last_mut().expect("entry pushed for previous key");
            match convention {
                Symmetrization::HalfSum => *slot += w,
                Symmetrization::Max => *slot = slot.max(w),
            }
        } else {
            row_ptr[u + 1] += 1;
            col_idx.push(v);
            weights.push(w);
            last = Some((u, v));
        }
    }
    for i in 0..n {
        row_ptr[i + 1] += row_ptr[i];
    }
    let degrees = (0..n)
        .map(|u| weights[row_ptr[u]..row_ptr[u + 1]].iter().sum())
        .collect();

    SymmetrizedGraph {
        n,
        row_ptr,
        col_idx,
        weights,
        degrees,
        convention,
    }
}
