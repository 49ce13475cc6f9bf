// SPDX-License-Identifier: Apache-2.0

//! Small graph generators for tests, examples and synthetic benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::DirectedGraph;

/// Directed Erdős–Rényi graph: each ordered pair `u ≠ v` is an edge with probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    DirectedGraph::from_edges(n, edges).expect("indices < n")
}

/// Like [`erdos_renyi`], but every node that ends up isolated gets one edge to
/// or from a random other node, so all symmetrized degrees are positive (n ≥ 2).
pub fn erdos_renyi_no_isolated(n: usize, p: f64, seed: u64) -> DirectedGraph {
    let g = erdos_renyi(n, p, seed);
    if n < 2 {
        return g;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let t = g.transpose();
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    for u in 0..n {
        if g.out_neighbors(u).is_empty() && t.out_neighbors(u).is_empty() {
            let mut v = rng.random_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            if rng.random::<bool>() {
                edges.push((u, v));
            } else {
                edges.push((v, u));
            }
        }
    }
    DirectedGraph::from_edges(n, edges).expect("indices < n")
}

/// `0 → 1 → … → n−1 → 0`.
pub fn directed_cycle(n: usize) -> DirectedGraph {
    DirectedGraph::from_edges(n, (0..n).map(|u| (u, (u + 1) % n))).expect("indices < n")
}

/// Every ordered pair `u ≠ v`.
pub fn complete_digraph(n: usize) -> DirectedGraph {
    DirectedGraph::from_edges(n, (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))))
        .expect("indices < n")
}

/// Directed circulant graph with edges `u → u + k (mod n)` for each offset `k`.
/// With distinct offsets in `1..n/2` every node has the same symmetrized degree.
pub fn circulant(n: usize, offsets: &[usize]) -> DirectedGraph {
    DirectedGraph::from_edges(
        n,
        (0..n).flat_map(|u| offsets.iter().map(move |&k| (u, (u + k) % n))),
    )
    .expect("indices < n")
}

/// A labelled graph where class is carried by edge direction.
///
/// Classes form a directed ring: every node of class `c` links to `out_degree`
/// random nodes of class `c + 1 (mod classes)`. Features are a one-hot class
/// indicator scaled by `signal` plus uniform noise on `[0, 1)`, padded to
/// `feature_dim` columns. With four or more classes, classes `c − 1` and `c + 1`
/// are indistinguishable once direction is dropped.
pub fn directed_flow(
    per_class: usize,
    classes: usize,
    out_degree: usize,
    signal: f64,
    feature_dim: usize,
    seed: u64,
) -> crate::Result<crate::dataset::Dataset> {
    use crate::dataset::{Dataset, FeatureMatrix, Labels};
    if classes < 2 || per_class == 0 || feature_dim < classes {
        return Err(crate::Error::InvalidParameter(
            "need at least two classes, one node per class and feature_dim ≥ classes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = per_class * classes;
    let y: Vec<usize> = (0..n).map(|u| u % classes).collect();
    let mut edges = Vec::with_capacity(n * out_degree);
    for u in 0..n {
        let next = (y[u] + 1) % classes;
        for _ in 0..out_degree {
            let v = rng.random_range(0..per_class) * classes + next;
            edges.push((u, v));
        }
    }
    let x = ndarray::Array2::from_shape_fn((n, feature_dim), |(u, j)| {
        let base = if j == y[u] { signal } else { 0.0 };
        base + rng.random_range(0.0..1.0)
    });
    Ok(Dataset {
        name: format!("directed-flow-{classes}x{per_class}"),
        graph: DirectedGraph::from_edges(n, edges)?,
        features: FeatureMatrix::new(x)?,
        labels: Labels::new(y),
    })
}
