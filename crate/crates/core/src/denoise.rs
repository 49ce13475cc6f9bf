// SPDX-License-Identifier: Apache-2.0

//! Closed-form minimizers of `μ‖x̄ − x‖² + x* 𝓛_q x`.
//!
//! Both forms are the same operator:
//! `β (I − α 𝓐_q)^{-1} = (I + 𝓛_q / μ)^{-1}` with `α = 1/(μ+1)`, `β = μ/(μ+1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::ComplexLu;
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Symmetrization};
use crate::magnetic::{magnetic_laplacian, normalized_magnetic_adjacency, Normalization};
use crate::sparse::ComplexSparseMatrix;

/// Systems up to this size are solved by dense LU.
pub const DENSE_SOLVE_LIMIT: usize = 200;
pub const SOLVER_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenoiseMethod {
    /// `β (I − α 𝓐_q)^{-1} x`
    PprForm,
    /// `(I + 𝓛_q / μ)^{-1} x`
    VonNeumann,
}

/// `c·I + s·M` as a sparse matrix.
fn shifted(m: &ComplexSparseMatrix, c: f64, s: f64) -> Result<ComplexSparseMatrix> {
    let n = m.dim();
    let mut trips: Vec<(usize, usize, Complex64)> = (0..n).map(|u| (u, u, Complex64::new(c, 0.0))).collect();
    for u in 0..n {
        trips.extend(m.row(u).map(|(v, x)| (u, v, x * s)));
    }
    ComplexSparseMatrix::from_triplets(n, trips, m.is_hermitian())
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Conjugate gradients for a Hermitian positive definite sparse system.
/// Stops when `‖b − Ax‖ ≤ tol · ‖b‖`, giving up after `max_iter` steps.
pub fn conjugate_gradient(a: &ComplexSparseMatrix, b: &[Complex64], tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
    let n = a.dim();
    let bnorm = norm(b);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    for _ in 0..max_iter {
        if rr.sqrt() <= tol * bnorm {
            return Ok(x);
        }
        let ap = a.matvec(&p)?;
        let alpha = rr / dot(&p, &ap).re;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += pi * alpha);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= api * alpha);
        let rr_next = dot(&r, &r).re;
        let beta = rr_next / rr;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + *pi * beta);
        rr = rr_next;
    }
    // Recompute the true residual before deciding.
    let ax = a.matvec(&x)?;
    let res: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let residual = norm(&res) / bnorm;
    if residual <= tol {
        return Ok(x);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

fn solve(a: &ComplexSparseMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.dim();
    if n <= DENSE_SOLVE_LIMIT {
        return Ok(ComplexLu::new(&a.to_dense())?.solve(b).to_vec());
    }
    conjugate_gradient(a, b, SOLVER_TOLERANCE, 10 * n.max(1))
}

/// The system matrix and output scale for each form.
fn operator(
    g: &DirectedGraph,
    q: f64,
    mu: f64,
    method: DenoiseMethod,
    convention: Symmetrization,
) -> Result<(ComplexSparseMatrix, f64)> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("trade-off μ = {mu} must be positive")));
    }
    match method {
        DenoiseMethod::PprForm => {
            let alpha = 1.0 / (mu + 1.0);
            let beta = mu / (mu + 1.0);
            let adj = normalized_magnetic_adjacency(g, q, convention, false)?;
            Ok((shifted(&adj, 1.0, -alpha)?, beta))
        }
        DenoiseMethod::VonNeumann => {
            let lap = magnetic_laplacian(g, q, Normalization::Symmetric, convention)?;
            Ok((shifted(&lap, 1.0, 1.0 / mu)?, 1.0))
        }
    }
}

/// Denoises a complex graph signal.
pub fn denoise(
    g: &DirectedGraph,
    q: f64,
    x: &[Complex64],
    mu: f64,
    method: DenoiseMethod,
    convention: Symmetrization,
) -> Result<Vec<Complex64>> {
    if x.len() != g.node_count() {
        return Err(Error::Dimension(format!("signal of length {} on {} nodes", x.len(), g.node_count())));
    }
    let (a, scale) = operator(g, q, mu, method, convention)?;
    let mut y = solve(&a, x)?;
    y.iter_mut().for_each(|v| *v *= scale);
    Ok(y)
}

/// The full denoising operator as a dense matrix (small graphs only).
pub fn denoise_operator_dense(
    g: &DirectedGraph,
    q: f64,
    mu: f64,
    method: DenoiseMethod,
    convention: Symmetrization,
) -> Result<ndarray::Array2<Complex64>> {
    let n = g.node_count();
    if n > DENSE_SOLVE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: DENSE_SOLVE_LIMIT,
        });
    }
    let (a, scale) = operator(g, q, mu, method, convention)?;
    let inv = ComplexLu::new(&a.to_dense())?.inverse();
    Ok(inv.mapv(|z| z * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::erdos_renyi_no_isolated;
    use crate::graph::symmetrize;

    #[test]
    fn nullspace_signal_is_fixed() {
        // Connected undirected graph: a ring with a chord, both directions.
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)];
        let g = DirectedGraph::from_edges(5, edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)])).unwrap();
        let s = symmetrize(&g, Symmetrization::HalfSum);
        let x: Vec<Complex64> = s.degrees().iter().map(|d| Complex64::new(d.sqrt(), 0.0)).collect();
        for method in [DenoiseMethod::PprForm, DenoiseMethod::VonNeumann] {
            let y = denoise(&g, 0.0, &x, 0.7, method, Symmetrization::HalfSum).unwrap();
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn large_mu_is_identity() {
        let g = erdos_renyi_no_isolated(10, 0.3, 4);
        let x: Vec<Complex64> = (0..10).map(|i| Complex64::new(i as f64, -(i as f64) / 2.0)).collect();
        let y = denoise(&g, 0.25, &x, 1e8, DenoiseMethod::VonNeumann, Symmetrization::HalfSum).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn cg_matches_dense_on_larger_graph() {
        let g = erdos_renyi_no_isolated(250, 0.02, 8);
        let x: Vec<Complex64> = (0..250).map(|i| Complex64::new((i % 7) as f64, (i % 3) as f64)).collect();
        let cg = denoise(&g, 0.2, &x, 1.0, DenoiseMethod::VonNeumann, Symmetrization::HalfSum).unwrap();
        let (a, _) = operator(&g, 0.2, 1.0, DenoiseMethod::VonNeumann, Symmetrization::HalfSum).unwrap();
        let lu = ComplexLu::new(&a.to_dense()).unwrap().solve(&x);
        for (p, q) in cg.iter().zip(lu.iter()) {
            assert!((p - q).norm() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_mu() {
        let g = erdos_renyi_no_isolated(4, 0.5, 1);
        let x = vec![Complex64::new(1.0, 0.0); 4];
        assert!(denoise(&g, 0.0, &x, 0.0, DenoiseMethod::PprForm, Symmetrization::HalfSum).is_err());
    }
}
