// SPDX-License-Identifier: Apache-2.0

//! Magnetic operators of a directed graph.
//!
//! Edge direction is encoded as a phase through the parallel transporter
//! `T_q(u, v) = exp(i 2π q (A(u,v) − A(v,u)))`, which multiplies the symmetrized
//! adjacency entrywise. We use this sign convention throughout; the opposite one
//! gives the conjugate operators and the same spectra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{symmetrize, DirectedGraph, Symmetrization, SymmetrizedGraph};
use crate::sparse::ComplexSparseMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `L_q = D_s − A_s ⊙ T_q`
    #[default]
    None,
    /// `𝓛_q = I − D_s^{-1/2} A_s D_s^{-1/2} ⊙ T_q`; fails on zero-degree nodes.
    Symmetric,
    /// As `Symmetric`, but a zero-degree node keeps a unit diagonal and no
    /// off-diagonal entries (`D_s^{-1/2}` is taken as 0 there).
    SymmetricSkipIsolated,
}

pub(crate) fn check_charge(q: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::ChargeOutOfRange(q));
    }
    Ok(())
}

/// `exp(i 2π t)`, exact when `4t` is an integer so that `q ∈ {0, 1/4, 1/2}`
/// produce purely real or purely imaginary phases.
pub fn unit_phase(turns: f64) -> Complex64 {
    let quarter = 4.0 * turns;
    if quarter.fract() == 0.0 {
        return match (quarter as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let angle = 2.0 * std::f64::consts::PI * turns;
    Complex64::new(angle.cos(), angle.sin())
}

/// Phase of the ordered pair `(u, v)`. Forward and backward phases are exact conjugates.
fn phase(g: &DirectedGraph, q: f64, u: usize, v: usize) -> Complex64 {
    let d = g.weight(u, v) - g.weight(v, u);
    if d > 0.0 {
        unit_phase(q)
    } else if d < 0.0 {
        unit_phase(q).conj()
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// The parallel transporter on the support of `A_s` (diagonal self-loops have phase 1).
pub fn transporter(g: &DirectedGraph, q: f64) -> Result<ComplexSparseMatrix> {
    check_charge(q)?;
    let s = symmetrize(g, Symmetrization::HalfSum);
    let trips = (0..g.node_count())
        .flat_map(|u| s.row(u).map(move |(v, _)| (u, v)))
        .map(|(u, v)| (u, v, phase(g, q, u, v)))
        .collect();
    ComplexSparseMatrix::from_triplets(g.node_count(), trips, false)
}

fn inv_sqrt_degrees(s: &SymmetrizedGraph, shift: f64, check_zero: bool) -> Result<Vec<f64>> {
    s.degrees()
        .iter()
        .enumerate()
        .map(|(u, &d)| {
            let d = d + shift;
            if d <= 0.0 {
                if check_zero {
                    return Err(Error::ZeroDegree(u));
                }
                return Ok(0.0);
            }
            Ok(1.0 / d.sqrt())
        })
        .collect()
}

/// `L_q` or its symmetric normalization `𝓛_q`. Hermitian and positive semi-definite.
pub fn magnetic_laplacian(
    g: &DirectedGraph,
    q: f64,
    normalization: Normalization,
    convention: Symmetrization,
) -> Result<ComplexSparseMatrix> {
    check_charge(q)?;
    let s = symmetrize(g, convention);
    let n = g.node_count();
    let mut trips = Vec::with_capacity(s.nnz() + n);
    match normalization {
        Normalization::None => {
            for u in 0..n {
                trips.push((u, u, Complex64::new(s.degrees()[u], 0.0)));
                for (v, w) in s.row(u) {
                    trips.push((u, v, -phase(g, q, u, v) * w));
                }
            }
        }
        Normalization::Symmetric | Normalization::SymmetricSkipIsolated => {
            let strict = normalization == Normalization::Symmetric;
            let isd = inv_sqrt_degrees(&s, 0.0, strict)?;
            for u in 0..n {
                trips.push((u, u, Complex64::new(1.0, 0.0)));
                for (v, w) in s.row(u) {
                    trips.push((u, v, -phase(g, q, u, v) * (w * (isd[u] * isd[v]))));
                }
            }
        }
    }
    ComplexSparseMatrix::from_triplets(n, trips, true)
}

/// Normalized magnetic adjacency `𝓐_q = D_s^{-1/2} A_s D_s^{-1/2} ⊙ T_q = I − 𝓛_q`.
///
/// With `skip_isolated` a zero-degree node gets an empty row instead of an error.
pub fn normalized_magnetic_adjacency(
    g: &DirectedGraph,
    q: f64,
    convention: Symmetrization,
    skip_isolated: bool,
) -> Result<ComplexSparseMatrix> {
    check_charge(q)?;
    let s = symmetrize(g, convention);
    let isd = inv_sqrt_degrees(&s, 0.0, !skip_isolated)?;
    let trips = (0..g.node_count())
        .flat_map(|u| s.row(u).map(move |(v, w)| (u, v, w)))
        .map(|(u, v, w)| (u, v, phase(g, q, u, v) * (w * (isd[u] * isd[v]))))
        .collect();
    ComplexSparseMatrix::from_triplets(g.node_count(), trips, true)
}

/// Renormalized magnetic adjacency `Ã_q = D̃^{-1/2} (A_s + I) D̃^{-1/2} ⊙ T_q`
/// with `D̃ = D_s + I`. Spectrum lies in `[−1, 1]`.
pub fn renormalized_magnetic_adjacency(
    g: &DirectedGraph,
    q: f64,
    convention: Symmetrization,
) -> Result<ComplexSparseMatrix> {
    check_charge(q)?;
    let s = symmetrize(g, convention);
    let isd = inv_sqrt_degrees(&s, 1.0, false)?;
    let n = g.node_count();
    let mut trips = Vec::with_capacity(s.nnz() + n);
    for u in 0..n {
        trips.push((u, u, Complex64::new(isd[u] * isd[u], 0.0)));
        for (v, w) in s.row(u) {
            trips.push((u, v, phase(g, q, u, v) * (w * (isd[u] * isd[v]))));
        }
    }
    ComplexSparseMatrix::from_triplets(n, trips, true)
}
