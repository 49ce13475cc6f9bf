// SPDX-License-Identifier: Apache-2.0

//! Frequency responses of the graph shift operators and magnetic eigenmaps.
//!
//! The approximate responses assume `D_s ≈ d̄ I`, which gives
//! `Ã_q ≈ I − d̄/(d̄+1) 𝓛_q`; they are exact on regular graphs.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eigen, EigenOptions, Spectrum};
use crate::error::Result;
use crate::graph::{symmetrize, DirectedGraph, Symmetrization};
use crate::magnetic::{magnetic_laplacian, normalized_magnetic_adjacency, renormalized_magnetic_adjacency, Normalization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftOperator {
    /// `𝓐_q = I − 𝓛_q`
    NormalizedAdjacency,
    /// `Ã_q`
    RenormalizedAdjacency,
    /// `−Ã_q`
    NegativeRenormalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseMode {
    /// True eigenvalues of the shift operator.
    Exact,
    /// Closed-form approximation evaluated on the eigenvalues of `𝓛_q`.
    Approx,
}

/// One row of a response table: the `index`-th smallest eigenvalue of `𝓛_q`
/// with the matching exact and approximate responses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResponseRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub response_exact: f64,
    pub response_approx: f64,
}

fn laplacian_eigenvalues(g: &DirectedGraph, q: f64, convention: Symmetrization, limit: usize) -> Result<Vec<f64>> {
    let l = magnetic_laplacian(g, q, Normalization::SymmetricSkipIsolated, convention)?;
    let opts = EigenOptions {
        dense_limit: limit,
        ..EigenOptions::values_only()
    };
    Ok(hermitian_eigen(&l.to_dense(), opts)?.eigenvalues)
}

fn approx_map(gso: ShiftOperator, dbar: f64) -> impl Fn(f64) -> f64 {
    let ratio = dbar / (dbar + 1.0);
    move |lambda| match gso {
        ShiftOperator::NormalizedAdjacency => 1.0 - lambda,
        ShiftOperator::RenormalizedAdjacency => 1.0 - ratio * lambda,
        ShiftOperator::NegativeRenormalized => ratio * lambda - 1.0,
    }
}

fn exact_values(g: &DirectedGraph, q: f64, gso: ShiftOperator, convention: Symmetrization, limit: usize) -> Result<Vec<f64>> {
    let p = match gso {
        ShiftOperator::NormalizedAdjacency => normalized_magnetic_adjacency(g, q, convention, true)?,
        ShiftOperator::RenormalizedAdjacency => renormalized_magnetic_adjacency(g, q, convention)?,
        ShiftOperator::NegativeRenormalized => renormalized_magnetic_adjacency(g, q, convention)?.neg(),
    };
    let opts = EigenOptions {
        dense_limit: limit,
        ..EigenOptions::values_only()
    };
    Ok(hermitian_eigen(&p.to_dense(), opts)?.eigenvalues)
}

/// Frequency response of a shift operator, sorted ascending.
pub fn frequency_response(
    g: &DirectedGraph,
    q: f64,
    gso: ShiftOperator,
    mode: ResponseMode,
    convention: Symmetrization,
    dense_limit: usize,
) -> Result<Vec<f64>> {
    let mut out = match mode {
        ResponseMode::Exact => exact_values(g, q, gso, convention, dense_limit)?,
        ResponseMode::Approx => {
            let dbar = symmetrize(g, convention).average_degree();
            let f = approx_map(gso, dbar);
            laplacian_eigenvalues(g, q, convention, dense_limit)?.into_iter().map(f).collect()
        }
    };
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Pairs each eigenvalue of `𝓛_q` with the exact and approximate responses.
///
/// The approximation is monotone in the eigenvalue, so exact responses are
/// listed in the same monotone order (descending for the positive operators,
/// ascending for the negated one).
pub fn response_table(
    g: &DirectedGraph,
    q: f64,
    gso: ShiftOperator,
    convention: Symmetrization,
    dense_limit: usize,
) -> Result<Vec<ResponseRow>> {
    let lambdas = laplacian_eigenvalues(g, q, convention, dense_limit)?;
    let dbar = symmetrize(g, convention).average_degree();
    let f = approx_map(gso, dbar);
    let mut exact = exact_values(g, q, gso, convention, dense_limit)?;
    exact.sort_by(f64::total_cmp);
    if gso != ShiftOperator::NegativeRenormalized {
        exact.reverse();
    }
    Ok(lambdas
        .into_iter()
        .zip(exact)
        .enumerate()
        .map(|(index, (eigenvalue, response_exact))| ResponseRow {
            index,
            eigenvalue,
            response_exact,
            response_approx: f(eigenvalue),
        })
        .collect())
}

pub fn write_response_csv<W: Write>(mut w: W, rows: &[ResponseRow]) -> std::io::Result<()> {
    writeln!(w, "index,eigenvalue,response_exact,response_approx")?;
    for r in rows {
        writeln!(w, "{},{:.12e},{:.12e},{:.12e}", r.index, r.eigenvalue, r.response_exact, r.response_approx)?;
    }
    Ok(())
}

/// The `k` lowest eigenpairs of `𝓛_q` (zero-degree nodes keep a unit diagonal).
///
/// Each eigenvector is rotated so its largest-modulus entry is real and positive,
/// which makes exports reproducible.
pub fn eigenmaps(
    g: &DirectedGraph,
    q: f64,
    k: usize,
    convention: Symmetrization,
    dense_limit: usize,
) -> Result<Spectrum> {
    let l = magnetic_laplacian(g, q, Normalization::SymmetricSkipIsolated, convention)?;
    let mut spec = hermitian_eigen(
        &l.to_dense(),
        EigenOptions {
            k: Some(k),
            vectors: true,
            dense_limit,
        },
    )?;
    if let Some(v) = spec.eigenvectors.as_mut() {
        for mut col in v.columns_mut() {
            let pivot = col
                .iter()
                .copied()
                .fold(Complex64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
            if pivot.norm() > 0.0 {
                let rot = pivot.conj() / pivot.norm();
                col.mapv_inplace(|z| z * rot);
            }
        }
    }
    Ok(spec)
}

/// `node,re_0,im_0,re_1,im_1,…`
pub fn write_eigenmaps_csv<W: Write>(mut w: W, spec: &Spectrum) -> std::io::Result<()> {
    let Some(v) = spec.eigenvectors.as_ref() else {
        return Ok(());
    };
    let header: Vec<String> = (0..v.ncols()).map(|j| format!("re_{j},im_{j}")).collect();
    writeln!(w, "node,{}", header.join(","))?;
    for (i, row) in v.rows().into_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|z| format!("{:.12e},{:.12e}", z.re, z.im)).collect();
        writeln!(w, "{i},{}", cells.join(","))?;
    }
    Ok(())
}
