// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::graph::SymmetrizedGraph;

/// Dirichlet energy `S_p(x) = (1/p) Σ_u [Σ_v A_s(u,v) (x(u) − x(v))²]^{p/2}`.
///
/// For `p = 2` this is `xᵀ (D_s − A_s) x`. With `normalized` the signal is
/// first divided by `√d_u`, giving `xᵀ 𝓛 x` for the normalized Laplacian.
/// Only `p ∈ {1, 2}` is supported.
pub fn dirichlet_energy(s: &SymmetrizedGraph, x: &[f64], p: u32, normalized: bool) -> Result<f64> {
    if p != 1 && p != 2 {
        return Err(Error::InvalidParameter(format!("Dirichlet energy for p = {p}")));
    }
    let n = s.node_count();
    if x.len() != n {
        return Err(Error::Dimension(format!("signal of length {} on {} nodes", x.len(), n)));
    }
    let deg = s.degrees();
    let scaled = |u: usize| {
        if normalized {
            x[u] / deg[u].sqrt()
        } else {
            x[u]
        }
    };
    let mut total = 0.0;
    for u in 0..n {
        let mut local = 0.0;
        for (v, w) in s.row(u) {
            if v == u {
                continue;
            }
            let d = scaled(u) - scaled(v);
            local += w * d * d;
        }
        total += if p == 2 { local } else { local.sqrt() };
    }
    Ok(total / f64::from(p))
}
