// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{symmetrize, DirectedGraph, Symmetrization};

/// What an isolated node contributes to the node homophily mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsolatedNodes {
    /// Counted with a same-label fraction of 0.
    #[default]
    Zero,
    /// Left out of both numerator and denominator.
    Exclude,
}

/// Node homophily: the mean, over nodes, of the fraction of a node's neighbors
/// in the symmetrized graph that share its label. Self-loops are not neighbors.
///
/// With [`IsolatedNodes::Exclude`] and no node having a neighbor the index is 1.
pub fn homophily_index(g: &DirectedGraph, y: &[usize], isolated: IsolatedNodes) -> Result<f64> {
    let n = g.node_count();
    if y.len() != n {
        return Err(Error::Dimension(format!("{} labels for {} nodes", y.len(), n)));
    }
    let s = symmetrize(g, Symmetrization::HalfSum);
    let mut total = 0.0;
    let mut counted = 0usize;
    for u in 0..n {
        let (mut same, mut deg) = (0usize, 0usize);
        for v in s.neighbors(u) {
            deg += 1;
            if y[v] == y[u] {
                same += 1;
            }
        }
        if deg == 0 {
            if isolated == IsolatedNodes::Zero {
                counted += 1;
            }
            continue;
        }
        total += same as f64 / deg as f64;
        counted += 1;
    }
    if counted == 0 {
        return Ok(match isolated {
            IsolatedNodes::Exclude => 1.0,
            IsolatedNodes::Zero => 0.0,
        });
    }
    Ok(total / counted as f64)
}
