// SPDX-License-Identifier: Apache-2.0

//! Elementary directed cycles (Johnson's algorithm) and the charge candidates
//! they induce.
//!
//! Self-loops are ignored: they carry no phase and the smallest cycle of
//! interest has length 2 (a reciprocal pair).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::charge::Charge;
use crate::graph::DirectedGraph;

pub const DEFAULT_MAX_CYCLES: u64 = 1_000_000;
pub const DEFAULT_MAX_LENGTH: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleLimits {
    pub max_cycles: u64,
    pub max_length: usize,
}

impl Default for CycleLimits {
    fn default() -> Self {
        CycleLimits {
            max_cycles: DEFAULT_MAX_CYCLES,
            max_length: DEFAULT_MAX_LENGTH,
        }
    }
}

/// Multiset of elementary cycle lengths, stored as a histogram.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleReport {
    /// cycle length `m ≥ 2` → number of elementary cycles of that length
    pub histogram: BTreeMap<usize, u64>,
    /// Set when a cap stopped the enumeration early, so lengths may be missing.
    pub truncated: bool,
    pub is_acyclic: bool,
}

impl CycleReport {
    pub fn cycle_count(&self) -> u64 {
        self.histogram.values().sum()
    }

    /// All lengths in ascending order, with multiplicity.
    pub fn lengths(&self) -> Vec<usize> {
        self.histogram
            .iter()
            .flat_map(|(&m, &c)| std::iter::repeat_n(m, c as usize))
            .collect()
    }
}

/// Tarjan's strongly connected components over the nodes with `alive[v]`,
/// iterative so deep graphs do not overflow the stack.
fn strongly_connected(adj: &[Vec<usize>], alive: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0usize;

    for root in 0..n {
        if !alive[root] || index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if !alive[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("v is on the stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

struct Search<'a> {
    adj: &'a [Vec<usize>],
    limits: CycleLimits,
    histogram: BTreeMap<usize, u64>,
    found: u64,
    truncated: bool,
    blocked: Vec<bool>,
    blocked_by: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn unblock(&mut self, u: usize) {
        let mut todo = vec![u];
        while let Some(x) = todo.pop() {
            if self.blocked[x] {
                self.blocked[x] = false;
                todo.append(&mut self.blocked_by[x]);
            }
        }
    }

    /// Enumerates the cycles through `start` inside the component `member`.
    /// Returns false once the cycle cap is hit.
    fn circuits_from(&mut self, start: usize, member: &[bool]) -> bool {
        for v in 0..self.adj.len() {
            if member[v] {
                self.blocked[v] = false;
                self.blocked_by[v].clear();
            }
        }
        let mut path_len = 1usize;
        let mut frames: Vec<(usize, usize, bool)> = vec![(start, 0, false)];
        self.blocked[start] = true;

        while let Some(&(v, pos, _)) = frames.last() {
            if let Some(&w) = self.adj[v].get(pos) {
                frames.last_mut().expect("non-empty").1 += 1;
                if !member[w] {
                    continue;
                }
                if w == start {
                    *self.histogram.entry(path_len).or_default() += 1;
                    self.found += 1;
                    frames.last_mut().expect("non-empty").2 = true;
                    if self.found >= self.limits.max_cycles {
                        self.truncated = true;
                        return false;
                    }
                } else if !self.blocked[w] {
                    if path_len >= self.limits.max_length {
                        // Treat the pruned branch as if it closed a cycle so that
                        // nothing stays blocked on account of the length cap.
                        self.truncated = true;
                        frames.last_mut().expect("non-empty").2 = true;
                    } else {
                        self.blocked[w] = true;
                        frames.push((w, 0, false));
                        path_len += 1;
                    }
                }
                continue;
            }

            let (v, _, closed) = frames.pop().expect("non-empty");
            path_len -= 1;
            if closed {
                self.unblock(v);
            } else {
                for &w in &self.adj[v] {
                    if member[w] && !self.blocked_by[w].contains(&v) {
                        self.blocked_by[w].push(v);
                    }
                }
            }
            if let Some(parent) = frames.last_mut() {
                parent.2 |= closed;
            }
        }
        true
    }
}

/// Enumerates elementary directed cycles of length ≥ 2.
///
/// The search is exhaustive unless `max_cycles` cycles are found or a path hits
/// `max_length` nodes; either sets `truncated`. Reciprocal edges count as 2-cycles.
pub fn elementary_cycles(g: &DirectedGraph, limits: CycleLimits) -> CycleReport {
    let n = g.node_count();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| g.out_neighbors(u).iter().copied().filter(|&v| v != u).collect())
        .collect();
    let mut search = Search {
        adj: &adj,
        limits: CycleLimits {
            max_cycles: limits.max_cycles.max(1),
            max_length: limits.max_length.max(2),
        },
        histogram: BTreeMap::new(),
        found: 0,
        truncated: false,
        blocked: vec![false; n],
        blocked_by: vec![Vec::new(); n],
    };

    let mut alive = vec![true; n];
    let mut pending: Vec<Vec<usize>> = strongly_connected(&adj, &alive)
        .into_iter()
        .filter(|c| c.len() > 1)
        .collect();
    let mut member = vec![false; n];

    'outer: while let Some(comp) = pending.pop() {
        let start = comp[0];
        for &v in &comp {
            member[v] = true;
        }
        let keep_going = search.circuits_from(start, &member);
        for &v in &comp {
            member[v] = false;
        }
        if !keep_going {
            break 'outer;
        }
        // Drop the start node and continue with whatever cyclic structure remains.
        alive.iter_mut().for_each(|a| *a = false);
        for &v in &comp[1..] {
            alive[v] = true;
        }
        pending.extend(strongly_connected(&adj, &alive).into_iter().filter(|c| c.len() > 1));
    }

    let is_acyclic = search.histogram.is_empty() && !search.truncated;
    CycleReport {
        histogram: search.histogram,
        truncated: search.truncated,
        is_acyclic,
    }
}

/// Cycle survey that always finds the shortest cycles first.
///
/// A single capped search can spend its whole `max_cycles` budget on long cycles
/// from the first start nodes. Here the length cap grows geometrically (4, 8, 16,
/// …, `max_length`); lengths covered by the last pass that stayed under the count
/// cap are exact, and a capped pass only adds longer lengths.
pub fn cycle_survey(g: &DirectedGraph, limits: CycleLimits) -> CycleReport {
    let max_length = limits.max_length.max(2);
    let mut complete: Option<(usize, CycleReport)> = None;
    let mut cap = 4.min(max_length);
    loop {
        let pass = elementary_cycles(g, CycleLimits { max_cycles: limits.max_cycles, max_length: cap });
        let under_count_cap = pass.cycle_count() < limits.max_cycles.max(1);
        if under_count_cap && (!pass.truncated || cap == max_length) {
            return pass;
        }
        if !under_count_cap {
            let Some((exact_to, mut merged)) = complete else {
                return pass;
            };
            for (&m, &c) in pass.histogram.range(exact_to + 1..) {
                merged.histogram.insert(m, c);
            }
            merged.truncated = true;
            merged.is_acyclic = false;
            return merged;
        }
        complete = Some((cap, pass));
        cap = (cap * 2).min(max_length);
    }
}

/// Candidate charges `q = 1/m`, one per distinct observed cycle length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QCandidates {
    /// Descending `q` (ascending cycle length), optionally followed by `0`.
    pub values: Vec<Charge>,
    pub includes_zero_fallback: bool,
}

impl QCandidates {
    pub fn nonzero(&self) -> impl Iterator<Item = Charge> + '_ {
        self.values.iter().copied().filter(|q| !q.is_zero())
    }
}

/// Reciprocals of the distinct cycle lengths, shortest cycle first.
///
/// An acyclic report yields `[0]`. `with_zero` appends `0` in every case, which
/// the real-valued ablation needs.
pub fn q_candidates(report: &CycleReport, with_zero: bool) -> QCandidates {
    let mut values: Vec<Charge> = report
        .histogram
        .keys()
        .filter_map(|&m| Charge::reciprocal(m).ok())
        .collect();
    let includes_zero_fallback = values.is_empty() || with_zero;
    if includes_zero_fallback {
        values.push(Charge::ZERO);
    }
    QCandidates {
        values,
        includes_zero_fallback,
    }
}
