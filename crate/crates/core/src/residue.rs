//! Residue classes and the transition graph of the Collatz map modulo `m`.
//!
//! Vertex `r` of the graph stands for the class of positive integers
//! congruent to `r`; an edge `a -> b` labeled with a branch exists when some
//! member of class `a` takes that branch of the map and lands in class `b`.
//!
//! For even `m` the parity of a class is fixed, so odd residues have a single
//! `Triple` edge to `3r+1` and even residues have two `Halve` edges, to `r/2`
//! and `r/2 + m/2` (depending on the parity of `x / m`). For odd `m` every
//! class has members of both parities: one `Halve` edge to `r * 2^{-1}` and
//! one `Triple` edge to `3r+1`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::nat::Nat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResidueError {
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("residue {residue} is out of range for modulus {modulus}")]
    OutOfRange { residue: u64, modulus: u64 },
    #[error("edge {from} -> {to} does not match the map modulo {modulus}")]
    InvalidEdge { from: u64, to: u64, modulus: u64 },
    #[error("graph is missing {missing} edge(s)")]
    Incomplete { missing: usize },
    #[error("malformed graph JSON: {0}")]
    Json(String),
}

/// The positive integers congruent to `residue` modulo `modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueClass {
    modulus: u64,
    residue: u64,
}

impl ResidueClass {
    pub fn new(modulus: u64, residue: u64) -> Result<Self, ResidueError> {
        if modulus == 0 {
            return Err(ResidueError::ZeroModulus);
        }
        if residue >= modulus {
            return Err(ResidueError::OutOfRange { residue, modulus });
        }
        Ok(ResidueClass { modulus, residue })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn contains(&self, x: &Nat) -> bool {
        !x.is_zero() && x.rem_u64(self.modulus) == self.residue
    }

    /// Smallest positive member: the residue itself, or the modulus for class 0.
    pub fn least_member(&self) -> u64 {
        if self.residue == 0 {
            self.modulus
        } else {
            self.residue
        }
    }
}

pub fn class_of(x: &Nat, modulus: u64) -> Result<ResidueClass, ResidueError> {
    if modulus == 0 {
        return Err(ResidueError::ZeroModulus);
    }
    Ok(ResidueClass {
        modulus,
        residue: x.rem_u64(modulus),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BranchLabel {
    Halve,
    Triple,
}

impl BranchLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchLabel::Halve => "Halve",
            BranchLabel::Triple => "Triple",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: u64,
    pub to: u64,
    #[serde(rename = "branch")]
    pub label: BranchLabel,
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Successor classes of `residue` under the map, with the branch taken.
/// Sorted by `(target, label)`; a target may appear under both labels when
/// the modulus is odd.
pub fn transition_targets(modulus: u64, residue: u64) -> Result<Vec<(u64, BranchLabel)>, ResidueError> {
    ResidueClass::new(modulus, residue)?;
    let m = modulus;
    let triple = ((3 * residue as u128 + 1) % m as u128) as u64;
    let mut out = if m.is_multiple_of(2) {
        if residue % 2 == 1 {
            vec![(triple, BranchLabel::Triple)]
        } else {
            let half = residue / 2;
            vec![(half, BranchLabel::Halve), (half + m / 2, BranchLabel::Halve)]
        }
    } else {
        // 2^{-1} mod m is (m+1)/2 for odd m.
        let inv2 = m.div_ceil(2) % m;
        vec![(mul_mod(residue, inv2, m), BranchLabel::Halve), (triple, BranchLabel::Triple)]
    };
    out.sort_unstable();
    Ok(out)
}

/// Directed multigraph on `0..modulus` with branch-labeled edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionGraph {
    modulus: u64,
    edges: Vec<Edge>,
}

pub fn build_graph(modulus: u64) -> Result<TransitionGraph, ResidueError> {
    if modulus == 0 {
        return Err(ResidueError::ZeroModulus);
    }
    let mut edges = Vec::with_capacity(modulus as usize * 2);
    for from in 0..modulus {
        for (to, label) in transition_targets(modulus, from)? {
            edges.push(Edge { from, to, label });
        }
    }
    edges.sort_unstable();
    Ok(TransitionGraph { modulus, edges })
}

impl TransitionGraph {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Edges sorted by `(from, to, label)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertices(&self) -> std::ops::Range<u64> {
        0..self.modulus
    }

    pub fn has_edge(&self, from: u64, to: u64, label: BranchLabel) -> bool {
        self.edges.binary_search(&Edge { from, to, label }).is_ok()
    }

    fn check_vertex(&self, residue: u64) -> Result<(), ResidueError> {
        if residue >= self.modulus {
            Err(ResidueError::OutOfRange {
                residue,
                modulus: self.modulus,
            })
        } else {
            Ok(())
        }
    }

    fn out_edges(&self, residue: u64) -> &[Edge] {
        let lo = self.edges.partition_point(|e| e.from < residue);
        let hi = self.edges.partition_point(|e| e.from <= residue);
        &self.edges[lo..hi]
    }

    /// Distinct successor residues, ascending.
    pub fn successors(&self, residue: u64) -> Result<Vec<u64>, ResidueError> {
        self.check_vertex(residue)?;
        let mut out: Vec<u64> = self.out_edges(residue).iter().map(|e| e.to).collect();
        out.dedup();
        Ok(out)
    }

    /// Number of distinct successor residues.
    pub fn out_degree(&self, residue: u64) -> Result<usize, ResidueError> {
        Ok(self.successors(residue)?.len())
    }

    /// Number of distinct predecessor residues.
    pub fn in_degree(&self, residue: u64) -> Result<usize, ResidueError> {
        self.check_vertex(residue)?;
        let preds: BTreeSet<u64> = self.edges.iter().filter(|e| e.to == residue).map(|e| e.from).collect();
        Ok(preds.len())
    }

    /// Edges counted once per `(from, to)` pair.
    pub fn distinct_edge_count(&self) -> usize {
        let mut n = 0;
        let mut prev = None;
        for e in &self.edges {
            if prev != Some((e.from, e.to)) {
                n += 1;
                prev = Some((e.from, e.to));
            }
        }
        n
    }

    /// Maximal strongly connected vertex sets. Each component is sorted
    /// ascending and components are ordered by their smallest vertex.
    pub fn strongly_connected_components(&self) -> Vec<Vec<u64>> {
        let n = self.modulus as usize;
        let adj: Vec<Vec<usize>> = (0..self.modulus)
            .map(|v| self.successors(v).unwrap().into_iter().map(|t| t as usize).collect())
            .collect();
        let mut comps: Vec<Vec<u64>> = tarjan(n, &adj)
            .into_iter()
            .map(|c| {
                let mut c: Vec<u64> = c.into_iter().map(|v| v as u64).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort_unstable_by_key(|c| c[0]);
        comps
    }

    /// Graphviz rendering. One line per distinct `(from, to)` pair; when both
    /// branches connect the same pair the `branch` attribute lists both.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "digraph collatz_mod_{} {{", self.modulus).unwrap();
        for v in self.vertices() {
            writeln!(out, "    {v};").unwrap();
        }
        let mut i = 0;
        while i < self.edges.len() {
            let Edge { from, to, .. } = self.edges[i];
            let mut labels = Vec::new();
            while i < self.edges.len() && self.edges[i].from == from && self.edges[i].to == to {
                labels.push(self.edges[i].label.as_str());
                i += 1;
            }
            writeln!(
                out,
                "    {from} -> {to} [label=\"Col\", branch=\"{}\"];",
                labels.join(",")
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    /// Reads the adjacency export back. The edge set must be exactly the one
    /// `build_graph` produces for the stated modulus.
    pub fn from_json(text: &str) -> Result<Self, ResidueError> {
        #[derive(Deserialize)]
        struct Raw {
            modulus: u64,
            edges: Vec<Edge>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| ResidueError::Json(e.to_string()))?;
        if raw.modulus == 0 {
            return Err(ResidueError::ZeroModulus);
        }
        let mut edges = raw.edges;
        for e in &edges {
            for v in [e.from, e.to] {
                if v >= raw.modulus {
                    return Err(ResidueError::OutOfRange {
                        residue: v,
                        modulus: raw.modulus,
                    });
                }
            }
            if !transition_targets(raw.modulus, e.from)?.contains(&(e.to, e.label)) {
                return Err(ResidueError::InvalidEdge {
                    from: e.from,
                    to: e.to,
                    modulus: raw.modulus,
                });
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let expected = build_graph(raw.modulus)?;
        if edges.len() != expected.edges.len() {
            return Err(ResidueError::Incomplete {
                missing: expected.edges.len() - edges.len(),
            });
        }
        Ok(TransitionGraph {
            modulus: raw.modulus,
            edges,
        })
    }
}

pub fn out_degree(graph: &TransitionGraph, residue: u64) -> Result<usize, ResidueError> {
    graph.out_degree(residue)
}

pub fn strongly_connected_components(graph: &TransitionGraph) -> Vec<Vec<u64>> {
    graph.strongly_connected_components()
}

pub fn to_dot(graph: &TransitionGraph) -> String {
    graph.to_dot()
}

// Iterative Tarjan; the modulus can be large enough to overflow the stack
// with the recursive form.
fn tarjan(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, child)) = call.last() {
            if child == 0 {
                index[v] = next;
                low[v] = next;
                next += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(child) {
                call.last_mut().unwrap().1 += 1;
                if index[w] == UNVISITED {
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
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}
