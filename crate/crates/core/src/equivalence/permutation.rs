//! Relabelling blunt edges through a node permutation.

use super::{markov_equivalent, EquivalenceError};
use crate::graph::{Graph, NodeId};
use crate::nodeset::NodeSet;

/// Bijection on `0..n`, stored as the image of each node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation(Vec<NodeId>);

impl Permutation {
    pub fn new(images: Vec<NodeId>) -> Result<Self, EquivalenceError> {
        let n = images.len();
        let mut hit = vec![false; n];
        for v in &images {
            if v.index() >= n || std::mem::replace(&mut hit[v.index()], true) {
                return Err(EquivalenceError::InvalidPermutation);
            }
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).map(NodeId).collect())
    }

    /// The transposition of `a` and `b`.
    pub fn swap(n: usize, a: NodeId, b: NodeId) -> Self {
        let mut p = Self::identity(n);
        p.0.swap(a.index(), b.index());
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, v: NodeId) -> NodeId {
        self.0[v.index()]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![NodeId(0); self.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v.index()] = NodeId(i);
        }
        Permutation(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation(other.0.iter().map(|&v| self.apply(v)).collect())
    }

    pub fn moved(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().enumerate().filter(|(i, v)| v.index() != *i).map(|(i, _)| NodeId(i))
    }
}

/// Same directed edges; `ρ(α) |-| ρ(β)` exactly when `α |-| β`.
pub fn permutation_graph(g: &Graph, rho: &Permutation) -> Result<Graph, EquivalenceError> {
    if rho.len() != g.n() {
        return Err(EquivalenceError::InvalidPermutation);
    }
    let pairs: Vec<_> = g.blunt_pairs().into_iter().map(|(a, b)| (rho.apply(a), rho.apply(b))).collect();
    Ok(g.with_blunt_edges(&pairs)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PermutationCheck {
    /// Every pair in `S` is joined by a directed edge and all of `S` share parents.
    pub hypothesis: bool,
    pub equivalent: bool,
}

/// Checks the sufficient condition for the permuted graph to be equivalent,
/// and decides the equivalence itself.
pub fn permutation_equivalent_sufficient(g: &Graph, rho: &Permutation, s: &NodeSet) -> Result<PermutationCheck, EquivalenceError> {
    if let Some(v) = rho.moved().find(|&v| !s.contains(v)) {
        return Err(EquivalenceError::MovesOutsideSet(g.label(v).to_string()));
    }
    let hypothesis = s.iter().all(|b| {
        s.iter().all(|c| g.has_directed(b, c) && g.parents(b) == g.parents(c))
    });
    let h = permutation_graph(g, rho)?;
    Ok(PermutationCheck { hypothesis, equivalent: markov_equivalent(g, &h)? })
}
