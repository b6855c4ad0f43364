//! Virtual collider tripaths.

use super::{first_directed_difference, require_looped_cdg, require_pair, EquivalenceError};
use crate::graph::{CondensationNode, Graph, NodeId};
use crate::nodeset::NodeSet;
use crate::separation::collider_connected;

/// `(α, β, C)` with `C` a node of the completed condensation (a strongly
/// connected component or the empty root) such that some collider path
/// between `α` and `β` has its interior in `an({α, β} ∪ C)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VirtualColliderTripath {
    pub alpha: NodeId,
    pub beta: NodeId,
    pub component: CondensationNode,
    /// Nodes of the component (empty for the root).
    pub members: NodeSet,
}

impl VirtualColliderTripath {
    fn key(&self) -> (NodeId, NodeId, u64, Vec<NodeId>) {
        (self.alpha, self.beta, self.members.len() as u64, self.members.to_vec())
    }
}

/// All tripaths with `α < β` in node order.
pub fn virtual_collider_tripaths(g: &Graph) -> Result<Vec<VirtualColliderTripath>, EquivalenceError> {
    require_looped_cdg(g)?;
    let cond = g.condensation();
    let n = g.n();
    let mut out = Vec::new();
    for alpha in g.nodes() {
        for beta in g.nodes().filter(|&b| b > alpha) {
            let ends = NodeSet::from_nodes(n, [alpha, beta]);
            for node in cond.completed_nodes() {
                let members = cond.members(node, n);
                let allowed = g.ancestors(&ends.union(&members));
                if collider_connected(g, alpha, beta, &allowed) {
                    out.push(VirtualColliderTripath { alpha, beta, component: node, members });
                }
            }
        }
    }
    Ok(out)
}

/// Tripaths `(α, β, C)` such that no strict ancestor of `C` in the completed
/// condensation also gives a tripath for `(α, β)`.
pub fn maximal_vcts(g: &Graph) -> Result<Vec<VirtualColliderTripath>, EquivalenceError> {
    let all = virtual_collider_tripaths(g)?;
    let cond = g.condensation();
    let has = |a: NodeId, b: NodeId, c: CondensationNode| all.iter().any(|t| t.alpha == a && t.beta == b && t.component == c);
    Ok(all
        .iter()
        .filter(|t| {
            !cond
                .completed_strict_ancestors(t.component)
                .into_iter()
                .any(|c| has(t.alpha, t.beta, c))
        })
        .cloned()
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prescreen {
    /// A necessary condition for equivalence fails.
    Distinct(String),
    /// Same directed part and same maximal tripaths; the graphs may or may not be equivalent.
    Indistinguishable,
}

/// Polynomial necessary-condition check for Markov equivalence.
pub fn vct_prescreen(g1: &Graph, g2: &Graph) -> Result<Prescreen, EquivalenceError> {
    require_pair(g1, g2)?;
    if let Some((a, b)) = first_directed_difference(g1, g2) {
        return Ok(Prescreen::Distinct(format!(
            "directed edge {} -> {} is in one graph only",
            g1.label(a),
            g1.label(b)
        )));
    }
    let key_set = |g: &Graph| -> Result<Vec<_>, EquivalenceError> {
        let mut v: Vec<_> = maximal_vcts(g)?.iter().map(|t| t.key()).collect();
        v.sort();
        Ok(v)
    };
    let (k1, k2) = (key_set(g1)?, key_set(g2)?);
    if let Some(t) = k1.iter().find(|t| !k2.contains(t)).or_else(|| k2.iter().find(|t| !k1.contains(t))) {
        let labels: Vec<&str> = t.3.iter().map(|&v| g1.label(v)).collect();
        return Ok(Prescreen::Distinct(format!(
            "maximal virtual collider tripath ({}, {}, {{{}}}) is in one graph only",
            g1.label(t.0),
            g1.label(t.1),
            labels.join(", ")
        )));
    }
    Ok(Prescreen::Indistinguishable)
}
