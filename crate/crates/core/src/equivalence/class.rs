//! Maximality, single-edge additions and enumeration of equivalence classes.

use super::{markov_equivalent, require_looped_cdg, EquivalenceError};
use crate::graph::{Edge, Graph, NodeId};
use crate::nodeset::NodeSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalityReport {
    pub maximal: bool,
    /// Absent edges whose addition keeps the graph in its class.
    pub addable: Vec<Edge>,
}

/// A cDG is maximal when no absent directed or blunt edge can be added
/// without leaving its Markov equivalence class.
pub fn is_maximal(g: &Graph) -> Result<MaximalityReport, EquivalenceError> {
    require_looped_cdg(g)?;
    let mut candidates = Vec::new();
    for a in g.nodes() {
        for b in g.nodes() {
            if !g.has_directed(a, b) {
                candidates.push(Edge::directed(a, b));
            }
            if a < b && !g.has_blunt(a, b) {
                candidates.push(Edge::blunt(a, b));
            }
        }
    }
    let mut addable = Vec::new();
    for e in candidates {
        if markov_equivalent(g, &g.add_edge(e)?)? {
            addable.push(e);
        }
    }
    addable.sort_by(|x, y| g.edge_order(x, y));
    Ok(MaximalityReport { maximal: addable.is_empty(), addable })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BluntAdditionCheck {
    /// `α` and `β` are joined by a path of blunt edges whose interior nodes are ancestors of `α` or `β`.
    pub hypothesis: bool,
    /// Adding `α |-| β` gives a Markov equivalent graph.
    pub equivalent: bool,
}

pub fn blunt_path_edge_addition(g: &Graph, alpha: NodeId, beta: NodeId) -> Result<BluntAdditionCheck, EquivalenceError> {
    require_looped_cdg(g)?;
    let e = Edge::blunt(alpha, beta);
    if alpha == beta {
        return Err(crate::graph::GraphError::BluntLoop(g.label(alpha).to_string()).into());
    }
    if g.contains_edge(&e) {
        return Err(EquivalenceError::EdgePresent(g.format_edge(&e)));
    }
    let mut interior = g.ancestors(&NodeSet::from_nodes(g.n(), [alpha, beta]));
    interior.remove(alpha);
    interior.remove(beta);
    let mut seen = g.blunt_neighbors(alpha).intersection(&interior);
    let mut stack = seen.to_vec();
    let mut hypothesis = false;
    while let Some(x) = stack.pop() {
        if g.has_blunt(x, beta) {
            hypothesis = true;
            break;
        }
        for y in g.blunt_neighbors(x).intersection(&interior).iter() {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    Ok(BluntAdditionCheck { hypothesis, equivalent: markov_equivalent(g, &g.add_edge(e)?)? })
}

/// Cap on the number of blunt-edge slots `n(n-1)/2` for class enumeration.
pub const CLASS_SLOT_CAP: usize = 20;

#[derive(Clone, Debug)]
pub struct EquivalenceClass {
    pub directed_part: Graph,
    /// Members ordered by their blunt-edge subset (slot bitmask order).
    pub members: Vec<Graph>,
    /// Index of the member containing every other member, if any.
    pub greatest: Option<usize>,
    /// Index of the member contained in every other member, if any.
    pub least: Option<usize>,
}

impl EquivalenceClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Every cDG Markov equivalent to `g`. Members share the directed part of
/// `g`, so only blunt-edge subsets are searched.
pub fn enumerate_class(g: &Graph) -> Result<EquivalenceClass, EquivalenceError> {
    require_looped_cdg(g)?;
    let slots: Vec<(NodeId, NodeId)> = g.nodes().flat_map(|a| g.nodes().filter(move |&b| b > a).map(move |b| (a, b))).collect();
    if slots.len() > CLASS_SLOT_CAP {
        return Err(EquivalenceError::CapExceeded { what: "number of blunt-edge slots", size: slots.len(), cap: CLASS_SLOT_CAP });
    }
    let mut members = Vec::new();
    let mut masks = Vec::new();
    for mask in 0u64..1 << slots.len() {
        let pairs: Vec<_> = slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
        let h = g.with_blunt_edges(&pairs)?;
        if markov_equivalent(g, &h)? {
            members.push(h);
            masks.push(mask);
        }
    }
    let union = masks.iter().fold(0, |acc, m| acc | m);
    let inter = masks.iter().fold(u64::MAX, |acc, m| acc & m);
    Ok(EquivalenceClass {
        directed_part: g.directed_part(),
        greatest: masks.iter().position(|&m| m == union),
        least: masks.iter().position(|&m| m == inter),
        members,
    })
}
