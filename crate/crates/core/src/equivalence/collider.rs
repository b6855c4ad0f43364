//! Collider paths and collider equivalence.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{require_pair, EquivalenceError};
use crate::graph::{Graph, NodeId};
use crate::nodeset::NodeSet;
use crate::separation::collider_connected;

/// A path `α, γ₁, ..., γₘ, β` (distinct nodes) on which every `γᵢ` is a collider.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColliderPath {
    pub nodes: Vec<NodeId>,
}

impl ColliderPath {
    pub fn alpha(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn beta(&self) -> NodeId {
        *self.nodes.last().expect("a collider path has two endpoints")
    }

    pub fn interior(&self) -> &[NodeId] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn display<'a>(&'a self, g: &'a Graph) -> impl fmt::Display + 'a {
        PathDisplay { path: self, g }
    }
}

struct PathDisplay<'a> {
    path: &'a ColliderPath,
    g: &'a Graph,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes = &self.path.nodes;
        write!(f, "{}", self.g.label(nodes[0]))?;
        for w in nodes.windows(2) {
            let (x, y) = (w[0], w[1]);
            let sym = if self.g.has_blunt(x, y) {
                "|-|"
            } else if self.g.has_bidirected(x, y) {
                "<->"
            } else if self.g.has_directed(x, y) {
                "->"
            } else {
                "<-"
            };
            write!(f, " {sym} {}", self.g.label(y))?;
        }
        Ok(())
    }
}

/// Neck at `at` on some edge between `at` and `other`.
fn neck_at(g: &Graph, other: NodeId, at: NodeId) -> bool {
    g.has_directed(other, at) || g.has_blunt(other, at) || g.has_bidirected(other, at)
}

pub fn is_collider_path(g: &Graph, p: &ColliderPath) -> bool {
    let k = p.nodes.len();
    if k < 2 {
        return false;
    }
    let distinct: HashSet<_> = p.nodes.iter().collect();
    if distinct.len() != k {
        return false;
    }
    if k == 2 {
        return g.adjacent(p.nodes[0], p.nodes[1]);
    }
    (1..k - 1).all(|i| neck_at(g, p.nodes[i - 1], p.nodes[i]) && neck_at(g, p.nodes[i + 1], p.nodes[i]))
}

/// Nodes a covering path in another graph may use as interior: ancestors (in
/// `g_src`) of the endpoints and of the interior.
fn cover_allowance(g_src: &Graph, path: &ColliderPath) -> NodeSet {
    g_src.ancestors(&NodeSet::from_nodes(g_src.n(), path.nodes.iter().copied()))
}

/// Does `g2` have a collider path between the same endpoints whose interior
/// lies in the ancestors of the path's nodes?
pub fn collider_path_covered(g_src: &Graph, path: &ColliderPath, g2: &Graph) -> bool {
    collider_connected(g2, path.alpha(), path.beta(), &cover_allowance(g_src, path))
}

/// A collider path of one graph with no cover in the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UncoveredPath {
    pub path: ColliderPath,
    /// The path lives in the first graph.
    pub in_first: bool,
}

/// Default bound on search states per direction.
pub const COLLIDER_STATE_CAP: usize = 2_000_000;

pub fn collider_equivalent(g1: &Graph, g2: &Graph) -> Result<bool, EquivalenceError> {
    Ok(collider_equivalence_witness(g1, g2, COLLIDER_STATE_CAP)?.is_none())
}

/// Searches both graphs for an uncovered collider path.
///
/// The search runs over collider walks keyed by (current node, ancestor
/// closure of the nodes so far); walks with the same key have the same
/// continuations and the same cover requirement. A walk's loop-erased path
/// has a smaller closure, so it is uncovered whenever the walk is.
pub fn collider_equivalence_witness(g1: &Graph, g2: &Graph, cap: usize) -> Result<Option<UncoveredPath>, EquivalenceError> {
    require_pair(g1, g2)?;
    if let Some(path) = uncovered_path(g1, g2, cap)? {
        return Ok(Some(UncoveredPath { path, in_first: true }));
    }
    Ok(uncovered_path(g2, g1, cap)?.map(|path| UncoveredPath { path, in_first: false }))
}

fn uncovered_path(src: &Graph, other: &Graph, cap: usize) -> Result<Option<ColliderPath>, EquivalenceError> {
    let mut memo: HashMap<(NodeId, NodeId, NodeSet), bool> = HashMap::new();
    let mut covered = |alpha: NodeId, beta: NodeId, allowed: NodeSet| {
        let key = (alpha.min(beta), alpha.max(beta), allowed);
        if let Some(&c) = memo.get(&key) {
            return c;
        }
        let c = collider_connected(other, alpha, beta, &key.2);
        memo.insert(key, c);
        c
    };
    let mut states = 0usize;
    for alpha in src.nodes() {
        let an_alpha = src.ancestors_of(alpha);
        // single edges
        for beta in src.nodes().filter(|&b| b > alpha && src.adjacent(alpha, b)) {
            let allowed = an_alpha.union(&src.ancestors_of(beta));
            if !covered(alpha, beta, allowed) {
                return Ok(Some(ColliderPath { nodes: vec![alpha, beta] }));
            }
        }
        // arena of (node, parent index) for walk reconstruction
        let mut arena: Vec<(NodeId, Option<usize>)> = Vec::new();
        let mut seen: HashSet<(NodeId, NodeSet)> = HashSet::new();
        let mut stack: Vec<(usize, NodeSet)> = Vec::new();
        let first = src.children(alpha).union(src.blunt_neighbors(alpha));
        for g1 in first.iter().filter(|&x| x != alpha) {
            let clo = an_alpha.union(&src.ancestors_of(g1));
            if seen.insert((g1, clo.clone())) {
                arena.push((g1, None));
                stack.push((arena.len() - 1, clo));
            }
        }
        while let Some((idx, clo)) = stack.pop() {
            states += 1;
            if states > cap {
                return Err(EquivalenceError::CapExceeded { what: "collider path search states", size: states, cap });
            }
            let gamma = arena[idx].0;
            let ends = src.parents(gamma).union(src.blunt_neighbors(gamma));
            for beta in ends.iter().filter(|&b| b != gamma && b != alpha) {
                let allowed = clo.union(&src.ancestors_of(beta));
                if !covered(alpha, beta, allowed) {
                    return Ok(Some(loop_erase(alpha, &arena, idx, beta)));
                }
            }
            for next in src.blunt_neighbors(gamma).iter().filter(|&x| x != gamma) {
                let clo2 = clo.union(&src.ancestors_of(next));
                if seen.insert((next, clo2.clone())) {
                    arena.push((next, Some(idx)));
                    stack.push((arena.len() - 1, clo2));
                }
            }
        }
    }
    Ok(None)
}

fn loop_erase(alpha: NodeId, arena: &[(NodeId, Option<usize>)], mut idx: usize, beta: NodeId) -> ColliderPath {
    let mut walk = vec![beta];
    loop {
        walk.push(arena[idx].0);
        match arena[idx].1 {
            Some(p) => idx = p,
            None => break,
        }
    }
    walk.push(alpha);
    walk.reverse();
    let mut path: Vec<NodeId> = Vec::new();
    for v in walk {
        if let Some(pos) = path.iter().position(|&u| u == v) {
            path.truncate(pos + 1);
        } else {
            path.push(v);
        }
    }
    ColliderPath { nodes: path }
}
