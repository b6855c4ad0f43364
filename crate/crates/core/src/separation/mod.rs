//! μ-separation, m-separation and related connectivity notions.
//!
//! A walk from `α` to `β` is μ-connecting given `C` when `α ∉ C`, every
//! collider on it lies in `an(C)`, no noncollider lies in `C`, and the last
//! edge has a head at `β`. Queries with `A ⊆ C` are therefore separations by
//! vacuity; `A`, `B` and `C` may otherwise overlap freely.

pub(crate) mod augment;
mod model;
mod walk;

pub use model::IndependenceModel;
pub use walk::{brute_force_connected, is_connecting_walk, BruteOptions, FinalMark, Incidence, Incidences, Mark, Walk, WalkRules};

use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId};
use crate::nodeset::NodeSet;
use augment::{undirected_separated, Skeleton};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeparationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("node set does not belong to this graph")]
    UniverseMismatch,
    #[error("sets must be disjoint")]
    Overlap,
    #[error("the two nodes must differ")]
    SameNode,
    #[error("`{0}` is not in the conditioning set W")]
    NotInW(String),
    #[error("a weak inducing path joins `{0}` and `{1}`; no separator exists")]
    WeakInducingPath(String, String),
    #[error("graph has {n} nodes, above the cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
}

/// Is `B` separated from `A` given `C`?
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationQuery {
    pub a: NodeSet,
    pub b: NodeSet,
    pub c: NodeSet,
}

impl SeparationQuery {
    pub fn new(g: &Graph, a: NodeSet, b: NodeSet, c: NodeSet) -> Result<Self, SeparationError> {
        for s in [&a, &b, &c] {
            if s.universe() != g.n() {
                return Err(SeparationError::UniverseMismatch);
            }
        }
        Ok(SeparationQuery { a, b, c })
    }

    pub fn from_labels<S: AsRef<str>>(g: &Graph, a: &[S], b: &[S], c: &[S]) -> Result<Self, SeparationError> {
        Self::new(g, g.node_set(a)?, g.node_set(b)?, g.node_set(c)?)
    }

    pub fn pair(g: &Graph, alpha: NodeId, beta: NodeId, c: NodeSet) -> Self {
        SeparationQuery {
            a: g.singleton(alpha),
            b: g.singleton(beta),
            c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Undirected separation in the augmented graph with proxy targets.
    Augmentation,
    /// Breadth-first search over (node, arrival mark) states.
    WalkSearch,
    /// Explicit depth-first walk enumeration.
    BruteForce,
}

/// The μ-separation decider used throughout the crate (augmentation criterion).
pub fn mu_separated(g: &Graph, q: &SeparationQuery) -> bool {
    augmented_separated(g, q)
}

pub fn separated_with(g: &Graph, q: &SeparationQuery, method: Method) -> bool {
    match method {
        Method::Augmentation => augmented_separated(g, q),
        Method::WalkSearch => walk_state_search(g, q),
        Method::BruteForce => brute_force_separated(g, q, BruteOptions::for_graph(g)),
    }
}

/// Adds a proxy `βᵖ` per target with the parents of `β`, restricts to
/// `an(A ∪ Bᵖ ∪ C)`, joins collider-connected pairs and tests whether `C`
/// separates `A ∖ C` from the proxies.
pub fn augmented_separated(g: &Graph, q: &SeparationQuery) -> bool {
    let sources = q.a.difference(&q.c);
    if sources.is_empty() || q.b.is_empty() {
        return true;
    }
    let sk = Skeleton::with_proxies(g, &q.b);
    let n = sk.n;
    let widen = |s: &NodeSet| NodeSet::from_nodes(n, s.iter());
    let proxies = NodeSet::from_nodes(n, (g.n()..n).map(NodeId));
    let mut seeds = widen(&q.a.union(&q.c));
    seeds.union_with(&proxies);
    let r = sk.ancestors(&seeds);
    let adj = sk.augmented(&r);
    undirected_separated(&adj, &widen(&sources), &proxies, &widen(&q.c))
}

pub fn walk_state_search(g: &Graph, q: &SeparationQuery) -> bool {
    connecting_walk(g, q).is_none()
}

/// A shortest μ-connecting walk from `A` to `B` given `C`, if any.
pub fn connecting_walk(g: &Graph, q: &SeparationQuery) -> Option<Walk> {
    let an_c = g.ancestors(&q.c);
    let rules = WalkRules {
        collider_ok: &an_c,
        blocked: &q.c,
        final_mark: FinalMark::Head,
    };
    let inc = Incidences::new(g);
    walk::state_search(&inc, g.n(), &q.a.difference(&q.c), &rules, Some(&q.b)).1
}

pub fn brute_force_separated(g: &Graph, q: &SeparationQuery, opts: BruteOptions) -> bool {
    walk::brute_force_connected(g, &q.a, &q.b, &q.c, opts).is_none()
}

fn check_disjoint(sets: &[&NodeSet]) -> Result<(), SeparationError> {
    for (i, x) in sets.iter().enumerate() {
        for y in &sets[i + 1..] {
            if x.intersects(y) {
                return Err(SeparationError::Overlap);
            }
        }
    }
    Ok(())
}

/// Symmetric separation: no walk between `A` and `B` whose colliders are in
/// `an(C)` and whose noncolliders avoid `C`. Requires pairwise disjoint sets.
pub fn m_separated(g: &Graph, a: &NodeSet, b: &NodeSet, c: &NodeSet) -> Result<bool, SeparationError> {
    check_disjoint(&[a, b, c])?;
    if a.is_empty() || b.is_empty() {
        return Ok(true);
    }
    let sk = Skeleton::with_proxies(g, &g.empty_set());
    let r = sk.ancestors(&a.union(b).union(c));
    let adj = sk.augmented(&r);
    Ok(undirected_separated(&adj, a, b, c))
}

/// m-separation decided by the state search instead of augmentation.
pub fn m_separated_by_walks(g: &Graph, a: &NodeSet, b: &NodeSet, c: &NodeSet) -> Result<bool, SeparationError> {
    check_disjoint(&[a, b, c])?;
    let an_c = g.ancestors(c);
    let rules = WalkRules {
        collider_ok: &an_c,
        blocked: c,
        final_mark: FinalMark::Any,
    };
    let inc = Incidences::new(g);
    let (reached, _) = walk::state_search(&inc, g.n(), a, &rules, None);
    Ok(!reached.intersects(b))
}

/// Is there a walk from some node of `A` to `w` with colliders in `an(W)`,
/// noncolliders outside `W`, and a neck at `w` on the last edge?
pub fn neck_reachable(g: &Graph, a: &NodeSet, w: NodeId, big_w: &NodeSet) -> Result<bool, SeparationError> {
    if !big_w.contains(w) {
        return Err(SeparationError::NotInW(g.label(w).to_string()));
    }
    Ok(neck_reachable_set(g, a, big_w).contains(w))
}

/// All nodes `w` for which [`neck_reachable`] holds (without requiring `w ∈ W`).
pub fn neck_reachable_set(g: &Graph, a: &NodeSet, big_w: &NodeSet) -> NodeSet {
    let an_w = g.ancestors(big_w);
    let rules = WalkRules {
        collider_ok: &an_w,
        blocked: big_w,
        final_mark: FinalMark::Neck,
    };
    let inc = Incidences::new(g);
    walk::state_search(&inc, g.n(), a, &rules, None).0
}

/// Is there a walk between `α` and `β` on which every nonendpoint node is a
/// collider lying in `allowed`? Endpoints never count as interior.
pub fn collider_connected(g: &Graph, alpha: NodeId, beta: NodeId, allowed: &NodeSet) -> bool {
    if g.adjacent(alpha, beta) {
        return true;
    }
    let mut interior = allowed.clone();
    interior.remove(alpha);
    interior.remove(beta);
    // interior nodes entered from alpha through an edge with a neck there
    let neck_from = |x: NodeId| {
        let mut s = g.children(x).union(g.blunt_neighbors(x));
        s.union_with(g.bidirected_neighbors(x));
        s
    };
    let targets = neck_from(beta).intersection(&interior);
    if targets.is_empty() {
        return false;
    }
    let mut seen = neck_from(alpha).intersection(&interior);
    let mut stack = seen.to_vec();
    while let Some(x) = stack.pop() {
        if targets.contains(x) {
            return true;
        }
        let step = g.blunt_neighbors(x).union(g.bidirected_neighbors(x)).intersection(&interior);
        for y in step.iter() {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    false
}

/// A collider path between `α` and `β` whose interior nodes are ancestors of `α` or `β`.
pub fn weak_inducing_path_exists(g: &Graph, alpha: NodeId, beta: NodeId) -> Result<bool, SeparationError> {
    if alpha == beta {
        return Err(SeparationError::SameNode);
    }
    let an = g.ancestors(&NodeSet::from_nodes(g.n(), [alpha, beta]));
    Ok(collider_connected(g, alpha, beta, &an))
}

/// `{γ ∈ an(α, β) : γ and β collider connected} ∖ {α, β}`, which separates
/// `β` from `α` whenever no weak inducing path joins them.
pub fn canonical_separator(g: &Graph, alpha: NodeId, beta: NodeId) -> Result<NodeSet, SeparationError> {
    if weak_inducing_path_exists(g, alpha, beta)? {
        return Err(SeparationError::WeakInducingPath(
            g.label(alpha).to_string(),
            g.label(beta).to_string(),
        ));
    }
    let all = g.full_set();
    let an = g.ancestors(&NodeSet::from_nodes(g.n(), [alpha, beta]));
    let mut d = g.empty_set();
    for x in an.iter() {
        if x != alpha && x != beta && collider_connected(g, x, beta, &all) {
            d.insert(x);
        }
    }
    Ok(d)
}

/// Default node cap for independence-model extraction.
pub const MODEL_CAP: usize = 12;

pub fn independence_model(g: &Graph, cap: usize) -> Result<IndependenceModel, SeparationError> {
    if g.n() > cap || g.n() > 20 {
        return Err(SeparationError::CapExceeded { n: g.n(), cap: cap.min(20) });
    }
    Ok(IndependenceModel::compute(g))
}
