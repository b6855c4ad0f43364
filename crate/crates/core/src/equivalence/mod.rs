//! Markov equivalence of cDGs.
//!
//! Two cDGs are Markov equivalent when they have the same μ-separations.
//! [`markov_equivalent`] decides this by comparing directed parts and then
//! collider connections on every ancestral set; [`collider_equivalent`]
//! compares collider paths directly; [`markov_equivalent_oracle`] compares
//! full independence models and is exponential in the node count.
//!
//! Except for the oracle, these operations expect cDGs containing every
//! directed loop and reject graphs with bidirected edges.

mod connections;
mod class;
mod collider;
mod permutation;
mod vct;

pub use connections::{collider_connections, count_ancestral_sets, same_collider_connections};
pub use class::{
    blunt_path_edge_addition, enumerate_class, is_maximal, BluntAdditionCheck, EquivalenceClass, MaximalityReport,
    CLASS_SLOT_CAP,
};
pub use collider::{
    collider_equivalence_witness, collider_equivalent, collider_path_covered, is_collider_path, ColliderPath,
    UncoveredPath, COLLIDER_STATE_CAP,
};
pub use permutation::{permutation_equivalent_sufficient, permutation_graph, Permutation, PermutationCheck};
pub use vct::{maximal_vcts, virtual_collider_tripaths, vct_prescreen, Prescreen, VirtualColliderTripath};

use thiserror::Error;

use crate::graph::{Graph, GraphClass, GraphError, NodeId};
use crate::nodeset::NodeSet;
use crate::separation::{self, mu_separated, SeparationError, SeparationQuery};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivalenceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error("graphs have different node sets")]
    NodeSetMismatch,
    #[error("node `{0}` has no directed loop (complete loops first, e.g. with --add-loops)")]
    MissingLoop(String),
    #[error("equivalence is only implemented for cDGs, got a {0}")]
    NotCdg(GraphClass),
    #[error("{what} is {size}, above the cap of {cap}")]
    CapExceeded { what: &'static str, size: usize, cap: usize },
    #[error("not a permutation of the node set")]
    InvalidPermutation,
    #[error("permutation moves `{0}`, which lies outside S")]
    MovesOutsideSet(String),
    #[error("edge `{0}` is already present")]
    EdgePresent(String),
}

/// Checks the standing assumptions: a cDG with every directed loop.
pub fn require_looped_cdg(g: &Graph) -> Result<(), EquivalenceError> {
    if g.class() == GraphClass::Dmg {
        return Err(EquivalenceError::NotCdg(GraphClass::Dmg));
    }
    if let Some(v) = g.nodes().find(|&v| !g.has_directed(v, v)) {
        return Err(EquivalenceError::MissingLoop(g.label(v).to_string()));
    }
    Ok(())
}

fn require_pair(g1: &Graph, g2: &Graph) -> Result<(), EquivalenceError> {
    if !g1.same_nodes(g2) {
        return Err(EquivalenceError::NodeSetMismatch);
    }
    require_looped_cdg(g1)?;
    require_looped_cdg(g2)
}

pub fn same_directed_part(g1: &Graph, g2: &Graph) -> Result<bool, EquivalenceError> {
    if !g1.same_nodes(g2) {
        return Err(EquivalenceError::NodeSetMismatch);
    }
    Ok(first_directed_difference(g1, g2).is_none())
}

/// First `(tail, head)` in node order present in exactly one graph.
fn first_directed_difference(g1: &Graph, g2: &Graph) -> Option<(NodeId, NodeId)> {
    for b in g1.nodes() {
        let diff = g1.parents(b).difference(g2.parents(b)).union(&g2.parents(b).difference(g1.parents(b)));
        if let Some(a) = diff.first() {
            return Some((a, b));
        }
    }
    None
}

/// A separation statement true in exactly one of two graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinguishingQuery {
    pub query: SeparationQuery,
    pub separated_in_first: bool,
}

/// Why two graphs are not Markov equivalent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `tail -> head` is in exactly one graph.
    DirectedEdge {
        tail: NodeId,
        head: NodeId,
        in_first: bool,
        query: DistinguishingQuery,
    },
    /// `alpha` and `beta` are collider connected in exactly one of the
    /// subgraphs induced by the ancestral set.
    ColliderConnection {
        ancestral_set: NodeSet,
        alpha: NodeId,
        beta: NodeId,
        in_first: bool,
        query: Option<DistinguishingQuery>,
    },
}

impl Witness {
    pub fn query(&self) -> Option<&DistinguishingQuery> {
        match self {
            Witness::DirectedEdge { query, .. } => Some(query),
            Witness::ColliderConnection { query, .. } => query.as_ref(),
        }
    }
}

pub fn markov_equivalent(g1: &Graph, g2: &Graph) -> Result<bool, EquivalenceError> {
    Ok(equivalence_witness(g1, g2)?.is_none())
}

/// Runs the ancestral-set algorithm; `None` means equivalent.
pub fn equivalence_witness(g1: &Graph, g2: &Graph) -> Result<Option<Witness>, EquivalenceError> {
    require_pair(g1, g2)?;
    if let Some((tail, head)) = first_directed_difference(g1, g2) {
        // with every loop present, tail -> head is detected by conditioning on all but tail
        let mut c = g1.full_set();
        c.remove(tail);
        let in_first = g1.has_directed(tail, head);
        let query = SeparationQuery::pair(g1, tail, head, c);
        return Ok(Some(Witness::DirectedEdge {
            tail,
            head,
            in_first,
            query: DistinguishingQuery { query, separated_in_first: !in_first },
        }));
    }
    Ok(connections::first_difference(g1, g2).map(|(a, alpha, beta, in_first)| {
        let query = distinguishing_query(g1, g2, &a, alpha, beta);
        Witness::ColliderConnection { ancestral_set: a, alpha, beta, in_first, query }
    }))
}

fn distinguishes(g1: &Graph, g2: &Graph, q: SeparationQuery) -> Option<DistinguishingQuery> {
    let s1 = mu_separated(g1, &q);
    (s1 != mu_separated(g2, &q)).then_some(DistinguishingQuery { query: q, separated_in_first: s1 })
}

/// Looks for a separation statement that tells the graphs apart, starting
/// from the canonical separators of the witness pair.
fn distinguishing_query(g1: &Graph, g2: &Graph, a: &NodeSet, alpha: NodeId, beta: NodeId) -> Option<DistinguishingQuery> {
    for (x, y) in [(alpha, beta), (beta, alpha)] {
        for g in [g1, g2] {
            if let Ok(d) = separation::canonical_separator(g, x, y) {
                if let Some(found) = distinguishes(g1, g2, SeparationQuery::pair(g1, x, y, d)) {
                    return Some(found);
                }
            }
        }
        let mut c = a.clone();
        c.remove(x);
        c.remove(y);
        if let Some(found) = distinguishes(g1, g2, SeparationQuery::pair(g1, x, y, c)) {
            return Some(found);
        }
    }
    if g1.n() <= separation::MODEL_CAP {
        let m1 = separation::independence_model(g1, separation::MODEL_CAP).ok()?;
        let m2 = separation::independence_model(g2, separation::MODEL_CAP).ok()?;
        let (x, y, c, in_first) = m1.first_difference(&m2)?;
        return Some(DistinguishingQuery { query: SeparationQuery::pair(g1, x, y, c), separated_in_first: in_first });
    }
    None
}

/// Default node cap for [`markov_equivalent_oracle`].
pub const ORACLE_CAP: usize = 10;

/// Compares the full independence models. Works for any two graphs on the same nodes.
pub fn markov_equivalent_oracle(g1: &Graph, g2: &Graph, cap: usize) -> Result<bool, EquivalenceError> {
    if !g1.same_nodes(g2) {
        return Err(EquivalenceError::NodeSetMismatch);
    }
    let m1 = separation::independence_model(g1, cap)?;
    let m2 = separation::independence_model(g2, cap)?;
    Ok(m1 == m2)
}
