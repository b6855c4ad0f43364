//! Graphs with directed, blunt and bidirected edges.

mod parse;
mod structure;

pub use structure::{BluntComponent, Condensation, CondensationNode, Diagnostic};
pub(crate) use structure::topological_order;

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

use crate::nodeset::NodeSet;

/// Dense index of a node inside one graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    Directed { tail: NodeId, head: NodeId },
    /// Endpoints are stored with `a <= b`.
    Blunt(NodeId, NodeId),
    /// Endpoints are stored with `a <= b`.
    Bidirected(NodeId, NodeId),
}

impl Edge {
    pub fn directed(tail: NodeId, head: NodeId) -> Edge {
        Edge::Directed { tail, head }
    }

    pub fn blunt(a: NodeId, b: NodeId) -> Edge {
        Edge::Blunt(a.min(b), a.max(b))
    }

    pub fn bidirected(a: NodeId, b: NodeId) -> Edge {
        Edge::Bidirected(a.min(b), a.max(b))
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        match *self {
            Edge::Directed { tail, head } => (tail, head),
            Edge::Blunt(a, b) | Edge::Bidirected(a, b) => (a, b),
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Edge::Directed { .. } => 0,
            Edge::Blunt(..) => 1,
            Edge::Bidirected(..) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphClass {
    /// Directed and blunt edges.
    Cdg,
    /// Directed and bidirected edges.
    Dmg,
    /// Directed edges only.
    Dg,
}

impl GraphClass {
    fn admits(self, e: &Edge) -> bool {
        matches!(
            (self, e),
            (_, Edge::Directed { .. }) | (GraphClass::Cdg, Edge::Blunt(..)) | (GraphClass::Dmg, Edge::Bidirected(..))
        )
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphClass::Cdg => "cdg",
            GraphClass::Dmg => "dmg",
            GraphClass::Dg => "dg",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("blunt loop at node `{0}` is not allowed")]
    BluntLoop(String),
    #[error("edge `{edge}` is not allowed in a {class}")]
    ClassViolation { class: GraphClass, edge: String },
    #[error("graph mixes blunt and bidirected edges")]
    MixedClass,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid node label `{0}`")]
    InvalidLabel(String),
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("graphs have different node sets")]
    NodeSetMismatch,
}

pub(crate) fn valid_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Immutable graph. Build one with [`GraphBuilder`] or [`Graph::parse`].
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    pa: Vec<NodeSet>,
    ch: Vec<NodeSet>,
    blunt: Vec<NodeSet>,
    bi: Vec<NodeSet>,
    declared: Option<GraphClass>,
}

impl Graph {
    /// Graph on the given labels with no edges.
    pub fn with_nodes<S: AsRef<str>>(labels: &[S]) -> Result<Graph, GraphError> {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        let mut owned = Vec::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            let l = l.as_ref();
            if !valid_label(l) {
                return Err(GraphError::InvalidLabel(l.to_string()));
            }
            if index.insert(l.to_string(), NodeId(i)).is_some() {
                return Err(GraphError::DuplicateNode(l.to_string()));
            }
            owned.push(l.to_string());
        }
        Ok(Graph {
            labels: owned,
            index,
            pa: vec![NodeSet::empty(n); n],
            ch: vec![NodeSet::empty(n); n],
            blunt: vec![NodeSet::empty(n); n],
            bi: vec![NodeSet::empty(n); n],
            declared: None,
        })
    }

    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        parse::parse(text)
    }

    pub fn to_cdg(&self) -> String {
        parse::serialize(self)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n()).map(NodeId)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.0]
    }

    pub fn node(&self, label: &str) -> Result<NodeId, GraphError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(label.to_string()))
    }

    /// Resolves a list of labels to a node set.
    pub fn node_set<S: AsRef<str>>(&self, labels: &[S]) -> Result<NodeSet, GraphError> {
        let mut s = self.empty_set();
        for l in labels {
            s.insert(self.node(l.as_ref())?);
        }
        Ok(s)
    }

    pub fn set_labels(&self, s: &NodeSet) -> Vec<String> {
        let mut v: Vec<String> = s.iter().map(|x| self.label(x).to_string()).collect();
        v.sort();
        v
    }

    pub fn empty_set(&self) -> NodeSet {
        NodeSet::empty(self.n())
    }

    pub fn full_set(&self) -> NodeSet {
        NodeSet::full(self.n())
    }

    pub fn singleton(&self, v: NodeId) -> NodeSet {
        NodeSet::singleton(self.n(), v)
    }

    /// Declared class if any, otherwise the narrowest class containing the edges.
    pub fn class(&self) -> GraphClass {
        if let Some(c) = self.declared {
            return c;
        }
        if self.bi.iter().any(|s| !s.is_empty()) {
            GraphClass::Dmg
        } else if self.blunt.iter().any(|s| !s.is_empty()) {
            GraphClass::Cdg
        } else {
            GraphClass::Dg
        }
    }

    pub fn declared_class(&self) -> Option<GraphClass> {
        self.declared
    }

    /// Parents including `v` itself when the loop `v -> v` is present.
    pub fn parents(&self, v: NodeId) -> &NodeSet {
        &self.pa[v.0]
    }

    pub fn children(&self, v: NodeId) -> &NodeSet {
        &self.ch[v.0]
    }

    pub fn blunt_neighbors(&self, v: NodeId) -> &NodeSet {
        &self.blunt[v.0]
    }

    pub fn bidirected_neighbors(&self, v: NodeId) -> &NodeSet {
        &self.bi[v.0]
    }

    pub fn has_directed(&self, tail: NodeId, head: NodeId) -> bool {
        self.pa[head.0].contains(tail)
    }

    pub fn has_blunt(&self, a: NodeId, b: NodeId) -> bool {
        self.blunt[a.0].contains(b)
    }

    pub fn has_bidirected(&self, a: NodeId, b: NodeId) -> bool {
        self.bi[a.0].contains(b)
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        match *e {
            Edge::Directed { tail, head } => self.has_directed(tail, head),
            Edge::Blunt(a, b) => self.has_blunt(a, b),
            Edge::Bidirected(a, b) => self.has_bidirected(a, b),
        }
    }

    /// True if `a` and `b` are joined by at least one edge of any kind.
    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.pa[a.0].contains(b)
            || self.ch[a.0].contains(b)
            || self.blunt[a.0].contains(b)
            || self.bi[a.0].contains(b)
    }

    /// All edges in canonical order: directed, blunt, bidirected, each sorted by labels.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for v in self.nodes() {
            for u in self.pa[v.0].iter() {
                out.push(Edge::directed(u, v));
            }
            for u in self.blunt[v.0].iter().filter(|&u| u > v) {
                out.push(Edge::blunt(v, u));
            }
            for u in self.bi[v.0].iter().filter(|&u| u >= v) {
                out.push(Edge::bidirected(v, u));
            }
        }
        out.sort_by(|a, b| self.edge_order(a, b));
        out
    }

    pub fn edge_count(&self) -> usize {
        let d: usize = self.pa.iter().map(|s| s.len()).sum();
        let u: usize = self.blunt.iter().map(|s| s.len()).sum::<usize>() / 2;
        let mut b = 0;
        for v in self.nodes() {
            b += self.bi[v.0].iter().filter(|&u| u >= v).count();
        }
        d + u + b
    }

    pub fn directed_count(&self) -> usize {
        self.pa.iter().map(|s| s.len()).sum()
    }

    pub fn blunt_count(&self) -> usize {
        self.blunt.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn edge_order(&self, a: &Edge, b: &Edge) -> std::cmp::Ordering {
        let key = |e: &Edge| {
            let (x, y) = e.endpoints();
            let (lx, ly) = (self.label(x), self.label(y));
            match e {
                Edge::Directed { .. } => (e.kind_rank(), lx, ly),
                _ if lx <= ly => (e.kind_rank(), lx, ly),
                _ => (e.kind_rank(), ly, lx),
            }
        };
        key(a).cmp(&key(b))
    }

    pub fn format_edge(&self, e: &Edge) -> String {
        let (a, b) = e.endpoints();
        let (la, lb) = (self.label(a), self.label(b));
        match e {
            Edge::Directed { .. } => format!("{la} -> {lb}"),
            _ => {
                let (x, y) = if la <= lb { (la, lb) } else { (lb, la) };
                match e {
                    Edge::Blunt(..) => format!("{x} |-| {y}"),
                    _ => format!("{x} <-> {y}"),
                }
            }
        }
    }

    /// New graph with `e` added. Adding an existing edge returns an equal graph.
    pub fn add_edge(&self, e: Edge) -> Result<Graph, GraphError> {
        let mut g = self.clone();
        g.insert_edge(e)?;
        Ok(g)
    }

    /// New graph with `e` removed (no-op if absent).
    pub fn remove_edge(&self, e: Edge) -> Graph {
        let mut g = self.clone();
        g.delete_edge(e);
        g
    }

    pub(crate) fn insert_edge(&mut self, e: Edge) -> Result<(), GraphError> {
        if let Some(c) = self.declared {
            if !c.admits(&e) {
                return Err(GraphError::ClassViolation {
                    class: c,
                    edge: self.format_edge(&e),
                });
            }
        }
        match e {
            Edge::Directed { tail, head } => {
                self.pa[head.0].insert(tail);
                self.ch[tail.0].insert(head);
            }
            Edge::Blunt(a, b) => {
                if a == b {
                    return Err(GraphError::BluntLoop(self.label(a).to_string()));
                }
                if self.bi.iter().any(|s| !s.is_empty()) {
                    return Err(GraphError::MixedClass);
                }
                self.blunt[a.0].insert(b);
                self.blunt[b.0].insert(a);
            }
            Edge::Bidirected(a, b) => {
                if self.blunt.iter().any(|s| !s.is_empty()) {
                    return Err(GraphError::MixedClass);
                }
                self.bi[a.0].insert(b);
                self.bi[b.0].insert(a);
            }
        }
        Ok(())
    }

    pub(crate) fn delete_edge(&mut self, e: Edge) {
        match e {
            Edge::Directed { tail, head } => {
                self.pa[head.0].remove(tail);
                self.ch[tail.0].remove(head);
            }
            Edge::Blunt(a, b) => {
                self.blunt[a.0].remove(b);
                self.blunt[b.0].remove(a);
            }
            Edge::Bidirected(a, b) => {
                self.bi[a.0].remove(b);
                self.bi[b.0].remove(a);
            }
        }
    }

    pub(crate) fn set_declared(&mut self, c: Option<GraphClass>) {
        self.declared = c;
    }

    /// Same nodes, every directed loop added.
    pub fn with_all_loops(&self) -> Graph {
        let mut g = self.clone();
        for v in self.nodes() {
            g.pa[v.0].insert(v);
            g.ch[v.0].insert(v);
        }
        g
    }

    pub fn has_all_loops(&self) -> bool {
        self.nodes().all(|v| self.has_directed(v, v))
    }

    /// Same nodes and directed edges, blunt edges replaced by `pairs`.
    pub fn with_blunt_edges(&self, pairs: &[(NodeId, NodeId)]) -> Result<Graph, GraphError> {
        let mut g = self.directed_part();
        g.declared = self.declared;
        for &(a, b) in pairs {
            g.insert_edge(Edge::blunt(a, b))?;
        }
        Ok(g)
    }

    pub fn blunt_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for v in self.nodes() {
            for u in self.blunt[v.0].iter().filter(|&u| u > v) {
                out.push((v, u));
            }
        }
        out
    }

    pub fn same_nodes(&self, other: &Graph) -> bool {
        self.labels == other.labels
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges().iter().map(|e| self.format_edge(e)).collect();
        f.debug_struct("Graph")
            .field("nodes", &self.labels)
            .field("edges", &edges)
            .finish()
    }
}

/// Label-based builder used by tests, fixtures and generators.
#[derive(Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    edges: Vec<(u8, String, String)>,
    class: Option<GraphClass>,
    loops: bool,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nodes<S: AsRef<str>>(mut self, labels: &[S]) -> Self {
        for l in labels {
            self = self.node(l.as_ref());
        }
        self
    }

    pub fn node(mut self, label: &str) -> Self {
        if !self.labels.iter().any(|l| l == label) {
            self.labels.push(label.to_string());
        }
        self
    }

    pub fn directed(self, a: &str, b: &str) -> Self {
        self.edge(0, a, b)
    }

    pub fn blunt(self, a: &str, b: &str) -> Self {
        self.edge(1, a, b)
    }

    pub fn bidirected(self, a: &str, b: &str) -> Self {
        self.edge(2, a, b)
    }

    /// Adds a directed loop at every node when built.
    pub fn all_loops(mut self) -> Self {
        self.loops = true;
        self
    }

    pub fn class(mut self, c: GraphClass) -> Self {
        self.class = Some(c);
        self
    }

    fn edge(mut self, kind: u8, a: &str, b: &str) -> Self {
        self = self.node(a).node(b);
        self.edges.push((kind, a.to_string(), b.to_string()));
        self
    }

    pub fn build(self) -> Result<Graph, GraphError> {
        let mut g = Graph::with_nodes(&self.labels)?;
        g.declared = self.class;
        for (kind, a, b) in &self.edges {
            let (a, b) = (g.node(a)?, g.node(b)?);
            let e = match kind {
                0 => Edge::directed(a, b),
                1 => Edge::blunt(a, b),
                _ => Edge::bidirected(a, b),
            };
            g.insert_edge(e)?;
        }
        if self.loops {
            g = g.with_all_loops();
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_collects_nodes_in_order() {
        let g = GraphBuilder::new().directed("b", "a").blunt("a", "c").build().unwrap();
        assert_eq!(g.labels(), &["b", "a", "c"]);
        assert_eq!(g.class(), GraphClass::Cdg);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn blunt_loop_rejected() {
        let err = GraphBuilder::new().blunt("a", "a").build().unwrap_err();
        assert_eq!(err, GraphError::BluntLoop("a".into()));
    }

    #[test]
    fn declared_class_rejects_foreign_edges() {
        let err = GraphBuilder::new()
            .class(GraphClass::Dmg)
            .blunt("a", "b")
            .build()
            .unwrap_err();
        assert!(matches!(err, GraphError::ClassViolation { .. }));
        let err = GraphBuilder::new().blunt("a", "b").bidirected("a", "b").build().unwrap_err();
        assert_eq!(err, GraphError::MixedClass);
    }

    #[test]
    fn add_existing_edge_is_idempotent() {
        let g = GraphBuilder::new().directed("a", "b").build().unwrap();
        let e = Edge::directed(g.node("a").unwrap(), g.node("b").unwrap());
        assert_eq!(g.add_edge(e).unwrap(), g);
    }

    #[test]
    fn bidirected_loop_counts_once() {
        let g = GraphBuilder::new().bidirected("a", "a").bidirected("a", "b").build().unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.class(), GraphClass::Dmg);
    }
}
