//! Ancestry, strongly connected components, ancestral sets and blunt components.

use super::{Edge, Graph, NodeId};
use crate::nodeset::NodeSet;

/// Strongly connected components of the directed part and the DAG between them.
#[derive(Clone, Debug)]
pub struct Condensation {
    pub components: Vec<NodeSet>,
    pub component_of: Vec<usize>,
    /// `(i, j)` with `i != j` whenever some node of component `i` points into component `j`.
    pub dag_edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
}

/// A node of the completed condensation: the extra empty root or a component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CondensationNode {
    Empty,
    Component(usize),
}

impl Condensation {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn parents(&self, c: usize) -> &[usize] {
        &self.parents[c]
    }

    /// Components that are ancestors of `c` in the DAG, `c` included.
    pub fn ancestor_components(&self, c: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![c];
        seen[c] = true;
        while let Some(x) = stack.pop() {
            for &p in &self.parents[x] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        (0..self.len()).filter(|&i| seen[i]).collect()
    }

    /// Nodes of the completed condensation, the empty root first.
    pub fn completed_nodes(&self) -> Vec<CondensationNode> {
        std::iter::once(CondensationNode::Empty)
            .chain((0..self.len()).map(CondensationNode::Component))
            .collect()
    }

    /// Node set represented by a completed-condensation node.
    pub fn members(&self, node: CondensationNode, universe: usize) -> NodeSet {
        match node {
            CondensationNode::Empty => NodeSet::empty(universe),
            CondensationNode::Component(i) => self.components[i].clone(),
        }
    }

    /// Strict ancestors of `node` in the completed condensation.
    pub fn completed_strict_ancestors(&self, node: CondensationNode) -> Vec<CondensationNode> {
        match node {
            CondensationNode::Empty => Vec::new(),
            CondensationNode::Component(c) => std::iter::once(CondensationNode::Empty)
                .chain(
                    self.ancestor_components(c)
                        .into_iter()
                        .filter(|&a| a != c)
                        .map(CondensationNode::Component),
                )
                .collect(),
        }
    }
}

/// Connected component of the blunt-edge subgraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BluntComponent {
    pub nodes: NodeSet,
    /// The node has no blunt edge at all.
    pub isolated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    MissingLoop(String),
    BluntLoop(String),
    ClassViolation(String),
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::MissingLoop(v) => write!(f, "missing directed loop: {v}"),
            Diagnostic::BluntLoop(v) => write!(f, "blunt loop: {v}"),
            Diagnostic::ClassViolation(e) => write!(f, "class violation: {e}"),
        }
    }
}

impl Graph {
    /// All nodes with a directed path (possibly trivial) into `c`.
    pub fn ancestors(&self, c: &NodeSet) -> NodeSet {
        let mut out = c.clone();
        let mut stack: Vec<NodeId> = c.to_vec();
        while let Some(v) = stack.pop() {
            for p in self.parents(v).iter() {
                if out.insert(p) {
                    stack.push(p);
                }
            }
        }
        out
    }

    pub fn ancestors_of(&self, v: NodeId) -> NodeSet {
        self.ancestors(&self.singleton(v))
    }

    pub fn descendants(&self, c: &NodeSet) -> NodeSet {
        let mut out = c.clone();
        let mut stack: Vec<NodeId> = c.to_vec();
        while let Some(v) = stack.pop() {
            for p in self.children(v).iter() {
                if out.insert(p) {
                    stack.push(p);
                }
            }
        }
        out
    }

    /// Tarjan's algorithm over directed edges; components are numbered by their
    /// smallest member.
    pub fn condensation(&self) -> Condensation {
        let n = self.n();
        let mut tarjan = Tarjan {
            g: self,
            counter: 0,
            index: vec![usize::MAX; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            comps: Vec::new(),
        };
        for v in 0..n {
            if tarjan.index[v] == usize::MAX {
                tarjan.visit(v);
            }
        }
        let mut comps = tarjan.comps;
        comps.sort_by_key(|c| c.first().map(|v| v.index()));
        let mut component_of = vec![0; n];
        for (i, c) in comps.iter().enumerate() {
            for v in c.iter() {
                component_of[v.index()] = i;
            }
        }
        let k = comps.len();
        let mut parents = vec![Vec::new(); k];
        let mut dag_edges = Vec::new();
        for v in self.nodes() {
            for c in self.children(v).iter() {
                let (i, j) = (component_of[v.index()], component_of[c.index()]);
                if i != j && !parents[j].contains(&i) {
                    parents[j].push(i);
                    dag_edges.push((i, j));
                }
            }
        }
        for p in &mut parents {
            p.sort_unstable();
        }
        dag_edges.sort_unstable();
        Condensation {
            components: comps,
            component_of,
            dag_edges,
            parents,
        }
    }

    /// Every nonempty `A` with `A = an(A)`, ordered by cardinality and then
    /// lexicographically by members.
    pub fn ancestral_sets(&self) -> Vec<NodeSet> {
        let cond = self.condensation();
        ancestral_sets_of(&cond, self.n())
    }

    pub fn blunt_components(&self) -> Vec<BluntComponent> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for v in self.nodes() {
            if seen[v.index()] {
                continue;
            }
            let mut comp = self.empty_set();
            let mut stack = vec![v];
            seen[v.index()] = true;
            while let Some(x) = stack.pop() {
                comp.insert(x);
                for y in self.blunt_neighbors(x).iter() {
                    if !seen[y.index()] {
                        seen[y.index()] = true;
                        stack.push(y);
                    }
                }
            }
            let isolated = self.blunt_neighbors(v).is_empty();
            out.push(BluntComponent { nodes: comp, isolated });
        }
        out
    }

    /// Subgraph on `a`, keeping the original relative node order.
    pub fn induced_subgraph(&self, a: &NodeSet) -> Graph {
        let keep: Vec<NodeId> = a.to_vec();
        let labels: Vec<&str> = keep.iter().map(|&v| self.label(v)).collect();
        let mut g = Graph::with_nodes(&labels).expect("labels come from a valid graph");
        g.set_declared(self.declared_class());
        let mut map = vec![None; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            map[v.index()] = Some(NodeId(i));
        }
        for e in self.edges() {
            let (x, y) = e.endpoints();
            if let (Some(x2), Some(y2)) = (map[x.index()], map[y.index()]) {
                let e2 = match e {
                    Edge::Directed { .. } => Edge::directed(x2, y2),
                    Edge::Blunt(..) => Edge::blunt(x2, y2),
                    Edge::Bidirected(..) => Edge::bidirected(x2, y2),
                };
                g.insert_edge(e2).expect("edge valid in parent graph");
            }
        }
        g
    }

    pub fn directed_part(&self) -> Graph {
        let mut g = self.clone();
        for e in self.edges() {
            if !matches!(e, Edge::Directed { .. }) {
                g.delete_edge(e);
            }
        }
        g
    }

    pub fn blunt_part(&self) -> Graph {
        let mut g = self.clone();
        for e in self.edges() {
            if !matches!(e, Edge::Blunt(..)) {
                g.delete_edge(e);
            }
        }
        g
    }

    /// Structural problems relevant to the equivalence algorithms.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for v in self.nodes() {
            if !self.has_directed(v, v) {
                out.push(Diagnostic::MissingLoop(self.label(v).to_string()));
            }
            if self.has_blunt(v, v) {
                out.push(Diagnostic::BluntLoop(self.label(v).to_string()));
            }
        }
        if let Some(c) = self.declared_class() {
            for e in self.edges() {
                if !c.admits(&e) {
                    out.push(Diagnostic::ClassViolation(self.format_edge(&e)));
                }
            }
        }
        out
    }
}

pub(crate) fn ancestral_sets_of(cond: &Condensation, universe: usize) -> Vec<NodeSet> {
    let k = cond.len();
    // Components sorted so every parent precedes its children.
    let order = topological_order(cond);
    let mut out = Vec::new();
    let mut included = vec![false; k];
    let mut current = NodeSet::empty(universe);
    enumerate_downsets(cond, &order, 0, &mut included, &mut current, &mut out);
    out.retain(|s| !s.is_empty());
    out.sort_by(|a, b| a.cmp_card_lex(b));
    out
}

fn enumerate_downsets(
    cond: &Condensation,
    order: &[usize],
    pos: usize,
    included: &mut [bool],
    current: &mut NodeSet,
    out: &mut Vec<NodeSet>,
) {
    if pos == order.len() {
        out.push(current.clone());
        return;
    }
    let c = order[pos];
    enumerate_downsets(cond, order, pos + 1, included, current, out);
    if cond.parents(c).iter().all(|&p| included[p]) {
        included[c] = true;
        let saved = current.clone();
        current.union_with(&cond.components[c]);
        enumerate_downsets(cond, order, pos + 1, included, current, out);
        *current = saved;
        included[c] = false;
    }
}

pub(crate) fn topological_order(cond: &Condensation) -> Vec<usize> {
    let k = cond.len();
    let mut indeg: Vec<usize> = (0..k).map(|c| cond.parents(c).len()).collect();
    let mut children = vec![Vec::new(); k];
    for &(i, j) in &cond.dag_edges {
        children[i].push(j);
    }
    let mut ready: Vec<usize> = (0..k).filter(|&c| indeg[c] == 0).rev().collect();
    let mut order = Vec::with_capacity(k);
    while let Some(c) = ready.pop() {
        order.push(c);
        for &d in &children[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                ready.push(d);
            }
        }
    }
    debug_assert_eq!(order.len(), k, "condensation must be acyclic");
    order
}

struct Tarjan<'a> {
    g: &'a Graph,
    counter: usize,
    index: Vec<usize>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    comps: Vec<NodeSet>,
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = self.counter;
        self.low[v] = self.counter;
        self.counter += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        let children: Vec<usize> = self.g.children(NodeId(v)).iter().map(|c| c.index()).collect();
        for w in children {
            if self.index[w] == usize::MAX {
                self.visit(w);
                self.low[v] = self.low[v].min(self.low[w]);
            } else if self.on_stack[w] {
                self.low[v] = self.low[v].min(self.index[w]);
            }
        }
        if self.low[v] == self.index[v] {
            let mut comp = NodeSet::empty(self.g.n());
            loop {
                let w = self.stack.pop().expect("tarjan stack underflow");
                self.on_stack[w] = false;
                comp.insert(NodeId(w));
                if w == v {
                    break;
                }
            }
            self.comps.push(comp);
        }
    }
}
