//! Walk-level machinery: edge marks, the state search and explicit enumeration.

use std::fmt;

use crate::graph::{Edge, Graph, NodeId};
use crate::nodeset::NodeSet;

/// Symbol at one end of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mark {
    Tail,
    Head,
    Stump,
}

impl Mark {
    #[inline]
    pub fn is_neck(self) -> bool {
        !matches!(self, Mark::Tail)
    }
}

/// One way of leaving a node along an edge.
#[derive(Clone, Copy, Debug)]
pub struct Incidence {
    pub other: NodeId,
    pub here: Mark,
    pub there: Mark,
    pub edge: Edge,
}

/// Incidence lists for every node.
///
/// A directed loop is normally traversed forward only. Walking a loop
/// backwards arrives with a tail at a node that was just a collider there,
/// which never opens anything new; [`Incidences::with_reversed_loops`] keeps
/// those moves for explicit enumeration.
pub struct Incidences {
    lists: Vec<Vec<Incidence>>,
}

impl Incidences {
    pub fn new(g: &Graph) -> Self {
        Self::build(g, false)
    }

    pub fn with_reversed_loops(g: &Graph) -> Self {
        Self::build(g, true)
    }

    fn build(g: &Graph, reversed_loops: bool) -> Self {
        let mut lists = vec![Vec::new(); g.n()];
        for v in g.nodes() {
            let list = &mut lists[v.index()];
            for u in g.parents(v).iter().filter(|&u| reversed_loops || u != v) {
                list.push(Incidence { other: u, here: Mark::Head, there: Mark::Tail, edge: Edge::directed(u, v) });
            }
            for u in g.children(v).iter() {
                list.push(Incidence { other: u, here: Mark::Tail, there: Mark::Head, edge: Edge::directed(v, u) });
            }
            for u in g.blunt_neighbors(v).iter() {
                list.push(Incidence { other: u, here: Mark::Stump, there: Mark::Stump, edge: Edge::blunt(v, u) });
            }
            for u in g.bidirected_neighbors(v).iter() {
                list.push(Incidence { other: u, here: Mark::Head, there: Mark::Head, edge: Edge::bidirected(v, u) });
            }
        }
        Incidences { lists }
    }

    #[inline]
    pub fn at(&self, v: NodeId) -> &[Incidence] {
        &self.lists[v.index()]
    }
}

/// Which mark the final edge must have at the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinalMark {
    /// μ-separation: a head at the target.
    Head,
    /// Neck reachability: a head or a stump.
    Neck,
    /// m-separation: anything.
    Any,
}

impl FinalMark {
    fn accepts(self, m: Mark) -> bool {
        match self {
            FinalMark::Head => m == Mark::Head,
            FinalMark::Neck => m.is_neck(),
            FinalMark::Any => true,
        }
    }
}

/// Openness rules for intermediate nodes of a walk.
pub struct WalkRules<'a> {
    /// Colliders must lie in this set (typically `an(C)`).
    pub collider_ok: &'a NodeSet,
    /// Noncolliders must avoid this set (typically `C`).
    pub blocked: &'a NodeSet,
    pub final_mark: FinalMark,
}

impl WalkRules<'_> {
    #[inline]
    fn passes(&self, v: NodeId, arrived: Mark, leaving: Mark) -> bool {
        if arrived.is_neck() && leaving.is_neck() {
            self.collider_ok.contains(v)
        } else {
            !self.blocked.contains(v)
        }
    }
}

/// A walk as alternating nodes and edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<Edge>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn display<'a>(&'a self, g: &'a Graph) -> WalkDisplay<'a> {
        WalkDisplay { walk: self, g }
    }

    /// Alternating node labels and edge symbols, e.g. `["a", "->", "b"]`.
    pub fn tokens(&self, g: &Graph) -> Vec<String> {
        let mut out = vec![g.label(self.nodes[0]).to_string()];
        for (i, e) in self.edges.iter().enumerate() {
            let from = self.nodes[i];
            out.push(edge_symbol(e, from).to_string());
            out.push(g.label(self.nodes[i + 1]).to_string());
        }
        out
    }
}

fn edge_symbol(e: &Edge, from: NodeId) -> &'static str {
    match *e {
        Edge::Directed { tail, head } if tail == head => "->",
        Edge::Directed { tail, .. } if tail == from => "->",
        Edge::Directed { .. } => "<-",
        Edge::Blunt(..) => "|-|",
        Edge::Bidirected(..) => "<->",
    }
}

pub struct WalkDisplay<'a> {
    walk: &'a Walk,
    g: &'a Graph,
}

impl fmt::Display for WalkDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.walk.tokens(self.g).join(" "))
    }
}

/// Possible (mark at `from`, mark at `to`) readings of `e` traversed from `from` to `to`.
/// A directed loop can be read either way round.
fn readings(e: &Edge, from: NodeId, to: NodeId) -> Vec<(Mark, Mark)> {
    match *e {
        Edge::Directed { tail, head } if tail == head && tail == from && head == to => {
            vec![(Mark::Tail, Mark::Head), (Mark::Head, Mark::Tail)]
        }
        Edge::Directed { tail, head } if tail == from && head == to => vec![(Mark::Tail, Mark::Head)],
        Edge::Directed { tail, head } if head == from && tail == to => vec![(Mark::Head, Mark::Tail)],
        Edge::Blunt(a, b) if (a, b) == (from.min(to), from.max(to)) => vec![(Mark::Stump, Mark::Stump)],
        Edge::Bidirected(a, b) if (a, b) == (from.min(to), from.max(to)) => vec![(Mark::Head, Mark::Head)],
        _ => Vec::new(),
    }
}

/// Checks the connecting-walk definition on an explicit walk, from scratch.
///
/// A directed loop may be read in either direction; the walk is accepted if
/// some reading of its loops is connecting.
pub fn is_connecting_walk(g: &Graph, walk: &Walk, c: &NodeSet, final_mark: FinalMark, start_outside: bool) -> bool {
    if walk.edges.is_empty() || walk.nodes.len() != walk.edges.len() + 1 {
        return false;
    }
    if start_outside && c.contains(walk.nodes[0]) {
        return false;
    }
    let an_c = g.ancestors(c);
    // marks with which the walk can arrive at the current node
    let mut arrivals: Vec<Mark> = Vec::new();
    for (i, e) in walk.edges.iter().enumerate() {
        if !g.contains_edge(e) {
            return false;
        }
        let v = walk.nodes[i];
        let mut next = Vec::new();
        for (leaving, arriving) in readings(e, v, walk.nodes[i + 1]) {
            let open = i == 0
                || arrivals.iter().any(|&arrived| {
                    let collider = arrived.is_neck() && leaving.is_neck();
                    if collider {
                        an_c.contains(v)
                    } else {
                        !c.contains(v)
                    }
                });
            if open && !next.contains(&arriving) {
                next.push(arriving);
            }
        }
        if next.is_empty() {
            return false;
        }
        arrivals = next;
    }
    arrivals.into_iter().any(|m| final_mark.accepts(m))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Arrival {
    Start,
    Neck,
    Tail,
}

fn arrival_of(m: Mark) -> Arrival {
    if m.is_neck() {
        Arrival::Neck
    } else {
        Arrival::Tail
    }
}

/// Breadth-first search over (node, arrival) states.
///
/// Returns the set of targets enterable with the required final mark and,
/// if `witness_for` is given, one shortest walk ending in that set.
pub(crate) fn state_search(
    inc: &Incidences,
    n: usize,
    sources: &NodeSet,
    rules: &WalkRules<'_>,
    witness_for: Option<&NodeSet>,
) -> (NodeSet, Option<Walk>) {
    // state index: 2*v + (arrived with neck)
    let mut seen = vec![false; 2 * n];
    let mut parent: Vec<Option<(usize, Incidence)>> = vec![None; 2 * n + n];
    let mut queue: std::collections::VecDeque<(NodeId, Arrival, usize)> = Default::default();
    let mut reached = NodeSet::empty(n);
    // start states live at indices 2n + v
    for s in sources.iter() {
        queue.push_back((s, Arrival::Start, 2 * n + s.index()));
    }
    while let Some((v, arr, sid)) = queue.pop_front() {
        for ic in inc.at(v) {
            let ok = match arr {
                Arrival::Start => true,
                Arrival::Neck => rules.passes(v, Mark::Head, ic.here),
                Arrival::Tail => rules.passes(v, Mark::Tail, ic.here),
            };
            if !ok {
                continue;
            }
            let u = ic.other;
            if rules.final_mark.accepts(ic.there) {
                reached.insert(u);
                if let Some(t) = witness_for {
                    if t.contains(u) {
                        return (reached, Some(rebuild(&parent, sid, v, *ic, n)));
                    }
                }
            }
            let a = arrival_of(ic.there);
            let nid = 2 * u.index() + usize::from(a == Arrival::Neck);
            if !seen[nid] {
                seen[nid] = true;
                parent[nid] = Some((sid, *ic));
                queue.push_back((u, a, nid));
            }
        }
    }
    (reached, None)
}

fn rebuild(parent: &[Option<(usize, Incidence)>], mut sid: usize, at: NodeId, last: Incidence, n: usize) -> Walk {
    let mut edges = vec![last.edge];
    let mut nodes = vec![last.other, at];
    while sid < 2 * n {
        let (prev, ic) = parent[sid].expect("visited state has a parent");
        edges.push(ic.edge);
        sid = prev;
        nodes.push(if sid >= 2 * n { NodeId(sid - 2 * n) } else { NodeId(sid / 2) });
    }
    nodes.reverse();
    edges.reverse();
    Walk { nodes, edges }
}

/// Options for explicit walk enumeration.
#[derive(Clone, Copy, Debug)]
pub struct BruteOptions {
    /// Maximum number of edges.
    pub max_len: usize,
    /// Prune walks that revisit a (node, arrival) state. Any connecting walk
    /// contains one without such repetitions, so this does not change the answer.
    pub state_simple: bool,
}

impl BruteOptions {
    pub fn for_graph(g: &Graph) -> Self {
        BruteOptions {
            max_len: 2 * g.n() * g.n(),
            state_simple: true,
        }
    }
}

/// Depth-first enumeration of explicit walks from `a` (outside `c`) that
/// stay open, stopping at the first one entering `b` with a head.
pub fn brute_force_connected(g: &Graph, a: &NodeSet, b: &NodeSet, c: &NodeSet, opts: BruteOptions) -> Option<Walk> {
    let an_c = g.ancestors(c);
    let inc = Incidences::with_reversed_loops(g);
    for s in a.difference(c).iter() {
        let mut walk = Walk { nodes: vec![s], edges: Vec::new() };
        let mut arrivals: Vec<Option<Mark>> = vec![None];
        let mut states: Vec<(NodeId, bool)> = Vec::new();
        if dfs(&inc, b, c, &an_c, opts, &mut walk, &mut arrivals, &mut states) {
            return Some(walk);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    inc: &Incidences,
    b: &NodeSet,
    c: &NodeSet,
    an_c: &NodeSet,
    opts: BruteOptions,
    walk: &mut Walk,
    arrivals: &mut Vec<Option<Mark>>,
    states: &mut Vec<(NodeId, bool)>,
) -> bool {
    if walk.edges.len() >= opts.max_len {
        return false;
    }
    let v = *walk.nodes.last().unwrap();
    let arrived = *arrivals.last().unwrap();
    for ic in inc.at(v) {
        if let Some(m) = arrived {
            let collider = m.is_neck() && ic.here.is_neck();
            if collider && !an_c.contains(v) {
                continue;
            }
            if !collider && c.contains(v) {
                continue;
            }
        }
        walk.nodes.push(ic.other);
        walk.edges.push(ic.edge);
        if ic.there == Mark::Head && b.contains(ic.other) {
            return true;
        }
        let state = (ic.other, ic.there.is_neck());
        if !(opts.state_simple && states.contains(&state)) {
            arrivals.push(Some(ic.there));
            states.push(state);
            if dfs(inc, b, c, an_c, opts, walk, arrivals, states) {
                return true;
            }
            arrivals.pop();
            states.pop();
        }
        walk.nodes.pop();
        walk.edges.pop();
    }
    false
}
