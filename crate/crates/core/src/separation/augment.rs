//! Augmented-graph (moralization style) separation.

use crate::graph::Graph;
use crate::nodeset::NodeSet;

/// Bare adjacency structure; lets proxy nodes be added without building a [`Graph`].
pub(crate) struct Skeleton {
    pub n: usize,
    pub pa: Vec<NodeSet>,
    pub ch: Vec<NodeSet>,
    /// Blunt and bidirected neighbours, loops excluded.
    pub neck: Vec<NodeSet>,
    /// Nodes carrying a bidirected loop.
    pub neck_loops: NodeSet,
}

impl Skeleton {
    /// The graph itself plus one proxy per node of `proxied`, inheriting its
    /// parents and its bidirected neighbours (the edges with a head at it).
    /// Proxies get indices `n, n+1, ...` in the order of `proxied`.
    pub fn with_proxies(g: &Graph, proxied: &NodeSet) -> Skeleton {
        let n = g.n() + proxied.len();
        let widen = |s: &NodeSet| NodeSet::from_nodes(n, s.iter());
        let mut pa: Vec<NodeSet> = g.nodes().map(|v| widen(g.parents(v))).collect();
        let mut ch: Vec<NodeSet> = g.nodes().map(|v| widen(g.children(v))).collect();
        let mut neck: Vec<NodeSet> = g
            .nodes()
            .map(|v| {
                let mut s = widen(&g.blunt_neighbors(v).union(g.bidirected_neighbors(v)));
                s.remove(v);
                s
            })
            .collect();
        let neck_loops = NodeSet::from_nodes(n, g.nodes().filter(|&v| g.has_bidirected(v, v)));
        for (k, b) in proxied.iter().enumerate() {
            let p = crate::graph::NodeId(g.n() + k);
            let parents = widen(g.parents(b));
            for u in parents.iter() {
                ch[u.index()].insert(p);
            }
            pa.push(parents);
            ch.push(NodeSet::empty(n));
            let spouses = widen(g.bidirected_neighbors(b));
            for u in spouses.iter() {
                neck[u.index()].insert(p);
            }
            neck.push(spouses);
        }
        Skeleton { n, pa, ch, neck, neck_loops }
    }

    pub fn ancestors(&self, c: &NodeSet) -> NodeSet {
        let mut out = c.clone();
        let mut stack = c.to_vec();
        while let Some(v) = stack.pop() {
            for p in self.pa[v.index()].iter() {
                if out.insert(p) {
                    stack.push(p);
                }
            }
        }
        out
    }

    /// Undirected graph on `r` joining every pair that is collider connected
    /// inside the induced subgraph on `r`.
    pub fn augmented(&self, r: &NodeSet) -> Vec<NodeSet> {
        let mut adj: Vec<NodeSet> = vec![NodeSet::empty(self.n); self.n];
        for v in r.iter() {
            let mut s = self.pa[v.index()].union(&self.ch[v.index()]);
            s.union_with(&self.neck[v.index()]);
            s.intersect_with(r);
            adj[v.index()] = s;
        }
        // Components of neck-neck edges inside r. Every walk whose interior
        // nodes are all colliders runs through one such component.
        let mut seen = NodeSet::empty(self.n);
        for start in r.iter() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = NodeSet::empty(self.n);
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(x) = stack.pop() {
                comp.insert(x);
                for y in self.neck[x.index()].intersection(r).iter() {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            // nodes with an edge that has a neck at some member of comp
            let mut touching = NodeSet::empty(self.n);
            for k in comp.iter() {
                touching.union_with(&self.pa[k.index()]);
                touching.union_with(&self.neck[k.index()]);
                if self.neck_loops.contains(k) {
                    touching.insert(k);
                }
            }
            touching.intersect_with(r);
            for v in touching.iter() {
                adj[v.index()].union_with(&touching);
            }
        }
        for v in r.iter() {
            adj[v.index()].remove(v);
        }
        adj
    }
}

/// True if every path from `from` to `to` in `adj` meets `by`.
pub(crate) fn undirected_separated(adj: &[NodeSet], from: &NodeSet, to: &NodeSet, by: &NodeSet) -> bool {
    let mut seen = from.difference(by);
    if seen.intersects(to) {
        return false;
    }
    let mut stack = seen.to_vec();
    while let Some(v) = stack.pop() {
        for u in adj[v.index()].iter() {
            if by.contains(u) || seen.contains(u) {
                continue;
            }
            if to.contains(u) {
                return false;
            }
            seen.insert(u);
            stack.push(u);
        }
    }
    true
}
