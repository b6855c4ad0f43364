//! Collider connections on ancestral sets.

use std::ops::ControlFlow;

use crate::graph::{topological_order, Graph, NodeId};
use crate::nodeset::NodeSet;
use crate::separation::augment::Skeleton;

/// For each node of `a`, the nodes of `a` it is collider connected to in the
/// induced subgraph on `a` (itself excluded). Rows outside `a` are empty.
pub fn collider_connections(g: &Graph, a: &NodeSet) -> Vec<NodeSet> {
    Skeleton::with_proxies(g, &g.empty_set()).augmented(a)
}

/// Do the induced subgraphs on `a` have the same collider connections?
pub fn same_collider_connections(g1: &Graph, g2: &Graph, a: &NodeSet) -> bool {
    collider_connections(g1, a) == collider_connections(g2, a)
}

/// First ancestral set (in enumeration order) whose induced subgraphs differ
/// in collider connections, with the pair and whether it is connected in `g1`.
/// Both graphs must share their directed part.
pub(super) fn first_difference(g1: &Graph, g2: &Graph) -> Option<(NodeSet, NodeId, NodeId, bool)> {
    if g1.n() <= 64 {
        first_difference_small(g1, g2)
    } else {
        first_difference_general(g1, g2)
    }
}

fn first_difference_general(g1: &Graph, g2: &Graph) -> Option<(NodeSet, NodeId, NodeId, bool)> {
    let (s1, s2) = (Skeleton::with_proxies(g1, &g1.empty_set()), Skeleton::with_proxies(g2, &g2.empty_set()));
    for a in g1.ancestral_sets() {
        let (c1, c2) = (s1.augmented(&a), s2.augmented(&a));
        for alpha in a.iter() {
            let diff = c1[alpha.index()].difference(&c2[alpha.index()]).union(&c2[alpha.index()].difference(&c1[alpha.index()]));
            if let Some(beta) = diff.first() {
                let in_first = c1[alpha.index()].contains(beta);
                return Some((a, alpha, beta, in_first));
            }
        }
    }
    None
}

/// Word-sized masks of one graph.
struct Masks {
    /// Directed, blunt and bidirected neighbours, loops excluded.
    adj: Vec<u64>,
    blunt: Vec<u64>,
    /// Nodes with an edge that has a neck at `v`.
    neck_in: Vec<u64>,
}

impl Masks {
    fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut m = Masks { adj: vec![0; n], blunt: vec![0; n], neck_in: vec![0; n] };
        for v in g.nodes() {
            let i = v.index();
            let bl = g.blunt_neighbors(v).union(g.bidirected_neighbors(v)).mask();
            m.blunt[i] = bl & !(1 << i);
            m.adj[i] = (g.parents(v).mask() | g.children(v).mask() | bl) & !(1 << i);
            m.neck_in[i] = g.parents(v).mask() | bl;
        }
        m
    }

    fn connections(&self, a: u64, out: &mut [u64]) {
        for v in bits(a) {
            out[v] = self.adj[v] & a;
        }
        let mut rest = a;
        while rest != 0 {
            let mut comp = rest & rest.wrapping_neg();
            let mut frontier = comp;
            while frontier != 0 {
                let mut next = 0;
                for x in bits(frontier) {
                    next |= self.blunt[x];
                }
                next &= a & !comp;
                comp |= next;
                frontier = next;
            }
            rest &= !comp;
            let mut touching = 0;
            for k in bits(comp) {
                touching |= self.neck_in[k];
            }
            touching &= a;
            if touching.count_ones() > 1 {
                for v in bits(touching) {
                    out[v] |= touching;
                }
            }
        }
    }
}

fn bits(mut x: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (x != 0).then(|| {
            let i = x.trailing_zeros() as usize;
            x &= x - 1;
            i
        })
    })
}

fn first_difference_small(g1: &Graph, g2: &Graph) -> Option<(NodeSet, NodeId, NodeId, bool)> {
    let n = g1.n();
    let (m1, m2) = (Masks::new(g1), Masks::new(g2));
    let cond = g1.condensation();
    let order = topological_order(&cond);
    let comps: Vec<u64> = order.iter().map(|&c| cond.components[c].mask()).collect();
    let required: Vec<u64> = order
        .iter()
        .map(|&c| cond.parents(c).iter().fold(0, |acc, &p| acc | cond.components[p].mask()))
        .collect();
    let (mut o1, mut o2) = (vec![0u64; n], vec![0u64; n]);
    let mut check = |a: u64| -> ControlFlow<(u64, usize, usize, bool)> {
        if a == 0 {
            return ControlFlow::Continue(());
        }
        m1.connections(a, &mut o1);
        m2.connections(a, &mut o2);
        for v in bits(a) {
            let diff = (o1[v] ^ o2[v]) & !(1 << v);
            if diff != 0 {
                let w = diff.trailing_zeros() as usize;
                return ControlFlow::Break((a, v, w, o1[v] >> w & 1 == 1));
            }
        }
        ControlFlow::Continue(())
    };
    match downsets(&comps, &required, 0, 0, &mut check) {
        ControlFlow::Break((a, v, w, in_first)) => Some((NodeSet::from_mask(n, a), NodeId(v), NodeId(w), in_first)),
        ControlFlow::Continue(()) => None,
    }
}

/// Visits every union of a down-closed family of components. `comps` is in
/// topological order and `required[i]` is the union of the parents of `comps[i]`.
fn downsets<B>(
    comps: &[u64],
    required: &[u64],
    pos: usize,
    current: u64,
    visit: &mut impl FnMut(u64) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if pos == comps.len() {
        return visit(current);
    }
    downsets(comps, required, pos + 1, current, visit)?;
    if required[pos] & !current == 0 {
        downsets(comps, required, pos + 1, current | comps[pos], visit)?;
    }
    ControlFlow::Continue(())
}

/// Number of nonempty ancestral sets, counted without materializing them.
pub fn count_ancestral_sets(g: &Graph) -> Option<u64> {
    if g.n() > 64 {
        return None;
    }
    let cond = g.condensation();
    let order = topological_order(&cond);
    let comps: Vec<u64> = order.iter().map(|&c| cond.components[c].mask()).collect();
    let required: Vec<u64> = order
        .iter()
        .map(|&c| cond.parents(c).iter().fold(0, |acc, &p| acc | cond.components[p].mask()))
        .collect();
    let mut count = 0u64;
    let _ = downsets::<()>(&comps, &required, 0, 0, &mut |a| {
        count += u64::from(a != 0);
        ControlFlow::Continue(())
    });
    Some(count)
}
