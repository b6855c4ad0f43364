//! Library deciders against small oracles written straight from the definitions.

use cdgkit::equivalence::{enumerate_class, markov_equivalent, markov_equivalent_oracle, ORACLE_CAP};
use cdgkit::hardness::{generate_corpus, is_tautology, reduce_to_graph_pair, DnfFormula};
use cdgkit::random::{random_graph, RandomGraphParams};
use cdgkit::separation::{mu_separated, walk_state_search, SeparationQuery};
use cdgkit::{Edge, Graph, GraphClass, NodeId, NodeSet};

#[derive(Clone, Copy, PartialEq)]
enum End {
    Head,
    Tail,
    Stump,
}

/// Every way to traverse one edge: (from, to, mark at from, mark at to).
fn traversals(g: &Graph) -> Vec<(usize, usize, End, End)> {
    let mut out = Vec::new();
    for e in g.edges() {
        let (a, b) = e.endpoints();
        let (a, b) = (a.index(), b.index());
        let (ma, mb) = match e {
            Edge::Directed { .. } => (End::Tail, End::Head),
            Edge::Blunt(..) => (End::Stump, End::Stump),
            Edge::Bidirected(..) => (End::Head, End::Head),
        };
        out.push((a, b, ma, mb));
        // A loop can be read in either direction; other edges too, trivially.
        out.push((b, a, mb, ma));
    }
    out
}

fn ancestors(g: &Graph, c: &[usize]) -> Vec<bool> {
    let mut an = vec![false; g.n()];
    for &v in c {
        an[v] = true;
    }
    loop {
        let mut changed = false;
        for e in g.edges() {
            if let Edge::Directed { tail, head } = e {
                if an[head.index()] && !an[tail.index()] {
                    an[tail.index()] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return an;
        }
    }
}

/// Depth-bounded search for a walk `alpha ... beta` ending in a head at
/// `beta`, with colliders (necks on both sides) in `an(C)` and
/// noncolliders outside `C`. Only prefixes are pruned, never states.
fn walk_connects(g: &Graph, alpha: usize, beta: usize, c: &[bool], max_len: usize) -> bool {
    if c[alpha] {
        return false;
    }
    let cs: Vec<usize> = (0..g.n()).filter(|&v| c[v]).collect();
    let an = ancestors(g, &cs);
    let steps = traversals(g);
    type Ctx<'a> = (&'a [(usize, usize, End, End)], &'a [bool], &'a [bool], usize, usize);
    fn go(
        v: usize,
        arrived: Option<End>,
        depth: usize,
        ctx: Ctx,
    ) -> bool {
        let (steps, c, an, beta, max_len) = ctx;
        if depth == max_len {
            return false;
        }
        for &(from, to, m_from, m_to) in steps {
            if from != v {
                continue;
            }
            if let Some(arr) = arrived {
                let collider = arr != End::Tail && m_from != End::Tail;
                if collider && !an[v] || !collider && c[v] {
                    continue;
                }
            }
            if to == beta && m_to == End::Head {
                return true;
            }
            if go(to, Some(m_to), depth + 1, ctx) {
                return true;
            }
        }
        false
    }
    go(alpha, None, 0, (&steps, c, &an, beta, max_len))
}

#[test]
fn separation_matches_walk_enumeration() {
    let mut checked = 0;
    for seed in 0..60 {
        let p_loop = if seed % 3 == 0 { 0.5 } else { 1.0 };
        let params = RandomGraphParams { n: 3, p_directed: 0.4, p_symmetric: 0.4, p_loop, class: GraphClass::Cdg };
        let g = random_graph(&params, seed);
        for a in 0..3 {
            for b in 0..3 {
                for mask in 0u64..8 {
                    let c: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
                    // a shortest connecting walk never repeats a (node, arrival) pair
                    let connected = walk_connects(&g, a, b, &c, 2 * 3 + 1);
                    let q = SeparationQuery::pair(&g, NodeId(a), NodeId(b), NodeSet::from_mask(3, mask));
                    assert_eq!(mu_separated(&g, &q), !connected, "seed {seed}\n{}a={a} b={b} C={mask:03b}", g.to_cdg());
                    assert_eq!(walk_state_search(&g, &q), !connected);
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 60 * 72);
}

#[test]
fn separation_matches_walk_enumeration_on_dmgs() {
    for seed in 0..30 {
        let params = RandomGraphParams { n: 3, p_directed: 0.4, p_symmetric: 0.4, p_loop: 0.7, class: GraphClass::Dmg };
        let g = random_graph(&params, seed);
        for a in 0..3 {
            for b in 0..3 {
                for mask in 0u64..8 {
                    let c: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
                    let connected = walk_connects(&g, a, b, &c, 7);
                    let q = SeparationQuery::pair(&g, NodeId(a), NodeId(b), NodeSet::from_mask(3, mask));
                    assert_eq!(mu_separated(&g, &q), !connected, "seed {seed}\n{}", g.to_cdg());
                }
            }
        }
    }
}

fn truth_table_tautology(f: &DnfFormula) -> bool {
    (0u32..1 << f.n_vars()).all(|bits| {
        let x: Vec<bool> = (0..f.n_vars()).map(|i| bits >> i & 1 == 1).collect();
        f.terms().iter().any(|t| t.iter().all(|l| x[l.var] == l.positive))
    })
}

#[test]
fn reduction_agrees_with_truth_tables() {
    let corpus = generate_corpus(60, 3, 3, 11);
    let mut both = [0; 2];
    for f in &corpus {
        let taut = truth_table_tautology(f);
        assert_eq!(is_tautology(f).unwrap(), taut, "{f}");
        let pair = reduce_to_graph_pair(f);
        assert_eq!(markov_equivalent(&pair.d, &pair.d_plus).unwrap(), taut, "{f}");
        both[taut as usize] += 1;
    }
    assert!(both[0] > 0 && both[1] > 0);
}

#[test]
fn small_reductions_match_the_independence_models() {
    // One variable keeps the graphs at 2 + 2·(L + 2) nodes.
    for text in ["(x1)", "(x1) | (!x1)", "(!x1)"] {
        let f: DnfFormula = text.parse().unwrap();
        let pair = reduce_to_graph_pair(&f);
        if pair.d.n() <= ORACLE_CAP {
            let oracle = markov_equivalent_oracle(&pair.d, &pair.d_plus, ORACLE_CAP).unwrap();
            assert_eq!(oracle, truth_table_tautology(&f), "{text}");
        }
    }
}

#[test]
fn class_enumeration_matches_the_oracle() {
    for seed in 0..8 {
        let params = RandomGraphParams { n: 4, p_directed: 0.35, p_symmetric: 0.4, ..Default::default() };
        let g = random_graph(&params, seed);
        let class = enumerate_class(&g).unwrap();
        let slots: Vec<(NodeId, NodeId)> =
            (0..4).flat_map(|a| (a + 1..4).map(move |b| (NodeId(a), NodeId(b)))).collect();
        let mut count = 0;
        for mask in 0u32..1 << slots.len() {
            let pairs: Vec<_> = slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
            let h = g.with_blunt_edges(&pairs).unwrap();
            if markov_equivalent_oracle(&g, &h, ORACLE_CAP).unwrap() {
                count += 1;
                assert!(class.members.iter().any(|m| m.edges() == h.edges()), "seed {seed}");
            }
        }
        assert_eq!(class.len(), count, "seed {seed}");
    }
}
