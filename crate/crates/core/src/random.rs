//! Seeded random graph generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Graph, GraphClass, NodeId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomGraphParams {
    pub n: usize,
    /// Probability of each non-loop directed edge.
    pub p_directed: f64,
    /// Probability of each blunt (or bidirected) pair.
    pub p_symmetric: f64,
    /// Probability of each directed loop; `1.0` gives all loops.
    pub p_loop: f64,
    pub class: GraphClass,
}

impl Default for RandomGraphParams {
    fn default() -> Self {
        RandomGraphParams {
            n: 5,
            p_directed: 0.3,
            p_symmetric: 0.3,
            p_loop: 1.0,
            class: GraphClass::Cdg,
        }
    }
}

/// Labels `v0, v1, ...`.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

pub fn random_graph(params: &RandomGraphParams, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_graph_with(params, &mut rng)
}

pub fn random_graph_with<R: Rng>(params: &RandomGraphParams, rng: &mut R) -> Graph {
    let n = params.n;
    let mut g = Graph::with_nodes(&default_labels(n)).expect("generated labels are valid");
    g.set_declared(Some(params.class));
    for a in 0..n {
        for b in 0..n {
            let p = if a == b { params.p_loop } else { params.p_directed };
            if rng.random_bool(p.clamp(0.0, 1.0)) {
                g.insert_edge(Edge::directed(NodeId(a), NodeId(b))).expect("directed edges always fit");
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if params.class != GraphClass::Dg && rng.random_bool(params.p_symmetric.clamp(0.0, 1.0)) {
                let e = match params.class {
                    GraphClass::Dmg => Edge::bidirected(NodeId(a), NodeId(b)),
                    _ => Edge::blunt(NodeId(a), NodeId(b)),
                };
                g.insert_edge(e).expect("edge matches the class");
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_graph() {
        let p = RandomGraphParams::default();
        assert_eq!(random_graph(&p, 7), random_graph(&p, 7));
    }

    #[test]
    fn respects_class_and_loops() {
        let p = RandomGraphParams { n: 6, class: GraphClass::Dmg, p_symmetric: 0.8, ..Default::default() };
        let g = random_graph(&p, 3);
        assert!(g.has_all_loops());
        assert_eq!(g.blunt_count(), 0);
        assert_eq!(g.class(), GraphClass::Dmg);
    }
}
