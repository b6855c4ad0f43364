use crate::graph::{Graph, NodeId};
use crate::nodeset::NodeSet;

use super::walk::{state_search, FinalMark, Incidences, WalkRules};

/// All μ-separations `(α, β, C)` of a graph, one bit per triple.
///
/// Set-valued queries hold iff every singleton pair holds.
#[derive(Clone, PartialEq, Eq)]
pub struct IndependenceModel {
    n: usize,
    bits: Vec<u64>,
}

impl IndependenceModel {
    pub(super) fn compute(g: &Graph) -> Self {
        let n = g.n();
        let subsets = 1usize << n;
        let total = n * n * subsets;
        let mut model = IndependenceModel {
            n,
            bits: vec![0; total.div_ceil(64)],
        };
        let inc = Incidences::new(g);
        for mask in 0..subsets as u64 {
            let c = NodeSet::from_mask(n, mask);
            let an_c = g.ancestors(&c);
            let rules = WalkRules {
                collider_ok: &an_c,
                blocked: &c,
                final_mark: FinalMark::Head,
            };
            for alpha in g.nodes() {
                let reached = if c.contains(alpha) {
                    g.empty_set()
                } else {
                    state_search(&inc, n, &g.singleton(alpha), &rules, None).0
                };
                for beta in g.nodes() {
                    if !reached.contains(beta) {
                        model.set(alpha, beta, mask);
                    }
                }
            }
        }
        model
    }

    fn slot(&self, alpha: NodeId, beta: NodeId, mask: u64) -> usize {
        (alpha.index() * self.n + beta.index()) * (1usize << self.n) + mask as usize
    }

    fn set(&mut self, alpha: NodeId, beta: NodeId, mask: u64) {
        let i = self.slot(alpha, beta, mask);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Is `β` μ-separated from `α` given `C`?
    pub fn contains(&self, alpha: NodeId, beta: NodeId, c: &NodeSet) -> bool {
        let i = self.slot(alpha, beta, c.mask());
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn separates(&self, a: &NodeSet, b: &NodeSet, c: &NodeSet) -> bool {
        a.iter().all(|x| b.iter().all(|y| self.contains(x, y, c)))
    }

    /// Number of separating singleton triples.
    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Separating triples `(α, β, C)`.
    pub fn triples(&self) -> impl Iterator<Item = (NodeId, NodeId, NodeSet)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |a| {
            (0..n).flat_map(move |b| {
                (0..1u64 << n).filter_map(move |m| {
                    let c = NodeSet::from_mask(n, m);
                    self.contains(NodeId(a), NodeId(b), &c).then_some((NodeId(a), NodeId(b), c))
                })
            })
        })
    }

    /// First triple on which the two models disagree, with its membership in `self`.
    pub fn first_difference(&self, other: &IndependenceModel) -> Option<(NodeId, NodeId, NodeSet, bool)> {
        if self.n != other.n {
            return None;
        }
        let per = 1usize << self.n;
        for (w, (x, y)) in self.bits.iter().zip(&other.bits).enumerate() {
            let diff = x ^ y;
            if diff != 0 {
                let i = w * 64 + diff.trailing_zeros() as usize;
                let mask = (i % per) as u64;
                let pair = i / per;
                let (a, b) = (NodeId(pair / self.n), NodeId(pair % self.n));
                return Some((a, b, NodeSet::from_mask(self.n, mask), x >> (i % 64) & 1 == 1));
            }
        }
        None
    }
}

impl std::fmt::Debug for IndependenceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IndependenceModel {{ n: {}, separations: {} }}", self.n, self.len())
    }
}
