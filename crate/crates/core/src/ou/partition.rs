use serde::Serialize;

use super::{OuError, OuModel, RiccatiSystem};
use crate::graph::Graph;
use crate::linalg::{submatrix, Mat};
use crate::nodeset::NodeSet;
use crate::separation::{m_separated, mu_separated, neck_reachable_set, SeparationQuery};

/// Blocks `V1..V6` of the node set for conditioning sets `A` and `C`.
/// `U = V1 ∪ V2 ∪ V3` is unobserved, `W = A ∪ C = V4 ∪ V5 ∪ V6`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub a: NodeSet,
    pub c: NodeSet,
    pub blocks: [NodeSet; 6],
}

impl Partition {
    /// Block `i` for `i` in `1..=6`.
    pub fn block(&self, i: usize) -> &NodeSet {
        &self.blocks[i - 1]
    }

    pub fn u(&self) -> NodeSet {
        self.blocks[0].union(&self.blocks[1]).union(&self.blocks[2])
    }

    pub fn w(&self) -> NodeSet {
        self.a.union(&self.c)
    }
}

/// Computes the six blocks. `A` is taken as `A ∖ C`.
pub fn partition_v1_v6(g: &Graph, a: &NodeSet, c: &NodeSet) -> Result<Partition, OuError> {
    let a = a.difference(c);
    let w = a.union(c);
    let u = w.complement();
    let mut v1 = g.empty_set();
    for x in u.iter() {
        if m_separated(g, &g.singleton(x), &a, c)? {
            v1.insert(x);
        }
    }
    let rest = u.difference(&v1);
    let mut v2 = g.empty_set();
    for x in rest.iter() {
        if m_separated(g, &g.singleton(x), &v1, &w)? {
            v2.insert(x);
        }
    }
    let v3 = rest.difference(&v2);
    let v4 = neck_reachable_set(g, &v1, &w).intersection(&w);
    let v5 = neck_reachable_set(g, &v2, &w).intersection(&w);
    if v4.intersects(&v5) {
        return Err(OuError::InvalidPartition(format!(
            "V4 and V5 share {:?}",
            g.set_labels(&v4.intersection(&v5))
        )));
    }
    let v6 = w.difference(&v4.union(&v5));
    Ok(Partition { a, c: c.clone(), blocks: [v1, v2, v3, v4, v5, v6] })
}

/// Partition for a μ-separated query, checking `pa(B) ∖ (A ∪ C) ⊆ V1`.
pub fn partition_for_query(g: &Graph, q: &SeparationQuery) -> Result<Partition, OuError> {
    if !mu_separated(g, q) {
        return Err(OuError::NotSeparated);
    }
    let p = partition_v1_v6(g, &q.a, &q.c)?;
    let w = p.w();
    for b in q.b.iter() {
        let stray = g.parents(b).difference(&w).difference(p.block(1));
        if !stray.is_empty() {
            return Err(OuError::InvalidPartition(format!(
                "parents {:?} of `{}` lie outside V1",
                g.set_labels(&stray),
                g.label(b)
            )));
        }
    }
    Ok(p)
}

/// `(row block, column block)` pairs that must vanish in `M`.
pub const M_ZERO_BLOCKS: [(usize, usize); 11] =
    [(1, 2), (1, 3), (2, 1), (2, 3), (4, 2), (4, 3), (5, 1), (5, 3), (6, 1), (6, 2), (6, 3)];

/// Pairs that must vanish in `Σ` (both triangles).
pub const SIGMA_ZERO_BLOCKS: [(usize, usize); 16] = [
    (1, 2), (1, 5), (1, 6), (2, 1), (2, 4), (2, 6), (4, 2), (4, 5),
    (4, 6), (5, 1), (5, 4), (5, 6), (6, 1), (6, 2), (6, 4), (6, 5),
];

/// Blocks of `D`, `E`, `F` (indexed within `U`) that must vanish.
const D_ZERO_BLOCKS: [(usize, usize); 4] = [(2, 1), (3, 1), (1, 2), (3, 2)];
const E_ZERO_BLOCKS: [(usize, usize); 7] = [(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2), (3, 3)];
const F_ZERO_BLOCKS: [(usize, usize); 2] = [(1, 2), (2, 1)];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockViolation {
    pub matrix: &'static str,
    pub row_block: usize,
    pub col_block: usize,
    pub max_abs: f64,
}

fn block_max(m: &Mat, rows: &[usize], cols: &[usize]) -> f64 {
    submatrix(m, rows, cols).iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

fn check_blocks(
    name: &'static str,
    m: &Mat,
    index: impl Fn(usize) -> Vec<usize>,
    blocks: &[(usize, usize)],
    tol: f64,
    out: &mut Vec<BlockViolation>,
) {
    for &(r, c) in blocks {
        let v = block_max(m, &index(r), &index(c));
        if v > tol {
            out.push(BlockViolation { matrix: name, row_block: r, col_block: c, max_abs: v });
        }
    }
}

/// Zero blocks of `M` and `Σ` that fail (exact zeros required).
pub fn audit_model(model: &OuModel, p: &Partition) -> Vec<BlockViolation> {
    let idx = |i: usize| p.block(i).iter().map(|v| v.index()).collect::<Vec<_>>();
    let mut out = Vec::new();
    check_blocks("M", model.m(), idx, &M_ZERO_BLOCKS, 0.0, &mut out);
    check_blocks("Sigma", model.sigma(), idx, &SIGMA_ZERO_BLOCKS, 0.0, &mut out);
    out
}

/// Positions of `V1`, `V2`, `V3` inside the ordered `U` of `sys`.
fn u_positions(sys: &RiccatiSystem, p: &Partition, i: usize) -> Vec<usize> {
    sys.u.iter().enumerate().filter(|(_, &v)| p.block(i).contains(crate::NodeId(v))).map(|(k, _)| k).collect()
}

/// Zero blocks of `D`, `E`, `F`; `E` must also be block diagonal.
pub fn audit_def(sys: &RiccatiSystem, p: &Partition) -> Vec<BlockViolation> {
    let idx = |i: usize| u_positions(sys, p, i);
    let mut out = Vec::new();
    check_blocks("D", &sys.d, idx, &D_ZERO_BLOCKS, 0.0, &mut out);
    check_blocks("E", &sys.e, idx, &E_ZERO_BLOCKS, 0.0, &mut out);
    check_blocks("F", &sys.f, idx, &F_ZERO_BLOCKS, 0.0, &mut out);
    out
}

/// The `(V1, V2)` blocks of a Riccati solution, up to `tol`.
pub fn audit_gamma(name: &'static str, gamma: &Mat, sys: &RiccatiSystem, p: &Partition, tol: f64) -> Vec<BlockViolation> {
    let idx = |i: usize| u_positions(sys, p, i);
    let mut out = Vec::new();
    check_blocks(name, gamma, idx, &F_ZERO_BLOCKS, tol, &mut out);
    out
}
