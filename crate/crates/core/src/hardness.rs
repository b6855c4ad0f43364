//! 3DNF tautology as a Markov equivalence question.
//!
//! [`reduce_to_graph_pair`] builds two looped cDGs `D` and `D+` (the latter
//! has `alpha |-| x_1` and `alpha |-| u_1` added) that are Markov equivalent
//! exactly when the formula is a tautology. A falsifying assignment yields a
//! separating set for `alpha` and `beta` that works in `D` only.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphClass, NodeId};
use crate::nodeset::NodeSet;
use crate::separation::{mu_separated, SeparationQuery};

/// Largest variable count accepted by [`is_tautology`].
pub const TAUTOLOGY_VAR_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HardnessError {
    #[error("term {term} has {len} literals, at most 3 allowed")]
    TermTooLong { term: usize, len: usize },
    #[error("term {0} is empty")]
    EmptyTerm(usize),
    #[error("formula has no terms")]
    NoTerms,
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("{n} variables, above the cap of {cap}")]
    TooManyVariables { n: usize, cap: usize },
    #[error("formula is a tautology, no falsifying assignment exists")]
    NoFalsifier,
    #[error("assignment satisfies term {0}")]
    NotFalsifying(usize),
    #[error("assignment has {got} values, formula has {want} variables")]
    AssignmentLength { got: usize, want: usize },
    #[error("separator check failed: separated in D = {in_d}, in D+ = {in_dplus}")]
    WitnessRejected { in_d: bool, in_dplus: bool },
}

/// `x<var+1>` or its negation. Variables are 0-based internally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        write!(f, "x{}", self.var + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnfFormula {
    n_vars: usize,
    terms: Vec<Vec<Literal>>,
}

impl DnfFormula {
    /// Validates term sizes. `n_vars` is raised to cover every literal.
    pub fn new(n_vars: usize, terms: Vec<Vec<Literal>>) -> Result<Self, HardnessError> {
        if terms.is_empty() {
            return Err(HardnessError::NoTerms);
        }
        for (j, t) in terms.iter().enumerate() {
            if t.is_empty() {
                return Err(HardnessError::EmptyTerm(j));
            }
            if t.len() > 3 {
                return Err(HardnessError::TermTooLong { term: j, len: t.len() });
            }
        }
        let used = terms.iter().flatten().map(|l| l.var + 1).max().unwrap_or(0);
        Ok(DnfFormula { n_vars: n_vars.max(used), terms })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[Vec<Literal>] {
        &self.terms
    }

    pub fn literal_count(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }

    /// Index of the first satisfied term.
    pub fn satisfied_term(&self, assignment: &[bool]) -> Option<usize> {
        self.terms.iter().position(|t| t.iter().all(|l| l.eval(assignment)))
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.satisfied_term(assignment).is_some()
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, t) in self.terms.iter().enumerate() {
            if j > 0 {
                f.write_str(" | ")?;
            }
            f.write_str("(")?;
            for (i, l) in t.iter().enumerate() {
                if i > 0 {
                    f.write_str(" & ")?;
                }
                write!(f, "{l}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FromStr for DnfFormula {
    type Err = HardnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_dnf(s)
    }
}

/// Parses `(x1 & !x2 & x3) | (x2)`. Parentheses around a single term are optional.
pub fn parse_dnf(text: &str) -> Result<DnfFormula, HardnessError> {
    let syntax = |pos: usize, msg: &str| HardnessError::Syntax { pos, msg: msg.to_string() };
    let bytes = text.as_bytes();
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let mut terms = Vec::new();
    loop {
        skip_ws(&mut pos);
        let paren = pos < bytes.len() && bytes[pos] == b'(';
        if paren {
            pos += 1;
        }
        let mut term = Vec::new();
        loop {
            skip_ws(&mut pos);
            if paren && pos < bytes.len() && bytes[pos] == b')' && term.is_empty() {
                return Err(HardnessError::EmptyTerm(terms.len()));
            }
            let mut positive = true;
            while pos < bytes.len() && (bytes[pos] == b'!' || bytes[pos] == b'~') {
                positive = !positive;
                pos += 1;
                skip_ws(&mut pos);
            }
            if pos >= bytes.len() || bytes[pos] != b'x' {
                return Err(syntax(pos, "expected a variable `x<k>`"));
            }
            pos += 1;
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let k: usize = text[start..pos].parse().map_err(|_| syntax(start, "expected a variable index"))?;
            if k == 0 {
                return Err(syntax(start, "variables are numbered from 1"));
            }
            term.push(Literal { var: k - 1, positive });
            skip_ws(&mut pos);
            if pos < bytes.len() && bytes[pos] == b'&' {
                pos += 1;
                continue;
            }
            break;
        }
        if paren {
            if pos >= bytes.len() || bytes[pos] != b')' {
                return Err(syntax(pos, "expected `)`"));
            }
            pos += 1;
        }
        if term.len() > 3 {
            return Err(HardnessError::TermTooLong { term: terms.len(), len: term.len() });
        }
        terms.push(term);
        skip_ws(&mut pos);
        if pos >= bytes.len() {
            break;
        }
        if bytes[pos] != b'|' {
            return Err(syntax(pos, "expected `|`"));
        }
        pos += 1;
    }
    DnfFormula::new(0, terms)
}

/// Assignment `i` in counting order: bit `l` of `i` is the value of `x_{l+1}`.
fn assignment(n: usize, i: u64) -> Vec<bool> {
    (0..n).map(|l| i >> l & 1 == 1).collect()
}

/// First falsifying assignment in counting order.
pub fn falsifying_assignment(f: &DnfFormula) -> Result<Option<Vec<bool>>, HardnessError> {
    let n = f.n_vars;
    if n > TAUTOLOGY_VAR_CAP {
        return Err(HardnessError::TooManyVariables { n, cap: TAUTOLOGY_VAR_CAP });
    }
    Ok((0..1u64 << n).map(|i| assignment(n, i)).find(|a| !f.eval(a)))
}

pub fn is_tautology(f: &DnfFormula) -> Result<bool, HardnessError> {
    Ok(falsifying_assignment(f)?.is_none())
}

/// The graph pair with handles on the named nodes.
#[derive(Clone, Debug)]
pub struct ReductionPair {
    pub d: Graph,
    pub d_plus: Graph,
    pub alpha: NodeId,
    pub beta: NodeId,
    /// `literals[j][i]` is the node of the `i`th literal of term `j`.
    pub literals: Vec<Vec<NodeId>>,
    pub chi: Vec<NodeId>,
    pub upsilon: Vec<NodeId>,
}

impl ReductionPair {
    /// Nodes other than alpha, beta and the `g_*` helpers.
    pub fn core_nodes(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.literals.iter().flatten().copied().collect();
        for l in 0..self.chi.len() {
            v.push(self.chi[l]);
            v.push(self.upsilon[l]);
        }
        v
    }
}

/// Closed-form sizes of the reduction output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionSize {
    pub nodes: usize,
    pub directed: usize,
    pub blunt_d: usize,
    pub blunt_d_plus: usize,
}

pub fn expected_size(f: &DnfFormula) -> ReductionSize {
    let (n, t, l) = (f.n_vars, f.terms.len(), f.literal_count());
    let core = l + 2 * n;
    let nodes = 2 + 2 * core;
    let blunt_d = (l - t) + 2 * t + 4 * (n - 1) + 3;
    ReductionSize {
        nodes,
        directed: nodes + 3 * core + t + 2 * l,
        blunt_d,
        blunt_d_plus: blunt_d + 2,
    }
}

pub fn reduce_to_graph_pair(f: &DnfFormula) -> ReductionPair {
    let mut labels = vec!["alpha".to_string(), "beta".to_string()];
    let mut core = Vec::new();
    for (j, t) in f.terms.iter().enumerate() {
        for i in 0..t.len() {
            core.push(format!("z_{}_{}", j + 1, i + 1));
        }
    }
    for l in 1..=f.n_vars {
        core.push(format!("x_{l}"));
        core.push(format!("u_{l}"));
    }
    let helpers: Vec<String> = core.iter().map(|c| format!("g_{c}")).collect();
    labels.extend(core.iter().cloned());
    labels.extend(helpers);
    let mut g = Graph::with_nodes(&labels).expect("generated labels are valid");
    g.set_declared(Some(GraphClass::Cdg));

    let alpha = NodeId(0);
    let beta = NodeId(1);
    let n_core = core.len();
    let helper = |v: NodeId| NodeId(v.0 + n_core);
    let mut next = 2;
    let literals: Vec<Vec<NodeId>> = f
        .terms
        .iter()
        .map(|t| {
            let ids = (next..next + t.len()).map(NodeId).collect();
            next += t.len();
            ids
        })
        .collect();
    let chi: Vec<NodeId> = (0..f.n_vars).map(|l| NodeId(next + 2 * l)).collect();
    let upsilon: Vec<NodeId> = (0..f.n_vars).map(|l| NodeId(next + 2 * l + 1)).collect();

    let mut add = |e: Edge| g.insert_edge(e).expect("reduction edges fit a cDG");
    let two_cycle = |add: &mut dyn FnMut(Edge), a: NodeId, b: NodeId| {
        add(Edge::directed(a, b));
        add(Edge::directed(b, a));
    };
    for i in 0..labels.len() {
        add(Edge::directed(NodeId(i), NodeId(i)));
    }
    for d in (2..2 + n_core).map(NodeId) {
        add(Edge::directed(alpha, helper(d)));
        two_cycle(&mut add, helper(d), d);
    }
    for (t, zs) in f.terms.iter().zip(&literals) {
        add(Edge::directed(alpha, zs[0]));
        for w in zs.windows(2) {
            add(Edge::blunt(w[0], w[1]));
        }
        let last = *zs.last().expect("terms are non-empty");
        add(Edge::blunt(last, chi[0]));
        add(Edge::blunt(last, upsilon[0]));
        for (lit, &z) in t.iter().zip(zs) {
            let target = if lit.positive { chi[lit.var] } else { upsilon[lit.var] };
            two_cycle(&mut add, target, z);
        }
    }
    for l in 0..f.n_vars.saturating_sub(1) {
        for a in [chi[l], upsilon[l]] {
            for b in [chi[l + 1], upsilon[l + 1]] {
                add(Edge::blunt(a, b));
            }
        }
    }
    if let (Some(&xn), Some(&un)) = (chi.last(), upsilon.last()) {
        add(Edge::blunt(xn, beta));
        add(Edge::blunt(un, beta));
        add(Edge::blunt(chi[0], upsilon[0]));
    }
    let mut d_plus = g.clone();
    if f.n_vars > 0 {
        d_plus.insert_edge(Edge::blunt(alpha, chi[0])).expect("cDG edge");
        d_plus.insert_edge(Edge::blunt(alpha, upsilon[0])).expect("cDG edge");
    }
    ReductionPair { d: g, d_plus, alpha, beta, literals, chi, upsilon }
}

/// `{x_l : x_l = 1} ∪ {u_l : x_l = 0}`: the interior of the `D+` collider
/// path from alpha to beta that has no counterpart in `D`.
pub fn assignment_nodes(pair: &ReductionPair, assignment: &[bool]) -> NodeSet {
    let mut c = pair.d.empty_set();
    for (l, &x) in assignment.iter().enumerate() {
        c.insert(if x { pair.chi[l] } else { pair.upsilon[l] });
    }
    c
}

/// Certificate that a falsified formula gives non-equivalent graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationCertificate {
    /// The assignment nodes, see [`assignment_nodes`].
    pub path_nodes: NodeSet,
    /// `an({alpha, beta} ∪ path_nodes)` without alpha and beta. It separates
    /// beta from alpha in `D` and not in `D+`.
    pub separator: NodeSet,
}

/// Builds and checks the separator for a falsifying assignment.
pub fn falsifying_assignment_to_separator(
    f: &DnfFormula,
    pair: &ReductionPair,
    assignment: &[bool],
) -> Result<SeparationCertificate, HardnessError> {
    if assignment.len() != f.n_vars {
        return Err(HardnessError::AssignmentLength { got: assignment.len(), want: f.n_vars });
    }
    if let Some(j) = f.satisfied_term(assignment) {
        return Err(HardnessError::NotFalsifying(j));
    }
    let path_nodes = assignment_nodes(pair, assignment);
    let mut ends = path_nodes.clone();
    ends.insert(pair.alpha);
    ends.insert(pair.beta);
    let mut separator = pair.d.ancestors(&ends);
    separator.remove(pair.alpha);
    separator.remove(pair.beta);
    let q = SeparationQuery::pair(&pair.d, pair.alpha, pair.beta, separator.clone());
    let in_d = mu_separated(&pair.d, &q);
    let in_dplus = mu_separated(&pair.d_plus, &q);
    if !in_d || in_dplus {
        return Err(HardnessError::WitnessRejected { in_d, in_dplus });
    }
    Ok(SeparationCertificate { path_nodes, separator })
}

/// Separator for the first falsifying assignment.
pub fn reduction_witness(
    f: &DnfFormula,
    pair: &ReductionPair,
) -> Result<(Vec<bool>, SeparationCertificate), HardnessError> {
    let a = falsifying_assignment(f)?.ok_or(HardnessError::NoFalsifier)?;
    let c = falsifying_assignment_to_separator(f, pair, &a)?;
    Ok((a, c))
}

/// Seeded formulas with `1..=max_vars` variables and `1..=max_terms` terms.
/// Roughly a third are tautologies by construction (every sign pattern over
/// one or two variables), the rest are uniform random terms.
pub fn generate_corpus(count: usize, max_vars: usize, max_terms: usize, seed: u64) -> Vec<DnfFormula> {
    assert!(max_vars >= 1 && max_terms >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=max_vars);
            if rng.random_bool(1.0 / 3.0) && max_terms >= 2 {
                tautology(&mut rng, n, max_terms)
            } else {
                random_formula(&mut rng, n, max_terms)
            }
        })
        .collect()
}

fn random_formula(rng: &mut impl Rng, n: usize, max_terms: usize) -> DnfFormula {
    let t = rng.random_range(1..=max_terms);
    let terms = (0..t)
        .map(|_| {
            let k = rng.random_range(1..=3);
            (0..k)
                .map(|_| Literal { var: rng.random_range(0..n), positive: rng.random_bool(0.5) })
                .collect()
        })
        .collect();
    DnfFormula::new(n, terms).expect("terms have 1 to 3 literals")
}

fn tautology(rng: &mut impl Rng, n: usize, max_terms: usize) -> DnfFormula {
    let k = if n >= 2 && max_terms >= 4 { rng.random_range(1..=2) } else { 1 };
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    vars.truncate(k);
    let mut terms: Vec<Vec<Literal>> = (0..1u64 << k)
        .map(|bits| {
            vars.iter()
                .enumerate()
                .map(|(i, &var)| Literal { var, positive: bits >> i & 1 == 1 })
                .collect()
        })
        .collect();
    while terms.len() < max_terms && rng.random_bool(0.5) {
        let extra = random_formula(rng, n, 1);
        terms.extend(extra.terms);
    }
    terms.shuffle(rng);
    DnfFormula::new(n, terms).expect("terms have 1 to 3 literals")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::{collider_equivalent, markov_equivalent};

    fn f(s: &str) -> DnfFormula {
        parse_dnf(s).unwrap()
    }

    #[test]
    fn parses() {
        assert_eq!(f("(x1) | (!x1)").terms().len(), 2);
        assert_eq!(
            f("(x1 & !x2)").terms()[0],
            vec![Literal { var: 0, positive: true }, Literal { var: 1, positive: false }]
        );
        assert_eq!(parse_dnf("(x1 & x2 & x3 & x4)"), Err(HardnessError::TermTooLong { term: 0, len: 4 }));
        assert_eq!(parse_dnf("(x1) | ()"), Err(HardnessError::EmptyTerm(1)));
        assert!(matches!(parse_dnf("(x0)"), Err(HardnessError::Syntax { .. })));
        assert!(matches!(parse_dnf("(x1"), Err(HardnessError::Syntax { .. })));
        assert!(matches!(parse_dnf("(x1) (x2)"), Err(HardnessError::Syntax { .. })));
        assert_eq!(f("x1&x2|!x3"), f("(x1 & x2) | (!x3)"));
        let g = f("(x1 & !x2) | (x3)");
        assert_eq!(f(&g.to_string()), g);
    }

    #[test]
    fn tautologies() {
        assert!(is_tautology(&f("(x1)|(!x1)")).unwrap());
        assert!(!is_tautology(&f("(x1)")).unwrap());
        assert_eq!(falsifying_assignment(&f("(x1)")).unwrap(), Some(vec![false]));
        assert!(is_tautology(&f("(x1&x2)|(!x1)|(x1&!x2)")).unwrap());
        let big = DnfFormula::new(21, vec![vec![Literal { var: 0, positive: true }]]).unwrap();
        assert!(matches!(is_tautology(&big), Err(HardnessError::TooManyVariables { .. })));
    }

    #[test]
    fn single_variable_construction() {
        let h = f("(x1)");
        let p = reduce_to_graph_pair(&h);
        assert_eq!(p.d.n(), 8);
        let (x1, u1) = (p.d.node("x_1").unwrap(), p.d.node("u_1").unwrap());
        assert!(p.d.has_blunt(x1, p.beta) && p.d.has_blunt(u1, p.beta));
        assert!(p.d.has_blunt(x1, u1));
        let z = p.d.node("z_1_1").unwrap();
        assert!(p.d.has_directed(p.alpha, z));
        assert!(p.d.has_directed(z, x1) && p.d.has_directed(x1, z));
        assert!(!p.d.has_directed(z, u1));
        let extra: Vec<Edge> = p.d_plus.edges().into_iter().filter(|e| !p.d.contains_edge(e)).collect();
        assert_eq!(extra.len(), 2);
        assert!(extra.contains(&Edge::blunt(p.alpha, x1)) && extra.contains(&Edge::blunt(p.alpha, u1)));
        assert_eq!(p.d_plus.edge_count(), p.d.edge_count() + 2);
        assert!(p.d.has_all_loops());
    }

    #[test]
    fn sizes_match_closed_form() {
        for s in ["(x1)", "(x1&!x2&x3)|(x2)", "(x1&x2)|(!x3&x4)|(x1&!x4&x2)|(!x2)", "(x2)"] {
            let h = f(s);
            let p = reduce_to_graph_pair(&h);
            let want = expected_size(&h);
            assert_eq!(p.d.n(), want.nodes, "{s}");
            assert_eq!(p.d.directed_count(), want.directed, "{s}");
            assert_eq!(p.d.blunt_count(), want.blunt_d, "{s}");
            assert_eq!(p.d_plus.blunt_count(), want.blunt_d_plus, "{s}");
        }
    }

    #[test]
    fn separators_from_falsifiers() {
        let h = f("(x1)");
        let p = reduce_to_graph_pair(&h);
        let c = falsifying_assignment_to_separator(&h, &p, &[false]).unwrap();
        assert_eq!(p.d.set_labels(&c.path_nodes), vec!["u_1"]);
        assert_eq!(p.d.set_labels(&c.separator), vec!["g_u_1", "u_1"]);
        // the assignment nodes alone do not separate: alpha -> g_u_1 -> u_1 |-| beta
        let q = SeparationQuery::pair(&p.d, p.alpha, p.beta, c.path_nodes.clone());
        assert!(!mu_separated(&p.d, &q));
        let h = f("(x1&x2)");
        let p = reduce_to_graph_pair(&h);
        let c = falsifying_assignment_to_separator(&h, &p, &[true, false]).unwrap();
        assert_eq!(p.d.set_labels(&c.path_nodes), vec!["u_2", "x_1"]);
        assert_eq!(falsifying_assignment_to_separator(&h, &p, &[true, true]), Err(HardnessError::NotFalsifying(0)));
        let t = f("(x1)|(!x1)");
        assert_eq!(reduction_witness(&t, &reduce_to_graph_pair(&t)).unwrap_err(), HardnessError::NoFalsifier);
    }

    #[test]
    fn small_formulas_reduce_correctly() {
        for s in ["(x1)|(!x1)", "(x1)", "(x1&x2)|(!x1)|(x1&!x2)", "(x1&x2)|(!x1&!x2)", "(!x2)|(x1&x2)|(!x1&x2)"] {
            let h = f(s);
            let p = reduce_to_graph_pair(&h);
            let taut = is_tautology(&h).unwrap();
            assert_eq!(markov_equivalent(&p.d, &p.d_plus).unwrap(), taut, "{s}");
            assert_eq!(collider_equivalent(&p.d, &p.d_plus).unwrap(), taut, "{s}");
            if !taut {
                reduction_witness(&h, &p).unwrap();
            }
        }
    }

    #[test]
    fn corpus_is_mixed_and_seeded() {
        let c = generate_corpus(60, 4, 4, 1);
        assert_eq!(c, generate_corpus(60, 4, 4, 1));
        let taut = c.iter().filter(|h| is_tautology(h).unwrap()).count();
        assert!(taut > 5 && taut < 55, "{taut}");
        assert!(c.iter().all(|h| h.n_vars() <= 4 && h.terms().len() <= 4));
    }
}
