use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    build_def, canonical_lig, partition_for_query, OuError, OuModel, Partition, RiccatiSystem, M_ZERO_BLOCKS,
    ZERO_TOL,
};
use crate::graph::{Graph, GraphClass};
use crate::linalg::{spectral_abscissa, Mat, Vector};
use crate::nodeset::NodeSet;
use crate::random::{random_graph_with, RandomGraphParams};
use crate::separation::{mu_separated, SeparationQuery};

/// Three coordinates: `α -> β`, `β |-| γ` through a shared noise column, all loops.
pub fn example_model() -> OuModel {
    let labels = vec!["alpha".to_string(), "beta".to_string(), "gamma".to_string()];
    let m = Mat::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.8, -1.2, 0.0, 0.0, 0.0, -0.9]);
    let sigma0 = Mat::from_row_slice(3, 4, &[0.5, 0.0, 0.0, 0.0, 0.0, 0.6, 0.0, 0.4, 0.0, 0.0, 0.7, 0.3]);
    let mu = Vector::from_vec(vec![0.2, -0.1, 0.3]);
    OuModel::new(labels, m, mu, sigma0, Vector::from_element(3, 1.0)).expect("example model is valid")
}

fn coef(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let v = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        v
    } else {
        -v
    }
}

/// Stable `M` and positive definite `Σ` whose nonzeros follow `g` (which
/// must contain every directed loop and no bidirected edge).
pub fn sample_model(g: &Graph, rng: &mut impl Rng) -> Result<OuModel, OuError> {
    let n = g.n();
    if !g.has_all_loops() || g.class() == GraphClass::Dmg {
        return Err(OuError::InvalidModel("need a cDG with every directed loop".into()));
    }
    for _ in 0..100 {
        let mut m = Mat::zeros(n, n);
        for b in g.nodes() {
            for a in g.parents(b).iter() {
                m[(b.index(), a.index())] = coef(rng, 0.3, 1.0);
            }
        }
        let shift = spectral_abscissa(&m)?.max(0.0) + rng.random_range(0.5..1.0);
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        let mut sigma = Mat::zeros(n, n);
        for (a, b) in g.blunt_pairs() {
            let v = coef(rng, 0.2, 0.6);
            sigma[(a.index(), b.index())] = v;
            sigma[(b.index(), a.index())] = v;
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| sigma[(i, j)].abs()).sum();
            sigma[(i, i)] = off + rng.random_range(0.5..1.5);
        }
        let mu = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let g0 = Vector::from_fn(n, |_, _| rng.random_range(0.5..1.5));
        let model = OuModel::from_sigma(g.labels().to_vec(), m, mu, sigma, g0)?;
        if canonical_lig(&model, ZERO_TOL).edges() == g.edges() {
            return Ok(model);
        }
    }
    Err(OuError::InvalidModel("could not match the graph's pattern".into()))
}

/// A model together with a μ-separated query and a non-separated control.
#[derive(Clone, Debug)]
pub struct SeparatedInstance {
    pub graph: Graph,
    pub model: OuModel,
    pub query: SeparationQuery,
    pub partition: Partition,
    pub negative: SeparationQuery,
}

fn random_query(g: &Graph, rng: &mut impl Rng) -> SeparationQuery {
    let n = g.n();
    let b = g.singleton(crate::NodeId(rng.random_range(0..n)));
    let rest = b.complement();
    let a_size = rng.random_range(1..=2.min(rest.len()));
    let a = NodeSet::from_nodes(n, rest.iter().choose_multiple(rng, a_size));
    let mut c = g.empty_set();
    for v in rest.difference(&a).iter() {
        if rng.random_bool(0.4) {
            c.insert(v);
        }
    }
    SeparationQuery { a, b, c }
}

/// Rejection sampler over random looped cDGs on `n` nodes. The separated
/// query has `B = {β}` outside `A ∪ C` and a nonempty unobserved set.
pub fn generate_separated_instance(n: usize, seed: u64) -> Result<SeparatedInstance, OuError> {
    if n < 2 {
        return Err(OuError::InvalidModel("need at least two nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = (2.0 / n as f64).min(0.35);
    let params = RandomGraphParams { n, p_directed: p, p_symmetric: p, p_loop: 1.0, class: GraphClass::Cdg };
    for _ in 0..10_000 {
        let g = random_graph_with(&params, &mut rng);
        let query = random_query(&g, &mut rng);
        let u = query.a.union(&query.b).union(&query.c).complement();
        if u.is_empty() || !mu_separated(&g, &query) {
            continue;
        }
        let negative = (0..200)
            .map(|_| random_query(&g, &mut rng))
            .find(|q| !mu_separated(&g, q));
        let Some(negative) = negative else { continue };
        let partition = partition_for_query(&g, &query)?;
        let model = sample_model(&g, &mut rng)?;
        return Ok(SeparatedInstance { graph: g, model, query, partition, negative });
    }
    Err(OuError::InvalidModel("no separated instance found".into()))
}

/// `D, E, F` for a random stable model on `k + 1..=k + 2` nodes with `|U| = k`.
pub fn random_stable_system(k: usize, seed: u64) -> Result<(OuModel, RiccatiSystem), OuError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = k + rng.random_range(1..=2);
    let params = RandomGraphParams { n, p_directed: 0.5, p_symmetric: 0.4, p_loop: 1.0, class: GraphClass::Cdg };
    let g = random_graph_with(&params, &mut rng);
    let model = sample_model(&g, &mut rng)?;
    let u = NodeSet::from_nodes(n, (0..n).map(crate::NodeId).choose_multiple(&mut rng, k));
    let sys = build_def(&model, &u)?;
    Ok((model, sys))
}

/// Sets the first entry of the first nonempty structural zero block of `M`
/// to `0.5`. Returns the mutated model and the `(row block, col block)`.
pub fn mutate_structural_zero(model: &OuModel, p: &Partition) -> Option<(OuModel, (usize, usize))> {
    for &(r, c) in &M_ZERO_BLOCKS {
        if let (Some(i), Some(j)) = (p.block(r).first(), p.block(c).first()) {
            let mut m = model.m().clone();
            m[(i.index(), j.index())] = 0.5;
            return model.with_m(m).ok().map(|mm| (mm, (r, c)));
        }
    }
    None
}
