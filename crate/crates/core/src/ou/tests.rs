use super::*;
use crate::graph::Edge;
use crate::linalg::{is_psd, lyapunov_solve, max_abs};
use crate::nodeset::NodeSet;
use crate::random::{random_graph, RandomGraphParams};
use crate::separation::SeparationQuery;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mat(rows: &[&[f64]]) -> Mat {
    Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

fn query(g: &Graph, a: &[&str], b: &[&str], c: &[&str]) -> SeparationQuery {
    SeparationQuery::from_labels(g, a, b, c).unwrap()
}

#[test]
fn canonical_graph_of_example() {
    let model = example_model();
    let g = canonical_lig(&model, ZERO_TOL);
    let (a, b, c) = (NodeId(0), NodeId(1), NodeId(2));
    let mut expected = vec![
        Edge::directed(a, a),
        Edge::directed(b, b),
        Edge::directed(c, c),
        Edge::directed(a, b),
        Edge::blunt(b, c),
    ];
    let mut got = g.edges();
    expected.sort_by(|x, y| g.edge_order(x, y));
    got.sort_by(|x, y| g.edge_order(x, y));
    assert_eq!(got, expected);
    assert_eq!(g.class(), GraphClass::Cdg);
}

#[test]
fn threshold_drops_small_entries() {
    let m = mat(&[&[-1.0, 1e-14], &[0.0, -1.0]]);
    let model = OuModel::from_sigma(labels(2), m, Vector::zeros(2), Mat::identity(2, 2), Vector::from_element(2, 1.0))
        .unwrap();
    assert_eq!(canonical_lig(&model, ZERO_TOL).directed_count(), 2);
    assert_eq!(canonical_lig(&model, 0.0).directed_count(), 3);
}

#[test]
fn json_round_trip() {
    let model = example_model();
    let text = serde_json::to_string(&model).unwrap();
    let back: OuModel = serde_json::from_str(&text).unwrap();
    assert_eq!(back.m(), model.m());
    assert!(max_abs(&(back.sigma() - model.sigma())) < 1e-15);

    let spec = r#"{"nodes":["a","b"],"M":[[-1,0],[0.5,-1]],"mu":[0,0],"Sigma":[[1,0.2],[0.2,1]]}"#;
    let m: OuModel = serde_json::from_str(spec).unwrap();
    assert_eq!(m.gamma0_diag().as_slice(), &[1.0, 1.0]);
    assert_eq!(m.sigma()[(0, 1)], 0.2);
}

#[test]
fn invalid_models_are_rejected() {
    let both = r#"{"nodes":["a"],"M":[[-1]],"mu":[0],"sigma0":[[1]],"Sigma":[[1]]}"#;
    assert!(serde_json::from_str::<OuModel>(both).is_err());
    let singular = r#"{"nodes":["a","b"],"M":[[-1,0],[0,-1]],"mu":[0,0],"sigma0":[[1],[1]]}"#;
    assert!(serde_json::from_str::<OuModel>(singular).is_err());
    let ragged = r#"{"nodes":["a","b"],"M":[[-1,0],[0]],"mu":[0,0],"Sigma":[[1,0],[0,1]]}"#;
    assert!(serde_json::from_str::<OuModel>(ragged).is_err());
    let bad_gamma = r#"{"nodes":["a"],"M":[[-1]],"mu":[0],"Sigma":[[1]],"Gamma0_diag":[0]}"#;
    assert!(serde_json::from_str::<OuModel>(bad_gamma).is_err());
}

#[test]
fn sampled_models_reproduce_their_graph() {
    for seed in 0..30 {
        let params = RandomGraphParams { n: 5, p_directed: 0.4, p_symmetric: 0.4, ..Default::default() };
        let g = random_graph(&params, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = sample_model(&g, &mut rng).unwrap();
        assert_eq!(canonical_lig(&model, ZERO_TOL).edges(), g.edges());
        assert!(crate::linalg::is_stable(model.m()).unwrap());
    }
}

#[test]
fn scalar_coefficients() {
    // U = {x0}, W = {x1}.
    let (m11, m21, m22, s1, s2, s12) = (-1.3, 0.7, -0.8, 2.0, 1.5, 0.4);
    let m = mat(&[&[m11, 0.0], &[m21, m22]]);
    let sigma = mat(&[&[s1, s12], &[s12, s2]]);
    let model = OuModel::from_sigma(labels(2), m, Vector::zeros(2), sigma, Vector::from_element(2, 1.0)).unwrap();
    let sys = build_def(&model, &NodeSet::from_nodes(2, [NodeId(0)])).unwrap();
    assert!((sys.d[(0, 0)] - (m11 - m21 * s12 / s2)).abs() < 1e-14);
    assert!((sys.e[(0, 0)] - m21 * m21 / s2).abs() < 1e-14);
    assert!((sys.f[(0, 0)] - (s1 - s12 * s12 / s2)).abs() < 1e-14);
}

#[test]
fn nothing_observed() {
    let model = example_model();
    let sys = build_def(&model, &NodeSet::full(3)).unwrap();
    assert_eq!(sys.d, model.m().transpose());
    assert_eq!(sys.e, Mat::zeros(3, 3));
    assert_eq!(&sys.f, model.sigma());
    // With E = 0 the stationary solution solves a Lyapunov equation.
    let flow = RiccatiFlow::new(&sys, &Mat::identity(3, 3)).unwrap();
    let lyap = lyapunov_solve(&sys.d.transpose(), &sys.f).unwrap();
    assert!(max_abs(&(flow.gamma_bar() - lyap)) < 1e-10);
}

fn instance(seed: u64) -> SeparatedInstance {
    generate_separated_instance(6, seed).unwrap()
}

#[test]
fn partition_of_example() {
    let model = example_model();
    let g = canonical_lig(&model, ZERO_TOL);
    let q = query(&g, &["alpha"], &["gamma"], &[]);
    let p = partition_for_query(&g, &q).unwrap();
    let u = p.u();
    assert_eq!(g.set_labels(&u), vec!["beta", "gamma"]);
    assert!(p.block(1).contains(NodeId(2)));
    assert!(p.block(4).union(p.block(5)).union(p.block(6)) == p.w());
    assert!(audit_model(&model, &p).is_empty());
    let q = query(&g, &["alpha"], &["beta"], &[]);
    assert_eq!(partition_for_query(&g, &q), Err(OuError::NotSeparated));
}

#[test]
fn blocks_cover_the_nodes() {
    for seed in 0..20 {
        let inst = instance(seed);
        let p = &inst.partition;
        let n = inst.graph.n();
        let mut seen = NodeSet::empty(n);
        for i in 1..=6 {
            assert!(!seen.intersects(p.block(i)), "seed {seed}: block {i} overlaps");
            seen.union_with(p.block(i));
        }
        assert_eq!(seen, NodeSet::full(n));
        assert_eq!(p.u(), p.w().complement());
    }
}

#[test]
fn structural_zeros_hold_exactly() {
    for seed in 0..20 {
        let inst = instance(seed);
        let p = &inst.partition;
        assert_eq!(audit_model(&inst.model, p), vec![], "seed {seed}");
        let sys = build_def(&inst.model, &p.u()).unwrap();
        assert_eq!(audit_def(&sys, p), vec![], "seed {seed}");
        let gamma0 = Mat::from_diagonal(&crate::linalg::subvector(inst.model.gamma0_diag(), &sys.u));
        let flow = RiccatiFlow::new(&sys, &gamma0).unwrap();
        assert_eq!(audit_gamma("Gamma_bar", flow.gamma_bar(), &sys, p, 1e-10), vec![], "seed {seed}");
        for (k, it) in flow.care.iterates.iter().enumerate() {
            assert_eq!(audit_gamma("Newton", it, &sys, p, 1e-10), vec![], "seed {seed} iterate {k}");
        }
        for t in [0.0, 0.5, 3.0] {
            assert_eq!(audit_gamma("Gamma_t", &flow.at(t).unwrap(), &sys, p, 1e-10), vec![], "seed {seed}");
        }
    }
}

#[test]
fn inverse_keeps_the_sparsity() {
    // Σ_WW⁻¹ is block diagonal over (V4, V5, V6) when Σ_WW is.
    for seed in 0..20 {
        let inst = instance(seed);
        let p = &inst.partition;
        let sys = build_def(&inst.model, &p.u()).unwrap();
        let pos = |i: usize| -> Vec<usize> {
            sys.w.iter().enumerate().filter(|(_, &v)| p.block(i).contains(NodeId(v))).map(|(k, _)| k).collect()
        };
        for (r, c) in [(4, 5), (4, 6), (5, 6), (5, 4), (6, 4), (6, 5)] {
            let blk = crate::linalg::submatrix(&sys.sigma_ww_inv, &pos(r), &pos(c));
            assert!(max_abs(&blk) == 0.0, "seed {seed}: block ({r},{c})");
        }
    }
}

#[test]
fn mutation_is_caught() {
    let mut caught = 0;
    for seed in 0..20 {
        let inst = instance(seed);
        if let Some((bad, (r, c))) = mutate_structural_zero(&inst.model, &inst.partition) {
            let v = audit_model(&bad, &inst.partition);
            assert!(v.iter().any(|b| b.matrix == "M" && b.row_block == r && b.col_block == c));
            caught += 1;
        }
    }
    assert!(caught > 0);
}

#[test]
fn closed_form_matches_rk4() {
    for (k, seed) in [(1, 1), (2, 2), (3, 3), (4, 4)] {
        let (_, sys) = random_stable_system(k, seed).unwrap();
        let gamma0 = Mat::identity(k, k) * 2.0;
        let flow = RiccatiFlow::new(&sys, &gamma0).unwrap();
        let path = riccati_rk4(&sys, &gamma0, 10.0, 1e-3);
        for t in [0.1, 1.0, 10.0] {
            let j = (t / 1e-3_f64).round() as usize;
            let err = max_abs(&(flow.at(t).unwrap() - &path[j].1));
            assert!(err < 1e-6, "k={k}: |closed - rk4| = {err:e} at t={t}");
        }
        let long = flow.at(50.0).unwrap();
        assert!(max_abs(&(long - flow.gamma_bar())) < 1e-8);
    }
}

#[test]
fn stationary_start_stays_put() {
    let (_, sys) = random_stable_system(3, 11).unwrap();
    let bar = RiccatiFlow::new(&sys, &Mat::identity(3, 3)).unwrap().gamma_bar().clone();
    let flow = RiccatiFlow::new(&sys, &bar).unwrap();
    for t in [0.3, 2.0, 20.0] {
        assert!(max_abs(&(flow.at(t).unwrap() - &bar)) < 1e-10);
    }
    let grid = flow.uniform(0.01, 100).unwrap();
    assert!(grid.iter().all(|g| max_abs(&(g - &bar)) < 1e-10));
    assert!(max_abs(&sys.rhs(&bar)) < 1e-8);
}

#[test]
fn uniform_grid_matches_pointwise() {
    let (_, sys) = random_stable_system(2, 5).unwrap();
    let flow = RiccatiFlow::new(&sys, &Mat::identity(2, 2)).unwrap();
    let grid = flow.uniform(0.05, 40).unwrap();
    for (j, g) in grid.iter().enumerate() {
        assert!(max_abs(&(g - flow.at(j as f64 * 0.05).unwrap())) < 1e-10);
    }
}

#[test]
fn simulation_is_deterministic() {
    let model = example_model();
    let a = euler_maruyama(&model, 1.0, 0.01, 3).unwrap();
    let b = euler_maruyama(&model, 1.0, 0.01, 3).unwrap();
    let c = euler_maruyama(&model, 1.0, 0.01, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.x, c.x);
    assert_eq!(a.x.len(), 101);
    assert!(euler_maruyama(&model, 1.0, 0.0, 3).is_err());
}

#[test]
fn shifting_the_mean_shifts_the_path() {
    let model = example_model();
    let shift = Vector::from_vec(vec![1.0, -2.0, 0.5]);
    let moved = OuModel::new(
        model.labels().to_vec(),
        model.m().clone(),
        model.mu() + &shift,
        model.sigma0().clone(),
        model.gamma0_diag().clone(),
    )
    .unwrap();
    let a = euler_maruyama(&model, 2.0, 0.01, 9).unwrap();
    let b = euler_maruyama(&moved, 2.0, 0.01, 9).unwrap();
    for (x, y) in a.x.iter().zip(&b.x) {
        assert!((y - x - &shift).amax() < 1e-12);
    }
}

#[test]
fn stationary_covariance() {
    let m = mat(&[&[-1.0, 0.0], &[0.6, -1.5]]);
    let sigma = mat(&[&[1.0, 0.3], &[0.3, 0.8]]);
    let model = OuModel::from_sigma(labels(2), m.clone(), Vector::zeros(2), sigma.clone(), Vector::from_element(2, 1.0))
        .unwrap();
    let path = euler_maruyama(&model, 4000.0, 0.01, 1).unwrap();
    let burn = 1000;
    let xs = &path.x[burn..];
    let mut cov = Mat::zeros(2, 2);
    for x in xs {
        cov += x * x.transpose();
    }
    cov /= xs.len() as f64;
    let exact = lyapunov_solve(&m, &sigma).unwrap();
    let rel = max_abs(&(&cov - &exact)) / max_abs(&exact);
    assert!(rel < 0.1, "empirical {cov} vs {exact}");
}

#[test]
fn filter_without_information_stays_at_the_mean() {
    let model = example_model();
    let path = euler_maruyama(&model, 2.0, 0.01, 2).unwrap();
    let run = kalman_bucy_filter(&model, &NodeSet::empty(3), &path).unwrap();
    for m in &run.m {
        assert!((m - model.mu()).amax() < 1e-12);
    }
    // gamma is independent of alpha, so observing alpha leaves its estimate alone.
    let run = kalman_bucy_filter(&model, &NodeSet::from_nodes(3, [NodeId(0)]), &path).unwrap();
    let k = run.u.iter().position(|&v| v == 2).unwrap();
    for m in &run.m {
        assert!((m[k] - model.mu()[2]).abs() < 1e-12);
    }
}

#[test]
fn filter_covariance_is_psd_and_shrinks() {
    let model = example_model();
    let path = euler_maruyama(&model, 3.0, 0.01, 5).unwrap();
    let none = kalman_bucy_filter(&model, &NodeSet::empty(3), &path).unwrap();
    let some = kalman_bucy_filter(&model, &NodeSet::from_nodes(3, [NodeId(0), NodeId(2)]), &path).unwrap();
    for g in none.gamma.iter().chain(&some.gamma) {
        assert!(is_psd(g, 1e-12));
    }
    // beta's conditional variance cannot grow with more observations.
    let j = path.steps();
    let kb = some.u.iter().position(|&v| v == 1).unwrap();
    assert!(some.gamma[j][(kb, kb)] <= none.gamma[j][(1, 1)] + 1e-12);
}

#[test]
fn filter_tracks_an_observed_parent() {
    // With alpha observed, beta's estimate follows the path more closely than the prior mean does.
    let model = example_model();
    let path = euler_maruyama(&model, 20.0, 0.001, 8).unwrap();
    let run = kalman_bucy_filter(&model, &NodeSet::from_nodes(3, [NodeId(0), NodeId(2)]), &path).unwrap();
    let k = run.u.iter().position(|&v| v == 1).unwrap();
    let (mut e_filter, mut e_prior) = (0.0, 0.0);
    for (j, x) in path.x.iter().enumerate() {
        e_filter += (x[1] - run.m[j][k]).powi(2);
        e_prior += (x[1] - model.mu()[1]).powi(2);
    }
    assert!(e_filter < e_prior);
}

#[test]
fn example_positive_and_negative() {
    let model = example_model();
    let g = canonical_lig(&model, ZERO_TOL);
    let sim = SimParams { t_end: 2.0, dt: 1e-3, seed: 7, n_paths: 3 };
    let pos = verify_global_markov(&model, &query(&g, &["alpha"], &["gamma"], &[]), &sim, Some(Mode::Positive)).unwrap();
    assert!(pos.pass, "positive level {}", pos.level);
    assert!(pos.level <= POSITIVE_TOL);
    let neg = verify_global_markov(&model, &query(&g, &["alpha"], &["beta"], &[]), &sim, Some(Mode::Negative)).unwrap();
    assert!(neg.pass, "negative level {}", neg.level);
    assert!(neg.level / pos.level.max(POSITIVE_FLOOR) >= 1e3);
    let err = verify_global_markov(&model, &query(&g, &["alpha"], &["beta"], &[]), &sim, Some(Mode::Positive));
    assert!(matches!(err, Err(OuError::ModeMismatch { .. })));
}

#[test]
fn empty_source_passes_trivially() {
    let model = example_model();
    let g = canonical_lig(&model, ZERO_TOL);
    let sim = SimParams { t_end: 1.0, dt: 1e-2, seed: 1, n_paths: 2 };
    let r = verify_global_markov(&model, &query(&g, &[], &["beta"], &["gamma"]), &sim, None).unwrap();
    assert_eq!(r.mode, Mode::Positive);
    assert!(r.pass);
    assert_eq!(r.level, 0.0);
    assert_eq!(r.version_level, 0.0);
}

#[test]
fn generated_instances_verify() {
    let sim = SimParams { t_end: 1.0, dt: 1e-3, seed: 3, n_paths: 2 };
    for seed in 0..5 {
        let inst = instance(seed);
        let pos = verify_global_markov(&inst.model, &inst.query, &sim, Some(Mode::Positive)).unwrap();
        assert!(pos.pass, "seed {seed}: level {}", pos.level);
        let neg = verify_global_markov(&inst.model, &inst.negative, &sim, Some(Mode::Negative)).unwrap();
        assert!(neg.pass, "seed {seed}: negative level {}", neg.level);
    }
}

#[test]
fn instances_are_reproducible() {
    let a = instance(42);
    let b = instance(42);
    assert_eq!(a.model, b.model);
    assert_eq!(a.query, b.query);
    assert_eq!(a.negative, b.negative);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn riccati_rhs_vanishes_at_the_stationary_point(k in 1usize..5, seed in any::<u64>()) {
        let (_, sys) = random_stable_system(k, seed).unwrap();
        let flow = RiccatiFlow::new(&sys, &Mat::identity(k, k)).unwrap();
        let bar = flow.gamma_bar();
        prop_assert!(max_abs(&sys.rhs(bar)) <= 1e-8 * (1.0 + max_abs(bar)));
        prop_assert!(is_psd(bar, 1e-10));
        prop_assert!(crate::linalg::is_stable(&flow.k_mat).unwrap());
    }

    #[test]
    fn partitions_satisfy_the_audit(seed in any::<u64>(), n in 3usize..7) {
        let inst = generate_separated_instance(n, seed).unwrap();
        prop_assert!(audit_model(&inst.model, &inst.partition).is_empty());
        let sys = build_def(&inst.model, &inst.partition.u()).unwrap();
        prop_assert!(audit_def(&sys, &inst.partition).is_empty());
    }
}

/// Random matrix with the `D` pattern over blocks of sizes `(2, 2, 1)`:
/// `(V2,V1)`, `(V3,V1)`, `(V1,V2)`, `(V3,V2)` vanish.
fn d_sparse(rng: &mut ChaCha8Rng) -> Mat {
    use rand::Rng;
    let block = [0, 0, 1, 1, 2];
    let zero = |r: usize, c: usize| matches!((block[r], block[c]), (1, 0) | (2, 0) | (0, 1) | (2, 1));
    let mut m = Mat::from_fn(5, 5, |i, j| if zero(i, j) { 0.0 } else { rng.random_range(-1.0..1.0) });
    let shift = crate::linalg::spectral_abscissa(&m).unwrap() + 0.5;
    for i in 0..5 {
        m[(i, i)] -= shift;
    }
    m
}

fn block_zero(m: &Mat, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> f64 {
    m.view((rows.start, cols.start), (rows.len(), cols.len())).amax()
}

#[test]
fn d_pattern_survives_inversion() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let inv = d_sparse(&mut rng).try_inverse().unwrap();
        assert!(block_zero(&inv, 2..4, 0..2) <= 1e-10);
        assert!(block_zero(&inv, 4..5, 0..2) <= 1e-10);
        assert!(block_zero(&inv, 0..2, 2..4) <= 1e-10);
        assert!(block_zero(&inv, 4..5, 2..4) <= 1e-10);
    }
}

#[test]
fn lyapunov_keeps_the_v1_v2_zeros() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let l = d_sparse(&mut rng).transpose();
        let mut q = Mat::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
        q = &q * q.transpose();
        q.view_mut((0, 2), (2, 2)).fill(0.0);
        q.view_mut((2, 0), (2, 2)).fill(0.0);
        let z = lyapunov_solve(&l, &q).unwrap();
        assert!(block_zero(&z, 0..2, 2..4) <= 1e-10);
        assert!(block_zero(&z, 2..4, 0..2) <= 1e-10);
    }
}

#[test]
fn single_hidden_node_is_a_scalar_riccati() {
    // gamma' = 2 d gamma - e gamma² + f has the closed form
    // gamma(t) = r1 + (r1 - r2) / (c e^{κt} - 1) with roots r1 > r2 of the quadratic.
    let model = example_model();
    let path = euler_maruyama(&model, 3.0, 0.01, 4).unwrap();
    let w = NodeSet::from_nodes(3, [NodeId(1), NodeId(2)]);
    let run = kalman_bucy_filter(&model, &w, &path).unwrap();
    assert_eq!(run.u, vec![0]);
    let sys = build_def(&model, &w.complement()).unwrap();
    let (d, e, f) = (sys.d[(0, 0)], sys.e[(0, 0)], sys.f[(0, 0)]);
    assert!(e > 0.0);
    let g0 = model.gamma0_diag()[0];
    let disc = (d * d + e * f).sqrt();
    let (r1, r2) = ((d + disc) / e, (d - disc) / e);
    let kappa = 2.0 * disc;
    let c = (g0 - r2) / (g0 - r1);
    for (j, t) in path.times().into_iter().enumerate() {
        let exact = r1 + (r1 - r2) / (c * (kappa * t).exp() - 1.0);
        assert!((run.gamma[j][(0, 0)] - exact).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn vanishing_noise_follows_the_ode() {
    let m = mat(&[&[-1.0, 0.0], &[0.8, -0.5]]);
    let mu = Vector::from_vec(vec![0.5, -1.0]);
    let sigma0 = Mat::identity(2, 2) * 1e-12;
    let model = OuModel::new(labels(2), m.clone(), mu.clone(), sigma0, Vector::from_element(2, 1e-24)).unwrap();
    let dt = 1e-4;
    let path = euler_maruyama(&model, 1.0, dt, 0).unwrap();
    let x0 = &path.x[0];
    for (j, t) in path.times().into_iter().enumerate().step_by(1000) {
        let exact = &mu + (&m * t).exp() * (x0 - &mu);
        assert!((&path.x[j] - exact).amax() < 10.0 * dt, "t={t}");
    }
}
