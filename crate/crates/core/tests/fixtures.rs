use std::path::PathBuf;

use cdgkit::equivalence::{enumerate_class, is_maximal, markov_equivalent, vct_prescreen, Prescreen};
use cdgkit::separation::{mu_separated, separated_with, Method, SeparationQuery};
use cdgkit::Graph;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(name: &str) -> Graph {
    let text = std::fs::read_to_string(dir().join(format!("{name}.cdg"))).unwrap();
    Graph::parse(&text).unwrap()
}

fn sep(g: &Graph, a: &[&str], b: &[&str], c: &[&str]) -> bool {
    let q = SeparationQuery::from_labels(g, a, b, c).unwrap();
    let answer = mu_separated(g, &q);
    for m in [Method::WalkSearch, Method::BruteForce] {
        assert_eq!(separated_with(g, &q, m), answer, "{m:?} on {a:?} {b:?} {c:?}");
    }
    answer
}

#[test]
fn every_fixture_parses_and_round_trips() {
    let mut count = 0;
    for entry in std::fs::read_dir(dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cdg") {
            let g = Graph::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let again = Graph::parse(&g.to_cdg()).unwrap();
            assert_eq!(g.edges(), again.edges(), "{}", path.display());
            assert_eq!(g.labels(), again.labels());
            count += 1;
        }
    }
    assert_eq!(count, 25);
}

#[test]
fn partial_loops_queries() {
    let g = load("partial_loops");
    assert!(sep(&g, &["delta"], &["gamma"], &["alpha"]));
    assert!(sep(&g, &["beta"], &["alpha"], &["alpha", "delta"]));
    assert!(!sep(&g, &["beta"], &["alpha"], &["alpha"]));
}

#[test]
fn unrepresentable_query() {
    let g = load("unrepresentable");
    assert!(!sep(&g, &["alpha"], &["gamma"], &["beta"]));
    assert!(sep(&g, &["alpha"], &["gamma"], &["beta", "gamma"]));
}

#[test]
fn drive_and_noise_queries() {
    let g = load("drive_and_noise");
    assert!(sep(&g, &["alpha"], &["gamma"], &[]));
    assert!(!sep(&g, &["alpha"], &["beta"], &[]));
    assert!(!sep(&g, &["gamma"], &["beta"], &[]));
    assert!(!sep(&g, &["beta"], &["beta"], &[]));
}

#[test]
fn equivalence_fixtures() {
    assert!(markov_equivalent(&load("two_maximal_left"), &load("two_maximal_right")).unwrap());
    assert!(markov_equivalent(&load("no_least_left"), &load("no_least_center")).unwrap());
    assert!(!markov_equivalent(&load("no_least_left"), &load("no_least_right")).unwrap());
    assert!(!markov_equivalent(&load("collider_mismatch_left"), &load("collider_mismatch_center")).unwrap());
    assert!(!markov_equivalent(&load("uncovered_walk_left"), &load("uncovered_walk_right")).unwrap());
    let (l, r) = (load("same_tripaths_left"), load("same_tripaths_right"));
    assert_eq!(vct_prescreen(&l, &r).unwrap(), Prescreen::Indistinguishable);
    assert!(!markov_equivalent(&l, &r).unwrap());
}

#[test]
fn class_sizes() {
    for (name, size) in [("class21_left", 21), ("class16_left", 16), ("two_maximal_left", 2)] {
        let class = enumerate_class(&load(name)).unwrap();
        assert_eq!(class.len(), size, "{name}");
        for m in &class.members {
            assert!(markov_equivalent(m, &load(name)).unwrap());
        }
    }
    for name in ["two_maximal_left", "two_maximal_right"] {
        assert!(is_maximal(&load(name)).unwrap().maximal);
    }
}
