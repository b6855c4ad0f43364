//! Regression checks over the shipped `.cdg` fixtures.

use std::path::Path;

use cdgkit::equivalence::{enumerate_class, is_maximal, markov_equivalent, vct_prescreen, Prescreen};
use cdgkit::separation::{separated_with, Method, SeparationQuery};
use cdgkit::Graph;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// (fixture, A, B, C, separated)
type SeparationCase = (&'static str, &'static [&'static str], &'static [&'static str], &'static [&'static str], bool);

const SEPARATIONS: &[SeparationCase] = &[
    ("partial_loops", &["delta"], &["gamma"], &["alpha"], true),
    ("partial_loops", &["beta"], &["alpha"], &["alpha", "delta"], true),
    ("partial_loops", &["beta"], &["alpha"], &["alpha"], false),
    ("unrepresentable", &["alpha"], &["gamma"], &["beta"], false),
    ("drive_and_noise", &["alpha"], &["gamma"], &[], true),
    ("drive_and_noise", &["alpha"], &["beta"], &[], false),
];

const EQUIVALENCES: &[(&str, &str, bool)] = &[
    ("two_maximal_left", "two_maximal_right", true),
    ("no_least_left", "no_least_center", true),
    ("no_least_left", "no_least_right", false),
    ("collider_mismatch_left", "collider_mismatch_center", false),
    ("uncovered_walk_left", "uncovered_walk_right", false),
    ("same_tripaths_left", "same_tripaths_right", false),
];

/// (fixture, class size, has greatest, has least)
const CLASSES: &[(&str, usize, bool, bool)] = &[
    ("class21_left", 21, false, false),
    ("class16_left", 16, true, false),
    ("two_maximal_left", 2, false, false),
    ("no_greatest_left", 0, false, true),
    ("no_least_left", 0, true, false),
];

pub fn run(dir: &Path) -> Result<Vec<Check>, CliError> {
    let load = |name: &str| -> Result<Graph, CliError> { crate::read_graph(&dir.join(format!("{name}.cdg"))) };
    let mut out = Vec::new();
    let mut push = |name: String, pass: bool, detail: String| out.push(Check { name, pass, detail });

    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(dir.display().to_string(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cdg"))
        .collect();
    files.sort();
    for f in &files {
        let name = f.file_stem().unwrap_or_default().to_string_lossy().to_string();
        match crate::read_graph(f) {
            Ok(g) => push(format!("parse {name}"), true, format!("{} nodes, {} edges", g.n(), g.edge_count())),
            Err(e) => push(format!("parse {name}"), false, e.to_string()),
        }
    }

    for &(file, a, b, c, want) in SEPARATIONS {
        let g = load(file)?;
        let q = SeparationQuery::from_labels(&g, a, b, c)?;
        let got: Vec<bool> =
            [Method::Augmentation, Method::WalkSearch, Method::BruteForce].iter().map(|&m| separated_with(&g, &q, m)).collect();
        let pass = got.iter().all(|&x| x == want);
        push(
            format!("separation {file}: {}", crate::output::query_text(&g, &q)),
            pass,
            format!("expected {want}, got {got:?} (augmentation, walk search, brute force)"),
        );
    }

    for &(l, r, want) in EQUIVALENCES {
        let got = markov_equivalent(&load(l)?, &load(r)?)?;
        push(format!("equivalence {l} {r}"), got == want, format!("expected {want}, got {got}"));
    }
    let pre = vct_prescreen(&load("same_tripaths_left")?, &load("same_tripaths_right")?)?;
    push(
        "prescreen same_tripaths".into(),
        pre == Prescreen::Indistinguishable,
        format!("{pre:?}"),
    );

    for &(file, size, greatest, least) in CLASSES {
        let class = enumerate_class(&load(file)?)?;
        let size_ok = size == 0 || class.len() == size;
        let pass = size_ok && class.greatest.is_some() == greatest && class.least.is_some() == least;
        push(
            format!("class {file}"),
            pass,
            format!("size {}, greatest {:?}, least {:?}", class.len(), class.greatest, class.least),
        );
    }

    for file in ["two_maximal_left", "two_maximal_right"] {
        let rep = is_maximal(&load(file)?)?;
        push(format!("maximal {file}"), rep.maximal, format!("{} addable edges", rep.addable.len()));
    }
    Ok(out)
}
