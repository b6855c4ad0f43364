//! Browser bindings. Every export takes plain strings and returns a JSON
//! string; failures come back as `{"error": "..."}`.

use cdgkit::equivalence::enumerate_class;
use cdgkit::ou::{canonical_lig, example_model, verify_global_markov, OuModel, SimParams, ZERO_TOL};
use cdgkit::separation::{connecting_walk, mu_separated, SeparationQuery};
use cdgkit::Graph;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn split(list: &str) -> Vec<String> {
    list.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn respond(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

pub fn separation_json(cdg: &str, a: &str, b: &str, c: &str) -> Result<Value, String> {
    let g = Graph::parse(cdg).map_err(|e| e.to_string())?;
    let q = SeparationQuery::from_labels(&g, &split(a), &split(b), &split(c)).map_err(|e| e.to_string())?;
    let separated = mu_separated(&g, &q);
    let walk = if separated { None } else { connecting_walk(&g, &q).map(|w| w.tokens(&g)) };
    Ok(json!({ "separated": separated, "walk": walk }))
}

pub fn class_json(cdg: &str) -> Result<Value, String> {
    let g = Graph::parse(cdg).map_err(|e| e.to_string())?;
    let class = enumerate_class(&g).map_err(|e| e.to_string())?;
    let members: Vec<Vec<String>> = class
        .members
        .iter()
        .map(|m| m.blunt_pairs().iter().map(|&(x, y)| format!("{} |-| {}", m.label(x), m.label(y))).collect())
        .collect();
    Ok(json!({
        "size": class.len(),
        "greatest": class.greatest,
        "least": class.least,
        "members": members,
    }))
}

pub fn ou_json(model: &str, a: &str, b: &str, c: &str, paths: usize, seed: u64) -> Result<Value, String> {
    let m: OuModel = if model.trim().is_empty() {
        example_model()
    } else {
        serde_json::from_str(model).map_err(|e| e.to_string())?
    };
    let g = canonical_lig(&m, ZERO_TOL);
    let q = SeparationQuery::from_labels(&g, &split(a), &split(b), &split(c)).map_err(|e| e.to_string())?;
    let sim = SimParams { n_paths: paths.clamp(1, 20), seed, ..SimParams::default() };
    let rep = verify_global_markov(&m, &q, &sim, None).map_err(|e| e.to_string())?;
    let mut v = serde_json::to_value(&rep).map_err(|e| e.to_string())?;
    v["graph"] = json!(g.to_cdg());
    Ok(v)
}

/// μ-separation of `b` from `a` given `c`; lists are comma separated.
#[wasm_bindgen]
pub fn separation(cdg: &str, a: &str, b: &str, c: &str) -> String {
    respond(separation_json(cdg, a, b, c))
}

/// Markov equivalence class of a looped cDG.
#[wasm_bindgen]
pub fn equivalence_class(cdg: &str) -> String {
    respond(class_json(cdg))
}

/// Filter comparison on an OU model; an empty model uses the built-in example.
#[wasm_bindgen]
pub fn ou_filters(model: &str, a: &str, b: &str, c: &str, paths: u32, seed: u32) -> String {
    respond(ou_json(model, a, b, c, paths as usize, seed as u64))
}

#[wasm_bindgen]
pub fn example_model_json() -> String {
    serde_json::to_string_pretty(&example_model()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOOPS: &str = "nodes: a b c\nclass: cdg\na -> a\nb -> b\nc -> c\na -> b\nb -> c\n";

    #[test]
    fn chain_separation() {
        let v: Value = serde_json::from_str(&separation(LOOPS, "a", "c", "b")).unwrap();
        assert_eq!(v["separated"], true);
        let v: Value = serde_json::from_str(&separation(LOOPS, "a", "c", "")).unwrap();
        assert_eq!(v["separated"], false);
        assert_eq!(v["walk"][0], "a");
    }

    #[test]
    fn errors_are_json() {
        let v: Value = serde_json::from_str(&separation(LOOPS, "zz", "c", "")).unwrap();
        assert!(v["error"].is_string());
        let v: Value = serde_json::from_str(&equivalence_class("nodes: a\nclass: cdg\na -> q\n")).unwrap();
        assert!(v["error"].is_string());
    }

    #[test]
    fn class_lists_every_member() {
        let v: Value = serde_json::from_str(&equivalence_class(LOOPS)).unwrap();
        assert_eq!(v["members"].as_array().unwrap().len() as u64, v["size"].as_u64().unwrap());
        assert!(v["members"].as_array().unwrap().contains(&json!([])));
    }

    #[test]
    fn example_model_filters() {
        let v: Value = serde_json::from_str(&ou_filters("", "gamma", "alpha", "", 1, 3)).unwrap();
        assert_eq!(v["mode"], "positive");
        assert_eq!(v["pass"], true);
        let v: Value = serde_json::from_str(&ou_filters(&example_model_json(), "alpha", "beta", "", 1, 3)).unwrap();
        assert_eq!(v["mode"], "negative");
    }
}
