use cdgkit::equivalence::{VirtualColliderTripath, Witness};
use cdgkit::separation::SeparationQuery;
use cdgkit::{Graph, NodeSet};
use serde_json::{json, Value};

pub const SCHEMA: &str = "cdgkit/1";

/// What a subcommand produced.
pub struct Report {
    pub json: Value,
    pub text: String,
    /// The refutable case (not separated, not equivalent, ...).
    pub negative: bool,
}

impl Report {
    pub fn new(command: &str, mut fields: Value, text: String, negative: bool) -> Self {
        if let Value::Object(map) = &mut fields {
            map.insert("schema".into(), json!(SCHEMA));
            map.insert("command".into(), json!(command));
        }
        Report { json: fields, text, negative }
    }
}

pub fn labels(g: &Graph, s: &NodeSet) -> Vec<String> {
    g.set_labels(s)
}

pub fn braces(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

pub fn query_json(g: &Graph, q: &SeparationQuery) -> Value {
    json!({ "A": labels(g, &q.a), "B": labels(g, &q.b), "C": labels(g, &q.c) })
}

pub fn query_text(g: &Graph, q: &SeparationQuery) -> String {
    format!("B={} from A={} given C={}", braces(&labels(g, &q.b)), braces(&labels(g, &q.a)), braces(&labels(g, &q.c)))
}

pub fn witness_json(g: &Graph, w: &Witness) -> Value {
    let query = |dq: &cdgkit::equivalence::DistinguishingQuery| {
        json!({ "query": query_json(g, &dq.query), "separated_in_first": dq.separated_in_first })
    };
    match w {
        Witness::DirectedEdge { tail, head, in_first, query: dq } => json!({
            "kind": "directed_edge",
            "edge": format!("{} -> {}", g.label(*tail), g.label(*head)),
            "in_first": in_first,
            "distinguishing": query(dq),
        }),
        Witness::ColliderConnection { ancestral_set, alpha, beta, in_first, query: dq } => json!({
            "kind": "collider_connection",
            "ancestral_set": labels(g, ancestral_set),
            "alpha": g.label(*alpha),
            "beta": g.label(*beta),
            "in_first": in_first,
            "distinguishing": dq.as_ref().map(query),
        }),
    }
}

pub fn witness_text(g: &Graph, w: &Witness) -> String {
    let which = |first: bool| if first { "first" } else { "second" };
    let mut out = match w {
        Witness::DirectedEdge { tail, head, in_first, .. } => {
            format!("{} -> {} is only in the {} graph", g.label(*tail), g.label(*head), which(*in_first))
        }
        Witness::ColliderConnection { ancestral_set, alpha, beta, in_first, .. } => format!(
            "{} and {} are collider connected within {} only in the {} graph",
            g.label(*alpha),
            g.label(*beta),
            braces(&labels(g, ancestral_set)),
            which(*in_first)
        ),
    };
    if let Some(dq) = w.query() {
        out.push_str(&format!(
            "\n  {} is separated only in the {} graph",
            query_text(g, &dq.query),
            which(dq.separated_in_first)
        ));
    }
    out
}

pub fn vct_json(g: &Graph, t: &VirtualColliderTripath) -> Value {
    json!({ "alpha": g.label(t.alpha), "beta": g.label(t.beta), "component": labels(g, &t.members) })
}

pub fn vct_text(g: &Graph, t: &VirtualColliderTripath) -> String {
    let comp = if t.members.is_empty() { "root".to_string() } else { braces(&labels(g, &t.members)) };
    format!("{} ~ {} via {comp}", g.label(t.alpha), g.label(t.beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_tagged() {
        let r = Report::new("x", json!({ "b": 1, "a": 2 }), String::new(), true);
        assert_eq!(r.json.to_string(), r#"{"a":2,"b":1,"command":"x","schema":"cdgkit/1"}"#);
        assert!(r.negative);
    }

    #[test]
    fn query_rendering() {
        let g = Graph::parse("nodes: a b c\nclass: cdg\na -> b\n").unwrap();
        let q = SeparationQuery::from_labels(&g, &["a"], &["b"], &["c"]).unwrap();
        assert_eq!(query_text(&g, &q), "B={b} from A={a} given C={c}");
        assert_eq!(query_json(&g, &q)["C"], json!(["c"]));
        assert_eq!(braces(&[]), "{}");
    }
}
