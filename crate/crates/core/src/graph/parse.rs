//! The `.cdg` text format.
//!
//! ```text
//! # comment
//! nodes: a b c
//! class: cdg
//! a -> b
//! b |-| c
//! ```

use super::{valid_label, Edge, Graph, GraphClass, GraphError};

enum Kind {
    Directed,
    Blunt,
    Bidirected,
}

struct RawEdge {
    line: usize,
    kind: Kind,
    a: String,
    b: String,
}

pub(super) fn parse(text: &str) -> Result<Graph, GraphError> {
    let mut header: Vec<String> = Vec::new();
    let mut class = None;
    let mut raw = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("nodes:") {
            for l in rest.split_whitespace() {
                if !valid_label(l) {
                    return Err(syntax(lineno, format!("invalid node label `{l}`")));
                }
                if header.iter().any(|h| h == l) {
                    return Err(GraphError::DuplicateNode(l.to_string()));
                }
                header.push(l.to_string());
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("class:") {
            class = Some(match rest.trim() {
                "cdg" => GraphClass::Cdg,
                "dmg" => GraphClass::Dmg,
                "dg" => GraphClass::Dg,
                other => return Err(syntax(lineno, format!("unknown class `{other}`"))),
            });
            continue;
        }
        raw.push(parse_edge(lineno, line)?);
    }

    let mut labels = header;
    let mut extra: Vec<String> = raw
        .iter()
        .flat_map(|e| [e.a.clone(), e.b.clone()])
        .filter(|l| !labels.contains(l))
        .collect();
    extra.sort();
    extra.dedup();
    labels.extend(extra);

    let mut g = Graph::with_nodes(&labels)?;
    g.set_declared(class);
    for e in raw {
        let (a, b) = (g.node(&e.a)?, g.node(&e.b)?);
        let edge = match e.kind {
            Kind::Directed => Edge::directed(a, b),
            Kind::Blunt => Edge::blunt(a, b),
            Kind::Bidirected => Edge::bidirected(a, b),
        };
        g.insert_edge(edge).map_err(|err| match err {
            GraphError::MixedClass => syntax(e.line, "graph mixes blunt and bidirected edges".into()),
            other => other,
        })?;
    }
    Ok(g)
}

fn syntax(line: usize, message: String) -> GraphError {
    GraphError::Syntax { line, message }
}

fn parse_edge(line: usize, text: &str) -> Result<RawEdge, GraphError> {
    let ops = [("<->", Kind::Bidirected), ("|-|", Kind::Blunt), ("->", Kind::Directed)];
    for (op, kind) in ops {
        if let Some(p) = text.find(op) {
            let a = text[..p].trim();
            let b = text[p + op.len()..].trim();
            for l in [a, b] {
                if !valid_label(l) {
                    return Err(syntax(line, format!("invalid node label `{l}` in `{text}`")));
                }
            }
            return Ok(RawEdge {
                line,
                kind,
                a: a.to_string(),
                b: b.to_string(),
            });
        }
    }
    Err(syntax(line, format!("expected `a -> b`, `a |-| b` or `a <-> b`, got `{text}`")))
}

pub(super) fn serialize(g: &Graph) -> String {
    let mut out = String::new();
    let labels: Vec<&str> = g.labels().iter().map(String::as_str).collect();
    if !labels.is_empty() {
        out.push_str("nodes: ");
        out.push_str(&labels.join(" "));
        out.push('\n');
    }
    if let Some(c) = g.declared_class() {
        out.push_str(&format!("class: {c}\n"));
    }
    for e in g.edges() {
        out.push_str(&g.format_edge(&e));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_edge_kinds() {
        let g = parse("a -> a\nb -> b\na -> b\nb |-| a\n").unwrap();
        assert_eq!(g.labels(), &["a", "b"]);
        assert_eq!(g.edge_count(), 4);
        let (a, b) = (g.node("a").unwrap(), g.node("b").unwrap());
        assert!(g.has_directed(a, a) && g.has_directed(b, b) && g.has_directed(a, b));
        assert!(g.has_blunt(a, b) && g.has_blunt(b, a));
        assert!(!g.has_directed(b, a));
    }

    #[test]
    fn blunt_loop_is_an_error() {
        assert_eq!(parse("a |-| a").unwrap_err(), GraphError::BluntLoop("a".into()));
    }

    #[test]
    fn empty_input_gives_empty_graph() {
        let g = parse("").unwrap();
        assert_eq!(g.n(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse("a -> b\n\n# fine\na => b\n").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 4, .. }), "{err:?}");
        let err = parse("a -> b c").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 1, .. }));
    }

    #[test]
    fn duplicate_lines_are_idempotent() {
        let g = parse("a -> b\na -> b\nb |-| a\na |-| b").unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn header_fixes_order_and_isolated_nodes() {
        let g = parse("nodes: z y x\nx -> w").unwrap();
        assert_eq!(g.labels(), &["z", "y", "x", "w"]);
    }

    #[test]
    fn declared_class_is_enforced() {
        let err = parse("class: dmg\na |-| b").unwrap_err();
        assert!(matches!(err, GraphError::ClassViolation { .. }));
        assert!(matches!(parse("a |-| b\na <-> b").unwrap_err(), GraphError::Syntax { line: 2, .. }));
    }

    #[test]
    fn serialization_is_canonical() {
        let g = parse("c |-| b\nb -> a\nc |-| a\na -> a\n").unwrap();
        assert_eq!(g.to_cdg(), "nodes: a b c\na -> a\nb -> a\na |-| c\nb |-| c\n");
        let g = parse("b <-> a\nb -> b\n").unwrap();
        assert_eq!(g.to_cdg(), "nodes: a b\nb -> b\na <-> b\n");
        let again = parse(&g.to_cdg()).unwrap();
        assert_eq!(again.to_cdg(), g.to_cdg());
    }
}
