mod corpus;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cdgkit::equivalence::{
    collider_equivalence_witness, enumerate_class, equivalence_witness, is_maximal, markov_equivalent,
    markov_equivalent_oracle, maximal_vcts, same_directed_part, vct_prescreen, EquivalenceError, Prescreen,
    COLLIDER_STATE_CAP, ORACLE_CAP,
};
use cdgkit::hardness::{
    expected_size, falsifying_assignment, generate_corpus, is_tautology, parse_dnf, reduce_to_graph_pair,
    reduction_witness, DnfFormula, HardnessError,
};
use cdgkit::ou::{canonical_lig, verify_global_markov, Mode, OuError, OuModel, SimParams};
use cdgkit::random::{random_graph, RandomGraphParams};
use cdgkit::separation::{connecting_walk, separated_with, Method, SeparationError, SeparationQuery};
use cdgkit::{Graph, GraphClass, GraphError};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use output::{braces, labels, query_json, query_text, vct_json, vct_text, witness_json, witness_text, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("{0}: {1}")]
    Parse(String, #[source] GraphError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
    #[error(transparent)]
    Hardness(#[from] HardnessError),
    #[error(transparent)]
    Ou(#[from] OuError),
    #[error("{0}: {1}")]
    Json(String, #[source] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser)]
#[command(name = "cdgkit", version, about = "Directed correlation graphs: separation, equivalence, OU checks")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Exit with status 1 when the verdict is negative (not separated, not equivalent, ...).
    #[arg(long, global = true)]
    exit_status: bool,
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "CDGKIT_SEED", default_value_t = 7)]
    seed: u64,
    /// Add wall-clock time to the output (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Augmentation,
    Walk,
    Brute,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EquivMethod {
    /// Directed part, then collider connections over ancestral sets.
    Connections,
    /// Directed part, then uncovered collider paths.
    Collider,
    /// Compare the full independence models (small graphs only).
    Oracle,
    /// Virtual collider tripaths only; may be inconclusive.
    Prescreen,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Cdg,
    Dmg,
    Dg,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a .cdg file and summarize it.
    Validate { file: PathBuf },
    /// Is B μ-separated from A given C?
    QuerySep {
        file: PathBuf,
        #[arg(long = "from", value_delimiter = ',', required = true)]
        a: Vec<String>,
        #[arg(long = "to", value_delimiter = ',', required = true)]
        b: Vec<String>,
        #[arg(long = "given", value_delimiter = ',')]
        c: Vec<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Augmentation)]
        method: MethodArg,
    },
    /// Markov equivalence of two cDGs, with a witness when they differ.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value_t = EquivMethod::Connections)]
        method: EquivMethod,
    },
    /// Enumerate the Markov equivalence class.
    Class {
        file: PathBuf,
        /// List the blunt edges of every member in text output.
        #[arg(long)]
        members: bool,
    },
    /// Maximal virtual collider tripaths; with two files, the prescreen.
    Vct { first: PathBuf, second: Option<PathBuf> },
    /// Can any absent edge be added without leaving the class?
    Maximal { file: PathBuf },
    /// Build the graph pair for a DNF formula.
    ReduceDnf {
        #[arg(long)]
        formula: String,
        /// Write PREFIX_d.cdg and PREFIX_dplus.cdg.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare tautology with equivalence of the reduced pair.
    CheckReduction {
        #[arg(long, conflicts_with = "corpus")]
        formula: Option<String>,
        /// Run on this many seeded random formulas instead.
        #[arg(long)]
        corpus: Option<usize>,
        #[arg(long, default_value_t = 4)]
        max_vars: usize,
        #[arg(long, default_value_t = 4)]
        max_terms: usize,
    },
    /// Sample a random graph.
    RandomGraph {
        #[arg(long, default_value_t = 5)]
        nodes: usize,
        #[arg(long, default_value_t = 0.3)]
        p_directed: f64,
        #[arg(long, default_value_t = 0.3)]
        p_symmetric: f64,
        #[arg(long, default_value_t = 1.0)]
        p_loop: f64,
        #[arg(long, value_enum, default_value_t = ClassArg::Cdg)]
        class: ClassArg,
    },
    /// Print a small OU model as JSON.
    OuExample,
    /// Canonical graph of an OU model given as JSON.
    OuExtract {
        model: PathBuf,
        #[arg(long, default_value_t = cdgkit::ou::ZERO_TOL)]
        tau: f64,
    },
    /// Compare filter-based drift estimates for a query on an OU model.
    OuVerify {
        model: PathBuf,
        #[arg(long = "from", value_delimiter = ',')]
        a: Vec<String>,
        #[arg(long = "to", value_delimiter = ',', required = true)]
        b: Vec<String>,
        #[arg(long = "given", value_delimiter = ',')]
        c: Vec<String>,
        #[arg(long, default_value_t = 10)]
        paths: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 5.0)]
        t_end: f64,
        /// Fail unless the query has this separation status.
        #[arg(long, value_enum)]
        expect: Option<ModeArg>,
    },
    /// Run the regression checks over the fixture directory.
    Corpus {
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Positive,
    Negative,
}

pub fn read_graph(path: &Path) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Graph::parse(&text).map_err(|e| CliError::Parse(path.display().to_string(), e))
}

fn read_model(path: &Path) -> Result<OuModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Json(path.display().to_string(), e))
}

fn formula(text: &str) -> Result<DnfFormula, CliError> {
    Ok(parse_dnf(text)?)
}

fn validate(file: &Path) -> Result<Report, CliError> {
    let g = read_graph(file)?;
    let class = g.class();
    let text = format!(
        "{class}: {} nodes, {} edges ({} directed, {} {}), loops on every node: {}",
        g.n(),
        g.edge_count(),
        g.directed_count(),
        g.edge_count() - g.directed_count(),
        if class == GraphClass::Dmg { "bidirected" } else { "blunt" },
        if g.has_all_loops() { "yes" } else { "no" }
    );
    let json = json!({
        "valid": true,
        "class": class,
        "nodes": g.labels(),
        "edges": g.edges().iter().map(|e| g.format_edge(e)).collect::<Vec<_>>(),
        "all_loops": g.has_all_loops(),
    });
    Ok(Report::new("validate", json, text, false))
}

fn query_sep(file: &Path, a: &[String], b: &[String], c: &[String], method: MethodArg) -> Result<Report, CliError> {
    let g = read_graph(file)?;
    let q = SeparationQuery::from_labels(&g, a, b, c)?;
    let methods: Vec<Method> = match method {
        MethodArg::Augmentation => vec![Method::Augmentation],
        MethodArg::Walk => vec![Method::WalkSearch],
        MethodArg::Brute => vec![Method::BruteForce],
        MethodArg::All => vec![Method::Augmentation, Method::WalkSearch, Method::BruteForce],
    };
    let answers: Vec<bool> = methods.iter().map(|&m| separated_with(&g, &q, m)).collect();
    if answers.iter().any(|&x| x != answers[0]) {
        return Err(CliError::Usage(format!("deciders disagree: {answers:?}")));
    }
    let separated = answers[0];
    let walk = if separated { None } else { connecting_walk(&g, &q) };
    let mut text = format!("{}: {}", query_text(&g, &q), if separated { "separated" } else { "not separated" });
    if let Some(w) = &walk {
        text.push_str(&format!("\n  connecting walk: {}", w.tokens(&g).join(" ")));
    }
    let json = json!({
        "query": query_json(&g, &q),
        "separated": separated,
        "methods": methods.iter().map(|m| format!("{m:?}").to_lowercase()).collect::<Vec<_>>(),
        "walk": walk.map(|w| w.tokens(&g)),
    });
    Ok(Report::new("query-sep", json, text, !separated))
}

fn equiv(first: &Path, second: &Path, method: EquivMethod) -> Result<Report, CliError> {
    let (g1, g2) = (read_graph(first)?, read_graph(second)?);
    let name = match method {
        EquivMethod::Connections => "connections",
        EquivMethod::Collider => "collider",
        EquivMethod::Oracle => "oracle",
        EquivMethod::Prescreen => "prescreen",
    };
    if method == EquivMethod::Prescreen {
        let pre = vct_prescreen(&g1, &g2)?;
        let (json, text, negative) = match pre {
            Prescreen::Indistinguishable => (
                json!({ "equivalent": null, "prescreen": "indistinguishable" }),
                "prescreen inconclusive: same maximal virtual collider tripaths".to_string(),
                false,
            ),
            Prescreen::Distinct(reason) => (
                json!({ "equivalent": false, "prescreen": "distinct", "witness": { "kind": "tripaths", "reason": reason } }),
                format!("not Markov equivalent: {reason}"),
                true,
            ),
        };
        let mut json = json;
        json["method"] = json!(name);
        return Ok(Report::new("equiv", json, text, negative));
    }
    let uncovered = if method == EquivMethod::Collider && same_directed_part(&g1, &g2)? {
        Some(collider_equivalence_witness(&g1, &g2, COLLIDER_STATE_CAP)?)
    } else {
        None
    };
    let (equivalent, witness, text) = match uncovered {
        Some(None) => (true, None, None),
        Some(Some(u)) => {
            let which = if u.in_first { "first" } else { "second" };
            let path = u.path.display(if u.in_first { &g1 } else { &g2 }).to_string();
            let w = json!({ "kind": "uncovered_collider_path", "path": path, "in_first": u.in_first });
            (false, Some(w), Some(format!("not Markov equivalent: collider path {path} of the {which} graph is not covered")))
        }
        None => {
            let equivalent = match method {
                EquivMethod::Oracle => markov_equivalent_oracle(&g1, &g2, ORACLE_CAP)?,
                _ => markov_equivalent(&g1, &g2)?,
            };
            let w = if equivalent { None } else { equivalence_witness(&g1, &g2)? };
            let text = w.as_ref().map(|w| format!("not Markov equivalent: {}", witness_text(&g1, w)));
            (equivalent, w.map(|w| witness_json(&g1, &w)), text)
        }
    };
    let text = text.unwrap_or_else(|| "Markov equivalent".to_string());
    let json = json!({ "equivalent": equivalent, "method": name, "witness": witness });
    Ok(Report::new("equiv", json, text, !equivalent))
}

fn class(file: &Path, show_members: bool) -> Result<Report, CliError> {
    let g = read_graph(file)?;
    let class = enumerate_class(&g)?;
    let blunt = |m: &Graph| -> Vec<String> {
        m.blunt_pairs().iter().map(|&(a, b)| format!("{} |-| {}", m.label(a), m.label(b))).collect()
    };
    let idx = |i: Option<usize>| i.map_or("none".to_string(), |i| format!("member {i}"));
    let mut text = format!(
        "class of {} members; greatest element: {}; least element: {}",
        class.len(),
        idx(class.greatest),
        idx(class.least)
    );
    if show_members {
        for (i, m) in class.members.iter().enumerate() {
            text.push_str(&format!("\n  {i}: {}", braces(&blunt(m))));
        }
    }
    let json = json!({
        "size": class.len(),
        "greatest": class.greatest,
        "least": class.least,
        "has_greatest": class.greatest.is_some(),
        "has_least": class.least.is_some(),
        "members": class.members.iter().map(blunt).collect::<Vec<_>>(),
    });
    Ok(Report::new("class", json, text, false))
}

fn vct(first: &Path, second: Option<&Path>) -> Result<Report, CliError> {
    let g1 = read_graph(first)?;
    match second {
        None => {
            let ts = maximal_vcts(&g1)?;
            let text = ts.iter().map(|t| vct_text(&g1, t)).collect::<Vec<_>>().join("\n");
            let json = json!({ "maximal": ts.iter().map(|t| vct_json(&g1, t)).collect::<Vec<_>>() });
            Ok(Report::new("vct", json, text, false))
        }
        Some(p) => {
            let g2 = read_graph(p)?;
            let pre = vct_prescreen(&g1, &g2)?;
            let (verdict, reason) = match &pre {
                Prescreen::Indistinguishable => ("indistinguishable", None),
                Prescreen::Distinct(r) => ("distinct", Some(r.clone())),
            };
            let text = match &reason {
                None => "prescreen: indistinguishable (equivalence still undecided)".to_string(),
                Some(r) => format!("prescreen: not equivalent, {r}"),
            };
            let json = json!({ "prescreen": verdict, "reason": reason });
            Ok(Report::new("vct", json, text, reason.is_some()))
        }
    }
}

fn maximal(file: &Path) -> Result<Report, CliError> {
    let g = read_graph(file)?;
    let rep = is_maximal(&g)?;
    let addable: Vec<String> = rep.addable.iter().map(|e| g.format_edge(e)).collect();
    let text = if rep.maximal {
        "maximal".to_string()
    } else {
        format!("not maximal; addable: {}", addable.join(", "))
    };
    let json = json!({ "maximal": rep.maximal, "addable": addable });
    Ok(Report::new("maximal", json, text, !rep.maximal))
}

fn reduce_dnf(text: &str, out: Option<&Path>) -> Result<Report, CliError> {
    let f = formula(text)?;
    let pair = reduce_to_graph_pair(&f);
    let size = expected_size(&f);
    let (d, dp) = (pair.d.to_cdg(), pair.d_plus.to_cdg());
    if let Some(prefix) = out {
        for (suffix, body) in [("_d.cdg", &d), ("_dplus.cdg", &dp)] {
            let mut name = prefix.as_os_str().to_owned();
            name.push(suffix);
            std::fs::write(&name, body).map_err(|e| CliError::Io(name.to_string_lossy().into(), e))?;
        }
    }
    let summary = format!(
        "{f}: {} nodes, {} directed edges, {} blunt edges in D, {} in D+",
        size.nodes, size.directed, size.blunt_d, size.blunt_d_plus
    );
    let text = if out.is_some() { summary } else { format!("{summary}\n# D\n{d}# D+\n{dp}") };
    let json = json!({ "formula": f.to_string(), "size": size, "d": d, "d_plus": dp });
    Ok(Report::new("reduce-dnf", json, text, false))
}

fn check_one(f: &DnfFormula) -> Result<serde_json::Value, CliError> {
    let tautology = is_tautology(f)?;
    let pair = reduce_to_graph_pair(f);
    let equivalent = markov_equivalent(&pair.d, &pair.d_plus)?;
    let mut v = json!({
        "formula": f.to_string(),
        "tautology": tautology,
        "equivalent": equivalent,
        "consistent": tautology == equivalent,
    });
    if !tautology {
        let (assignment, cert) = reduction_witness(f, &pair)?;
        v["falsifying_assignment"] = json!(assignment);
        v["separator"] = json!(labels(&pair.d, &cert.separator));
    }
    Ok(v)
}

fn check_reduction(formula_text: Option<&str>, corpus: Option<usize>, max_vars: usize, max_terms: usize, seed: u64) -> Result<Report, CliError> {
    match (formula_text, corpus) {
        (Some(t), None) => {
            let f = formula(t)?;
            let v = check_one(&f)?;
            let consistent = v["consistent"] == json!(true);
            let mut text = format!("{f}: tautology {}, equivalent {}", v["tautology"], v["equivalent"]);
            if let Some(a) = falsifying_assignment(&f)? {
                let bits: Vec<String> = a.iter().enumerate().map(|(i, &x)| format!("x{}={}", i + 1, x as u8)).collect();
                text.push_str(&format!("\n  falsified by {}; separator {}", bits.join(" "), v["separator"]));
            }
            Ok(Report::new("check-reduction", v, text, !consistent))
        }
        (None, Some(n)) => {
            if max_vars == 0 || max_terms == 0 {
                return Err(CliError::Usage("--max-vars and --max-terms must be positive".into()));
            }
            let mut taut = 0;
            let mut bad = Vec::new();
            for f in generate_corpus(n, max_vars, max_terms, seed) {
                let v = check_one(&f)?;
                taut += (v["tautology"] == json!(true)) as usize;
                if v["consistent"] != json!(true) {
                    bad.push(f.to_string());
                }
            }
            let text = format!("{n} formulas, {taut} tautologies, {} disagreements", bad.len());
            let json = json!({ "count": n, "seed": seed, "tautologies": taut, "disagreements": bad, "consistent": bad.is_empty() });
            let negative = !bad.is_empty();
            Ok(Report::new("check-reduction", json, text, negative))
        }
        _ => Err(CliError::Usage("give --formula or --corpus".into())),
    }
}

fn random(nodes: usize, p_directed: f64, p_symmetric: f64, p_loop: f64, class: ClassArg, seed: u64) -> Result<Report, CliError> {
    for (name, p) in [("p-directed", p_directed), ("p-symmetric", p_symmetric), ("p-loop", p_loop)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Usage(format!("--{name} must lie in [0, 1]")));
        }
    }
    let class = match class {
        ClassArg::Cdg => GraphClass::Cdg,
        ClassArg::Dmg => GraphClass::Dmg,
        ClassArg::Dg => GraphClass::Dg,
    };
    let params = RandomGraphParams { n: nodes, p_directed, p_symmetric, p_loop, class };
    let g = random_graph(&params, seed);
    let cdg = g.to_cdg();
    let json = json!({ "seed": seed, "params": params, "cdg": cdg });
    Ok(Report::new("random-graph", json, cdg.trim_end().to_string(), false))
}

fn ou_extract(model: &Path, tau: f64) -> Result<Report, CliError> {
    let m = read_model(model)?;
    let g = canonical_lig(&m, tau);
    let cdg = g.to_cdg();
    let json = json!({ "tau": tau, "cdg": cdg });
    Ok(Report::new("ou-extract", json, cdg.trim_end().to_string(), false))
}

#[allow(clippy::too_many_arguments)]
fn ou_verify(
    model: &Path,
    a: &[String],
    b: &[String],
    c: &[String],
    paths: usize,
    dt: f64,
    t_end: f64,
    expect: Option<ModeArg>,
    seed: u64,
) -> Result<Report, CliError> {
    let m = read_model(model)?;
    let g = canonical_lig(&m, cdgkit::ou::ZERO_TOL);
    let q = SeparationQuery::from_labels(&g, a, b, c)?;
    let sim = SimParams { t_end, dt, seed, n_paths: paths };
    let expect = expect.map(|e| match e {
        ModeArg::Positive => Mode::Positive,
        ModeArg::Negative => Mode::Negative,
    });
    let rep = verify_global_markov(&m, &q, &sim, expect)?;
    let text = format!(
        "{} ({:?} mode): measurability level {:.3e}, C vs C+A level {:.3e}: {}",
        query_text(&g, &q),
        rep.mode,
        rep.level,
        rep.version_level,
        if rep.pass { "PASS" } else { "FAIL" }
    );
    let json = serde_json::to_value(&rep).map_err(|e| CliError::Json("report".into(), e))?;
    Ok(Report::new("ou-verify", json, text, !rep.pass))
}

fn run_corpus(dir: &Path) -> Result<Report, CliError> {
    let checks = corpus::run(dir)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!("{} {}: {}\n", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail));
    }
    text.push_str(&format!("{} checks, {failed} failed", checks.len()));
    let json = json!({ "checks": checks, "passed": checks.len() - failed, "failed": failed });
    Ok(Report::new("corpus", json, text, failed > 0))
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Validate { file } => validate(file),
        Command::QuerySep { file, a, b, c, method } => query_sep(file, a, b, c, *method),
        Command::Equiv { first, second, method } => equiv(first, second, *method),
        Command::Class { file, members } => class(file, *members),
        Command::Vct { first, second } => vct(first, second.as_deref()),
        Command::Maximal { file } => maximal(file),
        Command::ReduceDnf { formula, out } => reduce_dnf(formula, out.as_deref()),
        Command::CheckReduction { formula, corpus, max_vars, max_terms } => {
            check_reduction(formula.as_deref(), *corpus, *max_vars, *max_terms, cli.seed)
        }
        Command::RandomGraph { nodes, p_directed, p_symmetric, p_loop, class } => {
            random(*nodes, *p_directed, *p_symmetric, *p_loop, *class, cli.seed)
        }
        Command::OuExample => {
            let m = cdgkit::ou::example_model();
            let json = serde_json::to_value(&m).map_err(|e| CliError::Json("model".into(), e))?;
            let text = json.to_string();
            Ok(Report { json, text, negative: false })
        }
        Command::OuExtract { model, tau } => ou_extract(model, *tau),
        Command::OuVerify { model, a, b, c, paths, dt, t_end, expect } => {
            ou_verify(model, a, b, c, *paths, *dt, *t_end, *expect, cli.seed)
        }
        Command::Corpus { dir } => run_corpus(dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = match dispatch(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.timing {
        report.json["timing_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
        report.text.push_str(&format!("\n({:.1} ms)", start.elapsed().as_secs_f64() * 1e3));
    }
    match cli.format {
        Format::Json => println!("{}", report.json),
        Format::Text => println!("{}", report.text),
    }
    let corpus_failed = matches!(cli.command, Command::Corpus { .. }) && report.negative;
    if corpus_failed || (cli.exit_status && report.negative) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
