//! Command-line front end: batch operations on graph, rule, cospan and
//! cube files, with machine-readable JSON on stdout.
//!
//! Exit codes: 0 success, 1 domain error (a structured error object is
//! printed), 2 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use adhesia::category::{vk_cube_check, VkCube};
use adhesia::dot::export_dot;
use adhesia::dpo::{self, Rule, RuleJson};
use adhesia::encodings::{self, Fixture};
use adhesia::error::Error;
use adhesia::finset::FinFunction;
use adhesia::functor::{parse_functor, Bounds, SortedFunction};
use adhesia::graph::{
    check_morphism, edge_properties, flatten, morphism_witness, node_properties, validate_graph,
    CoalgGraph, GraphMorphism, MorphismTables,
};
use adhesia::limits::{check_pb_preservation, Cospan, PreservationMode};

#[derive(Parser)]
#[command(name = "adhesia", version, about = "Coalgebraic graph rewriting toolkit")]
struct Cli {
    /// Write the JSON/DOT payload to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ordinary,
    Monos,
    Weak,
}

#[derive(Args)]
struct BoundsArgs {
    /// Maximum nesting depth (np) for enumeration.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Maximum set cardinality for enumeration.
    #[arg(long, default_value_t = 3)]
    width: usize,
    /// Maximum word length for enumeration.
    #[arg(long, default_value_t = 3)]
    len: usize,
}

impl BoundsArgs {
    fn bounds(&self) -> Bounds {
        Bounds::new(self.depth, self.width, self.len)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check every structure-map image against the signature functors,
    /// plus the side conditions of an encoding kind when given.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        /// One of: comma, bkk:<expr>, dhp, palacz, multi:<n>, bigraph,
        /// grouping.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Check that a node/edge mapping between two graphs is a homomorphism.
    MorphismCheck {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        dst: PathBuf,
        #[arg(long)]
        morphism: PathBuf,
    },
    /// Flatten every edge to its reachable node set.
    Flatten {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Report the nested node and edge properties.
    Properties {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Pullback of a cospan bundle of graph morphisms.
    Pullback {
        #[arg(long)]
        cospan: PathBuf,
    },
    /// Pushout of a span bundle of graph morphisms.
    Pushout {
        #[arg(long)]
        span: PathBuf,
    },
    /// Enumerate the injective matches of a rule's left side.
    Matches {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        rule: PathBuf,
    },
    /// Apply a rule at a match index.
    Apply {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        rule: PathBuf,
        #[arg(long = "match", default_value_t = 0)]
        match_index: usize,
    },
    /// Run a schedule of rule applications.
    Derive {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Decide pullback preservation of a functor expression on a cospan.
    CheckFunctor {
        #[arg(long)]
        functor: String,
        #[arg(long)]
        cospan: PathBuf,
        #[arg(long, value_enum, default_value = "ordinary")]
        mode: ModeArg,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Evaluate the vertical weak VK condition on a cube file.
    VkCheck {
        #[arg(long)]
        cube: PathBuf,
    },
    /// Print the flavour membership matrix for the worked examples.
    Membership,
    /// List or dump the built-in fixtures.
    Fixtures {
        #[command(subcommand)]
        cmd: FixturesCmd,
    },
    /// Render a graph as GraphViz DOT.
    ExportDot {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Subcommand)]
enum FixturesCmd {
    List,
    Dump { name: String },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Malformed(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

/// A cospan of carrier maps; each leg is either a plain function
/// (one-sorted) or a pair of functions keyed "N"/"E".
#[derive(Deserialize)]
struct CospanFile {
    f: LegFile,
    g: LegFile,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LegFile {
    Sorted {
        #[serde(rename = "N")]
        nodes: FinFunction,
        #[serde(rename = "E")]
        edges: FinFunction,
    },
    Plain(FinFunction),
}

impl LegFile {
    fn into_sorted(self) -> SortedFunction {
        match self {
            LegFile::Plain(f) => SortedFunction::one_sorted(f),
            LegFile::Sorted { nodes, edges } => SortedFunction::new(nodes, edges),
        }
    }
}

/// Bundle for graph-level pullbacks: `f : B -> D`, `g : C -> D`.
#[derive(Deserialize)]
struct PullbackBundle {
    b: CoalgGraph,
    c: CoalgGraph,
    d: CoalgGraph,
    f: MorphismTables,
    g: MorphismTables,
}

/// Bundle for graph-level pushouts: `f : A -> B`, `g : A -> C`.
#[derive(Deserialize)]
struct PushoutBundle {
    a: CoalgGraph,
    b: CoalgGraph,
    c: CoalgGraph,
    f: MorphismTables,
    g: MorphismTables,
}

/// A derivation plan: named rules plus a schedule of (rule, match index).
#[derive(Deserialize)]
struct PlanFile {
    rules: BTreeMap<String, RuleJson>,
    steps: Vec<(String, usize)>,
}

/// Cube file: eight graphs and twelve morphism tables.
#[derive(Serialize, Deserialize)]
struct CubeFile {
    graphs: CubeGraphs,
    morphisms: CubeMorphisms,
}

#[derive(Serialize, Deserialize)]
struct CubeGraphs {
    a_top: CoalgGraph,
    b_top: CoalgGraph,
    c_top: CoalgGraph,
    d_top: CoalgGraph,
    a: CoalgGraph,
    b: CoalgGraph,
    c: CoalgGraph,
    d: CoalgGraph,
}

#[derive(Serialize, Deserialize)]
struct CubeMorphisms {
    m_top: MorphismTables,
    f_top: MorphismTables,
    g_top: MorphismTables,
    n_top: MorphismTables,
    m: MorphismTables,
    f: MorphismTables,
    g: MorphismTables,
    n: MorphismTables,
    a: MorphismTables,
    b: MorphismTables,
    c: MorphismTables,
    d: MorphismTables,
}

fn parse_kind(text: &str) -> Result<encodings::EncodingKind, Error> {
    use encodings::EncodingKind::*;
    match text {
        "comma" => Ok(PPaCommaGraph),
        "dhp" => Ok(DhpLayered),
        "palacz" => Ok(Palacz),
        "bigraph" => Ok(Bigraph),
        "grouping" => Ok(Grouping),
        other => {
            if let Some(expr) = other.strip_prefix("bkk:") {
                Ok(Bkk(parse_functor(expr)?))
            } else if let Some(n) = other.strip_prefix("multi:") {
                let n = n
                    .parse()
                    .map_err(|_| Error::Malformed(format!("bad hierarchy count `{n}`")))?;
                Ok(MultiHierarchy(n))
            } else {
                Err(Error::Malformed(format!("unknown encoding kind `{other}`")))
            }
        }
    }
}

fn cube_from_file(file: CubeFile) -> Result<VkCube, Error> {
    let CubeFile {
        graphs: g,
        morphisms: m,
    } = file;
    let mor = |src: &CoalgGraph, dst: &CoalgGraph, t: &MorphismTables| {
        GraphMorphism::from_tables(src.clone(), dst.clone(), t)
    };
    Ok(VkCube {
        m_top: mor(&g.a_top, &g.b_top, &m.m_top)?,
        f_top: mor(&g.a_top, &g.c_top, &m.f_top)?,
        g_top: mor(&g.b_top, &g.d_top, &m.g_top)?,
        n_top: mor(&g.c_top, &g.d_top, &m.n_top)?,
        m_bot: mor(&g.a, &g.b, &m.m)?,
        f_bot: mor(&g.a, &g.c, &m.f)?,
        g_bot: mor(&g.b, &g.d, &m.g)?,
        n_bot: mor(&g.c, &g.d, &m.n)?,
        va: mor(&g.a_top, &g.a, &m.a)?,
        vb: mor(&g.b_top, &g.b, &m.b)?,
        vc: mor(&g.c_top, &g.c, &m.c)?,
        vd: mor(&g.d_top, &g.d, &m.d)?,
    })
}

fn run(cli: &Cli) -> Result<String, Error> {
    let payload: Value = match &cli.command {
        Command::Validate { graph, kind } => {
            let g: CoalgGraph = read_json(graph)?;
            let failures = validate_graph(&g);
            match kind {
                None => json!({ "valid": failures.is_empty(), "failures": failures }),
                Some(kind) => {
                    let kind = parse_kind(kind)?;
                    let violations = encodings::validate_encoding(&g, &kind)?;
                    json!({
                        "valid": failures.is_empty() && violations.is_empty(),
                        "failures": failures,
                        "violations": violations,
                    })
                }
            }
        }
        Command::MorphismCheck { src, dst, morphism } => {
            let src: CoalgGraph = read_json(src)?;
            let dst: CoalgGraph = read_json(dst)?;
            let tables: MorphismTables = read_json(morphism)?;
            let m = GraphMorphism::from_tables(src, dst, &tables)?;
            let ok = check_morphism(&m)?;
            let witness = morphism_witness(&m)?;
            json!({ "ok": ok, "witness": witness })
        }
        Command::Flatten { graph } => {
            let g: CoalgGraph = read_json(graph)?;
            serde_json::to_value(flatten(&g)).unwrap()
        }
        Command::Properties { graph } => {
            let g: CoalgGraph = read_json(graph)?;
            json!({
                "nodes": node_properties(&g),
                "edges": edge_properties(&g),
            })
        }
        Command::Pullback { cospan } => {
            let bundle: PullbackBundle = read_json(cospan)?;
            let f = GraphMorphism::from_tables(bundle.b, bundle.d.clone(), &bundle.f)?;
            let g = GraphMorphism::from_tables(bundle.c, bundle.d, &bundle.g)?;
            let (apex, pi_b, pi_c) = adhesia::category::coalg_pullback(&f, &g)?;
            json!({ "apex": apex, "pi_b": pi_b.tables(), "pi_c": pi_c.tables() })
        }
        Command::Pushout { span } => {
            let bundle: PushoutBundle = read_json(span)?;
            let f = GraphMorphism::from_tables(bundle.a.clone(), bundle.b, &bundle.f)?;
            let g = GraphMorphism::from_tables(bundle.a, bundle.c, &bundle.g)?;
            let (apex, in_b, in_c) = adhesia::category::coalg_pushout(&f, &g)?;
            json!({ "apex": apex, "in_b": in_b.tables(), "in_c": in_c.tables() })
        }
        Command::Matches { graph, rule } => {
            let g: CoalgGraph = read_json(graph)?;
            let rule = Rule::from_json(read_json(rule)?)?;
            let matches = dpo::find_matches(&rule, &g)?;
            let tables: Vec<MorphismTables> = matches.iter().map(|m| m.tables()).collect();
            json!({ "count": tables.len(), "matches": tables })
        }
        Command::Apply {
            graph,
            rule,
            match_index,
        } => {
            let g: CoalgGraph = read_json(graph)?;
            let rule = Rule::from_json(read_json(rule)?)?;
            let matches = dpo::find_matches(&rule, &g)?;
            let mat = matches.get(*match_index).ok_or_else(|| {
                Error::NoSuchMatch(format!(
                    "index {match_index} out of range ({} found)",
                    matches.len()
                ))
            })?;
            let step = dpo::apply_rule(&rule, mat, &g)?;
            json!({
                "match": mat.tables(),
                "intermediate": step.intermediate,
                "result": step.result,
                "comatch": step.comatch.tables(),
            })
        }
        Command::Derive { graph, plan } => {
            let g: CoalgGraph = read_json(graph)?;
            let plan: PlanFile = read_json(plan)?;
            let mut rules = Vec::new();
            for (name, raw) in plan.rules {
                rules.push((name, Rule::from_json(raw)?));
            }
            let trace = dpo::derive(&g, &rules, &plan.steps)?;
            let steps: Vec<Value> = trace
                .steps
                .iter()
                .map(|s| {
                    json!({
                        "rule": s.rule,
                        "match": s.mat,
                        "result": s.result,
                    })
                })
                .collect();
            json!({ "steps": steps, "result": trace.result() })
        }
        Command::CheckFunctor {
            functor,
            cospan,
            mode,
            bounds,
        } => {
            let expr = parse_functor(functor)?;
            let file: CospanFile = read_json(cospan)?;
            let cs = Cospan::new(file.f.into_sorted(), file.g.into_sorted())?;
            let mode = match mode {
                ModeArg::Ordinary => PreservationMode::Ordinary,
                ModeArg::Monos => PreservationMode::AlongMonos,
                ModeArg::Weak => PreservationMode::Weak,
            };
            let verdict = check_pb_preservation(&expr, &cs, bounds.bounds(), mode)?;
            serde_json::to_value(verdict).unwrap()
        }
        Command::VkCheck { cube } => {
            let cube = cube_from_file(read_json(cube)?)?;
            serde_json::to_value(vk_cube_check(&cube)?).unwrap()
        }
        Command::Membership => serde_json::to_value(encodings::membership_matrix()).unwrap(),
        Command::Fixtures { cmd } => match cmd {
            FixturesCmd::List => serde_json::to_value(encodings::fixture_names()).unwrap(),
            FixturesCmd::Dump { name } => match encodings::any_fixture(name)? {
                Fixture::Graph(g) => serde_json::to_value(g).unwrap(),
                Fixture::Rule(r) => serde_json::to_value(r.to_json()).unwrap(),
            },
        },
        Command::ExportDot { graph } => {
            let g: CoalgGraph = read_json(graph)?;
            return Ok(export_dot(&g));
        }
    };
    Ok(serde_json::to_string_pretty(&payload).unwrap() + "\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(payload) => {
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, &payload) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{payload}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let obj = json!({ "error": { "code": err.code(), "message": err.to_string() } });
            println!("{}", serde_json::to_string_pretty(&obj).unwrap());
            ExitCode::from(1)
        }
    }
}
