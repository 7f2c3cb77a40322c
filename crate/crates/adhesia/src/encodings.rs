//! Signature presets for the hierarchical-graph flavours, the worked
//! example graphs as frozen fixtures, and the membership matrix comparing
//! the strict flavour predicates against the published difference table.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dpo::Rule;
use crate::error::{Error, Result};
use crate::finset::FinSet;
use crate::functor::{parse_functor, FunctorExpr};
use crate::graph::{
    base_atoms, edge_properties, node_properties, node_properties_of_map, validate_graph,
    CoalgGraph, MorphismTables, Signature,
};
use crate::term::{make_set, member_of, AtomId, Flavor, NestedTerm};

/// The catalogued graph encodings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodingKind {
    /// Hyperedges over nested nodes without container names.
    PPaCommaGraph,
    /// Package hierarchies: nested nodes plus an edge functor of choice.
    Bkk(FunctorExpr),
    /// Layered hypergraphs: ordered attachments plus layered contents.
    DhpLayered,
    /// Parent maps over nodes and edges.
    Palacz,
    /// `n` independent containment hierarchies.
    MultiHierarchy(usize),
    /// Place graph as containment, link graph as directed hyperedges.
    Bigraph,
    /// Grouping: directed edges with grouped edge sets.
    Grouping,
}

/// The signature of an encoding.
pub fn preset(kind: &EncodingKind) -> Signature {
    let p = |s: &str| parse_functor(s).unwrap();
    match kind {
        EncodingKind::PPaCommaGraph => Signature::new(p("1"), p("PPa(N)")),
        EncodingKind::Bkk(fun_h) => Signature::new(p("PPa(N)"), fun_h.clone()),
        EncodingKind::DhpLayered => Signature::new(p("1"), p("Star(N) * PotOm(N)")),
        EncodingKind::Palacz => Signature::new(p("PPa(N + E)"), p("Pot(N) * PPa(N + E)")),
        EncodingKind::MultiHierarchy(n) => Signature::new(
            FunctorExpr::Copy(*n, Box::new(p("PPa(N + E)"))),
            p("Pot(N)"),
        ),
        EncodingKind::Bigraph => Signature::new(p("PPa(N)"), p("Pot(N + E) * Pot(N + E)")),
        EncodingKind::Grouping => Signature::new(p("PPa(N)"), p("N * N * PPa(E)")),
    }
}

/// Checks the side conditions of an encoding kind and lists violations.
pub fn validate_encoding(g: &CoalgGraph, kind: &EncodingKind) -> Result<Vec<String>> {
    if g.signature != preset(kind) {
        return Err(Error::SignatureMismatch(format!(
            "graph signature is not the {kind:?} preset"
        )));
    }
    let mut violations: Vec<String> = validate_graph(g)
        .into_iter()
        .map(|f| format!("invalid {} `{}`", f.kind, f.element))
        .collect();
    let props = node_properties(g);
    match kind {
        EncodingKind::PPaCommaGraph => {}
        EncodingKind::Bkk(_) => {
            if !props.well_founded {
                violations.push("contains map is not well-founded".into());
            }
            // completeness: each atomic node lies inside some package
            for n in &props.atoms {
                let covered = g.nodes.iter().any(|p| {
                    g.contains[p]
                        .set_members()
                        .map(|xs| xs.contains(&NestedTerm::Atom(n.clone())))
                        .unwrap_or(false)
                });
                if !covered {
                    violations.push(format!("atomic node `{n}` is in no package"));
                }
            }
        }
        EncodingKind::DhpLayered => {
            if !edge_properties(g).node_based {
                violations.push("edges are not node-based".into());
            }
        }
        EncodingKind::Palacz | EncodingKind::Bigraph => {
            if !props.well_founded {
                violations.push("contains map is not well-founded".into());
            }
            if !props.hierarchical {
                violations.push("contains map is not hierarchical".into());
            }
        }
        EncodingKind::MultiHierarchy(n) => {
            let base = base_atoms(
                &parse_functor("PPa(N + E)").unwrap(),
                g,
            );
            for i in 0..*n {
                let mut projected: BTreeMap<AtomId, NestedTerm> = BTreeMap::new();
                for node in g.nodes.iter() {
                    match &g.contains[node] {
                        NestedTerm::Seq(xs) if xs.len() == *n => {
                            projected.insert(node.clone(), xs[i].clone());
                        }
                        other => {
                            violations.push(format!(
                                "node `{node}` image {other} is not a {n}-tuple"
                            ));
                        }
                    }
                }
                let sub = node_properties_of_map(&g.nodes, &projected, &base);
                if !sub.well_founded {
                    violations.push(format!("hierarchy {i} is not well-founded"));
                }
                if !sub.hierarchical {
                    violations.push(format!("hierarchy {i} is not hierarchical"));
                }
            }
        }
        EncodingKind::Grouping => {
            if !props.well_founded {
                violations.push("contains map is not well-founded".into());
            }
        }
    }
    Ok(violations)
}

/// A named fixture: a graph or a rule.
#[derive(Debug, Clone)]
pub enum Fixture {
    Graph(CoalgGraph),
    Rule(Box<Rule>),
}

pub fn fixture_names() -> Vec<&'static str> {
    vec![
        "motiv.G1",
        "motiv.G2",
        "motiv.G3",
        "fig2.G1",
        "fig2.G2",
        "ppb.G3",
        "ppb.G4",
        "potom.G5",
        "potom.G6",
        "fig3.bkk",
        "fig4.dhp",
        "fig5.palacz",
        "fig6.host",
        "fig6.rule",
        "fig7.bigraph",
    ]
}

/// Returns the frozen figure data by name.
pub fn fixture(name: &str) -> Result<CoalgGraph> {
    match any_fixture(name)? {
        Fixture::Graph(g) => Ok(g),
        Fixture::Rule(_) => Err(Error::UnknownFixture(format!("{name} is a rule"))),
    }
}

pub fn fixture_rule(name: &str) -> Result<Rule> {
    match any_fixture(name)? {
        Fixture::Rule(r) => Ok(*r),
        Fixture::Graph(_) => Err(Error::UnknownFixture(format!("{name} is a graph"))),
    }
}

pub fn any_fixture(name: &str) -> Result<Fixture> {
    let g = |g: CoalgGraph| Ok(Fixture::Graph(g));
    match name {
        "motiv.G1" => g(motiv_g1()),
        "motiv.G2" => g(motiv_g2()),
        "motiv.G3" => g(motiv_g3()),
        "fig2.G1" => g(fig2_g1()),
        "fig2.G2" => g(fig2_g2()),
        "ppb.G3" => g(ppb_g3()),
        "ppb.G4" => g(ppb_g4()),
        "potom.G5" => g(potom_g5()),
        "potom.G6" => g(potom_g6()),
        "fig3.bkk" => g(fig3_bkk()),
        "fig4.dhp" => g(fig4_dhp()),
        "fig5.palacz" => g(fig5_palacz()),
        "fig6.host" => g(binary_tree(3)),
        "fig6.rule" => Ok(Fixture::Rule(Box::new(fig6_rule()))),
        "fig7.bigraph" => g(fig7_bigraph()),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

fn id(name: &str) -> AtomId {
    AtomId::new(name)
}

fn at(name: &str) -> NestedTerm {
    NestedTerm::atom(name)
}

fn set(members: impl IntoIterator<Item = NestedTerm>) -> NestedTerm {
    make_set(members)
}

fn atoms(names: &[&str]) -> NestedTerm {
    set(names.iter().map(|n| at(n)))
}

fn graph(
    sig: Signature,
    nodes: &[&str],
    edges: &[&str],
    contains: Vec<(&str, NestedTerm)>,
    neighbours: Vec<(&str, NestedTerm)>,
) -> CoalgGraph {
    CoalgGraph::new(
        sig,
        FinSet::from_names(nodes),
        FinSet::from_names(edges),
        contains.into_iter().map(|(k, v)| (id(k), v)).collect(),
        neighbours.into_iter().map(|(k, v)| (id(k), v)).collect(),
    )
    .expect("fixture construction")
}

fn unit_contains<'a>(nodes: &[&'a str]) -> Vec<(&'a str, NestedTerm)> {
    nodes.iter().map(|n| (*n, NestedTerm::Unit)).collect()
}

fn sig(node: &str, st: &str) -> Signature {
    Signature::new(parse_functor(node).unwrap(), parse_functor(st).unwrap())
}

fn motiv_g1() -> CoalgGraph {
    graph(
        sig("PPa(N)", "Pot(N + E)"),
        &["n1", "n2", "n3", "n4", "n5", "n6"],
        &["a", "b", "c"],
        vec![
            ("n1", at("n1")),
            ("n2", at("n2")),
            ("n3", at("n3")),
            ("n4", atoms(&["n1", "n2"])),
            ("n5", atoms(&["n3"])),
            ("n6", set([at("n2"), atoms(&["n2", "n3"]), at("n5")])),
        ],
        vec![
            ("a", atoms(&["n1", "n3"])),
            ("b", atoms(&["n2", "n5", "n6"])),
            ("c", atoms(&["n5"])),
        ],
    )
}

fn motiv_g2() -> CoalgGraph {
    graph(
        sig("1", "Pot(N + E)"),
        &["a", "b", "c", "d"],
        &["x1", "x2", "x3", "x4"],
        unit_contains(&["a", "b", "c", "d"]),
        vec![
            ("x1", atoms(&["a", "b", "c"])),
            ("x2", atoms(&["a", "b"])),
            ("x3", atoms(&["x2", "d"])),
            ("x4", atoms(&["a", "x4"])),
        ],
    )
}

fn motiv_g3() -> CoalgGraph {
    let word = |names: &[&str]| NestedTerm::seq(names.iter().map(|n| at(n)));
    graph(
        sig("1", "Star(N) * Pot(N + E)"),
        &["a", "b", "c", "d", "e"],
        &["x1", "x2", "x3"],
        unit_contains(&["a", "b", "c", "d", "e"]),
        vec![
            (
                "x1",
                NestedTerm::pair(word(&["a", "b", "c"]), atoms(&["d", "e", "x2", "x3"])),
            ),
            ("x2", NestedTerm::pair(word(&["e", "d"]), set([]))),
            ("x3", NestedTerm::pair(word(&["d", "e"]), set([]))),
        ],
    )
}

fn fig2_g1() -> CoalgGraph {
    graph(
        sig("1", "PPa(N)"),
        &["u", "v", "w"],
        &["x", "y", "z"],
        unit_contains(&["u", "v", "w"]),
        vec![
            ("x", set([atoms(&["u"]), atoms(&["v"])])),
            ("y", atoms(&["u", "w"])),
            ("z", atoms(&["u", "w"])),
        ],
    )
}

fn fig2_g2() -> CoalgGraph {
    graph(
        sig("1", "PPa(N)"),
        &["n1", "n2", "n3"],
        &["a", "b", "c"],
        unit_contains(&["n1", "n2", "n3"]),
        vec![
            ("a", atoms(&["n1", "n2"])),
            ("b", set([atoms(&["n1", "n2"]), atoms(&["n3"]), at("n3")])),
            ("c", set([atoms(&["n3"])])),
        ],
    )
}

fn ppb_g3() -> CoalgGraph {
    graph(
        sig("1", "PPb(N)"),
        &["u", "v", "w"],
        &["x", "y", "z"],
        unit_contains(&["u", "v", "w"]),
        vec![
            ("x", set([set([atoms(&["u"])]), set([atoms(&["v"])])])),
            ("y", set([atoms(&["u"]), atoms(&["w"])])),
            ("z", set([atoms(&["u"]), atoms(&["w"])])),
        ],
    )
}

fn ppb_g4() -> CoalgGraph {
    graph(
        sig("1", "PPb(N)"),
        &["n1", "n3", "n4"],
        &["a", "b", "c"],
        unit_contains(&["n1", "n3", "n4"]),
        vec![
            ("a", set([atoms(&["n1"]), atoms(&["n4"])])),
            (
                "b",
                set([atoms(&["n1", "n4"]), atoms(&["n3"]), set([atoms(&["n3"])])]),
            ),
            ("c", set([set([atoms(&["n3"])])])),
        ],
    )
}

fn potom_g5() -> CoalgGraph {
    graph(
        sig("1", "PotOm(N)"),
        &["u", "v", "w"],
        &["x", "y", "z"],
        unit_contains(&["u", "v", "w"]),
        vec![
            ("x", set([set([atoms(&["u"])]), set([atoms(&["v"])])])),
            ("y", set([atoms(&["u"]), atoms(&["w"])])),
            ("z", set([atoms(&["u"]), atoms(&["w"])])),
        ],
    )
}

/// The layered example whose edge `b` mixes an atom with sets; it fails the
/// strict layered predicate, so the fixture is stored under `PPa`. The
/// membership matrix reports the disagreement with the published table.
fn potom_g6() -> CoalgGraph {
    graph(
        sig("1", "PPa(N)"),
        &["n1", "n2", "n3"],
        &["a", "b", "c"],
        unit_contains(&["n1", "n2", "n3"]),
        vec![
            ("a", set([atoms(&["n1"]), atoms(&["n2"])])),
            ("b", set([atoms(&["n1", "n2"]), atoms(&["n3"]), at("n3")])),
            ("c", set([atoms(&["n3"])])),
        ],
    )
}

fn fig3_bkk() -> CoalgGraph {
    let dir = |s: &str, t: &str| NestedTerm::pair(at(s), at(t));
    graph(
        Signature::new(
            parse_functor("PPa(N)").unwrap(),
            parse_functor("N * N").unwrap(),
        ),
        &["n", "m", "x", "y", "z", "p1", "p2", "p3"],
        &["a", "b", "c", "e"],
        vec![
            ("n", at("n")),
            ("m", at("m")),
            ("x", at("x")),
            ("y", at("y")),
            ("z", at("z")),
            ("p1", atoms(&["x", "y", "z"])),
            ("p2", atoms(&["n", "m"])),
            ("p3", atoms(&["p1", "p2"])),
        ],
        vec![
            ("a", dir("y", "x")),
            ("b", dir("y", "z")),
            ("c", dir("m", "n")),
            ("e", dir("z", "n")),
        ],
    )
}

fn fig4_dhp() -> CoalgGraph {
    let word = |names: &[&str]| NestedTerm::seq(names.iter().map(|n| at(n)));
    let entry = |w: &[&str], contents: NestedTerm| NestedTerm::pair(word(w), contents);
    graph(
        sig("1", "Star(N) * PotOm(N)"),
        &["x", "y", "z", "n", "m", "v1", "v2", "v3", "v4"],
        &["a", "b", "c", "e1", "e2"],
        unit_contains(&["x", "y", "z", "n", "m", "v1", "v2", "v3", "v4"]),
        vec![
            ("a", entry(&["x", "y", "z"], set([]))),
            ("b", entry(&["n", "m"], set([]))),
            ("c", entry(&["v2", "v4"], set([]))),
            ("e1", entry(&["v1", "v2", "v3"], atoms(&["x", "y", "z"]))),
            ("e2", entry(&["v4"], atoms(&["n", "m"]))),
        ],
    )
}

fn fig5_palacz() -> CoalgGraph {
    let hyper = |ns: &[&str]| NestedTerm::pair(atoms(ns), set([]));
    graph(
        sig("PPa(N + E)", "Pot(N) * PPa(N + E)"),
        &["1", "2", "3", "6", "8", "9", "11"],
        &["4", "5", "7", "10"],
        vec![
            ("1", at("1")),
            ("2", at("2")),
            ("3", atoms(&["1", "2", "4"])),
            ("6", at("6")),
            ("8", at("8")),
            ("9", at("9")),
            ("11", atoms(&["8", "9"])),
        ],
        vec![
            ("4", hyper(&["1", "2"])),
            ("5", hyper(&["2", "6"])),
            ("7", hyper(&["3", "6", "11"])),
            ("10", hyper(&["8", "9"])),
        ],
    )
}

fn fig7_bigraph() -> CoalgGraph {
    let link = |src: &[&str], tgt: &[&str]| NestedTerm::pair(atoms(src), atoms(tgt));
    graph(
        sig("PPa(N)", "Pot(N + E) * Pot(N + E)"),
        &["r0", "r1", "v0", "v1", "v2", "v3", "s0", "s1", "s2"],
        &["e1", "y0", "y1", "x0", "x1"],
        vec![
            ("r0", atoms(&["v0", "v2"])),
            ("r1", atoms(&["v3", "s1"])),
            ("v0", atoms(&["v1"])),
            ("v1", atoms(&["s0"])),
            ("v2", at("v2")),
            ("v3", atoms(&["s2"])),
            ("s0", at("s0")),
            ("s1", at("s1")),
            ("s2", at("s2")),
        ],
        vec![
            ("e1", link(&["v1", "v2", "v3"], &["v1", "v2", "v3"])),
            ("y0", link(&["v2"], &["v2"])),
            ("y1", link(&["v2", "v3"], &["v2", "v3"])),
            ("x0", link(&["x0"], &["y1"])),
            ("x1", link(&["x1"], &["v3"])),
        ],
    )
}

/// The full binary tree of transitions truncated at `depth`: states
/// `q00..`, successor sets `{2i+1, 2i+2}`, leaves mapped to the empty set.
pub fn binary_tree(depth: u32) -> CoalgGraph {
    let count = 2usize.pow(depth + 1) - 1;
    let internal = 2usize.pow(depth) - 1;
    tree_graph("q", count, internal, None)
}

fn tree_graph(prefix: &str, count: usize, internal: usize, rewired_root: Option<usize>) -> CoalgGraph {
    let name = |i: usize| format!("{prefix}{i:02}");
    let nodes: Vec<String> = (0..count).map(name).collect();
    let contains: BTreeMap<AtomId, NestedTerm> = (0..count)
        .map(|i| {
            let succs = if let (0, Some(target)) = (i, rewired_root) {
                set([at(&name(target))])
            } else if i < internal {
                set([at(&name(2 * i + 1)), at(&name(2 * i + 2))])
            } else {
                set([])
            };
            (id(&name(i)), succs)
        })
        .collect();
    CoalgGraph::new(
        sig("PotFin(N)", "Pot(N)"),
        FinSet::new(nodes.iter().map(|n| id(n))),
        FinSet::empty(),
        contains,
        BTreeMap::new(),
    )
    .expect("tree fixture")
}

/// The transformation rule over the truncated tree: delete the root and
/// re-add it with its successor set rewired to the first child only. The
/// left graph is the whole depth-3 pattern because homomorphisms pin every
/// state's complete successor set.
fn fig6_rule() -> Rule {
    let count = 15;
    let internal = 7;
    let left = tree_graph("l", count, internal, None);
    let right = tree_graph("l", count, internal, Some(1));
    // interface: everything but the root
    let keep: Vec<AtomId> = (1..count).map(|i| id(&format!("l{i:02}"))).collect();
    let interface = CoalgGraph::new(
        left.signature.clone(),
        FinSet::new(keep.iter().cloned()),
        FinSet::empty(),
        keep.iter()
            .map(|k| (k.clone(), left.contains[k].clone()))
            .collect(),
        BTreeMap::new(),
    )
    .expect("rule interface");
    let tables = MorphismTables {
        nodes: keep.iter().map(|k| (k.clone(), k.clone())).collect(),
        edges: BTreeMap::new(),
    };
    Rule::new(left, interface, right, &tables, &tables).expect("rule fixture")
}

/// One row of the membership matrix.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixRow {
    pub graph: &'static str,
    /// Strict membership of every neighbour image, per flavour.
    pub strict: BTreeMap<&'static str, bool>,
    /// The published table's claims.
    pub published: BTreeMap<&'static str, bool>,
    /// Cells where the two disagree.
    pub disagreements: Vec<&'static str>,
}

/// One of the five cited negative membership facts.
#[derive(Debug, Clone, Serialize)]
pub struct ReasonFact {
    pub label: &'static str,
    pub statement: String,
    /// The fact claims non-membership; this is the strict evaluation.
    pub is_member: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipMatrix {
    pub rows: Vec<MatrixRow>,
    pub reasons: Vec<ReasonFact>,
}

/// Evaluates the three superpower flavours on the six example graphs and
/// the five cited reasons, reporting every cell where strict membership
/// disagrees with the published yes/no.
pub fn membership_matrix() -> MembershipMatrix {
    let flavors: [(&'static str, Flavor); 3] = [
        ("PPb", Flavor::PPb),
        ("PPa", Flavor::PPa),
        ("PotOm", Flavor::PotOm),
    ];
    let graphs: [(&'static str, CoalgGraph); 6] = [
        ("G1", fig2_g1()),
        ("G2", fig2_g2()),
        ("G3", ppb_g3()),
        ("G4", ppb_g4()),
        ("G5", potom_g5()),
        ("G6", potom_g6()),
    ];
    let published: BTreeMap<&str, [bool; 3]> = [
        ("G1", [true, true, true]),
        ("G2", [true, true, false]),
        ("G3", [false, true, true]),
        ("G4", [false, true, false]),
        ("G5", [false, true, true]),
        ("G6", [false, true, true]),
    ]
    .into_iter()
    .collect();
    let mut rows = Vec::new();
    for (name, g) in graphs {
        let universe: BTreeSet<AtomId> = g.nodes.iter().cloned().collect();
        let mut strict = BTreeMap::new();
        let mut claims = BTreeMap::new();
        let mut disagreements = Vec::new();
        for (i, (fname, flavor)) in flavors.iter().enumerate() {
            let holds = g
                .neighbours
                .values()
                .all(|t| member_of(t, &universe, *flavor).unwrap_or(false));
            let claimed = published[name][i];
            strict.insert(*fname, holds);
            claims.insert(*fname, claimed);
            if holds != claimed {
                disagreements.push(*fname);
            }
        }
        rows.push(MatrixRow {
            graph: name,
            strict,
            published: claims,
            disagreements,
        });
    }

    let u_n: BTreeSet<AtomId> = ["n1", "n2", "n3"].iter().map(|n| id(n)).collect();
    let u_uvw: BTreeSet<AtomId> = ["u", "v", "w"].iter().map(|n| id(n)).collect();
    let mixed = set([at("n1"), atoms(&["n2"])]);
    let layered = set([atoms(&["n1"]), set([atoms(&["n2"])])]);
    let reasons = vec![
        ReasonFact {
            label: "i",
            statement: "{{n1},{{n2}}} in PotOm({n1,n2,n3})".into(),
            is_member: member_of(&layered, &u_n, Flavor::PotOm).unwrap(),
        },
        ReasonFact {
            label: "ii",
            statement: "u in PPb({u,v,w})".into(),
            is_member: member_of(&at("u"), &u_uvw, Flavor::PPb).unwrap(),
        },
        ReasonFact {
            label: "iii",
            statement: "{n1,{n2}} in PPb({n1,n2,n3})".into(),
            is_member: member_of(&mixed, &u_n, Flavor::PPb).unwrap(),
        },
        ReasonFact {
            label: "iv",
            statement: "{n1,{n2}} in PotOm({n1,n2,n3})".into(),
            is_member: member_of(&mixed, &u_n, Flavor::PotOm).unwrap(),
        },
        ReasonFact {
            label: "v",
            statement: "n1 in PPb({n1,n2,n3})".into(),
            is_member: member_of(&at("n1"), &u_n, Flavor::PPb).unwrap(),
        },
    ];
    MembershipMatrix { rows, reasons }
}
