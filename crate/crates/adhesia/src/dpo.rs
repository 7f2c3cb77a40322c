//! Double-pushout rewriting of coalgebraic graphs with injective rules and
//! matches: match enumeration, the gluing (dangling) condition, rule
//! application via pushout complement + pushout, and derivation traces.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::category::{coalg_pushout, is_pushout};
use crate::error::{Error, Result};
use crate::finset::{self, FinFunction};
use crate::functor::SortedFunction;
use crate::graph::{
    check_morphism, validate_graph, CoalgGraph, GraphMorphism, MorphismTables,
};
use crate::term::{atoms_of, AtomId, NestedTerm};

/// A rewrite rule: a span `L <-l- K -r-> R` of injective homomorphisms
/// between valid graphs over one signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub left: CoalgGraph,
    pub interface: CoalgGraph,
    pub right: CoalgGraph,
    pub l: GraphMorphism,
    pub r: GraphMorphism,
}

impl Rule {
    pub fn new(
        left: CoalgGraph,
        interface: CoalgGraph,
        right: CoalgGraph,
        l_tables: &MorphismTables,
        r_tables: &MorphismTables,
    ) -> Result<Self> {
        if left.signature != interface.signature || right.signature != interface.signature {
            return Err(Error::SignatureMismatch(
                "rule graphs must share a signature".into(),
            ));
        }
        for (name, g) in [("L", &left), ("K", &interface), ("R", &right)] {
            let report = validate_graph(g);
            if !report.is_empty() {
                return Err(Error::Malformed(format!(
                    "rule graph {name} is invalid at `{}`",
                    report[0].element
                )));
            }
        }
        let l = GraphMorphism::from_tables(interface.clone(), left.clone(), l_tables)?;
        let r = GraphMorphism::from_tables(interface.clone(), right.clone(), r_tables)?;
        for (name, m) in [("l", &l), ("r", &r)] {
            if !m.is_injective() {
                return Err(Error::NotInjective(format!("rule leg {name}")));
            }
            if !check_morphism(m)? {
                return Err(Error::Malformed(format!("rule leg {name} is not a homomorphism")));
            }
        }
        Ok(Rule {
            left,
            interface,
            right,
            l,
            r,
        })
    }

    /// The reversed rule `R <-r- K -l-> L`.
    pub fn inverse(&self) -> Rule {
        Rule {
            left: self.right.clone(),
            interface: self.interface.clone(),
            right: self.left.clone(),
            l: self.r.clone(),
            r: self.l.clone(),
        }
    }
}

/// Serialized rule: the three graphs plus the two leg tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleJson {
    pub left: CoalgGraph,
    pub interface: CoalgGraph,
    pub right: CoalgGraph,
    pub l: MorphismTables,
    pub r: MorphismTables,
}

impl Rule {
    pub fn to_json(&self) -> RuleJson {
        RuleJson {
            left: self.left.clone(),
            interface: self.interface.clone(),
            right: self.right.clone(),
            l: self.l.tables(),
            r: self.r.tables(),
        }
    }

    pub fn from_json(raw: RuleJson) -> Result<Self> {
        Rule::new(raw.left, raw.interface, raw.right, &raw.l, &raw.r)
    }
}

/// All injective homomorphisms `L -> G`, sorted lexicographically by their
/// assignment tables.
pub fn find_matches(rule: &Rule, g: &CoalgGraph) -> Result<Vec<GraphMorphism>> {
    if rule.left.signature != g.signature {
        return Err(Error::SignatureMismatch(
            "rule and host graph signatures differ".into(),
        ));
    }
    let l = &rule.left;
    let items: Vec<(bool, AtomId)> = l
        .nodes
        .iter()
        .map(|n| (true, n.clone()))
        .chain(l.edges.iter().map(|e| (false, e.clone())))
        .collect();
    let mut node_map = BTreeMap::new();
    let mut edge_map = BTreeMap::new();
    let mut found = Vec::new();
    search(l, g, &items, 0, &mut node_map, &mut edge_map, &mut found);
    let mut matches = Vec::new();
    for (nm, em) in found {
        let on = SortedFunction::new(
            FinFunction::new(l.nodes.clone(), g.nodes.clone(), nm)?,
            FinFunction::new(l.edges.clone(), g.edges.clone(), em)?,
        );
        matches.push(GraphMorphism::new(l.clone(), g.clone(), on)?);
    }
    matches.sort_by_key(|m| m.tables());
    Ok(matches)
}

type Tables = (BTreeMap<AtomId, AtomId>, BTreeMap<AtomId, AtomId>);

fn search(
    l: &CoalgGraph,
    g: &CoalgGraph,
    items: &[(bool, AtomId)],
    pos: usize,
    node_map: &mut BTreeMap<AtomId, AtomId>,
    edge_map: &mut BTreeMap<AtomId, AtomId>,
    found: &mut Vec<Tables>,
) {
    if pos == items.len() {
        found.push((node_map.clone(), edge_map.clone()));
        return;
    }
    let (is_node, x) = &items[pos];
    let candidates: Vec<AtomId> = if *is_node {
        g.nodes
            .iter()
            .filter(|y| !node_map.values().any(|v| &v == y))
            .cloned()
            .collect()
    } else {
        g.edges
            .iter()
            .filter(|y| !edge_map.values().any(|v| &v == y))
            .cloned()
            .collect()
    };
    for y in candidates {
        if *is_node {
            node_map.insert(x.clone(), y);
        } else {
            edge_map.insert(x.clone(), y);
        }
        if partial_commutes(l, g, node_map, edge_map) {
            search(l, g, items, pos + 1, node_map, edge_map, found);
        }
        if *is_node {
            node_map.remove(x);
        } else {
            edge_map.remove(x);
        }
    }
}

/// Checks each structure square whose atoms are all assigned.
fn partial_commutes(
    l: &CoalgGraph,
    g: &CoalgGraph,
    node_map: &BTreeMap<AtomId, AtomId>,
    edge_map: &BTreeMap<AtomId, AtomId>,
) -> bool {
    let supported = |t: &NestedTerm| {
        atoms_of(t)
            .iter()
            .all(|a| node_map.contains_key(a) || edge_map.contains_key(a))
    };
    for (x, y) in node_map {
        let t = &l.contains[x];
        if supported(t) {
            match crate::graph::rename_term(t, node_map, edge_map) {
                Some(mapped) if mapped == g.contains[y] => {}
                _ => return false,
            }
        }
    }
    for (x, y) in edge_map {
        let t = &l.neighbours[x];
        if supported(t) {
            match crate::graph::rename_term(t, node_map, edge_map) {
                Some(mapped) if mapped == g.neighbours[y] => {}
                _ => return false,
            }
        }
    }
    true
}

/// A dangling-condition violation: a kept element whose structure map
/// mentions a deleted one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DanglingWitness {
    pub kept: AtomId,
    pub deleted: AtomId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GluingReport {
    pub ok: bool,
    pub witnesses: Vec<DanglingWitness>,
}

fn deleted_atoms(rule: &Rule, mat: &GraphMorphism) -> BTreeSet<AtomId> {
    let kept_nodes: BTreeSet<&AtomId> = rule.l.on.on_nodes.map.values().collect();
    let kept_edges: BTreeSet<&AtomId> = rule.l.on.on_edges.map.values().collect();
    let mut deleted = BTreeSet::new();
    for n in rule.left.nodes.iter() {
        if !kept_nodes.contains(n) {
            deleted.insert(mat.on.on_nodes.map[n].clone());
        }
    }
    for e in rule.left.edges.iter() {
        if !kept_edges.contains(e) {
            deleted.insert(mat.on.on_edges.map[e].clone());
        }
    }
    deleted
}

/// The gluing (dangling) condition: no retained element of `G` may mention
/// a deleted one in its structure map.
pub fn gluing_check(rule: &Rule, mat: &GraphMorphism, g: &CoalgGraph) -> GluingReport {
    let deleted = deleted_atoms(rule, mat);
    let mut witnesses = Vec::new();
    let mut scan = |x: &AtomId, t: &NestedTerm| {
        if deleted.contains(x) {
            return;
        }
        for a in atoms_of(t) {
            if deleted.contains(&a) {
                witnesses.push(DanglingWitness {
                    kept: x.clone(),
                    deleted: a,
                });
            }
        }
    };
    for n in g.nodes.iter() {
        scan(n, &g.contains[n]);
    }
    for e in g.edges.iter() {
        scan(e, &g.neighbours[e]);
    }
    GluingReport {
        ok: witnesses.is_empty(),
        witnesses,
    }
}

/// The result of one DPO step: the intermediate graph, the rewritten graph,
/// and all the trace morphisms of the two pushout squares.
#[derive(Debug, Clone)]
pub struct RewriteStep {
    pub intermediate: CoalgGraph,
    pub result: CoalgGraph,
    /// `K -> D`.
    pub k_to_d: GraphMorphism,
    /// `D -> G` (inclusion).
    pub d_to_g: GraphMorphism,
    /// `D -> H`.
    pub d_to_h: GraphMorphism,
    /// `R -> H`, the comatch.
    pub comatch: GraphMorphism,
}

/// Applies `rule` at `mat`, constructing the pushout complement `D` and the
/// pushout `H`; both squares are verified to be pushouts.
pub fn apply_rule(rule: &Rule, mat: &GraphMorphism, g: &CoalgGraph) -> Result<RewriteStep> {
    if mat.src != rule.left || &mat.dst != g {
        return Err(Error::Malformed(
            "match must map the rule's left graph into the host".into(),
        ));
    }
    if !mat.is_injective() {
        return Err(Error::NotInjective("match".into()));
    }
    if !check_morphism(mat)? {
        return Err(Error::Malformed("match is not a homomorphism".into()));
    }
    let gluing = gluing_check(rule, mat, g);
    if !gluing.ok {
        let w = &gluing.witnesses[0];
        return Err(Error::GluingViolation(format!(
            "kept element `{}` mentions deleted `{}`",
            w.kept, w.deleted
        )));
    }
    // carrier pushout complements
    let (dn, k_to_d_n, d_incl_n) =
        finset::pushout_complement(&rule.l.on.on_nodes, &mat.on.on_nodes)?;
    let (de, k_to_d_e, d_incl_e) =
        finset::pushout_complement(&rule.l.on.on_edges, &mat.on.on_edges)?;
    // restricted structure maps; well-defined by the gluing condition
    let contains = dn
        .iter()
        .map(|n| (n.clone(), g.contains[n].clone()))
        .collect();
    let neighbours = de
        .iter()
        .map(|e| (e.clone(), g.neighbours[e].clone()))
        .collect();
    let d = CoalgGraph::new(g.signature.clone(), dn, de, contains, neighbours)?;
    if !validate_graph(&d).is_empty() {
        return Err(Error::GluingViolation(
            "intermediate graph is not valid".into(),
        ));
    }
    let k_to_d = GraphMorphism::new(
        rule.interface.clone(),
        d.clone(),
        SortedFunction::new(k_to_d_n, k_to_d_e),
    )?;
    let d_to_g = GraphMorphism::new(
        d.clone(),
        g.clone(),
        SortedFunction::new(d_incl_n, d_incl_e),
    )?;
    for (name, m) in [("K -> D", &k_to_d), ("D -> G", &d_to_g)] {
        if !check_morphism(m)? {
            return Err(Error::StructureClash(format!("{name} is not a homomorphism")));
        }
    }
    // left square: G is the pushout of L <-l- K -> D
    if !is_pushout(&rule.l, &k_to_d, mat, &d_to_g)? {
        return Err(Error::StructureClash(
            "deletion square is not a pushout".into(),
        ));
    }
    // right square: H as the pushout of R <-r- K -> D
    let (h, comatch, d_to_h) = coalg_pushout(&rule.r, &k_to_d)?;
    if !is_pushout(&rule.r, &k_to_d, &comatch, &d_to_h)? {
        return Err(Error::StructureClash(
            "construction square is not a pushout".into(),
        ));
    }
    Ok(RewriteStep {
        intermediate: d,
        result: h,
        k_to_d,
        d_to_g,
        d_to_h,
        comatch,
    })
}

/// One step of a derivation trace.
#[derive(Debug, Clone)]
pub struct DerivationStep {
    pub rule: String,
    pub mat: MorphismTables,
    pub intermediate: CoalgGraph,
    pub result: CoalgGraph,
}

#[derive(Debug, Clone, Default)]
pub struct DerivationTrace {
    pub steps: Vec<DerivationStep>,
}

impl DerivationTrace {
    pub fn result(&self) -> Option<&CoalgGraph> {
        self.steps.last().map(|s| &s.result)
    }
}

/// Folds [`apply_rule`] over a schedule of `(rule name, match index)`
/// pairs; fails fast with the step index on any violation.
pub fn derive(
    g: &CoalgGraph,
    rules: &[(String, Rule)],
    schedule: &[(String, usize)],
) -> Result<DerivationTrace> {
    let mut current = g.clone();
    let mut trace = DerivationTrace::default();
    for (step, (rule_name, match_idx)) in schedule.iter().enumerate() {
        let rule = rules
            .iter()
            .find(|(n, _)| n == rule_name)
            .map(|(_, r)| r)
            .ok_or_else(|| Error::NoSuchMatch(format!("step {step}: unknown rule `{rule_name}`")))?;
        let matches = find_matches(rule, &current)?;
        let mat = matches.get(*match_idx).ok_or_else(|| {
            Error::NoSuchMatch(format!(
                "step {step}: match index {match_idx} out of range ({} found)",
                matches.len()
            ))
        })?;
        let out = apply_rule(rule, mat, &current).map_err(|e| match e {
            Error::GluingViolation(msg) => Error::GluingViolation(format!("step {step}: {msg}")),
            other => other,
        })?;
        trace.steps.push(DerivationStep {
            rule: rule_name.clone(),
            mat: mat.tables(),
            intermediate: out.intermediate,
            result: out.result.clone(),
        });
        current = out.result;
    }
    Ok(trace)
}
