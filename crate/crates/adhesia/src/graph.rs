//! Coalgebraic graphs `G = (N, E, node, st)` over a two-functor signature,
//! their morphisms, flattening, and the nested node/edge properties.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finset::{FinFunction, FinSet};
use crate::functor::{element_of, map_element, CarrierEnv, FunctorExpr, SortedFunction};
use crate::term::{atoms_of, AtomId, NestedTerm};

/// The codomain functors of the contains map and the neighbour map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    #[serde(rename = "node")]
    pub node_f: FunctorExpr,
    #[serde(rename = "st")]
    pub st_f: FunctorExpr,
}

impl Signature {
    pub fn new(node_f: FunctorExpr, st_f: FunctorExpr) -> Self {
        Signature { node_f, st_f }
    }
}

/// A coalgebraic graph: carriers plus structure maps
/// `node : N -> ⟦node_f⟧(N,E)` and `st : E -> ⟦st_f⟧(N,E)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoalgGraph {
    pub signature: Signature,
    pub nodes: FinSet,
    pub edges: FinSet,
    pub contains: BTreeMap<AtomId, NestedTerm>,
    pub neighbours: BTreeMap<AtomId, NestedTerm>,
}

impl CoalgGraph {
    /// Checked constructor: disjoint carriers, total structure maps.
    /// Membership of the images is checked separately by [`validate_graph`].
    pub fn new(
        signature: Signature,
        nodes: FinSet,
        edges: FinSet,
        contains: BTreeMap<AtomId, NestedTerm>,
        neighbours: BTreeMap<AtomId, NestedTerm>,
    ) -> Result<Self> {
        if !nodes.is_disjoint(&edges) {
            return Err(Error::Malformed("node and edge carriers overlap".into()));
        }
        for n in nodes.iter() {
            if !contains.contains_key(n) {
                return Err(Error::Malformed(format!("node `{n}` has no contains image")));
            }
        }
        for key in contains.keys() {
            if !nodes.contains(key) {
                return Err(Error::Malformed(format!("contains image for unknown node `{key}`")));
            }
        }
        for e in edges.iter() {
            if !neighbours.contains_key(e) {
                return Err(Error::Malformed(format!("edge `{e}` has no neighbour image")));
            }
        }
        for key in neighbours.keys() {
            if !edges.contains(key) {
                return Err(Error::Malformed(format!("neighbour image for unknown edge `{key}`")));
            }
        }
        Ok(CoalgGraph {
            signature,
            nodes,
            edges,
            contains: contains
                .into_iter()
                .map(|(k, v)| (k, v.canonicalize()))
                .collect(),
            neighbours: neighbours
                .into_iter()
                .map(|(k, v)| (k, v.canonicalize()))
                .collect(),
        })
    }

    /// Empty graph over a signature.
    pub fn empty(signature: Signature) -> Self {
        CoalgGraph {
            signature,
            nodes: FinSet::empty(),
            edges: FinSet::empty(),
            contains: BTreeMap::new(),
            neighbours: BTreeMap::new(),
        }
    }

    pub fn env(&self) -> CarrierEnv {
        CarrierEnv {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        }
    }

    pub fn node_image(&self, n: &AtomId) -> Result<&NestedTerm> {
        self.contains
            .get(n)
            .ok_or_else(|| Error::UnknownAtom(n.0.clone()))
    }

    pub fn st_image(&self, e: &AtomId) -> Result<&NestedTerm> {
        self.neighbours
            .get(e)
            .ok_or_else(|| Error::UnknownAtom(e.0.clone()))
    }
}

impl<'de> Deserialize<'de> for CoalgGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            signature: Signature,
            nodes: Vec<AtomId>,
            edges: Vec<AtomId>,
            #[serde(default)]
            contains: BTreeMap<AtomId, NestedTerm>,
            #[serde(default)]
            neighbours: BTreeMap<AtomId, NestedTerm>,
        }
        let raw = Raw::deserialize(d)?;
        CoalgGraph::new(
            raw.signature,
            FinSet::new(raw.nodes),
            FinSet::new(raw.edges),
            raw.contains,
            raw.neighbours,
        )
        .map_err(serde::de::Error::custom)
    }
}

/// One invalid structure-map entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationFailure {
    /// `"node"` or `"edge"`.
    pub kind: String,
    pub element: AtomId,
    pub image: NestedTerm,
}

/// Lists every carrier element whose structure-map image is not an element
/// of the signature functor. An empty report means the graph is valid.
pub fn validate_graph(g: &CoalgGraph) -> Vec<ValidationFailure> {
    let env = g.env();
    let mut out = Vec::new();
    for n in g.nodes.iter() {
        let t = &g.contains[n];
        if !element_of(&g.signature.node_f, &env, t) {
            out.push(ValidationFailure {
                kind: "node".into(),
                element: n.clone(),
                image: t.clone(),
            });
        }
    }
    for e in g.edges.iter() {
        let t = &g.neighbours[e];
        if !element_of(&g.signature.st_f, &env, t) {
            out.push(ValidationFailure {
                kind: "edge".into(),
                element: e.clone(),
                image: t.clone(),
            });
        }
    }
    out
}

/// A pair of carrier maps between two coalgebraic graphs. Commutation of
/// the structure squares is checked by [`check_morphism`], not assumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMorphism {
    pub src: CoalgGraph,
    pub dst: CoalgGraph,
    pub on: SortedFunction,
}

/// Serialized form of a morphism: just the two assignment tables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct MorphismTables {
    #[serde(default)]
    pub nodes: BTreeMap<AtomId, AtomId>,
    #[serde(default)]
    pub edges: BTreeMap<AtomId, AtomId>,
}

impl GraphMorphism {
    pub fn new(src: CoalgGraph, dst: CoalgGraph, on: SortedFunction) -> Result<Self> {
        if on.on_nodes.dom != src.nodes
            || on.on_nodes.cod != dst.nodes
            || on.on_edges.dom != src.edges
            || on.on_edges.cod != dst.edges
        {
            return Err(Error::Malformed(
                "morphism components do not match the graph carriers".into(),
            ));
        }
        Ok(GraphMorphism { src, dst, on })
    }

    pub fn from_tables(src: CoalgGraph, dst: CoalgGraph, tables: &MorphismTables) -> Result<Self> {
        let on_nodes = FinFunction::new(src.nodes.clone(), dst.nodes.clone(), tables.nodes.clone())?;
        let on_edges = FinFunction::new(src.edges.clone(), dst.edges.clone(), tables.edges.clone())?;
        GraphMorphism::new(src, dst, SortedFunction::new(on_nodes, on_edges))
    }

    pub fn tables(&self) -> MorphismTables {
        MorphismTables {
            nodes: self.on.on_nodes.map.clone(),
            edges: self.on.on_edges.map.clone(),
        }
    }

    pub fn identity(g: &CoalgGraph) -> Self {
        GraphMorphism {
            src: g.clone(),
            dst: g.clone(),
            on: SortedFunction::identity(&g.env()),
        }
    }

    pub fn is_injective(&self) -> bool {
        self.on.is_injective()
    }

    pub fn compose(outer: &GraphMorphism, inner: &GraphMorphism) -> Result<GraphMorphism> {
        if inner.dst != outer.src {
            return Err(Error::DomainMismatch(
                "morphisms do not chain: dst of the first differs from src of the second".into(),
            ));
        }
        GraphMorphism::new(
            inner.src.clone(),
            outer.dst.clone(),
            SortedFunction::compose(&outer.on, &inner.on)?,
        )
    }
}

/// True iff both structure squares commute elementwise:
/// `node_f(f)(node_src(n)) = node_dst(f(n))` and likewise for `st`.
pub fn check_morphism(m: &GraphMorphism) -> Result<bool> {
    if m.src.signature != m.dst.signature {
        return Err(Error::SignatureMismatch(
            "source and target signatures differ".into(),
        ));
    }
    Ok(morphism_witness(m)?.is_none())
}

/// First element on which a square fails, if any.
pub fn morphism_witness(m: &GraphMorphism) -> Result<Option<(String, AtomId)>> {
    let sig = &m.src.signature;
    for n in m.src.nodes.iter() {
        let via_map = map_element(&sig.node_f, &m.on, &m.src.contains[n]);
        let direct = &m.dst.contains[m.on.on_nodes.apply(n)?];
        match via_map {
            Ok(t) if &t == direct => {}
            _ => return Ok(Some(("node".into(), n.clone()))),
        }
    }
    for e in m.src.edges.iter() {
        let via_map = map_element(&sig.st_f, &m.on, &m.src.neighbours[e]);
        let direct = &m.dst.neighbours[m.on.on_edges.apply(e)?];
        match via_map {
            Ok(t) if &t == direct => {}
            _ => return Ok(Some(("edge".into(), e.clone()))),
        }
    }
    Ok(None)
}

/// Least fixpoint of the neighbour recursion: `st+(e)` collects the node
/// atoms reachable from `st(e)`, following edge references through the
/// current table. Self-referential edges contribute their other neighbours
/// and then stabilise.
pub fn flatten(g: &CoalgGraph) -> BTreeMap<AtomId, BTreeSet<AtomId>> {
    let mut table: BTreeMap<AtomId, BTreeSet<AtomId>> = g
        .edges
        .iter()
        .map(|e| (e.clone(), BTreeSet::new()))
        .collect();
    loop {
        let mut changed = false;
        for e in g.edges.iter() {
            let mut next = BTreeSet::new();
            collect_flat(&g.neighbours[e], g, &table, &mut next);
            if next != table[e] {
                table.insert(e.clone(), next);
                changed = true;
            }
        }
        if !changed {
            return table;
        }
    }
}

fn collect_flat(
    t: &NestedTerm,
    g: &CoalgGraph,
    table: &BTreeMap<AtomId, BTreeSet<AtomId>>,
    out: &mut BTreeSet<AtomId>,
) {
    match t {
        NestedTerm::Atom(a) => {
            if g.nodes.contains(a) {
                out.insert(a.clone());
            } else if let Some(flat) = table.get(a) {
                out.extend(flat.iter().cloned());
            }
        }
        NestedTerm::Set(xs) | NestedTerm::Seq(xs) => {
            for x in xs {
                collect_flat(x, g, table, out);
            }
        }
        NestedTerm::Pair(a, b) => {
            collect_flat(a, g, table, out);
            collect_flat(b, g, table, out);
        }
        NestedTerm::Unit => {}
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeProperties {
    /// The contains map is injective.
    pub unique: bool,
    /// Fixed points `node(n) = n`.
    pub atoms: BTreeSet<AtomId>,
    /// Nodes with a set-valued contains image.
    pub containers: BTreeSet<AtomId>,
    pub well_founded: bool,
    pub hierarchical: bool,
}

/// Node properties of the contains map. See [`node_properties_of_map`] for
/// the underlying per-map computation (used again for multi-hierarchies).
pub fn node_properties(g: &CoalgGraph) -> NodeProperties {
    let base = base_atoms(&g.signature.node_f, g);
    node_properties_of_map(&g.nodes, &g.contains, &base)
}

/// Atoms a structure-map functor may mention, by its sorts.
pub fn base_atoms(expr: &FunctorExpr, g: &CoalgGraph) -> BTreeSet<AtomId> {
    let (uses_n, uses_e) = expr.sorts();
    let mut base = BTreeSet::new();
    if uses_n {
        base.extend(g.nodes.iter().cloned());
    }
    if uses_e {
        base.extend(g.edges.iter().cloned());
    }
    base
}

/// The node-property computation over an explicit contains table.
///
/// Well-foundedness is the closure condition: a member of a contains image
/// is either a base atom or itself the image of some node, recursively.
/// The hierarchy condition applies to container nodes only; atoms are
/// exempt (a fixed point trivially overlaps its own contents).
pub fn node_properties_of_map(
    nodes: &FinSet,
    contains: &BTreeMap<AtomId, NestedTerm>,
    base: &BTreeSet<AtomId>,
) -> NodeProperties {
    let images: BTreeSet<&NestedTerm> = contains.values().collect();
    let unique = images.len() == contains.len();
    let atoms: BTreeSet<AtomId> = nodes
        .iter()
        .filter(|n| contains.get(*n) == Some(&NestedTerm::Atom((*n).clone())))
        .cloned()
        .collect();
    let containers: BTreeSet<AtomId> = nodes
        .iter()
        .filter(|n| contains.get(*n).map(NestedTerm::is_set).unwrap_or(false))
        .cloned()
        .collect();

    let grounded = |member: &NestedTerm| -> bool {
        match member {
            NestedTerm::Atom(a) => base.contains(a),
            _ => images.contains(member),
        }
    };
    let well_founded = images.iter().all(|img| match img.set_members() {
        Some(members) => members.iter().all(grounded),
        None => true,
    });

    let mut hierarchical = true;
    let conts: Vec<&AtomId> = containers.iter().collect();
    'outer: for (i, n) in conts.iter().enumerate() {
        let xs: BTreeSet<&NestedTerm> = contains[*n].set_members().unwrap().iter().collect();
        for n2 in conts.iter().skip(i + 1) {
            let ys = contains[*n2].set_members().unwrap();
            if ys.iter().any(|y| xs.contains(y)) {
                hierarchical = false;
                break 'outer;
            }
        }
    }

    NodeProperties {
        unique,
        atoms,
        containers,
        well_founded,
        hierarchical,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeProperties {
    /// Edges whose neighbour image is a plain set of nodes.
    pub atomic_edges: BTreeSet<AtomId>,
    /// Every atom mentioned by a neighbour image resolves to a node or an
    /// edge, so the flattening `st+` is total.
    pub node_based: bool,
    /// Node-based, and flattening only reaches atomic nodes.
    pub atomic: bool,
}

pub fn edge_properties(g: &CoalgGraph) -> EdgeProperties {
    let atomic_edges: BTreeSet<AtomId> = g
        .edges
        .iter()
        .filter(|e| match g.neighbours[*e].set_members() {
            Some(xs) => xs
                .iter()
                .all(|x| matches!(x, NestedTerm::Atom(a) if g.nodes.contains(a))),
            None => false,
        })
        .cloned()
        .collect();
    let node_based = g.edges.iter().all(|e| {
        atoms_of(&g.neighbours[e])
            .iter()
            .all(|a| g.nodes.contains(a) || g.edges.contains(a))
    });
    let av = node_properties(g).atoms;
    let atomic = node_based
        && !g.edges.is_empty()
        && flatten(g).values().all(|flat| flat.iter().all(|n| av.contains(n)));
    EdgeProperties {
        atomic_edges,
        node_based,
        atomic,
    }
}

/// Searches for an isomorphism between two graphs over the same signature:
/// bijective on both carriers with commuting squares. Backtracking with a
/// shape filter; meant for desk-scale carriers.
pub fn find_isomorphism(g1: &CoalgGraph, g2: &CoalgGraph) -> Option<GraphMorphism> {
    if g1.signature != g2.signature
        || g1.nodes.len() != g2.nodes.len()
        || g1.edges.len() != g2.edges.len()
    {
        return None;
    }
    let order = assignment_order(g1);
    let mut node_map: BTreeMap<AtomId, AtomId> = BTreeMap::new();
    let mut edge_map: BTreeMap<AtomId, AtomId> = BTreeMap::new();
    if !assign(g1, g2, &order, 0, &mut node_map, &mut edge_map) {
        return None;
    }
    let on = SortedFunction::new(
        FinFunction::new(g1.nodes.clone(), g2.nodes.clone(), node_map).ok()?,
        FinFunction::new(g1.edges.clone(), g2.edges.clone(), edge_map).ok()?,
    );
    GraphMorphism::new(g1.clone(), g2.clone(), on).ok()
}

pub fn isomorphic(g1: &CoalgGraph, g2: &CoalgGraph) -> bool {
    find_isomorphism(g1, g2).is_some()
}

#[derive(Clone, Copy, PartialEq)]
enum Sort {
    Node,
    Edge,
}

/// Static assignment order: repeatedly pick the element completing the most
/// structure-map supports, so commutation checks fire early.
fn assignment_order(g: &CoalgGraph) -> Vec<(Sort, AtomId)> {
    let mut pending: Vec<(Sort, AtomId)> = g
        .nodes
        .iter()
        .map(|n| (Sort::Node, n.clone()))
        .chain(g.edges.iter().map(|e| (Sort::Edge, e.clone())))
        .collect();
    let supports: Vec<BTreeSet<AtomId>> = pending
        .iter()
        .map(|(sort, x)| {
            let term = match sort {
                Sort::Node => &g.contains[x],
                Sort::Edge => &g.neighbours[x],
            };
            let mut s = atoms_of(term);
            s.insert(x.clone());
            s.retain(|a| g.nodes.contains(a) || g.edges.contains(a));
            s
        })
        .collect();
    let mut assigned: BTreeSet<AtomId> = BTreeSet::new();
    let mut order = Vec::new();
    while !pending.is_empty() {
        let best_idx = pending
            .iter()
            .enumerate()
            .map(|(i, (_, x))| {
                let completes = supports
                    .iter()
                    .filter(|s| {
                        s.contains(x) && s.iter().all(|a| assigned.contains(a) || a == x)
                    })
                    .count();
                (i, completes)
            })
            .max_by(|(i, c), (j, d)| c.cmp(d).then(j.cmp(i)))
            .map(|(i, _)| i)
            .unwrap();
        let (sort, x) = pending.remove(best_idx);
        assigned.insert(x.clone());
        order.push((sort, x));
    }
    order
}

fn skeleton(t: &NestedTerm, g: &CoalgGraph) -> NestedTerm {
    match t {
        NestedTerm::Atom(a) => {
            if g.nodes.contains(a) {
                NestedTerm::atom("#n")
            } else if g.edges.contains(a) {
                NestedTerm::atom("#e")
            } else {
                NestedTerm::atom("#x")
            }
        }
        NestedTerm::Set(xs) => crate::term::make_set(xs.iter().map(|x| skeleton(x, g))),
        NestedTerm::Pair(a, b) => NestedTerm::pair(skeleton(a, g), skeleton(b, g)),
        NestedTerm::Seq(xs) => NestedTerm::Seq(xs.iter().map(|x| skeleton(x, g)).collect()),
        NestedTerm::Unit => NestedTerm::Unit,
    }
}

fn assign(
    g1: &CoalgGraph,
    g2: &CoalgGraph,
    order: &[(Sort, AtomId)],
    pos: usize,
    node_map: &mut BTreeMap<AtomId, AtomId>,
    edge_map: &mut BTreeMap<AtomId, AtomId>,
) -> bool {
    if pos == order.len() {
        return true;
    }
    let (sort, x) = &order[pos];
    let (candidates, term1): (Vec<AtomId>, &NestedTerm) = match sort {
        Sort::Node => (
            g2.nodes
                .iter()
                .filter(|y| !node_map.values().any(|v| &v == y))
                .cloned()
                .collect(),
            &g1.contains[x],
        ),
        Sort::Edge => (
            g2.edges
                .iter()
                .filter(|y| !edge_map.values().any(|v| &v == y))
                .cloned()
                .collect(),
            &g1.neighbours[x],
        ),
    };
    let shape1 = skeleton(term1, g1);
    for y in candidates {
        let term2 = match sort {
            Sort::Node => &g2.contains[&y],
            Sort::Edge => &g2.neighbours[&y],
        };
        if skeleton(term2, g2) != shape1 {
            continue;
        }
        match sort {
            Sort::Node => node_map.insert(x.clone(), y.clone()),
            Sort::Edge => edge_map.insert(x.clone(), y.clone()),
        };
        if consistent_so_far(g1, g2, node_map, edge_map)
            && assign(g1, g2, order, pos + 1, node_map, edge_map)
        {
            return true;
        }
        match sort {
            Sort::Node => node_map.remove(x),
            Sort::Edge => edge_map.remove(x),
        };
    }
    false
}

/// Checks every structure square whose support is fully assigned.
fn consistent_so_far(
    g1: &CoalgGraph,
    g2: &CoalgGraph,
    node_map: &BTreeMap<AtomId, AtomId>,
    edge_map: &BTreeMap<AtomId, AtomId>,
) -> bool {
    for (n, y) in node_map {
        let t = &g1.contains[n];
        if atoms_of(t)
            .iter()
            .all(|a| node_map.contains_key(a) || edge_map.contains_key(a))
        {
            match rename_term(t, node_map, edge_map) {
                Some(mapped) if mapped == g2.contains[y] => {}
                _ => return false,
            }
        }
    }
    for (e, y) in edge_map {
        let t = &g1.neighbours[e];
        if atoms_of(t)
            .iter()
            .all(|a| node_map.contains_key(a) || edge_map.contains_key(a))
        {
            match rename_term(t, node_map, edge_map) {
                Some(mapped) if mapped == g2.neighbours[y] => {}
                _ => return false,
            }
        }
    }
    true
}

pub(crate) fn rename_term(
    t: &NestedTerm,
    node_map: &BTreeMap<AtomId, AtomId>,
    edge_map: &BTreeMap<AtomId, AtomId>,
) -> Option<NestedTerm> {
    Some(match t {
        NestedTerm::Atom(a) => {
            NestedTerm::Atom(node_map.get(a).or_else(|| edge_map.get(a))?.clone())
        }
        NestedTerm::Set(xs) => crate::term::make_set(
            xs.iter()
                .map(|x| rename_term(x, node_map, edge_map))
                .collect::<Option<Vec<_>>>()?,
        ),
        NestedTerm::Pair(a, b) => NestedTerm::pair(
            rename_term(a, node_map, edge_map)?,
            rename_term(b, node_map, edge_map)?,
        ),
        NestedTerm::Seq(xs) => NestedTerm::Seq(
            xs.iter()
                .map(|x| rename_term(x, node_map, edge_map))
                .collect::<Option<Vec<_>>>()?,
        ),
        NestedTerm::Unit => NestedTerm::Unit,
    })
}
