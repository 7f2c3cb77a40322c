//! Categorical operations on coalgebraic graphs: pullbacks along injective
//! homomorphisms, pushouts along the class M of injective morphisms, the
//! vertical weak Van Kampen cube check, and the PO-PB-compatibility suite
//! for M.
//!
//! Pullbacks and pushouts are constructed on the underlying carriers; the
//! structure maps of the apex are induced via `hbar` (pullback) or
//! transported along the injections (pushout). Every returned
//! projection/injection is verified to be a homomorphism before the
//! construction is handed back, so a signature that fails to preserve the
//! relevant pullback surfaces as an error instead of an invalid graph.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{self, pair_atom, FinFunction};
use crate::functor::{map_element, SortedFunction};
use crate::graph::{check_morphism, validate_graph, CoalgGraph, GraphMorphism};
use crate::limits::{inverse_hbar, CarrierPullback, Cospan};
use crate::term::{AtomId, NestedTerm};

fn require_shared_signature(a: &CoalgGraph, b: &CoalgGraph) -> Result<()> {
    if a.signature != b.signature {
        return Err(Error::SignatureMismatch(
            "graphs must share a signature".into(),
        ));
    }
    Ok(())
}

fn require_homomorphism(name: &str, m: &GraphMorphism) -> Result<()> {
    if !check_morphism(m)? {
        return Err(Error::Malformed(format!("{name} is not a homomorphism")));
    }
    Ok(())
}

/// Pullback of `B -f-> D <-g- C` in the coalgebra category; `g` must be
/// injective. The apex structure maps are induced through `hbar`, which is
/// exactly where pullback preservation of the signature functors enters:
/// if a structure map cannot be induced, the construction fails.
pub fn coalg_pullback(
    f: &GraphMorphism,
    g: &GraphMorphism,
) -> Result<(CoalgGraph, GraphMorphism, GraphMorphism)> {
    require_shared_signature(&f.src, &g.src)?;
    require_shared_signature(&f.src, &f.dst)?;
    if f.dst != g.dst {
        return Err(Error::CodomainMismatch(
            "pullback legs must share a target graph".into(),
        ));
    }
    if !g.is_injective() {
        return Err(Error::NonInjectiveLeg("pullback needs g injective".into()));
    }
    require_homomorphism("f", f)?;
    require_homomorphism("g", g)?;
    let sig = f.src.signature.clone();
    let cs = Cospan::new(f.on.clone(), g.on.clone())?;
    let pb = CarrierPullback::of(&cs)?;

    let mut contains = BTreeMap::new();
    for a in pb.apex.nodes.iter() {
        let b = pb.to_b.on_nodes.apply(a)?;
        let c = pb.to_c.on_nodes.apply(a)?;
        let image = (f.src.contains[b].clone(), g.src.contains[c].clone());
        contains.insert(a.clone(), inverse_hbar(&sig.node_f, &cs, &image)?);
    }
    let mut neighbours = BTreeMap::new();
    for a in pb.apex.edges.iter() {
        let b = pb.to_b.on_edges.apply(a)?;
        let c = pb.to_c.on_edges.apply(a)?;
        let image = (f.src.neighbours[b].clone(), g.src.neighbours[c].clone());
        neighbours.insert(a.clone(), inverse_hbar(&sig.st_f, &cs, &image)?);
    }
    let apex = CoalgGraph::new(
        sig,
        pb.apex.nodes.clone(),
        pb.apex.edges.clone(),
        contains,
        neighbours,
    )?;
    if !validate_graph(&apex).is_empty() {
        return Err(Error::StructureClash(
            "induced pullback structure maps are not signature elements".into(),
        ));
    }
    let pi_b = GraphMorphism::new(apex.clone(), f.src.clone(), pb.to_b)?;
    let pi_c = GraphMorphism::new(apex.clone(), g.src.clone(), pb.to_c)?;
    for (name, m) in [("pi_B", &pi_b), ("pi_C", &pi_c)] {
        if !check_morphism(m)? {
            return Err(Error::StructureClash(format!(
                "pullback projection {name} is not a homomorphism"
            )));
        }
    }
    Ok((apex, pi_b, pi_c))
}

fn transported_insert(
    into: &mut BTreeMap<AtomId, NestedTerm>,
    key: AtomId,
    value: NestedTerm,
) -> Result<()> {
    match into.get(&key) {
        None => {
            into.insert(key, value);
            Ok(())
        }
        Some(existing) if *existing == value => Ok(()),
        Some(existing) => Err(Error::StructureClash(format!(
            "`{key}` receives both {existing} and {value}"
        ))),
    }
}

/// Pushout of `B <-f- A -g-> C` in the coalgebra category; `f` must be in
/// M (injective). Structure maps are transported along the injections; the
/// B side is written first, and any disagreement on a glued element is a
/// [`Error::StructureClash`] (impossible when the legs are homomorphisms).
pub fn coalg_pushout(
    f: &GraphMorphism,
    g: &GraphMorphism,
) -> Result<(CoalgGraph, GraphMorphism, GraphMorphism)> {
    require_shared_signature(&f.dst, &g.dst)?;
    require_shared_signature(&f.src, &f.dst)?;
    if f.src != g.src {
        return Err(Error::DomainMismatch(
            "pushout legs must share a source graph".into(),
        ));
    }
    if !f.is_injective() {
        return Err(Error::NotInM("pushout needs f injective".into()));
    }
    require_homomorphism("f", f)?;
    require_homomorphism("g", g)?;
    let sig = f.src.signature.clone();
    let (dn, in_b_n, in_c_n) = finset::pushout(&f.on.on_nodes, &g.on.on_nodes)?;
    let (de, in_b_e, in_c_e) = finset::pushout(&f.on.on_edges, &g.on.on_edges)?;
    let in_b = SortedFunction::new(in_b_n, in_b_e);
    let in_c = SortedFunction::new(in_c_n, in_c_e);

    let mut contains = BTreeMap::new();
    for b in f.dst.nodes.iter() {
        transported_insert(
            &mut contains,
            in_b.on_nodes.apply(b)?.clone(),
            map_element(&sig.node_f, &in_b, &f.dst.contains[b])?,
        )?;
    }
    for c in g.dst.nodes.iter() {
        transported_insert(
            &mut contains,
            in_c.on_nodes.apply(c)?.clone(),
            map_element(&sig.node_f, &in_c, &g.dst.contains[c])?,
        )?;
    }
    let mut neighbours = BTreeMap::new();
    for b in f.dst.edges.iter() {
        transported_insert(
            &mut neighbours,
            in_b.on_edges.apply(b)?.clone(),
            map_element(&sig.st_f, &in_b, &f.dst.neighbours[b])?,
        )?;
    }
    for c in g.dst.edges.iter() {
        transported_insert(
            &mut neighbours,
            in_c.on_edges.apply(c)?.clone(),
            map_element(&sig.st_f, &in_c, &g.dst.neighbours[c])?,
        )?;
    }
    let apex = CoalgGraph::new(sig, dn, de, contains, neighbours)?;
    let in_b = GraphMorphism::new(f.dst.clone(), apex.clone(), in_b)?;
    let in_c = GraphMorphism::new(g.dst.clone(), apex.clone(), in_c)?;
    for (name, m) in [("in_B", &in_b), ("in_C", &in_c)] {
        if !check_morphism(m)? {
            return Err(Error::StructureClash(format!(
                "pushout injection {name} is not a homomorphism"
            )));
        }
    }
    Ok((apex, in_b, in_c))
}

/// The induced morphism into a pullback apex built by [`coalg_pullback`]:
/// `x` is sent to the pair-atom `(u(x), v(x))`. Fails if some pair is not
/// matched or the result is not a homomorphism.
pub fn induced_into_pullback(
    apex: &CoalgGraph,
    u: &GraphMorphism,
    v: &GraphMorphism,
) -> Result<GraphMorphism> {
    if u.src != v.src {
        return Err(Error::DomainMismatch(
            "induced morphism legs must share a source".into(),
        ));
    }
    let x = &u.src;
    let mut nodes = BTreeMap::new();
    for n in x.nodes.iter() {
        let p = pair_atom(u.on.on_nodes.apply(n)?, v.on.on_nodes.apply(n)?);
        if !apex.nodes.contains(&p) {
            return Err(Error::NotInPullback(format!("node pair {p} is unmatched")));
        }
        nodes.insert(n.clone(), p);
    }
    let mut edges = BTreeMap::new();
    for e in x.edges.iter() {
        let p = pair_atom(u.on.on_edges.apply(e)?, v.on.on_edges.apply(e)?);
        if !apex.edges.contains(&p) {
            return Err(Error::NotInPullback(format!("edge pair {p} is unmatched")));
        }
        edges.insert(e.clone(), p);
    }
    let on = SortedFunction::new(
        FinFunction::new(x.nodes.clone(), apex.nodes.clone(), nodes)?,
        FinFunction::new(x.edges.clone(), apex.edges.clone(), edges)?,
    );
    let m = GraphMorphism::new(x.clone(), apex.clone(), on)?;
    require_homomorphism("induced pullback morphism", &m)?;
    Ok(m)
}

/// Is the candidate square `A -f-> B -in_b-> apex`, `A -g-> C -in_c-> apex`
/// a pushout? Decided by comparing against the canonical pushout via the
/// determined comparison morphism.
pub fn is_pushout(
    f: &GraphMorphism,
    g: &GraphMorphism,
    in_b: &GraphMorphism,
    in_c: &GraphMorphism,
) -> Result<bool> {
    if in_b.dst != in_c.dst || in_b.src != f.dst || in_c.src != g.dst {
        return Ok(false);
    }
    if !check_morphism(in_b)? || !check_morphism(in_c)? {
        return Ok(false);
    }
    let left = GraphMorphism::compose(in_b, f)?;
    let right = GraphMorphism::compose(in_c, g)?;
    if left.on != right.on {
        return Ok(false);
    }
    let apex = &in_b.dst;
    let (po, j_b, j_c) = coalg_pushout(f, g)?;
    // determined comparison po -> apex
    let mut nodes: BTreeMap<AtomId, AtomId> = BTreeMap::new();
    let mut edges: BTreeMap<AtomId, AtomId> = BTreeMap::new();
    let feed = |class_map: &mut BTreeMap<AtomId, AtomId>,
                    j: &FinFunction,
                    target: &FinFunction|
     -> Result<bool> {
        for (x, class) in &j.map {
            let y = target.apply(x)?.clone();
            if let Some(prev) = class_map.get(class) {
                if *prev != y {
                    return Ok(false);
                }
            } else {
                class_map.insert(class.clone(), y);
            }
        }
        Ok(true)
    };
    if !feed(&mut nodes, &j_b.on.on_nodes, &in_b.on.on_nodes)?
        || !feed(&mut nodes, &j_c.on.on_nodes, &in_c.on.on_nodes)?
        || !feed(&mut edges, &j_b.on.on_edges, &in_b.on.on_edges)?
        || !feed(&mut edges, &j_c.on.on_edges, &in_c.on.on_edges)?
    {
        return Ok(false);
    }
    if nodes.len() != po.nodes.len() || edges.len() != po.edges.len() {
        return Ok(false);
    }
    let on = SortedFunction::new(
        match FinFunction::new(po.nodes.clone(), apex.nodes.clone(), nodes) {
            Ok(f) => f,
            Err(_) => return Ok(false),
        },
        match FinFunction::new(po.edges.clone(), apex.edges.clone(), edges) {
            Ok(f) => f,
            Err(_) => return Ok(false),
        },
    );
    // bijective comparison that is also a homomorphism
    let bijective = on.is_injective()
        && on.on_nodes.image().len() == apex.nodes.len()
        && on.on_edges.image().len() == apex.edges.len();
    if !bijective {
        return Ok(false);
    }
    let phi = GraphMorphism::new(po, apex.clone(), on)?;
    check_morphism(&phi)
}

/// Is the candidate square with apex legs `to_b`, `to_c` a pullback of
/// `B -f-> D <-g- C` (`g` injective)?
pub fn is_pullback(
    f: &GraphMorphism,
    g: &GraphMorphism,
    to_b: &GraphMorphism,
    to_c: &GraphMorphism,
) -> Result<bool> {
    if to_b.src != to_c.src || to_b.dst != f.src || to_c.dst != g.src {
        return Ok(false);
    }
    if !check_morphism(to_b)? || !check_morphism(to_c)? {
        return Ok(false);
    }
    let left = GraphMorphism::compose(f, to_b)?;
    let right = GraphMorphism::compose(g, to_c)?;
    if left.on != right.on {
        return Ok(false);
    }
    let (pb, _, _) = coalg_pullback(f, g)?;
    let phi = match induced_into_pullback(&pb, to_b, to_c) {
        Ok(m) => m,
        Err(Error::NotInPullback(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    Ok(phi.on.is_injective()
        && phi.on.on_nodes.image().len() == pb.nodes.len()
        && phi.on.on_edges.image().len() == pb.edges.len())
}

/// A commutative cube: a pushout bottom square, a top square, and four
/// vertical morphisms in M connecting them.
///
/// Square orientation: `A -m-> B`, `A -f-> C`, `B -g-> D`, `C -n-> D`;
/// primes for the top. Verticals `va: A'->A` … `vd: D'->D`.
#[derive(Debug, Clone)]
pub struct VkCube {
    pub m_top: GraphMorphism,
    pub f_top: GraphMorphism,
    pub g_top: GraphMorphism,
    pub n_top: GraphMorphism,
    pub m_bot: GraphMorphism,
    pub f_bot: GraphMorphism,
    pub g_bot: GraphMorphism,
    pub n_bot: GraphMorphism,
    pub va: GraphMorphism,
    pub vb: GraphMorphism,
    pub vc: GraphMorphism,
    pub vd: GraphMorphism,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VkReport {
    pub top_is_pushout: bool,
    pub fronts_are_pullbacks: bool,
    pub biconditional_holds: bool,
}

impl VkCube {
    /// Checks every cube precondition; names the first violated one.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::MalformedCube(msg.into()));
        // endpoints
        if self.m_top.src != self.f_top.src
            || self.m_top.dst != self.g_top.src
            || self.f_top.dst != self.n_top.src
            || self.g_top.dst != self.n_top.dst
        {
            return fail("top square endpoints do not line up");
        }
        if self.m_bot.src != self.f_bot.src
            || self.m_bot.dst != self.g_bot.src
            || self.f_bot.dst != self.n_bot.src
            || self.g_bot.dst != self.n_bot.dst
        {
            return fail("bottom square endpoints do not line up");
        }
        if self.va.src != self.m_top.src
            || self.va.dst != self.m_bot.src
            || self.vb.src != self.m_top.dst
            || self.vb.dst != self.m_bot.dst
            || self.vc.src != self.f_top.dst
            || self.vc.dst != self.f_bot.dst
            || self.vd.src != self.g_top.dst
            || self.vd.dst != self.g_bot.dst
        {
            return fail("vertical morphisms do not connect the squares");
        }
        for (name, m) in [
            ("m'", &self.m_top),
            ("f'", &self.f_top),
            ("g'", &self.g_top),
            ("n'", &self.n_top),
            ("m", &self.m_bot),
            ("f", &self.f_bot),
            ("g", &self.g_bot),
            ("n", &self.n_bot),
            ("a", &self.va),
            ("b", &self.vb),
            ("c", &self.vc),
            ("d", &self.vd),
        ] {
            if !check_morphism(m)? {
                return Err(Error::MalformedCube(format!("{name} is not a homomorphism")));
            }
        }
        for (name, m) in [("a", &self.va), ("b", &self.vb), ("c", &self.vc), ("d", &self.vd)] {
            if !m.is_injective() {
                return Err(Error::MalformedCube(format!("vertical {name} is not in M")));
            }
        }
        if !self.m_bot.is_injective() {
            return fail("bottom m is not in M");
        }
        let commutes = |p: &GraphMorphism, q: &GraphMorphism, r: &GraphMorphism, s: &GraphMorphism| -> Result<bool> {
            Ok(GraphMorphism::compose(q, p)?.on == GraphMorphism::compose(s, r)?.on)
        };
        if !commutes(&self.m_top, &self.g_top, &self.f_top, &self.n_top)? {
            return fail("top square does not commute");
        }
        if !commutes(&self.m_bot, &self.g_bot, &self.f_bot, &self.n_bot)? {
            return fail("bottom square does not commute");
        }
        if !commutes(&self.m_top, &self.vb, &self.va, &self.m_bot)? {
            return fail("back m face does not commute");
        }
        if !commutes(&self.f_top, &self.vc, &self.va, &self.f_bot)? {
            return fail("back f face does not commute");
        }
        if !commutes(&self.g_top, &self.vd, &self.vb, &self.g_bot)? {
            return fail("front g face does not commute");
        }
        if !commutes(&self.n_top, &self.vd, &self.vc, &self.n_bot)? {
            return fail("front n face does not commute");
        }
        if !is_pushout(&self.m_bot, &self.f_bot, &self.g_bot, &self.n_bot)? {
            return fail("bottom square is not a pushout");
        }
        if !is_pullback(&self.m_bot, &self.vb, &self.va, &self.m_top)? {
            return fail("back m face is not a pullback");
        }
        if !is_pullback(&self.f_bot, &self.vc, &self.va, &self.f_top)? {
            return fail("back f face is not a pullback");
        }
        Ok(())
    }

    /// The standard cube over a bottom pushout: pull the bottom back along
    /// an injective `d : D' -> D` and induce the rest.
    pub fn by_pulling_back(
        m: &GraphMorphism,
        f: &GraphMorphism,
        g: &GraphMorphism,
        n: &GraphMorphism,
        d: &GraphMorphism,
    ) -> Result<VkCube> {
        let diag = GraphMorphism::compose(g, m)?;
        let (a_top, va, a_to_dp) = coalg_pullback(&diag, d)?;
        let (b_top, vb, g_top) = coalg_pullback(g, d)?;
        let (c_top, vc, n_top) = coalg_pullback(n, d)?;
        let m_top = induced_into_pullback(
            &b_top,
            &GraphMorphism::compose(m, &va)?,
            &a_to_dp,
        )?;
        let f_top = induced_into_pullback(
            &c_top,
            &GraphMorphism::compose(f, &va)?,
            &a_to_dp,
        )?;
        let _ = (&a_top, &c_top);
        Ok(VkCube {
            m_top,
            f_top,
            g_top,
            n_top,
            m_bot: m.clone(),
            f_bot: f.clone(),
            g_bot: g.clone(),
            n_bot: n.clone(),
            va,
            vb,
            vc,
            vd: d.clone(),
        })
    }
}

/// Evaluates the three flags of the vertical weak VK condition on a valid
/// cube: is the top a pushout, are the front faces pullbacks, and do the
/// two answers agree.
pub fn vk_cube_check(cube: &VkCube) -> Result<VkReport> {
    cube.validate()?;
    let top_is_pushout = is_pushout(&cube.m_top, &cube.f_top, &cube.g_top, &cube.n_top)?;
    let front_g = is_pullback(&cube.g_bot, &cube.vd, &cube.vb, &cube.g_top)?;
    let front_n = is_pullback(&cube.n_bot, &cube.vd, &cube.vc, &cube.n_top)?;
    let fronts_are_pullbacks = front_g && front_n;
    Ok(VkReport {
        top_is_pushout,
        fronts_are_pullbacks,
        biconditional_holds: top_is_pushout == fronts_are_pullbacks,
    })
}

/// Perturbs a valid cube by deleting one element of the front pullback
/// object `B'`: the element must be outside the image of `m'`, project
/// under `b` outside the image of `m`, and be mentioned by no structure
/// map, so the back faces stay pullbacks while the front `g` face stops
/// being one. Returns `None` when no such element exists.
pub fn break_front_face(cube: &VkCube) -> Option<VkCube> {
    let b_top = &cube.m_top.dst;
    let mentioned = |x: &AtomId| {
        b_top
            .contains
            .values()
            .chain(b_top.neighbours.values())
            .any(|t| crate::term::atoms_of(t).contains(x))
    };
    let edge_pick = b_top.edges.iter().find(|x| {
        !cube.m_top.on.on_edges.map.values().any(|v| &v == x)
            && !cube
                .m_bot
                .on
                .on_edges
                .map
                .values()
                .any(|v| v == &cube.vb.on.on_edges.map[*x])
            && !mentioned(x)
    });
    let node_pick = b_top.nodes.iter().find(|x| {
        !cube.m_top.on.on_nodes.map.values().any(|v| &v == x)
            && !cube
                .m_bot
                .on
                .on_nodes
                .map
                .values()
                .any(|v| v == &cube.vb.on.on_nodes.map[*x])
            && !mentioned(x)
    });
    let (is_edge, dropped) = match (edge_pick, node_pick) {
        (Some(e), _) => (true, e.clone()),
        (None, Some(n)) => (false, n.clone()),
        (None, None) => return None,
    };
    let keep = |x: &&AtomId| **x != dropped;
    let reduced = CoalgGraph::new(
        b_top.signature.clone(),
        crate::finset::FinSet::new(b_top.nodes.iter().filter(keep).cloned()),
        crate::finset::FinSet::new(b_top.edges.iter().filter(keep).cloned()),
        b_top
            .contains
            .iter()
            .filter(|(k, _)| **k != dropped)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
        b_top
            .neighbours
            .iter()
            .filter(|(k, _)| **k != dropped)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    )
    .ok()?;
    let restrict_src = |m: &GraphMorphism| -> Option<GraphMorphism> {
        let mut tables = m.tables();
        if is_edge {
            tables.edges.remove(&dropped);
        } else {
            tables.nodes.remove(&dropped);
        }
        GraphMorphism::from_tables(reduced.clone(), m.dst.clone(), &tables).ok()
    };
    let m_top = GraphMorphism::from_tables(
        cube.m_top.src.clone(),
        reduced.clone(),
        &cube.m_top.tables(),
    )
    .ok()?;
    Some(VkCube {
        m_top,
        vb: restrict_src(&cube.vb)?,
        g_top: restrict_src(&cube.g_top)?,
        ..cube.clone()
    })
}

/// One sample for the M-class compatibility suite.
pub enum MSample {
    /// `m : A -> B` in M with arbitrary `g : A -> C`; checks that the
    /// pushout of `m` along `g` is again in M.
    Span { m: GraphMorphism, g: GraphMorphism },
    /// `f : B -> D` arbitrary with `m : C -> D` in M; checks that the
    /// pullback of `m` along `f` is again in M.
    Cospan { f: GraphMorphism, m: GraphMorphism },
    /// Two composable M-morphisms; checks the composite is in M.
    Chain {
        first: GraphMorphism,
        second: GraphMorphism,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MClassReport {
    pub stable_under_pushout: bool,
    pub stable_under_pullback: bool,
    pub closed_under_composition: bool,
    pub contains_identities: bool,
    pub witnesses: Vec<String>,
}

/// Evaluates the PO-PB-compatibility clauses on each sample and aggregates.
pub fn m_class_suite(samples: &[MSample]) -> Result<MClassReport> {
    let mut report = MClassReport {
        stable_under_pushout: true,
        stable_under_pullback: true,
        closed_under_composition: true,
        contains_identities: true,
        witnesses: Vec::new(),
    };
    let check_identity = |g: &CoalgGraph, report: &mut MClassReport| {
        let id = GraphMorphism::identity(g);
        if !id.is_injective() || !check_morphism(&id).unwrap_or(false) {
            report.contains_identities = false;
            report.witnesses.push("identity morphism failed".into());
        }
    };
    for (i, sample) in samples.iter().enumerate() {
        match sample {
            MSample::Span { m, g } => {
                if !m.is_injective() {
                    return Err(Error::NotInM(format!("span sample {i}: m not injective")));
                }
                let (_, _, in_c) = coalg_pushout(m, g)?;
                if !in_c.is_injective() {
                    report.stable_under_pushout = false;
                    report
                        .witnesses
                        .push(format!("sample {i}: pushout of m along g left M"));
                }
                check_identity(&m.src, &mut report);
            }
            MSample::Cospan { f, m } => {
                if !m.is_injective() {
                    return Err(Error::NotInM(format!("cospan sample {i}: m not injective")));
                }
                let (_, pi_b, _) = coalg_pullback(f, m)?;
                if !pi_b.is_injective() {
                    report.stable_under_pullback = false;
                    report
                        .witnesses
                        .push(format!("sample {i}: pullback of m along f left M"));
                }
                check_identity(&f.src, &mut report);
            }
            MSample::Chain { first, second } => {
                if !first.is_injective() || !second.is_injective() {
                    return Err(Error::NotInM(format!("chain sample {i}: leg not injective")));
                }
                let composite = GraphMorphism::compose(second, first)?;
                if !composite.is_injective() || !check_morphism(&composite)? {
                    report.closed_under_composition = false;
                    report
                        .witnesses
                        .push(format!("sample {i}: composite left M"));
                }
                check_identity(&first.src, &mut report);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finset::FinSet;
    use crate::functor::parse_functor;
    use crate::graph::{isomorphic, MorphismTables};
    use crate::term::make_set;

    fn id(name: &str) -> AtomId {
        AtomId::new(name)
    }

    fn a(name: &str) -> NestedTerm {
        NestedTerm::atom(name)
    }

    /// A graph over (1, Pot(N)): plain hyperedges, trivial contains map.
    fn hyper(nodes: &[&str], edges: &[(&str, &[&str])]) -> CoalgGraph {
        let sig = crate::graph::Signature::new(
            parse_functor("1").unwrap(),
            parse_functor("Pot(N)").unwrap(),
        );
        let node_set = FinSet::from_names(nodes);
        let contains = node_set
            .iter()
            .map(|n| (n.clone(), NestedTerm::Unit))
            .collect();
        let neighbours = edges
            .iter()
            .map(|(e, ns)| (id(e), make_set(ns.iter().map(|n| a(n)))))
            .collect();
        CoalgGraph::new(
            sig,
            node_set,
            FinSet::new(edges.iter().map(|(e, _)| id(e))),
            contains,
            neighbours,
        )
        .unwrap()
    }

    fn inclusion(sub: &CoalgGraph, sup: &CoalgGraph) -> GraphMorphism {
        let tables = MorphismTables {
            nodes: sub.nodes.iter().map(|n| (n.clone(), n.clone())).collect(),
            edges: sub.edges.iter().map(|e| (e.clone(), e.clone())).collect(),
        };
        GraphMorphism::from_tables(sub.clone(), sup.clone(), &tables).unwrap()
    }

    #[test]
    fn pullback_along_identity_recovers_b() {
        let g = hyper(&["u", "v"], &[("e", &["u", "v"])]);
        let idm = GraphMorphism::identity(&g);
        let (apex, pi_b, _) = coalg_pullback(&idm, &idm).unwrap();
        assert!(isomorphic(&apex, &g));
        assert!(pi_b.is_injective());
    }

    #[test]
    fn pullback_of_subgraph_inclusions_is_their_intersection() {
        let d = hyper(
            &["u", "v", "w"],
            &[("e1", &["u", "v"]), ("e2", &["v", "w"]), ("e3", &["u"])],
        );
        let b = hyper(&["u", "v", "w"], &[("e1", &["u", "v"]), ("e2", &["v", "w"])]);
        let c = hyper(&["u", "v", "w"], &[("e2", &["v", "w"]), ("e3", &["u"])]);
        let (apex, _, _) = coalg_pullback(&inclusion(&b, &d), &inclusion(&c, &d)).unwrap();
        let expected = hyper(&["u", "v", "w"], &[("e2", &["v", "w"])]);
        assert!(isomorphic(&apex, &expected));
    }

    /// Pulling the matched pattern back over the interface embedding
    /// recovers the interface: the pullback of `m : L -> G` against
    /// `m∘l : K -> G` is `K` again.
    #[test]
    fn pullback_of_a_match_against_the_interface_recovers_it() {
        let host = crate::encodings::fixture("fig6.host").unwrap();
        let rule = crate::encodings::fixture_rule("fig6.rule").unwrap();
        let mat = &crate::dpo::find_matches(&rule, &host).unwrap()[0];
        let k_into_g = GraphMorphism::compose(mat, &rule.l).unwrap();
        let (apex, _, pi_k) = coalg_pullback(mat, &k_into_g).unwrap();
        assert!(isomorphic(&apex, &rule.interface));
        assert!(pi_k.is_injective());
    }

    #[test]
    fn pushout_along_identity_recovers_b() {
        let g = hyper(&["u", "v"], &[("e", &["u", "v"])]);
        let idm = GraphMorphism::identity(&g);
        let (apex, _, _) = coalg_pushout(&idm, &idm).unwrap();
        assert!(isomorphic(&apex, &g));
    }

    #[test]
    fn pushout_over_empty_interface_is_the_disjoint_union() {
        let sig = crate::graph::Signature::new(
            parse_functor("1").unwrap(),
            parse_functor("Pot(N)").unwrap(),
        );
        let empty = CoalgGraph::empty(sig);
        let b = hyper(&["u"], &[("e", &["u"])]);
        let c = hyper(&["v"], &[("k", &["v"])]);
        let f = GraphMorphism::new(
            empty.clone(),
            b.clone(),
            SortedFunction::new(
                FinFunction::new(FinSet::empty(), b.nodes.clone(), BTreeMap::new()).unwrap(),
                FinFunction::new(FinSet::empty(), b.edges.clone(), BTreeMap::new()).unwrap(),
            ),
        )
        .unwrap();
        let g = GraphMorphism::new(
            empty,
            c.clone(),
            SortedFunction::new(
                FinFunction::new(FinSet::empty(), c.nodes.clone(), BTreeMap::new()).unwrap(),
                FinFunction::new(FinSet::empty(), c.edges.clone(), BTreeMap::new()).unwrap(),
            ),
        )
        .unwrap();
        let (apex, _, _) = coalg_pushout(&f, &g).unwrap();
        assert_eq!(apex.nodes.len(), 2);
        assert_eq!(apex.edges.len(), 2);
        assert!(is_pushout(&f, &g, &coalg_pushout(&f, &g).unwrap().1, &coalg_pushout(&f, &g).unwrap().2).unwrap());
    }

    #[test]
    fn pushout_glues_along_the_interface() {
        let shared = hyper(&["s"], &[]);
        let b = hyper(&["s", "u"], &[("e", &["s", "u"])]);
        let c = hyper(&["s", "v"], &[("k", &["s", "v"])]);
        let f = inclusion(&shared, &b);
        let g = inclusion(&shared, &c);
        let (apex, in_b, in_c) = coalg_pushout(&f, &g).unwrap();
        assert_eq!(apex.nodes.len(), 3);
        assert_eq!(apex.edges.len(), 2);
        assert!(is_pushout(&f, &g, &in_b, &in_c).unwrap());
        // a non-pushout candidate: the disjoint union apex is too big
        let too_big = hyper(&["s", "s2", "u", "v"], &[("e", &["s", "u"]), ("k", &["s2", "v"])]);
        let wrong_in_b = inclusion(&b, &too_big);
        let tables = MorphismTables {
            nodes: [(id("s"), id("s2")), (id("v"), id("v"))].into_iter().collect(),
            edges: [(id("k"), id("k"))].into_iter().collect(),
        };
        let wrong_in_c = GraphMorphism::from_tables(c.clone(), too_big, &tables).unwrap();
        assert!(!is_pushout(&f, &g, &wrong_in_b, &wrong_in_c).unwrap());
    }

    /// Pullback and pushout through the parent-map signature: pair-headed
    /// neighbour images and a contains functor over both sorts.
    #[test]
    fn palacz_signature_pullback_and_pushout() {
        let host = crate::encodings::fixture("fig5.palacz").unwrap();
        // two overlapping full subgraphs
        let sub = |nodes: &[&str], edges: &[&str]| {
            let node_set = FinSet::from_names(nodes);
            let edge_set = FinSet::from_names(edges);
            CoalgGraph::new(
                host.signature.clone(),
                node_set.clone(),
                edge_set.clone(),
                node_set
                    .iter()
                    .map(|n| (n.clone(), host.contains[n].clone()))
                    .collect(),
                edge_set
                    .iter()
                    .map(|e| (e.clone(), host.neighbours[e].clone()))
                    .collect(),
            )
            .unwrap()
        };
        let b = sub(&["1", "2", "3", "6"], &["4", "5"]);
        let c = sub(&["1", "2", "6", "8"], &["4"]);
        let f = inclusion(&b, &host);
        let g = inclusion(&c, &host);
        let (apex, pi_b, pi_c) = coalg_pullback(&f, &g).unwrap();
        let expected = sub(&["1", "2", "6"], &["4"]);
        assert!(isomorphic(&apex, &expected));
        assert!(pi_b.is_injective() && pi_c.is_injective());

        // glue b and c along the expected intersection
        let m = inclusion(&expected, &b);
        let n = inclusion(&expected, &c);
        let (po, in_b, in_c) = coalg_pushout(&m, &n).unwrap();
        assert!(is_pushout(&m, &n, &in_b, &in_c).unwrap());
        let union = sub(&["1", "2", "3", "6", "8"], &["4", "5"]);
        assert!(isomorphic(&po, &union));
    }

    #[test]
    fn bigraph_signature_pushout_keeps_links() {
        let host = crate::encodings::fixture("fig7.bigraph").unwrap();
        let empty = CoalgGraph::empty(host.signature.clone());
        let into = |dst: &CoalgGraph| {
            GraphMorphism::new(
                empty.clone(),
                dst.clone(),
                SortedFunction::new(
                    FinFunction::new(FinSet::empty(), dst.nodes.clone(), BTreeMap::new()).unwrap(),
                    FinFunction::new(FinSet::empty(), dst.edges.clone(), BTreeMap::new()).unwrap(),
                ),
            )
            .unwrap()
        };
        let (po, in_b, _) = coalg_pushout(&into(&host), &into(&host)).unwrap();
        assert_eq!(po.nodes.len(), 2 * host.nodes.len());
        assert_eq!(po.edges.len(), 2 * host.edges.len());
        assert!(validate_graph(&po).is_empty());
        assert!(check_morphism(&in_b).unwrap());
    }

    fn sample_bottom() -> (GraphMorphism, GraphMorphism, GraphMorphism, GraphMorphism) {
        let a_g = hyper(&["s"], &[]);
        let b_g = hyper(&["s", "u"], &[("e", &["s", "u"])]);
        let c_g = hyper(&["s", "v"], &[("k", &["s"])]);
        let m = inclusion(&a_g, &b_g);
        let f = inclusion(&a_g, &c_g);
        let (_, g, n) = coalg_pushout(&m, &f).unwrap();
        (m, f, g, n)
    }

    #[test]
    fn degenerate_cube_satisfies_the_biconditional() {
        let (m, f, g, n) = sample_bottom();
        let d = GraphMorphism::identity(&g.dst);
        let cube = VkCube::by_pulling_back(&m, &f, &g, &n, &d).unwrap();
        let report = vk_cube_check(&cube).unwrap();
        assert!(report.top_is_pushout);
        assert!(report.fronts_are_pullbacks);
        assert!(report.biconditional_holds);
    }

    #[test]
    fn pulled_back_cube_satisfies_the_biconditional() {
        let (m, f, g, n) = sample_bottom();
        // D' = subgraph of D without the `k` edge
        let d_full = &g.dst;
        let d_sub = hyper(&["s", "u", "v"], &[("e", &["s", "u"])]);
        let d = inclusion(&d_sub, d_full);
        let cube = VkCube::by_pulling_back(&m, &f, &g, &n, &d).unwrap();
        let report = vk_cube_check(&cube).unwrap();
        assert!(report.biconditional_holds);
        assert!(report.top_is_pushout);
    }

    #[test]
    fn broken_front_face_forces_top_not_pushout() {
        let (m, f, g, n) = sample_bottom();
        let d_full = &g.dst;
        let d_sub = hyper(&["s", "u", "v"], &[("e", &["s", "u"])]);
        let d = inclusion(&d_sub, d_full);
        let cube = VkCube::by_pulling_back(&m, &f, &g, &n, &d).unwrap();
        let cube = break_front_face(&cube).expect("a droppable element exists");
        let report = vk_cube_check(&cube).unwrap();
        assert!(!report.top_is_pushout);
        assert!(!report.fronts_are_pullbacks);
        assert!(report.biconditional_holds);
    }

    #[test]
    fn malformed_cube_is_named() {
        let (m, f, g, n) = sample_bottom();
        let d = GraphMorphism::identity(&g.dst);
        let mut cube = VkCube::by_pulling_back(&m, &f, &g, &n, &d).unwrap();
        // break the bottom: replace n by a non-commuting variant
        cube.n_bot = GraphMorphism::identity(&n.dst);
        let err = vk_cube_check(&cube).unwrap_err();
        assert!(matches!(err, Error::MalformedCube(_)));
    }

    /// All coalgebras over (1, Pot(N)) with at most `max_n` nodes and
    /// `max_e` edges, up to the fixed carrier names.
    fn all_small_coalgebras(max_n: usize, max_e: usize) -> Vec<CoalgGraph> {
        let mut out = Vec::new();
        for n in 0..=max_n {
            for e in 0..=max_e {
                let nodes: Vec<AtomId> = (0..n).map(|i| AtomId::new(format!("x{i}"))).collect();
                let edges: Vec<AtomId> = (0..e).map(|i| AtomId::new(format!("xe{i}"))).collect();
                let subsets: Vec<NestedTerm> = {
                    let atoms: Vec<NestedTerm> =
                        nodes.iter().map(|a| NestedTerm::Atom(a.clone())).collect();
                    crate::term::sets_over(&atoms, 0, n)
                };
                // every assignment of a subset to every edge
                let mut assignments: Vec<Vec<NestedTerm>> = vec![Vec::new()];
                for _ in 0..e {
                    let mut next = Vec::new();
                    for partial in &assignments {
                        for s in &subsets {
                            let mut p2 = partial.clone();
                            p2.push(s.clone());
                            next.push(p2);
                        }
                    }
                    assignments = next;
                }
                for st in assignments {
                    out.push(
                        CoalgGraph::new(
                            crate::graph::Signature::new(
                                parse_functor("1").unwrap(),
                                parse_functor("Pot(N)").unwrap(),
                            ),
                            FinSet::new(nodes.iter().cloned()),
                            FinSet::new(edges.iter().cloned()),
                            nodes.iter().map(|x| (x.clone(), NestedTerm::Unit)).collect(),
                            edges.iter().cloned().zip(st).collect(),
                        )
                        .unwrap(),
                    );
                }
            }
        }
        out
    }

    /// All homomorphisms between two graphs over (1, Pot(N)).
    fn all_homomorphisms(src: &CoalgGraph, dst: &CoalgGraph) -> Vec<GraphMorphism> {
        let mut out = Vec::new();
        for fn_nodes in crate::finset::all_functions(&src.nodes, &dst.nodes) {
            for fn_edges in crate::finset::all_functions(&src.edges, &dst.edges) {
                let on = SortedFunction::new(fn_nodes.clone(), fn_edges);
                let m = GraphMorphism::new(src.clone(), dst.clone(), on).unwrap();
                if check_morphism(&m).unwrap() {
                    out.push(m);
                }
            }
        }
        out
    }

    #[test]
    fn pullback_universal_property_against_small_comparisons() {
        let d = hyper(&["u", "v"], &[("e", &["u", "v"])]);
        let b = hyper(&["u", "v"], &[("e", &["u", "v"]), ("e2", &["u", "v"])]);
        let c = hyper(&["u"], &[]);
        let f = GraphMorphism::from_tables(
            b.clone(),
            d.clone(),
            &MorphismTables {
                nodes: [(id("u"), id("u")), (id("v"), id("v"))].into_iter().collect(),
                edges: [(id("e"), id("e")), (id("e2"), id("e"))].into_iter().collect(),
            },
        )
        .unwrap();
        let g = inclusion(&c, &d);
        assert!(check_morphism(&f).unwrap());
        let (apex, pi_b, pi_c) = coalg_pullback(&f, &g).unwrap();
        for x in all_small_coalgebras(2, 2) {
            for u in all_homomorphisms(&x, &b) {
                for v in all_homomorphisms(&x, &c) {
                    if GraphMorphism::compose(&f, &u).unwrap().on
                        != GraphMorphism::compose(&g, &v).unwrap().on
                    {
                        continue;
                    }
                    let mediating: Vec<GraphMorphism> = all_homomorphisms(&x, &apex)
                        .into_iter()
                        .filter(|w| {
                            GraphMorphism::compose(&pi_b, w).unwrap().on == u.on
                                && GraphMorphism::compose(&pi_c, w).unwrap().on == v.on
                        })
                        .collect();
                    assert_eq!(mediating.len(), 1);
                }
            }
        }
    }

    #[test]
    fn pushout_universal_property_against_small_comparisons() {
        let shared = hyper(&["s"], &[]);
        let b = hyper(&["s", "u"], &[("e", &["s", "u"])]);
        let c = hyper(&["s"], &[("k", &["s"])]);
        let f = inclusion(&shared, &b);
        let g = inclusion(&shared, &c);
        let (_, in_b, in_c) = coalg_pushout(&f, &g).unwrap();
        let apex = in_b.dst.clone();
        for x in all_small_coalgebras(2, 1) {
            for u in all_homomorphisms(&b, &x) {
                for v in all_homomorphisms(&c, &x) {
                    if GraphMorphism::compose(&u, &f).unwrap().on
                        != GraphMorphism::compose(&v, &g).unwrap().on
                    {
                        continue;
                    }
                    let mediating: Vec<GraphMorphism> = all_homomorphisms(&apex, &x)
                        .into_iter()
                        .filter(|w| {
                            GraphMorphism::compose(w, &in_b).unwrap().on == u.on
                                && GraphMorphism::compose(w, &in_c).unwrap().on == v.on
                        })
                        .collect();
                    assert_eq!(mediating.len(), 1);
                }
            }
        }
    }

    #[test]
    fn m_class_clauses_on_small_samples() {
        let shared = hyper(&["s"], &[]);
        let b = hyper(&["s", "u"], &[("e", &["s", "u"])]);
        let c = hyper(&["s2"], &[]);
        let m = inclusion(&shared, &b);
        // g merges nothing but renames
        let tables = MorphismTables {
            nodes: [(id("s"), id("s2"))].into_iter().collect(),
            edges: BTreeMap::new(),
        };
        let g = GraphMorphism::from_tables(shared.clone(), c.clone(), &tables).unwrap();
        let chain_second = inclusion(&b, &hyper(&["s", "u", "w"], &[("e", &["s", "u"])]));
        let report = m_class_suite(&[
            MSample::Span { m: m.clone(), g },
            MSample::Cospan {
                f: inclusion(&b, &b),
                m: inclusion(&b, &b),
            },
            MSample::Chain {
                first: m,
                second: chain_second,
            },
        ])
        .unwrap();
        assert!(report.stable_under_pushout);
        assert!(report.stable_under_pullback);
        assert!(report.closed_under_composition);
        assert!(report.contains_identities);
        assert!(report.witnesses.is_empty());
    }
}
