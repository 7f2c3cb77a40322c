//! Finite nested terms: the element representation for every set functor.
//!
//! A [`NestedTerm`] is an atom, a finite set of terms, a pair, a finite
//! sequence, or the unit value. Sets are kept canonical (duplicate-free,
//! sorted by the total order on terms), so derived equality coincides with
//! extensional equality and every downstream enumeration is deterministic.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Name of a base-set element. Names compare by exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomId(pub String);

impl AtomId {
    pub fn new(name: impl Into<String>) -> Self {
        AtomId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AtomId {
    fn from(s: &str) -> Self {
        AtomId(s.to_string())
    }
}

/// A finite nested term.
///
/// `Set` must stay canonical; build sets through [`NestedTerm::set`] (or
/// [`make_set`]) rather than the raw variant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NestedTerm {
    Atom(AtomId),
    Set(Vec<NestedTerm>),
    Pair(Box<NestedTerm>, Box<NestedTerm>),
    Seq(Vec<NestedTerm>),
    Unit,
}

/// The set-constructor flavours: the plain/bounded power sets and the three
/// superpower sets (atoms allowed, sets only, layered).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flavor {
    Pot,
    PotFin,
    /// Subsets with cardinality in `lo..=hi`.
    PotRange(usize, usize),
    PPa,
    PPb,
    PotOm,
}

impl NestedTerm {
    pub fn atom(name: impl Into<String>) -> Self {
        NestedTerm::Atom(AtomId::new(name))
    }

    /// Canonical set constructor: dedups and sorts the members.
    pub fn set(members: impl IntoIterator<Item = NestedTerm>) -> Self {
        make_set(members)
    }

    pub fn pair(left: NestedTerm, right: NestedTerm) -> Self {
        NestedTerm::Pair(Box::new(left), Box::new(right))
    }

    pub fn seq(items: impl IntoIterator<Item = NestedTerm>) -> Self {
        NestedTerm::Seq(items.into_iter().collect())
    }

    pub fn empty_set() -> Self {
        NestedTerm::Set(Vec::new())
    }

    pub fn is_set(&self) -> bool {
        matches!(self, NestedTerm::Set(_))
    }

    /// Members of a set term, if it is one.
    pub fn set_members(&self) -> Option<&[NestedTerm]> {
        match self {
            NestedTerm::Set(xs) => Some(xs),
            _ => None,
        }
    }

    /// Re-establishes the canonical form on every nesting level.
    pub fn canonicalize(&self) -> NestedTerm {
        match self {
            NestedTerm::Atom(_) | NestedTerm::Unit => self.clone(),
            NestedTerm::Set(xs) => make_set(xs.iter().map(|x| x.canonicalize())),
            NestedTerm::Pair(a, b) => NestedTerm::pair(a.canonicalize(), b.canonicalize()),
            NestedTerm::Seq(xs) => NestedTerm::Seq(xs.iter().map(|x| x.canonicalize()).collect()),
        }
    }
}

impl fmt::Display for NestedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NestedTerm::Atom(a) => write!(f, "{a}"),
            NestedTerm::Set(xs) => {
                write!(f, "{{")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
            NestedTerm::Pair(a, b) => write!(f, "({a},{b})"),
            NestedTerm::Seq(xs) => {
                write!(f, "<")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ">")
            }
            NestedTerm::Unit => write!(f, "*"),
        }
    }
}

/// Builds a canonical set: duplicates removed, members sorted.
pub fn make_set(members: impl IntoIterator<Item = NestedTerm>) -> NestedTerm {
    let mut xs: Vec<NestedTerm> = members.into_iter().collect();
    xs.sort();
    xs.dedup();
    NestedTerm::Set(xs)
}

/// Nesting depth `np`: atoms and unit are 0, the empty set is 1, a nonempty
/// set is one more than its deepest member. Pairs and sequences contribute
/// no set-parenthesis of their own.
pub fn depth(t: &NestedTerm) -> usize {
    match t {
        NestedTerm::Atom(_) | NestedTerm::Unit => 0,
        NestedTerm::Set(xs) => xs.iter().map(depth).max().map_or(1, |d| d + 1),
        NestedTerm::Pair(a, b) => depth(a).max(depth(b)),
        NestedTerm::Seq(xs) => xs.iter().map(depth).max().unwrap_or(0),
    }
}

/// All atoms occurring at any nesting level of `t`.
pub fn atoms_of(t: &NestedTerm) -> BTreeSet<AtomId> {
    let mut out = BTreeSet::new();
    collect_atoms(t, &mut out);
    out
}

fn collect_atoms(t: &NestedTerm, out: &mut BTreeSet<AtomId>) {
    match t {
        NestedTerm::Atom(a) => {
            out.insert(a.clone());
        }
        NestedTerm::Set(xs) | NestedTerm::Seq(xs) => {
            for x in xs {
                collect_atoms(x, out);
            }
        }
        NestedTerm::Pair(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        NestedTerm::Unit => {}
    }
}

/// Decides `t ∈ F(universe)` for a set-constructor flavour over a plain
/// universe of atoms. Pair/Seq/Unit-shaped terms are never members.
///
/// Errors with [`Error::UnknownAtom`] if `t` mentions an atom outside the
/// universe.
pub fn member_of(t: &NestedTerm, universe: &BTreeSet<AtomId>, flavor: Flavor) -> Result<bool> {
    for a in atoms_of(t) {
        if !universe.contains(&a) {
            return Err(Error::UnknownAtom(a.0));
        }
    }
    let base = |x: &NestedTerm| matches!(x, NestedTerm::Atom(a) if universe.contains(a));
    Ok(flavor_member(t, flavor, &base))
}

/// Flavour membership over an arbitrary base predicate. This is the shared
/// engine behind [`member_of`] and the functor-language membership, where
/// the base of a set constructor may itself be a composite functor.
pub(crate) fn flavor_member(
    t: &NestedTerm,
    flavor: Flavor,
    base: &dyn Fn(&NestedTerm) -> bool,
) -> bool {
    match flavor {
        Flavor::Pot | Flavor::PotFin => match t {
            NestedTerm::Set(xs) => xs.iter().all(base),
            _ => false,
        },
        Flavor::PotRange(lo, hi) => match t {
            NestedTerm::Set(xs) => xs.len() >= lo && xs.len() <= hi && xs.iter().all(base),
            _ => false,
        },
        Flavor::PPa => ppa_member(t, base),
        Flavor::PPb => ppb_member(t, base),
        Flavor::PotOm => potom_member(t, base),
    }
}

fn ppa_member(t: &NestedTerm, base: &dyn Fn(&NestedTerm) -> bool) -> bool {
    if base(t) {
        return true;
    }
    match t {
        NestedTerm::Set(xs) => xs.iter().all(|x| ppa_member(x, base)),
        _ => false,
    }
}

fn ppb_member(t: &NestedTerm, base: &dyn Fn(&NestedTerm) -> bool) -> bool {
    match t {
        NestedTerm::Set(xs) => {
            xs.iter().all(base) || xs.iter().all(|x| ppb_member(x, base))
        }
        _ => false,
    }
}

/// Layered membership: `t ∈ Pot^i(base)` for some `i`. The empty set
/// inhabits every level `i >= 1`, so homogeneity constrains only the
/// non-empty members. A level witness, when one exists, is bounded by
/// `np(t) + 1`, which makes the search finite.
fn potom_member(t: &NestedTerm, base: &dyn Fn(&NestedTerm) -> bool) -> bool {
    (0..=depth(t) + 1).any(|i| pot_iter_member(t, i, base))
}

fn pot_iter_member(t: &NestedTerm, level: usize, base: &dyn Fn(&NestedTerm) -> bool) -> bool {
    if level == 0 {
        return base(t);
    }
    match t {
        NestedTerm::Set(xs) => xs.iter().all(|x| pot_iter_member(x, level - 1, base)),
        _ => false,
    }
}

/// Enumerates, in canonical order, every member of the flavour over the
/// universe with `np <= depth_bound` where every set has at most
/// `width_bound` members. Built constructively from the inductive
/// definitions, so it serves as an independent oracle for [`member_of`].
pub fn enumerate(
    universe: &BTreeSet<AtomId>,
    flavor: Flavor,
    depth_bound: usize,
    width_bound: usize,
) -> Vec<NestedTerm> {
    let atoms: Vec<NestedTerm> = universe
        .iter()
        .map(|a| NestedTerm::Atom(a.clone()))
        .collect();
    let mut out = match flavor {
        Flavor::Pot | Flavor::PotFin => {
            if depth_bound == 0 {
                Vec::new()
            } else {
                sets_over(&atoms, 0, width_bound)
            }
        }
        Flavor::PotRange(lo, hi) => {
            if depth_bound == 0 {
                Vec::new()
            } else {
                sets_over(&atoms, lo, hi.min(width_bound))
            }
        }
        Flavor::PPa => {
            // pool(d) = atoms ∪ { sets of ≤ width members drawn from pool(d-1) }
            let mut pool = atoms.clone();
            for _ in 0..depth_bound {
                let mut next = atoms.clone();
                next.extend(sets_over(&pool, 0, width_bound));
                next.sort();
                next.dedup();
                pool = next;
            }
            pool
        }
        Flavor::PPb => {
            // pool(d) = Pot(atoms) ∪ { sets of ≤ width members drawn from pool(d-1) }
            if depth_bound == 0 {
                Vec::new()
            } else {
                let mut pool = sets_over(&atoms, 0, width_bound);
                for _ in 1..depth_bound {
                    let mut next = sets_over(&atoms, 0, width_bound);
                    next.extend(sets_over(&pool, 0, width_bound));
                    next.sort();
                    next.dedup();
                    pool = next;
                }
                pool
            }
        }
        Flavor::PotOm => {
            // Layer by layer: L_0 = atoms, L_{i+1} = sets over L_i.
            let mut layers = vec![atoms.clone()];
            for _ in 0..depth_bound {
                let prev = layers.last().unwrap();
                let next: Vec<NestedTerm> = sets_over(prev, 0, width_bound)
                    .into_iter()
                    .filter(|t| depth(t) <= depth_bound)
                    .collect();
                layers.push(next);
            }
            let mut all: Vec<NestedTerm> = layers.into_iter().flatten().collect();
            all.sort();
            all.dedup();
            all
        }
    };
    out.retain(|t| depth(t) <= depth_bound);
    out.sort();
    out.dedup();
    out
}

/// All canonical sets with `lo..=hi` members drawn from `pool`
/// (`pool` must be duplicate-free).
pub(crate) fn sets_over(pool: &[NestedTerm], lo: usize, hi: usize) -> Vec<NestedTerm> {
    use itertools::Itertools;
    let mut out = Vec::new();
    for k in lo..=hi.min(pool.len()) {
        for combo in pool.iter().combinations(k) {
            out.push(make_set(combo.into_iter().cloned()));
        }
    }
    out
}

// JSON encoding: {"atom": s} | {"set": [...]} | {"pair": [a, b]} |
// {"seq": [...]} | {"unit": true}. Parsing re-canonicalizes sets.

impl Serialize for NestedTerm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = serializer.serialize_map(Some(1))?;
        match self {
            NestedTerm::Atom(a) => m.serialize_entry("atom", a)?,
            NestedTerm::Set(xs) => m.serialize_entry("set", xs)?,
            NestedTerm::Pair(a, b) => m.serialize_entry("pair", &[a.as_ref(), b.as_ref()])?,
            NestedTerm::Seq(xs) => m.serialize_entry("seq", xs)?,
            NestedTerm::Unit => m.serialize_entry("unit", &true)?,
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for NestedTerm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        term_from_value(&v).map_err(D::Error::custom)
    }
}

fn term_from_value(v: &serde_json::Value) -> std::result::Result<NestedTerm, String> {
    let obj = v.as_object().ok_or("term must be a JSON object")?;
    if obj.len() != 1 {
        return Err("term object must have exactly one key".into());
    }
    let (key, val) = obj.iter().next().unwrap();
    match key.as_str() {
        "atom" => {
            let s = val.as_str().ok_or("atom must be a string")?;
            if s.is_empty() {
                return Err("atom name must be nonempty".into());
            }
            Ok(NestedTerm::atom(s))
        }
        "set" => {
            let xs = val.as_array().ok_or("set must be an array")?;
            let members: std::result::Result<Vec<_>, _> = xs.iter().map(term_from_value).collect();
            Ok(make_set(members?))
        }
        "pair" => {
            let xs = val.as_array().ok_or("pair must be an array")?;
            if xs.len() != 2 {
                return Err("pair must have exactly two components".into());
            }
            Ok(NestedTerm::pair(
                term_from_value(&xs[0])?,
                term_from_value(&xs[1])?,
            ))
        }
        "seq" => {
            let xs = val.as_array().ok_or("seq must be an array")?;
            let items: std::result::Result<Vec<_>, _> = xs.iter().map(term_from_value).collect();
            Ok(NestedTerm::Seq(items?))
        }
        "unit" => Ok(NestedTerm::Unit),
        other => Err(format!("unknown term constructor `{other}`")),
    }
}
