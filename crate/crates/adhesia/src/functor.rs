//! The endofunctor expression language.
//!
//! Expressions denote endofunctors on one or two sorts of finite sets. The
//! concrete syntax is
//!
//! ```text
//! expr := "N" | "E" | "X" | "1"
//!       | "Pot(" expr ")" | "PotFin(" expr ")" | "Pot[" nat "," nat "](" expr ")"
//!       | "PotDir(" expr ")" | "PPa(" expr ")" | "PPb(" expr ")" | "PotOm(" expr ")"
//!       | "Star(" expr ")" | "Copy" nat "(" expr ")"
//!       | expr "*" expr | expr "+" expr
//! ```
//!
//! with `*` binding tighter than `+` (both left-associative) and `X` the
//! one-sorted identity. `PotDir` abbreviates `Pot[1,2]`: subsets of one or
//! two elements, as used for undirected edges (loops are singletons).
//!
//! A functor is applied to carriers via [`enumerate_functor`] (bounded), to
//! candidate elements via [`element_of`], and to morphisms via
//! [`map_element`] (the elementwise action, written `f#` below).

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::finset::{self, FinFunction, FinSet};
use crate::term::{self, depth, make_set, Flavor, NestedTerm};

/// Syntax tree of a functor expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FunctorExpr {
    /// The node sort `N`.
    SortN,
    /// The edge sort `E`.
    SortE,
    /// The one-sorted identity `X` (reads the `N` carrier).
    IdSort,
    /// The final functor `1` with single element `Unit`.
    Final,
    /// A power-set or superpower-set constructor applied to a base.
    SetF(Flavor, Box<FunctorExpr>),
    /// Binary product; elements are pairs.
    Prod(Box<FunctorExpr>, Box<FunctorExpr>),
    /// Binary coproduct; with disjoint carriers the elements are untagged.
    Coprod(Box<FunctorExpr>, Box<FunctorExpr>),
    /// Free monoid; elements are finite words.
    Star(Box<FunctorExpr>),
    /// `n`-fold copy; elements are length-`n` tuples.
    Copy(usize, Box<FunctorExpr>),
}

impl FunctorExpr {
    pub fn pot(arg: FunctorExpr) -> Self {
        FunctorExpr::SetF(Flavor::Pot, Box::new(arg))
    }
    pub fn pot_fin(arg: FunctorExpr) -> Self {
        FunctorExpr::SetF(Flavor::PotFin, Box::new(arg))
    }
    pub fn pot_dir(arg: FunctorExpr) -> Self {
        FunctorExpr::SetF(Flavor::PotRange(1, 2), Box::new(arg))
    }
    pub fn ppa(arg: FunctorExpr) -> Self {
        FunctorExpr::SetF(Flavor::PPa, Box::new(arg))
    }
    pub fn ppb(arg: FunctorExpr) -> Self {
        FunctorExpr::SetF(Flavor::PPb, Box::new(arg))
    }
    pub fn pot_om(arg: FunctorExpr) -> Self {
        FunctorExpr::SetF(Flavor::PotOm, Box::new(arg))
    }
    pub fn prod(l: FunctorExpr, r: FunctorExpr) -> Self {
        FunctorExpr::Prod(Box::new(l), Box::new(r))
    }
    pub fn coprod(l: FunctorExpr, r: FunctorExpr) -> Self {
        FunctorExpr::Coprod(Box::new(l), Box::new(r))
    }
    pub fn star(arg: FunctorExpr) -> Self {
        FunctorExpr::Star(Box::new(arg))
    }

    /// Which sorts the expression reads: `(uses_n, uses_e)`.
    /// `X` counts as the `N` sort.
    pub fn sorts(&self) -> (bool, bool) {
        match self {
            FunctorExpr::SortN | FunctorExpr::IdSort => (true, false),
            FunctorExpr::SortE => (false, true),
            FunctorExpr::Final => (false, false),
            FunctorExpr::SetF(_, a) | FunctorExpr::Star(a) | FunctorExpr::Copy(_, a) => a.sorts(),
            FunctorExpr::Prod(l, r) | FunctorExpr::Coprod(l, r) => {
                let (ln, le) = l.sorts();
                let (rn, re) = r.sorts();
                (ln || rn, le || re)
            }
        }
    }
}

impl fmt::Display for FunctorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom_str(e: &FunctorExpr) -> String {
            match e {
                FunctorExpr::Prod(..) | FunctorExpr::Coprod(..) => format!("({e})"),
                _ => e.to_string(),
            }
        }
        match self {
            FunctorExpr::SortN => write!(f, "N"),
            FunctorExpr::SortE => write!(f, "E"),
            FunctorExpr::IdSort => write!(f, "X"),
            FunctorExpr::Final => write!(f, "1"),
            FunctorExpr::SetF(flavor, a) => match flavor {
                Flavor::Pot => write!(f, "Pot({a})"),
                Flavor::PotFin => write!(f, "PotFin({a})"),
                Flavor::PotRange(1, 2) => write!(f, "PotDir({a})"),
                Flavor::PotRange(i, j) => write!(f, "Pot[{i},{j}]({a})"),
                Flavor::PPa => write!(f, "PPa({a})"),
                Flavor::PPb => write!(f, "PPb({a})"),
                Flavor::PotOm => write!(f, "PotOm({a})"),
            },
            FunctorExpr::Prod(l, r) => {
                let ls = match l.as_ref() {
                    FunctorExpr::Coprod(..) => format!("({l})"),
                    _ => l.to_string(),
                };
                write!(f, "{ls} * {}", atom_str(r))
            }
            FunctorExpr::Coprod(l, r) => {
                let rs = match r.as_ref() {
                    FunctorExpr::Coprod(..) => format!("({r})"),
                    _ => r.to_string(),
                };
                write!(f, "{l} + {rs}")
            }
            FunctorExpr::Star(a) => write!(f, "Star({a})"),
            FunctorExpr::Copy(n, a) => write!(f, "Copy{n}({a})"),
        }
    }
}

impl Serialize for FunctorExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FunctorExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_functor(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses the concrete syntax; errors carry the byte position.
pub fn parse_functor(text: &str) -> Result<FunctorExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn nat(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn expr(&mut self) -> Result<FunctorExpr> {
        let mut acc = self.prod()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            acc = FunctorExpr::coprod(acc, self.prod()?);
        }
        Ok(acc)
    }

    fn prod(&mut self) -> Result<FunctorExpr> {
        let mut acc = self.primary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = FunctorExpr::prod(acc, self.primary()?);
        }
        Ok(acc)
    }

    fn paren_arg(&mut self) -> Result<FunctorExpr> {
        self.eat(b'(')?;
        let e = self.expr()?;
        self.eat(b')')?;
        Ok(e)
    }

    fn primary(&mut self) -> Result<FunctorExpr> {
        match self.peek() {
            Some(b'1') => {
                self.pos += 1;
                Ok(FunctorExpr::Final)
            }
            Some(b'(') => self.paren_arg(),
            Some(c) if c.is_ascii_alphabetic() => {
                let ident_pos = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "N" => Ok(FunctorExpr::SortN),
                    "E" => Ok(FunctorExpr::SortE),
                    "X" => Ok(FunctorExpr::IdSort),
                    "Pot" => {
                        if self.peek() == Some(b'[') {
                            self.pos += 1;
                            let lo = self.nat()?;
                            self.eat(b',')?;
                            let hi = self.nat()?;
                            if lo > hi {
                                return Err(self.err("Pot[i,j] requires i <= j"));
                            }
                            self.eat(b']')?;
                            Ok(FunctorExpr::SetF(
                                Flavor::PotRange(lo, hi),
                                Box::new(self.paren_arg()?),
                            ))
                        } else {
                            Ok(FunctorExpr::pot(self.paren_arg()?))
                        }
                    }
                    "PotFin" => Ok(FunctorExpr::pot_fin(self.paren_arg()?)),
                    "PotDir" => Ok(FunctorExpr::pot_dir(self.paren_arg()?)),
                    "PPa" => Ok(FunctorExpr::ppa(self.paren_arg()?)),
                    "PPb" => Ok(FunctorExpr::ppb(self.paren_arg()?)),
                    "PotOm" => Ok(FunctorExpr::pot_om(self.paren_arg()?)),
                    "Star" => Ok(FunctorExpr::star(self.paren_arg()?)),
                    "Copy" => {
                        let n = self.nat()?;
                        if n == 0 {
                            return Err(self.err("Copy requires n >= 1"));
                        }
                        Ok(FunctorExpr::Copy(n, Box::new(self.paren_arg()?)))
                    }
                    other => {
                        self.pos = ident_pos;
                        Err(self.err(&format!("unknown functor `{other}`")))
                    }
                }
            }
            _ => Err(self.err("expected an expression")),
        }
    }
}

/// The pair of carriers a two-sorted functor is applied to. `N` and `E`
/// must be disjoint atom namespaces; one-sorted use leaves `E` empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarrierEnv {
    pub nodes: FinSet,
    pub edges: FinSet,
}

impl CarrierEnv {
    pub fn new(nodes: FinSet, edges: FinSet) -> Result<Self> {
        if !nodes.is_disjoint(&edges) {
            return Err(Error::Malformed("node and edge carriers overlap".into()));
        }
        Ok(CarrierEnv { nodes, edges })
    }

    pub fn one_sorted(nodes: FinSet) -> Self {
        CarrierEnv {
            nodes,
            edges: FinSet::empty(),
        }
    }
}

/// A pair of carrier maps `(f_N, f_E)`; one-sorted use keeps `f_E` empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortedFunction {
    pub on_nodes: FinFunction,
    pub on_edges: FinFunction,
}

impl SortedFunction {
    pub fn new(on_nodes: FinFunction, on_edges: FinFunction) -> Self {
        SortedFunction { on_nodes, on_edges }
    }

    pub fn one_sorted(f: FinFunction) -> Self {
        SortedFunction {
            on_nodes: f,
            on_edges: FinFunction::identity(&FinSet::empty()),
        }
    }

    pub fn identity(env: &CarrierEnv) -> Self {
        SortedFunction {
            on_nodes: FinFunction::identity(&env.nodes),
            on_edges: FinFunction::identity(&env.edges),
        }
    }

    pub fn dom(&self) -> CarrierEnv {
        CarrierEnv {
            nodes: self.on_nodes.dom.clone(),
            edges: self.on_edges.dom.clone(),
        }
    }

    pub fn cod(&self) -> CarrierEnv {
        CarrierEnv {
            nodes: self.on_nodes.cod.clone(),
            edges: self.on_edges.cod.clone(),
        }
    }

    pub fn is_injective(&self) -> bool {
        finset::is_injective(&self.on_nodes) && finset::is_injective(&self.on_edges)
    }

    pub fn compose(g: &SortedFunction, f: &SortedFunction) -> Result<SortedFunction> {
        Ok(SortedFunction {
            on_nodes: finset::compose(&g.on_nodes, &f.on_nodes)?,
            on_edges: finset::compose(&g.on_edges, &f.on_edges)?,
        })
    }
}

/// Decides `t ∈ ⟦expr⟧(env)`. Total: foreign atoms and wrong shapes are
/// simply not elements.
pub fn element_of(expr: &FunctorExpr, env: &CarrierEnv, t: &NestedTerm) -> bool {
    match expr {
        FunctorExpr::SortN | FunctorExpr::IdSort => {
            matches!(t, NestedTerm::Atom(a) if env.nodes.contains(a))
        }
        FunctorExpr::SortE => matches!(t, NestedTerm::Atom(a) if env.edges.contains(a)),
        FunctorExpr::Final => matches!(t, NestedTerm::Unit),
        FunctorExpr::SetF(flavor, arg) => {
            term::flavor_member(t, *flavor, &|x| element_of(arg, env, x))
        }
        FunctorExpr::Prod(l, r) => match t {
            NestedTerm::Pair(a, b) => element_of(l, env, a) && element_of(r, env, b),
            _ => false,
        },
        FunctorExpr::Coprod(l, r) => element_of(l, env, t) || element_of(r, env, t),
        FunctorExpr::Star(arg) => match t {
            NestedTerm::Seq(xs) => xs.iter().all(|x| element_of(arg, env, x)),
            _ => false,
        },
        FunctorExpr::Copy(n, arg) => match t {
            NestedTerm::Seq(xs) => xs.len() == *n && xs.iter().all(|x| element_of(arg, env, x)),
            _ => false,
        },
    }
}

/// The elementwise action `f#`: applies the carrier maps atomwise and
/// rebuilds sets canonically, so images may shrink when `f` merges atoms.
pub fn map_element(expr: &FunctorExpr, f: &SortedFunction, t: &NestedTerm) -> Result<NestedTerm> {
    match expr {
        FunctorExpr::SortN | FunctorExpr::IdSort => match t {
            NestedTerm::Atom(a) => Ok(NestedTerm::Atom(f.on_nodes.apply(a)?.clone())),
            _ => Err(Error::NotAnElement(format!("expected an N atom, got {t}"))),
        },
        FunctorExpr::SortE => match t {
            NestedTerm::Atom(a) => Ok(NestedTerm::Atom(f.on_edges.apply(a)?.clone())),
            _ => Err(Error::NotAnElement(format!("expected an E atom, got {t}"))),
        },
        FunctorExpr::Final => match t {
            NestedTerm::Unit => Ok(NestedTerm::Unit),
            _ => Err(Error::NotAnElement(format!("expected unit, got {t}"))),
        },
        FunctorExpr::SetF(_, arg) => match t {
            // a set maps elementwise; anything else is a base element
            NestedTerm::Set(xs) => Ok(make_set(
                xs.iter()
                    .map(|x| map_element(expr, f, x))
                    .collect::<Result<Vec<_>>>()?,
            )),
            _ => map_element(arg, f, t),
        },
        FunctorExpr::Prod(l, r) => match t {
            NestedTerm::Pair(a, b) => Ok(NestedTerm::pair(
                map_element(l, f, a)?,
                map_element(r, f, b)?,
            )),
            _ => Err(Error::NotAnElement(format!("expected a pair, got {t}"))),
        },
        FunctorExpr::Coprod(l, r) => {
            // disjoint namespaces: the side that accepts the term wins
            map_element(l, f, t).or_else(|_| map_element(r, f, t))
        }
        FunctorExpr::Star(arg) => match t {
            NestedTerm::Seq(xs) => Ok(NestedTerm::Seq(
                xs.iter()
                    .map(|x| map_element(arg, f, x))
                    .collect::<Result<Vec<_>>>()?,
            )),
            _ => Err(Error::NotAnElement(format!("expected a word, got {t}"))),
        },
        FunctorExpr::Copy(n, arg) => match t {
            NestedTerm::Seq(xs) if xs.len() == *n => Ok(NestedTerm::Seq(
                xs.iter()
                    .map(|x| map_element(arg, f, x))
                    .collect::<Result<Vec<_>>>()?,
            )),
            _ => Err(Error::NotAnElement(format!("expected a {n}-tuple, got {t}"))),
        },
    }
}

/// Enumeration bounds: `depth` caps np, `width` caps set cardinality,
/// `len` caps word length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub depth: usize,
    pub width: usize,
    pub len: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            depth: 3,
            width: 3,
            len: 3,
        }
    }
}

impl Bounds {
    pub fn new(depth: usize, width: usize, len: usize) -> Self {
        Bounds { depth, width, len }
    }
}

/// Deterministically emits exactly the terms accepted by [`element_of`]
/// within the bounds, in canonical order.
pub fn enumerate_functor(expr: &FunctorExpr, env: &CarrierEnv, bounds: Bounds) -> Vec<NestedTerm> {
    let mut out = enum_raw(expr, env, bounds);
    out.retain(|t| depth(t) <= bounds.depth);
    out.sort();
    out.dedup();
    out
}

fn enum_raw(expr: &FunctorExpr, env: &CarrierEnv, bounds: Bounds) -> Vec<NestedTerm> {
    match expr {
        FunctorExpr::SortN | FunctorExpr::IdSort => env
            .nodes
            .iter()
            .map(|a| NestedTerm::Atom(a.clone()))
            .collect(),
        FunctorExpr::SortE => env
            .edges
            .iter()
            .map(|a| NestedTerm::Atom(a.clone()))
            .collect(),
        FunctorExpr::Final => vec![NestedTerm::Unit],
        FunctorExpr::SetF(flavor, arg) => {
            let base = enumerate_functor(arg, env, bounds);
            enum_flavor(*flavor, &base, bounds)
        }
        FunctorExpr::Prod(l, r) => {
            let ls = enumerate_functor(l, env, bounds);
            let rs = enumerate_functor(r, env, bounds);
            let mut out = Vec::with_capacity(ls.len() * rs.len());
            for a in &ls {
                for b in &rs {
                    out.push(NestedTerm::pair(a.clone(), b.clone()));
                }
            }
            out
        }
        FunctorExpr::Coprod(l, r) => {
            let mut out = enumerate_functor(l, env, bounds);
            out.extend(enumerate_functor(r, env, bounds));
            out
        }
        FunctorExpr::Star(arg) => {
            let base = enumerate_functor(arg, env, bounds);
            let mut out = vec![NestedTerm::seq([])];
            let mut layer: Vec<Vec<NestedTerm>> = vec![Vec::new()];
            for _ in 0..bounds.len {
                let mut next = Vec::new();
                for w in &layer {
                    for b in &base {
                        let mut w2 = w.clone();
                        w2.push(b.clone());
                        out.push(NestedTerm::Seq(w2.clone()));
                        next.push(w2);
                    }
                }
                layer = next;
            }
            out
        }
        FunctorExpr::Copy(n, arg) => {
            let base = enumerate_functor(arg, env, bounds);
            let mut tuples: Vec<Vec<NestedTerm>> = vec![Vec::new()];
            for _ in 0..*n {
                let mut next = Vec::new();
                for w in &tuples {
                    for b in &base {
                        let mut w2 = w.clone();
                        w2.push(b.clone());
                        next.push(w2);
                    }
                }
                tuples = next;
            }
            tuples.into_iter().map(NestedTerm::Seq).collect()
        }
    }
}

fn shallow(pool: &[NestedTerm], max_depth: usize) -> Vec<NestedTerm> {
    pool.iter()
        .filter(|t| depth(t) <= max_depth)
        .cloned()
        .collect()
}

fn enum_flavor(flavor: Flavor, base: &[NestedTerm], bounds: Bounds) -> Vec<NestedTerm> {
    let Bounds { depth: d, width, .. } = bounds;
    match flavor {
        Flavor::Pot | Flavor::PotFin => {
            if d == 0 {
                return Vec::new();
            }
            term::sets_over(&shallow(base, d - 1), 0, width)
        }
        Flavor::PotRange(lo, hi) => {
            if d == 0 {
                return Vec::new();
            }
            term::sets_over(&shallow(base, d - 1), lo, hi.min(width))
        }
        Flavor::PPa => {
            let mut pool: Vec<NestedTerm> = base.to_vec();
            pool.sort();
            pool.dedup();
            for _ in 0..d {
                let mut next: Vec<NestedTerm> = base.to_vec();
                next.extend(term::sets_over(&shallow(&pool, d.saturating_sub(1)), 0, width));
                next.sort();
                next.dedup();
                pool = next;
            }
            pool
        }
        Flavor::PPb => {
            if d == 0 {
                return Vec::new();
            }
            let leaf_sets = term::sets_over(&shallow(base, d - 1), 0, width);
            let mut pool = leaf_sets.clone();
            pool.sort();
            pool.dedup();
            for _ in 1..d {
                let mut next = leaf_sets.clone();
                next.extend(term::sets_over(&shallow(&pool, d - 1), 0, width));
                next.sort();
                next.dedup();
                pool = next;
            }
            pool
        }
        Flavor::PotOm => {
            let mut layer: Vec<NestedTerm> = base.to_vec();
            layer.sort();
            layer.dedup();
            let mut all = layer.clone();
            for _ in 0..=d {
                let next: Vec<NestedTerm> =
                    term::sets_over(&shallow(&layer, d.saturating_sub(1)), 0, width)
                        .into_iter()
                        .filter(|t| depth(t) <= d)
                        .collect();
                all.extend(next.iter().cloned());
                layer = next;
            }
            all.sort();
            all.dedup();
            all
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::AtomId;

    fn env(nodes: &[&str], edges: &[&str]) -> CarrierEnv {
        CarrierEnv::new(FinSet::from_names(nodes), FinSet::from_names(edges)).unwrap()
    }

    fn a(name: &str) -> NestedTerm {
        NestedTerm::atom(name)
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_functor("Pot(N)").unwrap(),
            FunctorExpr::pot(FunctorExpr::SortN)
        );
        assert_eq!(
            parse_functor("Star(N) * PotOm(N)").unwrap(),
            FunctorExpr::prod(
                FunctorExpr::star(FunctorExpr::SortN),
                FunctorExpr::pot_om(FunctorExpr::SortN)
            )
        );
        assert_eq!(
            parse_functor("PPa(N + E)").unwrap(),
            FunctorExpr::ppa(FunctorExpr::coprod(FunctorExpr::SortN, FunctorExpr::SortE))
        );
        assert_eq!(
            parse_functor("Pot[1,2](X)").unwrap(),
            FunctorExpr::pot_dir(FunctorExpr::IdSort)
        );
        assert_eq!(
            parse_functor("Copy2(PPa(N+E))").unwrap(),
            FunctorExpr::Copy(
                2,
                Box::new(FunctorExpr::ppa(FunctorExpr::coprod(
                    FunctorExpr::SortN,
                    FunctorExpr::SortE
                )))
            )
        );
        // precedence: * binds tighter than +
        assert_eq!(
            parse_functor("N * N + E").unwrap(),
            FunctorExpr::coprod(
                FunctorExpr::prod(FunctorExpr::SortN, FunctorExpr::SortN),
                FunctorExpr::SortE
            )
        );
        let err = parse_functor("Pot(N");
        assert!(matches!(err, Err(Error::Parse { .. })));
        assert!(parse_functor("Bogus(N)").is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        for text in [
            "Pot(N)",
            "PotFin(N)",
            "PotDir(N + E)",
            "Pot[0,3](E)",
            "PPa(N + E)",
            "PPb(N)",
            "PotOm(N)",
            "Star(N) * PotOm(N)",
            "N * N * PPa(E)",
            "Pot(N) * PPa(N + E)",
            "1",
            "X",
            "Copy3(PPa(N + E))",
            "(N + E) * (N + E)",
            "N + E * E",
        ] {
            let e = parse_functor(text).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_functor(&printed).unwrap(), e, "printing `{text}` as `{printed}`");
        }
    }

    #[test]
    fn element_of_examples() {
        let ev = env(&["a", "b"], &["e1"]);
        assert!(element_of(&FunctorExpr::Final, &ev, &NestedTerm::Unit));
        assert!(!element_of(&FunctorExpr::Final, &ev, &a("a")));
        let nn = FunctorExpr::prod(FunctorExpr::IdSort, FunctorExpr::IdSort);
        assert!(element_of(&nn, &ev, &NestedTerm::pair(a("a"), a("b"))));
        assert!(!element_of(&nn, &ev, &a("a")));
        // cardinality bound from Pot[1,2]
        let pd = parse_functor("Pot[1,2](N)").unwrap();
        assert!(!element_of(&pd, &env(&["a"], &[]), &NestedTerm::empty_set()));
        assert!(element_of(&pd, &env(&["a"], &[]), &make_set([a("a")])));
        // coproduct over disjoint namespaces
        let ne = parse_functor("Pot(N + E)").unwrap();
        assert!(element_of(&ne, &ev, &make_set([a("a"), a("e1")])));
        assert!(!element_of(&ne, &ev, &make_set([a("zz")])));
    }

    fn paper_map() -> SortedFunction {
        let dom = FinSet::from_names(&["u", "v", "w", "u'", "v'"]);
        let cod = FinSet::from_names(&["n1", "n2", "n3", "n4", "n5", "n6"]);
        let map = [
            ("u", "n3"),
            ("v", "n3"),
            ("w", "n1"),
            ("u'", "n5"),
            ("v'", "n5"),
        ]
        .into_iter()
        .map(|(x, y)| (AtomId::new(x), AtomId::new(y)))
        .collect();
        SortedFunction::one_sorted(FinFunction::new(dom, cod, map).unwrap())
    }

    #[test]
    fn ppa_action_shrinks_merged_atoms() {
        // {u,v,w,{u,v},{v,{w,∅}}} ↦ {n3,n1,{n3},{n3,{n1,∅}}}
        let f = paper_map();
        let t = make_set([
            a("u"),
            a("v"),
            a("w"),
            make_set([a("u"), a("v")]),
            make_set([a("v"), make_set([a("w"), NestedTerm::empty_set()])]),
        ]);
        let expected = make_set([
            a("n3"),
            a("n1"),
            make_set([a("n3")]),
            make_set([a("n3"), make_set([a("n1"), NestedTerm::empty_set()])]),
        ]);
        let ppa = FunctorExpr::ppa(FunctorExpr::IdSort);
        assert_eq!(map_element(&ppa, &f, &t).unwrap(), expected);
    }

    #[test]
    fn ppb_action_example() {
        // {{u,v},{v,{w,∅}}} ↦ {{n3},{n3,{n1,∅}}}
        let f = paper_map();
        let t = make_set([
            make_set([a("u"), a("v")]),
            make_set([a("v"), make_set([a("w"), NestedTerm::empty_set()])]),
        ]);
        let expected = make_set([
            make_set([a("n3")]),
            make_set([a("n3"), make_set([a("n1"), NestedTerm::empty_set()])]),
        ]);
        let ppb = FunctorExpr::ppb(FunctorExpr::IdSort);
        assert_eq!(map_element(&ppb, &f, &t).unwrap(), expected);
    }

    #[test]
    fn potom_action_is_total_on_non_members() {
        // {{u,v},{∅,{w,∅}}} ↦ {{n3},{∅,{n1,∅}}}
        let f = paper_map();
        let t = make_set([
            make_set([a("u"), a("v")]),
            make_set([
                NestedTerm::empty_set(),
                make_set([a("w"), NestedTerm::empty_set()]),
            ]),
        ]);
        let expected = make_set([
            make_set([a("n3")]),
            make_set([
                NestedTerm::empty_set(),
                make_set([a("n1"), NestedTerm::empty_set()]),
            ]),
        ]);
        let pom = FunctorExpr::pot_om(FunctorExpr::IdSort);
        assert_eq!(map_element(&pom, &f, &t).unwrap(), expected);
    }

    #[test]
    fn enumerate_examples() {
        let ev = env(&["a", "b"], &[]);
        let b = Bounds::default();
        assert_eq!(
            enumerate_functor(&FunctorExpr::Final, &ev, b),
            vec![NestedTerm::Unit]
        );
        assert_eq!(
            enumerate_functor(&FunctorExpr::pot(FunctorExpr::SortN), &ev, b).len(),
            4
        );
        let star = enumerate_functor(
            &FunctorExpr::star(FunctorExpr::SortN),
            &env(&["a"], &[]),
            Bounds::new(3, 3, 2),
        );
        assert_eq!(
            star,
            vec![
                NestedTerm::seq([]),
                NestedTerm::seq([a("a")]),
                NestedTerm::seq([a("a"), a("a")]),
            ]
        );
    }

    /// Every enumerated term is accepted and every accepted candidate is
    /// enumerated, for a battery of expressions.
    #[test]
    fn enumeration_matches_membership() {
        let ev = env(&["a", "b"], &["e1"]);
        let bounds = Bounds::new(2, 2, 2);
        for text in [
            "Pot(N)",
            "PotDir(N)",
            "PPa(N)",
            "PPb(N)",
            "PotOm(N)",
            "PPa(N + E)",
            "Pot(N) * Pot(N + E)",
            "N * N",
            "Star(N)",
            "Copy2(Pot(N))",
            "1",
            "N + E",
        ] {
            let expr = parse_functor(text).unwrap();
            let enumerated = enumerate_functor(&expr, &ev, bounds);
            for t in &enumerated {
                assert!(element_of(&expr, &ev, t), "{text}: {t} not accepted");
            }
            let mut sorted = enumerated.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), enumerated.len(), "{text}: duplicates");
            // candidate pool: union over several shapes
            let mut pool: Vec<NestedTerm> = Vec::new();
            for probe in [
                "PPa(N + E)",
                "Star(N)",
                "Copy2(Pot(N))",
                "N * N",
                "Pot(N) * Pot(N + E)",
                "1",
            ] {
                pool.extend(enumerate_functor(&parse_functor(probe).unwrap(), &ev, bounds));
            }
            pool.sort();
            pool.dedup();
            let accepted: Vec<&NestedTerm> = pool
                .iter()
                .filter(|t| element_of(&expr, &ev, t))
                .collect();
            for t in accepted {
                assert!(enumerated.contains(t), "{text}: accepted {t} missing");
            }
        }
    }

    #[test]
    fn functor_laws_on_enumerated_terms() {
        // identity law and composition law, elementwise
        let m = FinSet::from_names(&["u", "v", "w"]);
        let n = FinSet::from_names(&["x", "y"]);
        let p = FinSet::from_names(&["z1", "z2", "z3"]);
        let f = FinFunction::new(
            m.clone(),
            n.clone(),
            [("u", "x"), ("v", "x"), ("w", "y")]
                .into_iter()
                .map(|(a, b)| (AtomId::new(a), AtomId::new(b)))
                .collect(),
        )
        .unwrap();
        let g = FinFunction::new(
            n.clone(),
            p,
            [("x", "z2"), ("y", "z3")]
                .into_iter()
                .map(|(a, b)| (AtomId::new(a), AtomId::new(b)))
                .collect(),
        )
        .unwrap();
        let sf = SortedFunction::one_sorted(f.clone());
        let sg = SortedFunction::one_sorted(g.clone());
        let sgf = SortedFunction::one_sorted(finset::compose(&g, &f).unwrap());
        let ev = CarrierEnv::one_sorted(m.clone());
        let id = SortedFunction::identity(&ev);
        let bounds = Bounds::new(2, 2, 2);
        for text in ["Pot(X)", "PPa(X)", "PPb(X)", "PotOm(X)", "X * X", "Star(X)", "1"] {
            let expr = parse_functor(text).unwrap();
            for t in enumerate_functor(&expr, &ev, bounds) {
                assert_eq!(map_element(&expr, &id, &t).unwrap(), t, "{text}: id law");
                let via_composite = map_element(&expr, &sgf, &t).unwrap();
                let via_steps =
                    map_element(&expr, &sg, &map_element(&expr, &sf, &t).unwrap()).unwrap();
                assert_eq!(via_composite, via_steps, "{text}: composition law");
            }
        }
    }

    #[test]
    fn injective_maps_stay_injective_elementwise() {
        let m = FinSet::from_names(&["u", "v"]);
        let n = FinSet::from_names(&["x", "y", "z"]);
        let f = FinFunction::new(
            m.clone(),
            n,
            [("u", "z"), ("v", "x")]
                .into_iter()
                .map(|(a, b)| (AtomId::new(a), AtomId::new(b)))
                .collect(),
        )
        .unwrap();
        let sf = SortedFunction::one_sorted(f);
        let ev = CarrierEnv::one_sorted(m);
        for text in ["PPa(X)", "PPb(X)", "PotOm(X)", "Pot(X)"] {
            let expr = parse_functor(text).unwrap();
            let terms = enumerate_functor(&expr, &ev, Bounds::new(2, 2, 2));
            let images: Vec<NestedTerm> = terms
                .iter()
                .map(|t| map_element(&expr, &sf, t).unwrap())
                .collect();
            let mut dedup = images.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), terms.len(), "{text}: images collide");
        }
    }

    #[test]
    fn membership_closed_under_action() {
        let m = FinSet::from_names(&["u", "v", "w"]);
        let n = FinSet::from_names(&["x", "y"]);
        let f = FinFunction::new(
            m.clone(),
            n.clone(),
            [("u", "x"), ("v", "x"), ("w", "y")]
                .into_iter()
                .map(|(a, b)| (AtomId::new(a), AtomId::new(b)))
                .collect(),
        )
        .unwrap();
        let sf = SortedFunction::one_sorted(f);
        let src = CarrierEnv::one_sorted(m);
        let dst = CarrierEnv::one_sorted(n);
        for text in ["Pot(X)", "PPa(X)", "PPb(X)", "PotOm(X)", "Star(X)"] {
            let expr = parse_functor(text).unwrap();
            for t in enumerate_functor(&expr, &src, Bounds::new(2, 2, 2)) {
                let image = map_element(&expr, &sf, &t).unwrap();
                assert!(element_of(&expr, &dst, &image), "{text}: {t} -> {image}");
            }
        }
    }
}
