//! Pullback-preservation checks for functor expressions.
//!
//! For a cospan `B -f-> D <-g- C` with carrier pullback `A` and a functor
//! `F`, the comparison map `h : F(A) -> P` sends `t` to
//! `(F(pi_B)(t), F(pi_C)(t))`, where `P` is the pullback of
//! `F(B) -F(f)-> F(D) <-F(g)- F(C)` computed elementwise. When the right
//! leg `g` is injective, an explicit inverse `hbar : P -> F(A)` exists and
//! is built here by structural recursion:
//!
//! * at a sort, a matched pair `(b, c)` with `f(b) = g(c)` is the pullback
//!   pair-atom;
//! * for a set constructor, base parts pair pointwise and non-base members
//!   pair exactly when their images under `F(f)`/`F(g)` agree (the
//!   injectivity of `g` makes that pairing a bijection);
//! * products, words, copies and the final functor recurse componentwise.
//!
//! `F` preserves the pullback (within bounds) exactly when `h` is a
//! bijection onto `P`; `hbar` is the certificate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{self, FinFunction};
use crate::functor::{
    element_of, enumerate_functor, map_element, Bounds, CarrierEnv, FunctorExpr, SortedFunction,
};
use crate::term::{AtomId, NestedTerm};

/// A two-legged cospan of sorted carrier maps with a shared codomain.
/// One-sorted use keeps the edge components empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cospan {
    pub left: SortedFunction,
    pub right: SortedFunction,
}

impl Cospan {
    pub fn new(left: SortedFunction, right: SortedFunction) -> Result<Self> {
        if left.on_nodes.cod != right.on_nodes.cod || left.on_edges.cod != right.on_edges.cod {
            return Err(Error::CodomainMismatch(
                "cospan legs must share a codomain".into(),
            ));
        }
        Ok(Cospan { left, right })
    }

    pub fn one_sorted(f: FinFunction, g: FinFunction) -> Result<Self> {
        Cospan::new(
            SortedFunction::one_sorted(f),
            SortedFunction::one_sorted(g),
        )
    }

    pub fn env_b(&self) -> CarrierEnv {
        self.left.dom()
    }

    pub fn env_c(&self) -> CarrierEnv {
        self.right.dom()
    }
}

/// The carrier pullback of a cospan, one square per sort.
#[derive(Debug, Clone)]
pub struct CarrierPullback {
    pub apex: CarrierEnv,
    pub to_b: SortedFunction,
    pub to_c: SortedFunction,
}

impl CarrierPullback {
    pub fn of(cs: &Cospan) -> Result<Self> {
        let (an, bn, cn) = finset::pullback(&cs.left.on_nodes, &cs.right.on_nodes)?;
        let (ae, be, ce) = finset::pullback(&cs.left.on_edges, &cs.right.on_edges)?;
        Ok(CarrierPullback {
            apex: CarrierEnv::new(an, ae)?,
            to_b: SortedFunction::new(bn, be),
            to_c: SortedFunction::new(cn, ce),
        })
    }

    fn pair_atom_over(&self, nodes: bool, b: &AtomId, c: &AtomId) -> Result<AtomId> {
        let p = finset::pair_atom(b, c);
        let carrier = if nodes { &self.apex.nodes } else { &self.apex.edges };
        if carrier.contains(&p) {
            Ok(p)
        } else {
            Err(Error::NotInPullback(format!(
                "({b},{c}) is not a matched carrier pair"
            )))
        }
    }
}

/// The elementwise pullback `P` of `F(B) -F(f)-> F(D) <-F(g)- F(C)` within
/// bounds: all pairs of enumerated elements with equal images.
pub fn functor_pullback(
    expr: &FunctorExpr,
    cs: &Cospan,
    bounds: Bounds,
) -> Result<Vec<(NestedTerm, NestedTerm)>> {
    let fb = enumerate_functor(expr, &cs.env_b(), bounds);
    let fc = enumerate_functor(expr, &cs.env_c(), bounds);
    let mut by_image: std::collections::BTreeMap<NestedTerm, Vec<&NestedTerm>> =
        std::collections::BTreeMap::new();
    for y in &fc {
        by_image
            .entry(map_element(expr, &cs.right, y)?)
            .or_default()
            .push(y);
    }
    let mut out = Vec::new();
    for x in &fb {
        if let Some(ys) = by_image.get(&map_element(expr, &cs.left, x)?) {
            for y in ys {
                out.push((x.clone(), (*y).clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// The comparison map `h`: projects an element of `F(A)` to its pair of
/// images in `F(B) x F(C)`.
pub fn comparison_h(
    expr: &FunctorExpr,
    cs: &Cospan,
    t: &NestedTerm,
) -> Result<(NestedTerm, NestedTerm)> {
    let pb = CarrierPullback::of(cs)?;
    if !element_of(expr, &pb.apex, t) {
        return Err(Error::NotAnElement(format!(
            "{t} is not an element of the functor over the pullback carrier"
        )));
    }
    Ok((
        map_element(expr, &pb.to_b, t)?,
        map_element(expr, &pb.to_c, t)?,
    ))
}

/// The explicit inverse `hbar : P -> F(A)`; requires the right cospan leg
/// to be injective.
pub fn inverse_hbar(
    expr: &FunctorExpr,
    cs: &Cospan,
    xy: &(NestedTerm, NestedTerm),
) -> Result<NestedTerm> {
    if !cs.right.is_injective() {
        return Err(Error::NonInjectiveLeg(
            "hbar needs an injective right leg".into(),
        ));
    }
    let pb = CarrierPullback::of(cs)?;
    hbar(expr, cs, &pb, &xy.0, &xy.1)
}

fn images_match(
    expr: &FunctorExpr,
    cs: &Cospan,
    x: &NestedTerm,
    y: &NestedTerm,
) -> Result<bool> {
    Ok(map_element(expr, &cs.left, x)? == map_element(expr, &cs.right, y)?)
}

fn hbar(
    expr: &FunctorExpr,
    cs: &Cospan,
    pb: &CarrierPullback,
    x: &NestedTerm,
    y: &NestedTerm,
) -> Result<NestedTerm> {
    let not_in = || {
        Error::NotInPullback(format!(
            "({x},{y}) has no preimage under the comparison map of {expr}"
        ))
    };
    match expr {
        FunctorExpr::SortN | FunctorExpr::IdSort => match (x, y) {
            (NestedTerm::Atom(b), NestedTerm::Atom(c)) => {
                Ok(NestedTerm::Atom(pb.pair_atom_over(true, b, c)?))
            }
            _ => Err(not_in()),
        },
        FunctorExpr::SortE => match (x, y) {
            (NestedTerm::Atom(b), NestedTerm::Atom(c)) => {
                Ok(NestedTerm::Atom(pb.pair_atom_over(false, b, c)?))
            }
            _ => Err(not_in()),
        },
        FunctorExpr::Final => match (x, y) {
            (NestedTerm::Unit, NestedTerm::Unit) => Ok(NestedTerm::Unit),
            _ => Err(not_in()),
        },
        FunctorExpr::SetF(flavor, arg) => {
            use crate::term::Flavor;
            let base_b = |t: &NestedTerm| element_of(arg, &cs.env_b(), t);
            let base_c = |t: &NestedTerm| element_of(arg, &cs.env_c(), t);
            // the atom clause: both sides are base elements
            if matches!(flavor, Flavor::PPa | Flavor::PotOm) && base_b(x) && base_c(y) {
                return hbar(arg, cs, pb, x, y);
            }
            let (xs, ys) = match (x, y) {
                (NestedTerm::Set(xs), NestedTerm::Set(ys)) => (xs, ys),
                _ => return Err(not_in()),
            };
            let mut members = Vec::new();
            match flavor {
                Flavor::Pot | Flavor::PotFin | Flavor::PotRange(..) => {
                    // (X x Y) ∩ A, elementwise on the base
                    for xm in xs {
                        for ym in ys {
                            if images_match(arg, cs, xm, ym)? {
                                members.push(hbar(arg, cs, pb, xm, ym)?);
                            }
                        }
                    }
                }
                Flavor::PPa | Flavor::PPb | Flavor::PotOm => {
                    // base parts pair pointwise; non-base members pair by
                    // matching images and recurse
                    for xm in xs {
                        for ym in ys {
                            let pair_base = base_b(xm) && base_c(ym);
                            let pair_nested = !base_b(xm) && !base_c(ym);
                            if pair_base && images_match(arg, cs, xm, ym)? {
                                members.push(hbar(arg, cs, pb, xm, ym)?);
                            } else if pair_nested && images_match(expr, cs, xm, ym)? {
                                members.push(hbar(expr, cs, pb, xm, ym)?);
                            }
                        }
                    }
                }
            }
            Ok(crate::term::make_set(members))
        }
        FunctorExpr::Prod(l, r) => match (x, y) {
            (NestedTerm::Pair(x1, x2), NestedTerm::Pair(y1, y2)) => Ok(NestedTerm::pair(
                hbar(l, cs, pb, x1, y1)?,
                hbar(r, cs, pb, x2, y2)?,
            )),
            _ => Err(not_in()),
        },
        FunctorExpr::Coprod(l, r) => {
            if element_of(l, &cs.env_b(), x) && element_of(l, &cs.env_c(), y) {
                hbar(l, cs, pb, x, y)
            } else if element_of(r, &cs.env_b(), x) && element_of(r, &cs.env_c(), y) {
                hbar(r, cs, pb, x, y)
            } else {
                Err(not_in())
            }
        }
        FunctorExpr::Star(arg) => match (x, y) {
            (NestedTerm::Seq(xs), NestedTerm::Seq(ys)) if xs.len() == ys.len() => {
                Ok(NestedTerm::Seq(
                    xs.iter()
                        .zip(ys)
                        .map(|(xm, ym)| hbar(arg, cs, pb, xm, ym))
                        .collect::<Result<Vec<_>>>()?,
                ))
            }
            _ => Err(not_in()),
        },
        FunctorExpr::Copy(n, arg) => match (x, y) {
            (NestedTerm::Seq(xs), NestedTerm::Seq(ys))
                if xs.len() == *n && ys.len() == *n =>
            {
                Ok(NestedTerm::Seq(
                    xs.iter()
                        .zip(ys)
                        .map(|(xm, ym)| hbar(arg, cs, pb, xm, ym))
                        .collect::<Result<Vec<_>>>()?,
                ))
            }
            _ => Err(not_in()),
        },
    }
}

/// Which preservation notion to decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PreservationMode {
    /// `h` is a bijection onto `P`.
    Ordinary,
    /// Like `Ordinary`, but the cospan's right leg must be injective.
    AlongMonos,
    /// `h` is merely surjective onto `P`.
    Weak,
}

/// A counterexample when preservation fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// An element of `P` with no preimage under `h`.
    NotHit {
        left: NestedTerm,
        right: NestedTerm,
    },
    /// Two elements of `F(A)` with the same image.
    Merged { first: NestedTerm, second: NestedTerm },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreservationVerdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    /// `(|F(A)|, |P|)` within the bounds.
    pub sizes: (usize, usize),
}

/// Decides pullback preservation for `expr` on the given cospan within
/// bounds, with a deterministic witness on failure.
pub fn check_pb_preservation(
    expr: &FunctorExpr,
    cs: &Cospan,
    bounds: Bounds,
    mode: PreservationMode,
) -> Result<PreservationVerdict> {
    if mode == PreservationMode::AlongMonos && !cs.right.is_injective() {
        return Err(Error::NonInjectiveLeg(
            "along-monos mode needs an injective right leg".into(),
        ));
    }
    let pb = CarrierPullback::of(cs)?;
    let fa = enumerate_functor(expr, &pb.apex, bounds);
    let p = functor_pullback(expr, cs, bounds)?;
    let mut image: Vec<(NestedTerm, NestedTerm)> = Vec::with_capacity(fa.len());
    for t in &fa {
        image.push((
            map_element(expr, &pb.to_b, t)?,
            map_element(expr, &pb.to_c, t)?,
        ));
    }
    let sizes = (fa.len(), p.len());
    // first look for merged preimages, then for unhit pairs
    let mut seen: std::collections::BTreeMap<&(NestedTerm, NestedTerm), &NestedTerm> =
        std::collections::BTreeMap::new();
    let mut merged = None;
    for (t, xy) in fa.iter().zip(image.iter()) {
        if let Some(prev) = seen.insert(xy, t) {
            if merged.is_none() {
                merged = Some(Witness::Merged {
                    first: prev.clone(),
                    second: t.clone(),
                });
            }
        }
    }
    let not_hit = p
        .iter()
        .find(|xy| !seen.contains_key(xy))
        .map(|xy| Witness::NotHit {
            left: xy.0.clone(),
            right: xy.1.clone(),
        });
    let witness = match mode {
        PreservationMode::Weak => not_hit,
        PreservationMode::Ordinary | PreservationMode::AlongMonos => merged.or(not_hit),
    };
    Ok(PreservationVerdict {
        holds: witness.is_none(),
        witness,
        sizes,
    })
}
