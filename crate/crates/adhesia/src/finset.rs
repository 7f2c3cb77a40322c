//! The base category of finite sets and total functions.
//!
//! Pullbacks, pushouts and pushout complements are computed with
//! deterministic synthesized names ("(b,c)" for pairs, "cls{..}" for
//! quotient classes) so that results are byte-identical across runs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::term::AtomId;

/// A finite set of named elements.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FinSet {
    pub elems: BTreeSet<AtomId>,
}

impl FinSet {
    pub fn new(elems: impl IntoIterator<Item = AtomId>) -> Self {
        FinSet {
            elems: elems.into_iter().collect(),
        }
    }

    pub fn from_names(names: &[&str]) -> Self {
        FinSet::new(names.iter().map(|n| AtomId::new(*n)))
    }

    pub fn empty() -> Self {
        FinSet::default()
    }

    pub fn contains(&self, a: &AtomId) -> bool {
        self.elems.contains(a)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AtomId> {
        self.elems.iter()
    }

    pub fn is_disjoint(&self, other: &FinSet) -> bool {
        self.elems.is_disjoint(&other.elems)
    }
}

/// A total function between finite sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinFunction {
    pub dom: FinSet,
    pub cod: FinSet,
    pub map: BTreeMap<AtomId, AtomId>,
}

impl FinFunction {
    /// Checked constructor: the map must be total on `dom` with images in `cod`.
    pub fn new(dom: FinSet, cod: FinSet, map: BTreeMap<AtomId, AtomId>) -> Result<Self> {
        for x in dom.iter() {
            match map.get(x) {
                None => return Err(Error::Malformed(format!("no image for `{x}`"))),
                Some(y) if !cod.contains(y) => {
                    return Err(Error::Malformed(format!(
                        "image `{y}` of `{x}` is not in the codomain"
                    )))
                }
                _ => {}
            }
        }
        for x in map.keys() {
            if !dom.contains(x) {
                return Err(Error::Malformed(format!("`{x}` is mapped but not in the domain")));
            }
        }
        Ok(FinFunction { dom, cod, map })
    }

    pub fn identity(s: &FinSet) -> Self {
        FinFunction {
            dom: s.clone(),
            cod: s.clone(),
            map: s.iter().map(|a| (a.clone(), a.clone())).collect(),
        }
    }

    /// Inclusion of `sub` into `sup`; `sub` must be a subset of `sup`.
    pub fn inclusion(sub: &FinSet, sup: &FinSet) -> Result<Self> {
        for x in sub.iter() {
            if !sup.contains(x) {
                return Err(Error::Malformed(format!("`{x}` is not in the superset")));
            }
        }
        Ok(FinFunction {
            dom: sub.clone(),
            cod: sup.clone(),
            map: sub.iter().map(|a| (a.clone(), a.clone())).collect(),
        })
    }

    pub fn apply(&self, x: &AtomId) -> Result<&AtomId> {
        self.map.get(x).ok_or_else(|| Error::UnknownAtom(x.0.clone()))
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod && self.map.iter().all(|(a, b)| a == b)
    }

    /// Image of the whole domain.
    pub fn image(&self) -> FinSet {
        FinSet::new(self.map.values().cloned())
    }
}

/// `(g ∘ f)(x) = g(f(x))`; requires `cod(f) = dom(g)`.
pub fn compose(g: &FinFunction, f: &FinFunction) -> Result<FinFunction> {
    if f.cod != g.dom {
        return Err(Error::DomainMismatch(
            "cod of the first factor differs from dom of the second".into(),
        ));
    }
    let map = f
        .map
        .iter()
        .map(|(x, y)| Ok((x.clone(), g.apply(y)?.clone())))
        .collect::<Result<_>>()?;
    FinFunction::new(f.dom.clone(), g.cod.clone(), map)
}

pub fn is_injective(f: &FinFunction) -> bool {
    let mut seen = BTreeSet::new();
    f.map.values().all(|y| seen.insert(y))
}

/// Canonical name of a pullback pair.
pub fn pair_atom(b: &AtomId, c: &AtomId) -> AtomId {
    AtomId(format!("({},{})", b.0, c.0))
}

/// Pullback of the cospan `B -f-> D <-g- C`: the pair set
/// `A = {(b,c) | f(b) = g(c)}` with its projections.
pub fn pullback(f: &FinFunction, g: &FinFunction) -> Result<(FinSet, FinFunction, FinFunction)> {
    if f.cod != g.cod {
        return Err(Error::CodomainMismatch(
            "pullback legs must share a codomain".into(),
        ));
    }
    let mut elems = BTreeSet::new();
    let mut to_b = BTreeMap::new();
    let mut to_c = BTreeMap::new();
    for b in f.dom.iter() {
        for c in g.dom.iter() {
            if f.apply(b)? == g.apply(c)? {
                let p = pair_atom(b, c);
                to_b.insert(p.clone(), b.clone());
                to_c.insert(p.clone(), c.clone());
                elems.insert(p);
            }
        }
    }
    let apex = FinSet { elems };
    let pi_b = FinFunction::new(apex.clone(), f.dom.clone(), to_b)?;
    let pi_c = FinFunction::new(apex.clone(), g.dom.clone(), to_c)?;
    Ok((apex, pi_b, pi_c))
}

/// Pushout of the span `B <-f- A -g-> C`: the quotient of `B ⊎ C` by the
/// smallest equivalence with `f(a) ~ g(a)`.
pub fn pushout(f: &FinFunction, g: &FinFunction) -> Result<(FinSet, FinFunction, FinFunction)> {
    if f.dom != g.dom {
        return Err(Error::DomainMismatch("pushout legs must share a domain".into()));
    }
    // tagged elements of the disjoint union, union-find over indices
    let mut tagged: Vec<(char, AtomId)> = Vec::new();
    let mut index = BTreeMap::new();
    for b in f.cod.iter() {
        index.insert(('b', b.clone()), tagged.len());
        tagged.push(('b', b.clone()));
    }
    for c in g.cod.iter() {
        index.insert(('c', c.clone()), tagged.len());
        tagged.push(('c', c.clone()));
    }
    let mut parent: Vec<usize> = (0..tagged.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for a in f.dom.iter() {
        let i = index[&('b', f.apply(a)?.clone())];
        let j = index[&('c', g.apply(a)?.clone())];
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        // keep the smaller root for determinism
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut classes: BTreeMap<usize, Vec<(char, AtomId)>> = BTreeMap::new();
    for (i, item) in tagged.iter().enumerate() {
        let r = find(&mut parent, i);
        classes.entry(r).or_default().push(item.clone());
    }
    // name each class: the bare name when unambiguous, "cls{..}" for merges,
    // fully tagged forms on collision
    let mut names: BTreeMap<usize, AtomId> = BTreeMap::new();
    let mut used: BTreeMap<AtomId, usize> = BTreeMap::new();
    for (&root, members) in &classes {
        let distinct: BTreeSet<&AtomId> = members.iter().map(|(_, a)| a).collect();
        let name = if distinct.len() == 1 {
            (*distinct.iter().next().unwrap()).clone()
        } else {
            AtomId(format!(
                "cls{{{}}}",
                distinct.iter().map(|a| a.0.as_str()).collect::<Vec<_>>().join(",")
            ))
        };
        *used.entry(name.clone()).or_insert(0) += 1;
        names.insert(root, name);
    }
    let collisions: BTreeSet<AtomId> = used
        .into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|(a, _)| a)
        .collect();
    for (&root, members) in &classes {
        if collisions.contains(&names[&root]) {
            let tagged_name = members
                .iter()
                .map(|(side, a)| format!("{side}:{a}"))
                .collect::<Vec<_>>()
                .join(",");
            names.insert(root, AtomId(format!("cls{{{tagged_name}}}")));
        }
    }
    let apex = FinSet::new(names.values().cloned());
    if apex.len() != classes.len() {
        // pathological atom names defeated the scheme; fall back to indices
        let mut uniq = BTreeMap::new();
        for (k, (&root, _)) in classes.iter().enumerate() {
            uniq.insert(root, AtomId(format!("cls#{k}")));
        }
        names = uniq;
    }
    let apex = FinSet::new(names.values().cloned());
    let mut in_b_map = BTreeMap::new();
    let mut in_c_map = BTreeMap::new();
    for (i, (side, a)) in tagged.iter().enumerate() {
        let r = find(&mut parent, i);
        match side {
            'b' => in_b_map.insert(a.clone(), names[&r].clone()),
            _ => in_c_map.insert(a.clone(), names[&r].clone()),
        };
    }
    let in_b = FinFunction::new(f.cod.clone(), apex.clone(), in_b_map)?;
    let in_c = FinFunction::new(g.cod.clone(), apex.clone(), in_c_map)?;
    Ok((apex, in_b, in_c))
}

/// Pushout complement of `A -l-> B -m-> G` for injective `l`, `m`:
/// deletes `m(B - l(A))` from `G` and returns `A -d-> D -incl-> G`.
pub fn pushout_complement(
    l: &FinFunction,
    m: &FinFunction,
) -> Result<(FinSet, FinFunction, FinFunction)> {
    if !is_injective(l) {
        return Err(Error::NotInjective("left rule leg".into()));
    }
    if !is_injective(m) {
        return Err(Error::NotInjective("match".into()));
    }
    if l.cod != m.dom {
        return Err(Error::DomainMismatch("cod(l) must equal dom(m)".into()));
    }
    let kept_of_b: BTreeSet<AtomId> = l.map.values().cloned().collect();
    let deleted: BTreeSet<AtomId> = m
        .dom
        .iter()
        .filter(|b| !kept_of_b.contains(b))
        .map(|b| m.apply(b).unwrap().clone())
        .collect();
    let d_set = FinSet::new(m.cod.iter().filter(|x| !deleted.contains(x)).cloned());
    let d_map = l
        .map
        .iter()
        .map(|(a, b)| Ok((a.clone(), m.apply(b)?.clone())))
        .collect::<Result<_>>()?;
    let d = FinFunction::new(l.dom.clone(), d_set.clone(), d_map)?;
    let incl = FinFunction::inclusion(&d_set, &m.cod)?;
    Ok((d_set, d, incl))
}

/// All total functions `dom -> cod`, in lexicographic order.
pub fn all_functions(dom: &FinSet, cod: &FinSet) -> Vec<FinFunction> {
    let xs: Vec<AtomId> = dom.iter().cloned().collect();
    let ys: Vec<AtomId> = cod.iter().cloned().collect();
    if xs.is_empty() {
        return vec![FinFunction::new(dom.clone(), cod.clone(), BTreeMap::new()).unwrap()];
    }
    if ys.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; xs.len()];
    loop {
        let map: BTreeMap<AtomId, AtomId> = xs
            .iter()
            .zip(idx.iter())
            .map(|(x, &i)| (x.clone(), ys[i].clone()))
            .collect();
        out.push(FinFunction::new(dom.clone(), cod.clone(), map).unwrap());
        let mut k = xs.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < ys.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(dom: &[&str], cod: &[&str], pairs: &[(&str, &str)]) -> FinFunction {
        FinFunction::new(
            FinSet::from_names(dom),
            FinSet::from_names(cod),
            pairs
                .iter()
                .map(|(a, b)| (AtomId::new(*a), AtomId::new(*b)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn compose_basics() {
        let uv = f(&["u", "v"], &["n3"], &[("u", "n3"), ("v", "n3")]);
        let id_dom = FinFunction::identity(&uv.dom);
        let id_cod = FinFunction::identity(&uv.cod);
        assert_eq!(compose(&uv, &id_dom).unwrap(), uv);
        assert_eq!(compose(&id_cod, &uv).unwrap(), uv);
        let g = f(&["n3"], &["z"], &[("n3", "z")]);
        let gf = compose(&g, &uv).unwrap();
        assert_eq!(gf, f(&["u", "v"], &["z"], &[("u", "z"), ("v", "z")]));
        // associativity on a chain
        let h = f(&["z"], &["w"], &[("z", "w")]);
        assert_eq!(
            compose(&h, &gf).unwrap(),
            compose(&compose(&h, &g).unwrap(), &uv).unwrap()
        );
        assert!(compose(&uv, &g).is_err());
    }

    #[test]
    fn injectivity() {
        let id = FinFunction::identity(&FinSet::from_names(&["a", "b"]));
        assert!(is_injective(&id));
        assert!(!is_injective(&f(
            &["u", "v"],
            &["n3"],
            &[("u", "n3"), ("v", "n3")]
        )));
        let empty = f(&[], &["a"], &[]);
        assert!(is_injective(&empty));
    }

    #[test]
    fn pullback_pair_set() {
        // all-to-one cospan: 2x2 pairs
        let fb = f(&["1", "2"], &["d"], &[("1", "d"), ("2", "d")]);
        let gc = f(&["c", "c'"], &["d"], &[("c", "d"), ("c'", "d")]);
        let (a, pi_b, pi_c) = pullback(&fb, &gc).unwrap();
        assert_eq!(a.len(), 4);
        // square commutes
        assert_eq!(
            compose(&fb, &pi_b).unwrap().map,
            compose(&gc, &pi_c).unwrap().map
        );

        // injective g gives injective pi_b
        let fbd = f(&["1", "2"], &["d", "e"], &[("1", "d"), ("2", "e")]);
        let gcd = f(&["c"], &["d", "e"], &[("c", "d")]);
        let (a2, pi_b2, _) = pullback(&fbd, &gcd).unwrap();
        assert!(is_injective(&pi_b2));
        assert_eq!(
            a2.elems.iter().map(|x| x.0.clone()).collect::<Vec<_>>(),
            vec!["(1,c)"]
        );
    }

    #[test]
    fn pullback_universal_property() {
        let fb = f(&["1", "2"], &["d"], &[("1", "d"), ("2", "d")]);
        let gc = f(&["c", "c'"], &["d"], &[("c", "d"), ("c'", "d")]);
        let (a, pi_b, pi_c) = pullback(&fb, &gc).unwrap();
        let x = FinSet::from_names(&["x1", "x2", "x3"]);
        for u in all_functions(&x, &fb.dom) {
            for v in all_functions(&x, &gc.dom) {
                if compose(&fb, &u).unwrap().map != compose(&gc, &v).unwrap().map {
                    continue;
                }
                let mediating: Vec<FinFunction> = all_functions(&x, &a)
                    .into_iter()
                    .filter(|w| {
                        compose(&pi_b, w).unwrap().map == u.map
                            && compose(&pi_c, w).unwrap().map == v.map
                    })
                    .collect();
                assert_eq!(mediating.len(), 1);
            }
        }
    }

    #[test]
    fn pushout_gluing() {
        // identity legs: apex isomorphic to A
        let a = FinSet::from_names(&["a"]);
        let id = FinFunction::identity(&a);
        let (d, _, _) = pushout(&id, &id).unwrap();
        assert_eq!(d.len(), 1);

        // empty A: disjoint union, name collision resolved by tagging
        let empty = FinSet::empty();
        let fb = FinFunction::new(empty.clone(), FinSet::from_names(&["x"]), BTreeMap::new()).unwrap();
        let gc = FinFunction::new(empty, FinSet::from_names(&["x"]), BTreeMap::new()).unwrap();
        let (d, in_b, in_c) = pushout(&fb, &gc).unwrap();
        assert_eq!(d.len(), 2);
        assert_ne!(in_b.map[&AtomId::new("x")], in_c.map[&AtomId::new("x")]);

        // shared element glued by inclusions
        let a = FinSet::from_names(&["a"]);
        let fb = FinFunction::inclusion(&a, &FinSet::from_names(&["a", "b"])).unwrap();
        let gc = FinFunction::inclusion(&a, &FinSet::from_names(&["a", "c"])).unwrap();
        let (d, _, _) = pushout(&fb, &gc).unwrap();
        assert_eq!(d, FinSet::from_names(&["a", "b", "c"]));
    }

    #[test]
    fn pushout_universal_property() {
        let a = FinSet::from_names(&["a1", "a2"]);
        let fb = f(&["a1", "a2"], &["b", "b2"], &[("a1", "b"), ("a2", "b")]);
        let gc = f(&["a1", "a2"], &["c1", "c2"], &[("a1", "c1"), ("a2", "c2")]);
        assert_eq!(fb.dom, a);
        let (d, in_b, in_c) = pushout(&fb, &gc).unwrap();
        assert_eq!(
            compose(&in_b, &fb).unwrap().map,
            compose(&in_c, &gc).unwrap().map
        );
        let x = FinSet::from_names(&["x1", "x2"]);
        for u in all_functions(&fb.cod, &x) {
            for v in all_functions(&gc.cod, &x) {
                if compose(&u, &fb).unwrap().map != compose(&v, &gc).unwrap().map {
                    continue;
                }
                let mediating: Vec<FinFunction> = all_functions(&d, &x)
                    .into_iter()
                    .filter(|w| {
                        compose(w, &in_b).unwrap().map == u.map
                            && compose(w, &in_c).unwrap().map == v.map
                    })
                    .collect();
                assert_eq!(mediating.len(), 1);
            }
        }
    }

    #[test]
    fn pushout_complement_deletes_unmatched() {
        // l = id keeps everything
        let b = FinSet::from_names(&["b"]);
        let g = FinSet::from_names(&["b", "x"]);
        let id = FinFunction::identity(&b);
        let m = FinFunction::inclusion(&b, &g).unwrap();
        let (d, _, _) = pushout_complement(&id, &m).unwrap();
        assert_eq!(d, g);

        // empty interface deletes the whole image
        let empty = FinSet::empty();
        let l = FinFunction::new(empty, b.clone(), BTreeMap::new()).unwrap();
        let (d, _, _) = pushout_complement(&l, &m).unwrap();
        assert_eq!(d, FinSet::from_names(&["x"]));

        // partial interface
        let a = FinSet::from_names(&["a"]);
        let l = f(&["a"], &["a", "b"], &[("a", "a")]);
        assert_eq!(l.dom, a);
        let m2 = FinFunction::inclusion(&l.cod, &FinSet::from_names(&["a", "b", "x"])).unwrap();
        let (d, _, _) = pushout_complement(&l, &m2).unwrap();
        assert_eq!(d, FinSet::from_names(&["a", "x"]));
    }

    /// Injective legs stay injective on the opposite side of pullbacks and
    /// pushouts, over a deterministic sample of small spans/cospans.
    #[test]
    fn injectivity_is_stable_under_pullback_and_pushout() {
        let names = ["p", "q", "r"];
        let all_small_functions = |dom_n: usize, cod_n: usize| -> Vec<FinFunction> {
            let dom = FinSet::new((0..dom_n).map(|i| AtomId::new(format!("x{i}"))));
            let cod = FinSet::new(names[..cod_n].iter().map(|n| AtomId::new(*n)));
            all_functions(&dom, &cod)
        };
        for dom_n in 0..=2 {
            for cod_n in 1..=3 {
                for f in all_small_functions(dom_n, cod_n) {
                    for g in all_small_functions(dom_n, cod_n) {
                        // cospan with g restricted to injective samples
                        if is_injective(&g) && f.cod == g.cod {
                            // rename g's domain apart from f's
                            let g2 = FinFunction::new(
                                FinSet::new(g.dom.iter().map(|a| AtomId::new(format!("y_{a}")))),
                                g.cod.clone(),
                                g.map
                                    .iter()
                                    .map(|(a, b)| (AtomId::new(format!("y_{a}")), b.clone()))
                                    .collect(),
                            )
                            .unwrap();
                            let (_, pi_b, _) = pullback(&f, &g2).unwrap();
                            assert!(is_injective(&pi_b));
                        }
                        // span with f injective
                        if is_injective(&f) && f.dom == g.dom {
                            let (_, _, in_c) = pushout(&f, &g).unwrap();
                            assert!(is_injective(&in_c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pushout_complement_restores_g() {
        let a = FinSet::from_names(&["a"]);
        let b = FinSet::from_names(&["a", "b"]);
        let g_set = FinSet::from_names(&["a", "b", "x"]);
        let l = FinFunction::inclusion(&a, &b).unwrap();
        let m = FinFunction::inclusion(&b, &g_set).unwrap();
        let (_, d_of_a, incl) = pushout_complement(&l, &m).unwrap();
        let (apex, _, _) = pushout(&l, &d_of_a).unwrap();
        assert_eq!(apex.len(), g_set.len());
        assert_eq!(incl.cod, g_set);
    }
}
