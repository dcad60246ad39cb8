//! Exhaustive enumeration of diagrams of a given degree, one representative
//! per isomorphism class.
//!
//! Connected pieces are grown from a single trivalent vertex. Unfilled slots
//! are carried as stub legs, which makes every partial graph an ordinary
//! connected diagram that can be canonicalized and deduplicated. At each
//! step one stub is resolved in every possible way: joined to another stub,
//! to a fresh trivalent vertex, or to a fresh labeled leg.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use super::canon::{canonical_form, SignedCanonical};
use super::{he, vertex_of, Diagram, Space, Vertex, NONE};
use crate::error::{Error, Result};

const STUB: u8 = u8::MAX;

/// Degree caps for enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub aempty_max_degree: usize,
    pub labeled_max_degree: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits { aempty_max_degree: 6, labeled_max_degree: 4 }
    }
}

impl EnumerationLimits {
    pub fn cap(&self, space: Space) -> usize {
        match space {
            Space::Aempty => self.aempty_max_degree,
            _ => self.labeled_max_degree,
        }
    }

    pub fn check(&self, space: Space, degree: usize) -> Result<()> {
        let cap = self.cap(space);
        if degree > cap {
            return Err(Error::LimitExceeded { degree, cap });
        }
        Ok(())
    }
}

type ConnectedKey = (usize, Vec<u8>);

fn connected_cache() -> &'static Mutex<HashMap<ConnectedKey, Arc<Vec<SignedCanonical>>>> {
    static CACHE: OnceLock<Mutex<HashMap<ConnectedKey, Arc<Vec<SignedCanonical>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All connected diagrams with `trivalent` trivalent vertices and legs
/// labeled by the multiset `legs`, AS-zero classes included, sorted.
pub fn enumerate_connected(trivalent: usize, legs: &[u8]) -> Arc<Vec<SignedCanonical>> {
    let mut legs = legs.to_vec();
    legs.sort_unstable();
    let key = (trivalent, legs.clone());
    if let Some(hit) = connected_cache().lock().unwrap().get(&key) {
        return hit.clone();
    }
    let out = Arc::new(grow_connected(trivalent, &legs));
    connected_cache().lock().unwrap().insert(key, out.clone());
    out
}

fn grow_connected(trivalent: usize, legs: &[u8]) -> Vec<SignedCanonical> {
    if !(3 * trivalent + legs.len()).is_multiple_of(2) {
        return Vec::new();
    }
    if trivalent == 0 {
        if legs.len() != 2 {
            return Vec::new();
        }
        return vec![canonical_form(&super::named::strut(legs[0], legs[1]))];
    }
    let mut start = Diagram::empty(0);
    start.vertices.push(Vertex::Trivalent);
    start.partner.extend_from_slice(&[NONE; 3]);
    for s in 0..3 {
        add_leg(&mut start, 0, s, STUB);
    }
    let mut remaining = BTreeMap::new();
    for &l in legs {
        *remaining.entry(l).or_insert(0usize) += 1;
    }
    let mut seen = HashSet::new();
    let mut found: BTreeMap<Diagram, i8> = BTreeMap::new();
    let start = canonical_form(&start).canonical;
    let mut frontier = vec![(start, trivalent - 1, remaining)];
    while let Some((state, t_left, legs_left)) = frontier.pop() {
        let stubs: Vec<usize> =
            (0..state.vertices.len()).filter(|&v| state.vertices[v] == Vertex::Leg(STUB)).collect();
        let legs_total: usize = legs_left.values().sum();
        if stubs.is_empty() {
            if t_left == 0 && legs_total == 0 {
                let c = canonical_form(&state);
                found.insert(c.canonical, c.sign);
            }
            continue;
        }
        if stubs.len() + t_left < legs_total {
            continue;
        }
        // resolve a stub on the trivalent vertex with the fewest stubs
        let stub_count = |v: usize| {
            (0..3).filter(|&s| state.vertices[vertex_of(state.partner[3 * v + s])] == Vertex::Leg(STUB)).count()
        };
        let chosen = *stubs
            .iter()
            .min_by_key(|&&s| (stub_count(vertex_of(state.partner[3 * s])), s))
            .unwrap();
        let anchor = state.partner[3 * chosen];
        let mut successors = Vec::new();
        for &other in &stubs {
            if other == chosen {
                continue;
            }
            let mut d = state.clone();
            let a = d.partner[3 * other];
            d.partner[anchor as usize] = a;
            d.partner[a as usize] = anchor;
            successors.push((remove_vertices(&d, &[chosen, other]), t_left, legs_left.clone()));
        }
        if t_left > 0 {
            let mut d = state.clone();
            d.vertices[chosen] = Vertex::Trivalent;
            // the stub leg becomes a trivalent vertex with two fresh stubs
            for s in 1..3 {
                add_leg(&mut d, chosen, s, STUB);
            }
            successors.push((d, t_left - 1, legs_left.clone()));
        }
        for (&label, &count) in &legs_left {
            if count == 0 {
                continue;
            }
            let mut d = state.clone();
            d.vertices[chosen] = Vertex::Leg(label);
            let mut rest = legs_left.clone();
            *rest.get_mut(&label).unwrap() -= 1;
            successors.push((d, t_left, rest));
        }
        for (d, t, l) in successors {
            let key = canonical_form(&d).canonical;
            let tag = (key.clone(), t, l.clone());
            if seen.insert(tag) {
                frontier.push((key, t, l));
            }
        }
    }
    found.into_iter().map(|(canonical, sign)| SignedCanonical { canonical, sign }).collect()
}

fn add_leg(d: &mut Diagram, v: usize, slot: usize, label: u8) {
    let w = d.vertices.len();
    d.vertices.push(Vertex::Leg(label));
    d.partner.extend_from_slice(&[NONE; 3]);
    d.partner[3 * v + slot] = he(w, 0);
    d.partner[3 * w] = he(v, slot);
}

/// Deletes vertices whose half-edges are no longer referenced.
fn remove_vertices(d: &Diagram, removed: &[usize]) -> Diagram {
    let keep: Vec<usize> = (0..d.vertices.len()).filter(|v| !removed.contains(v)).collect();
    let mut map = vec![usize::MAX; d.vertices.len()];
    for (i, &v) in keep.iter().enumerate() {
        map[v] = i;
    }
    let mut out = Diagram::empty(0);
    for &v in &keep {
        out.vertices.push(d.vertices[v]);
        for s in 0..3 {
            let p = d.partner[3 * v + s];
            out.partner.push(if p == NONE { NONE } else { he(map[vertex_of(p)], p as usize % 3) });
        }
    }
    out
}

/// All nonempty multisets of size `k` from `0..labels`, as sorted vectors.
fn label_multisets(labels: usize, k: usize) -> Vec<Vec<u8>> {
    fn rec(labels: usize, k: usize, min: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for l in min..labels {
            cur.push(l as u8);
            rec(labels, k, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(labels, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Connected pieces of the given space grouped by degree (1..=max).
fn connected_pieces(space: Space, labels: usize, max: usize) -> Vec<Vec<Diagram>> {
    let mut by_degree = vec![Vec::new(); max + 1];
    for (deg, bucket) in by_degree.iter_mut().enumerate().skip(1) {
        let total = 2 * deg;
        match space {
            Space::Aempty => {
                for c in enumerate_connected(total, &[]).iter() {
                    bucket.push(c.canonical.clone());
                }
            }
            _ => {
                for l in 1..=total {
                    let t = total - l;
                    if (3 * t + l) % 2 != 0 {
                        continue;
                    }
                    for legs in label_multisets(labels, l) {
                        for c in enumerate_connected(t, &legs).iter() {
                            bucket.push(c.canonical.clone());
                        }
                    }
                }
            }
        }
    }
    by_degree
}

/// Every diagram of the space and degree, all signs included.
fn all_classes(space: Space, degree: usize, labels: usize) -> Vec<SignedCanonical> {
    match space {
        Space::Aempty | Space::B | Space::BPlus => {
            let base = if space == Space::Aempty { Space::Aempty } else { Space::B };
            let pieces = connected_pieces(base, labels, degree);
            let flat: Vec<(usize, &Diagram)> =
                pieces.iter().enumerate().flat_map(|(d, ps)| ps.iter().map(move |p| (d, p))).collect();
            let mut found = BTreeMap::new();
            let mut chosen = Vec::new();
            multisets(&flat, 0, degree, &mut chosen, &mut |parts: &[usize]| {
                let mut d = Diagram::empty(0);
                for &i in parts {
                    d = d.disjoint_union(flat[i].1);
                }
                if space == Space::BPlus && d.validate(Space::BPlus, labels).is_err() {
                    return;
                }
                let c = canonical_form(&d);
                found.insert(c.canonical, c.sign);
            });
            found.into_iter().map(|(canonical, sign)| SignedCanonical { canonical, sign }).collect()
        }
        Space::Aup => {
            let mut found = BTreeMap::new();
            for b in all_classes(Space::B, degree, labels) {
                for d in skeleton_placements(&b.canonical, labels) {
                    let c = canonical_form(&d);
                    found.insert(c.canonical, c.sign);
                }
            }
            found.into_iter().map(|(canonical, sign)| SignedCanonical { canonical, sign }).collect()
        }
    }
}

fn multisets(
    flat: &[(usize, &Diagram)],
    from: usize,
    left: usize,
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if left == 0 {
        emit(chosen);
        return;
    }
    for i in from..flat.len() {
        let deg = flat[i].0;
        if deg > left {
            continue;
        }
        chosen.push(i);
        multisets(flat, i, left - deg, chosen, emit);
        chosen.pop();
    }
}

/// All ways of placing the legs of a uni-trivalent diagram on the skeleton
/// lines named by their labels, one diagram per ordering of each label's legs.
pub(crate) fn skeleton_placements(b: &Diagram, lines: usize) -> Vec<Diagram> {
    let mut by_label: Vec<Vec<u32>> = vec![Vec::new(); lines];
    for (v, kind) in b.vertices.iter().enumerate() {
        if let Vertex::Leg(l) = kind {
            by_label[*l as usize].push(v as u32);
        }
    }
    let mut base = b.clone();
    for kind in base.vertices.iter_mut() {
        if let Vertex::Leg(l) = *kind {
            *kind = Vertex::Attach(l);
        }
    }
    let per_line: Vec<Vec<Vec<u32>>> = by_label.iter().map(|legs| permutations(legs)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; lines];
    loop {
        let mut d = base.clone();
        d.skeleton = (0..lines).map(|l| per_line[l][idx[l]].clone()).collect();
        out.push(d);
        let mut l = 0;
        loop {
            if l == lines {
                return out;
            }
            idx[l] += 1;
            if idx[l] < per_line[l].len() {
                break;
            }
            idx[l] = 0;
            l += 1;
        }
    }
}

pub(crate) fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

type ClassKey = (Space, usize, usize);

fn class_cache() -> &'static Mutex<HashMap<ClassKey, Arc<Vec<SignedCanonical>>>> {
    static CACHE: OnceLock<Mutex<HashMap<ClassKey, Arc<Vec<SignedCanonical>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// One representative per isomorphism class of diagrams of `degree` in
/// `space` over `labels` labels (skeleton lines for `Aup`), sorted by
/// canonical diagram. AS-zero classes are dropped unless `include_zero`.
pub fn enumerate_diagrams(
    space: Space,
    degree: usize,
    labels: usize,
    limits: &EnumerationLimits,
    include_zero: bool,
) -> Result<Vec<SignedCanonical>> {
    limits.check(space, degree)?;
    let key = (space, degree, labels);
    let cached = class_cache().lock().unwrap().get(&key).cloned();
    let all = match cached {
        Some(hit) => hit,
        None => {
            let v = Arc::new(all_classes(space, degree, labels));
            class_cache().lock().unwrap().insert(key, v.clone());
            v
        }
    };
    Ok(all.iter().filter(|c| include_zero || c.sign != 0).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::named::*;
    use std::collections::BTreeSet;

    fn lim() -> EnumerationLimits {
        EnumerationLimits::default()
    }

    #[test]
    fn degree_zero_and_one() {
        let e = enumerate_diagrams(Space::Aempty, 0, 0, &lim(), false).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e[0].canonical.is_empty());
        let one = enumerate_diagrams(Space::Aempty, 1, 0, &lim(), false).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].canonical, canonical_form(&theta()).canonical);
        let all = enumerate_diagrams(Space::Aempty, 1, 0, &lim(), true).unwrap();
        assert_eq!(all.len(), 2);
        let b = enumerate_diagrams(Space::B, 1, 1, &lim(), false).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].canonical, canonical_form(&strut(0, 0)).canonical);
    }

    /// Connected cubic multigraphs with loops on 2, 4, 6 vertices: 2, 5, 17.
    #[test]
    fn connected_cubic_counts() {
        assert_eq!(enumerate_connected(2, &[]).len(), 2);
        assert_eq!(enumerate_connected(4, &[]).len(), 5);
        assert_eq!(enumerate_connected(6, &[]).len(), 17);
    }

    #[test]
    fn no_duplicates_and_edge_identity() {
        for (space, labels) in [(Space::Aempty, 0), (Space::B, 2), (Space::Aup, 1), (Space::Aup, 2)] {
            for deg in 0..=3 {
                let ds = enumerate_diagrams(space, deg, labels, &lim(), true).unwrap();
                let set: BTreeSet<_> = ds.iter().map(|c| c.canonical.clone()).collect();
                assert_eq!(set.len(), ds.len());
                for c in &ds {
                    let d = &c.canonical;
                    assert_eq!(d.degree(), deg);
                    assert_eq!(2 * d.num_edges(), 3 * d.num_trivalent() + d.num_legs() + d.num_attachments());
                    let check = if space == Space::Aempty { 0 } else { labels };
                    assert!(d.validate(space, check).is_ok(), "{d:?}");
                    assert_eq!(canonical_form(d).canonical, *d);
                }
            }
        }
    }

    #[test]
    fn limit_is_enforced() {
        let l = EnumerationLimits { aempty_max_degree: 2, labeled_max_degree: 1 };
        assert!(matches!(
            enumerate_diagrams(Space::Aempty, 3, 0, &l, false),
            Err(Error::LimitExceeded { degree: 3, cap: 2 })
        ));
        assert!(enumerate_diagrams(Space::B, 2, 1, &l, false).is_err());
    }

    #[test]
    fn chord_diagrams_on_one_line() {
        // degree 2 chord diagrams on one line: 3 pairings of 4 points, all
        // with AS-nonzero classes; plus diagrams with trivalent vertices
        let ds = enumerate_diagrams(Space::Aup, 2, 1, &lim(), true).unwrap();
        let chords = ds.iter().filter(|c| c.canonical.num_trivalent() == 0).count();
        assert_eq!(chords, 3);
    }
}
