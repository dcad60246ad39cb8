//! The OGL map: manifold diagrams to alternating sums of unit-framed links.
//!
//! Every edge becomes one component (the boundary of a thin band along the
//! edge). At a vertex the three band ends are resolved in one of two local
//! pictures: the Borromean clasp (sign `+`), where the three ends reach in
//! as fingers that cross pairwise with the finger at cyclic slot `s` over
//! the finger at slot `s + 1`; and the trivial picture (sign `-`), where
//! the ends are capped off without meeting.
//!
//! The embedding is drawn explicitly in the plane: vertices on a circle in
//! canonical order, edges as chords (parallel edges bulge apart), and the
//! PD data is read off the actual curve intersections. Where two bands of
//! different edges cross, the edge with the lexicographically smaller
//! endpoint pair goes over.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use crate::diagram::{canonical_oriented, slot_of, vertex_of, Diagram, Vertex};
use crate::error::{Error, Result};

/// A crossing `X a b c d`: arcs counterclockwise starting from the incoming
/// under-arc `a` (so the under strand runs `a -> c`), and `over` the
/// incoming over-arc (`b` or `d`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub arcs: [u32; 4],
    pub over: u32,
}

impl Crossing {
    /// Right-handed crossings count `+1`.
    pub fn sign(&self) -> i32 {
        if self.over == self.arcs[3] {
            1
        } else {
            -1
        }
    }

    /// Successor pairs `(incoming, outgoing)` for both strands.
    pub fn passages(&self) -> [(u32, u32); 2] {
        let [a, b, c, d] = self.arcs;
        if self.over == b {
            [(a, c), (b, d)]
        } else {
            [(a, c), (d, b)]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramedPDLink {
    pub components: usize,
    /// Arcs of each component in traversal order. A component without
    /// crossings owns a single arc that appears in no crossing.
    pub component_arcs: Vec<Vec<u32>>,
    pub pd_crossings: Vec<Crossing>,
    pub framings: Vec<i64>,
    pub sign: i64,
}

impl FramedPDLink {
    /// Checks that every arc of a crossing occurs in exactly two crossing
    /// slots, that arcs chain into exactly `components` closed cycles, and
    /// that the listed component arcs agree with those cycles.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.component_arcs.len() != self.components || self.framings.len() != self.components {
            return Err("component count mismatch".into());
        }
        let mut count: BTreeMap<u32, usize> = BTreeMap::new();
        let mut next: BTreeMap<u32, u32> = BTreeMap::new();
        for x in &self.pd_crossings {
            if x.over != x.arcs[1] && x.over != x.arcs[3] {
                return Err(format!("over arc {} is not on the over strand", x.over));
            }
            for a in x.arcs {
                *count.entry(a).or_default() += 1;
            }
            for (i, o) in x.passages() {
                if next.insert(i, o).is_some() {
                    return Err(format!("arc {i} enters two crossings"));
                }
            }
        }
        if let Some((a, n)) = count.iter().find(|(_, &n)| n != 2) {
            return Err(format!("arc {a} appears {n} times"));
        }
        let mut seen = BTreeSet::new();
        for arcs in &self.component_arcs {
            if arcs.is_empty() {
                return Err("component without arcs".into());
            }
            if arcs.len() == 1 && !count.contains_key(&arcs[0]) {
                if !seen.insert(arcs[0]) {
                    return Err(format!("arc {} reused", arcs[0]));
                }
                continue;
            }
            for (k, &a) in arcs.iter().enumerate() {
                if !seen.insert(a) {
                    return Err(format!("arc {a} reused"));
                }
                if next.get(&a) != Some(&arcs[(k + 1) % arcs.len()]) {
                    return Err(format!("arc {a} does not continue along its component"));
                }
            }
        }
        if seen.len() - self.crossingless() != count.len() {
            return Err("arcs outside every component".into());
        }
        Ok(())
    }

    fn crossingless(&self) -> usize {
        self.component_arcs.iter().filter(|a| a.len() == 1 && !self.pd_crossings.iter().any(|x| x.arcs.contains(&a[0]))).count()
    }

    fn component_of(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for (c, arcs) in self.component_arcs.iter().enumerate() {
            for &a in arcs {
                out.insert(a, c);
            }
        }
        out
    }

    /// Linking number of components `i != j`.
    pub fn linking_number(&self, i: usize, j: usize) -> i32 {
        let comp = self.component_of();
        let mut twice = 0;
        for x in &self.pd_crossings {
            let (cu, co) = (comp[&x.arcs[0]], comp[&x.over]);
            if (cu, co) == (i, j) || (cu, co) == (j, i) {
                twice += x.sign();
            }
        }
        twice / 2
    }

    /// Writhe of component `i` (self-crossings only).
    pub fn self_writhe(&self, i: usize) -> i32 {
        let comp = self.component_of();
        self.pd_crossings.iter().filter(|x| comp[&x.arcs[0]] == i && comp[&x.over] == i).map(|x| x.sign()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OGLExpansion {
    pub source: Diagram,
    pub terms: Vec<FramedPDLink>,
}

const GADGET_RADIUS: f64 = 0.04;
const BAND_HALF_WIDTH: f64 = 0.004;
const FINGER_TURN: f64 = 0.35;
const BULGE: f64 = 0.25;
const BAND_SAMPLES: usize = 48;
const FINGER_SAMPLES: usize = 12;

type P = (f64, f64);

fn sub(a: P, b: P) -> P {
    (a.0 - b.0, a.1 - b.1)
}

fn add(a: P, b: P) -> P {
    (a.0 + b.0, a.1 + b.1)
}

fn scale(a: P, k: f64) -> P {
    (a.0 * k, a.1 * k)
}

fn cross(a: P, b: P) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn norm(a: P) -> f64 {
    a.0.hypot(a.1)
}

fn dir(angle: f64) -> P {
    (angle.cos(), angle.sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    Band,
    Finger { vertex: usize, slot: usize },
}

/// A closed polyline; segment `i` joins points `i` and `i + 1` (cyclically).
struct Strand {
    points: Vec<P>,
    parts: Vec<Part>,
}

struct Layout {
    centers: Vec<P>,
}

impl Layout {
    fn new(n: usize) -> Layout {
        // slight irregular offsets keep chords through the centre apart
        let centers = (0..n)
            .map(|i| {
                let jitter = 0.05 * (((i * 7919) % 13) as f64 / 13.0);
                dir(2.0 * PI * i as f64 / n as f64 + jitter)
            })
            .collect();
        Layout { centers }
    }
}

struct EdgeCurve {
    from: P,
    control: P,
    to: P,
}

impl EdgeCurve {
    fn at(&self, t: f64) -> P {
        let s = 1.0 - t;
        add(add(scale(self.from, s * s), scale(self.control, 2.0 * s * t)), scale(self.to, t * t))
    }

    /// Parameter where the curve leaves the disk of `GADGET_RADIUS`
    /// around `centre`, searching from the end `from_start` names.
    fn exit(&self, centre: P, from_start: bool) -> f64 {
        let inside = |t: f64| norm(sub(self.at(t), centre)) < GADGET_RADIUS;
        let (mut lo, mut hi) = if from_start { (0.0, 0.5) } else { (1.0, 0.5) };
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Centre line of one component: finger at `u` (if clasped), band, finger
/// at `v` (if clasped).
fn centre_line(curve: &EdgeCurve, ends: [(usize, usize, P, bool); 2]) -> (Vec<P>, Vec<Part>) {
    let [(u, su, cu, clasp_u), (v, sv, cv, clasp_v)] = ends;
    let t0 = curve.exit(cu, true);
    let t1 = curve.exit(cv, false);
    let finger = |centre: P, entry: P| -> Vec<P> {
        let phi = (entry.1 - centre.1).atan2(entry.0 - centre.0);
        let tip = add(centre, scale(dir(phi + PI + FINGER_TURN), 0.85 * GADGET_RADIUS));
        (0..FINGER_SAMPLES).map(|k| add(tip, scale(sub(entry, tip), k as f64 / FINGER_SAMPLES as f64))).collect()
    };
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    if clasp_u {
        let f = finger(cu, curve.at(t0));
        labels.extend(std::iter::repeat_n(Part::Finger { vertex: u, slot: su }, f.len()));
        pts.extend(f);
    }
    for k in 0..=BAND_SAMPLES {
        pts.push(curve.at(t0 + (t1 - t0) * k as f64 / BAND_SAMPLES as f64));
        labels.push(Part::Band);
    }
    if clasp_v {
        let f = finger(cv, curve.at(t1));
        labels.extend(std::iter::repeat_n(Part::Finger { vertex: v, slot: sv }, f.len()));
        pts.extend(f.into_iter().rev());
    }
    // `parts[i]` labels the segment from point i to point i + 1
    let parts = (0..pts.len() - 1).map(|i| if labels[i] == Part::Band { labels[i + 1] } else { labels[i] }).collect();
    (pts, parts)
}

/// The boundary of the band of half-width `BAND_HALF_WIDTH` around `line`.
fn band_boundary(line: &[P], parts: &[Part]) -> Strand {
    let m = line.len();
    let normal = |i: usize| -> P {
        let t = sub(line[(i + 1).min(m - 1)], line[i.saturating_sub(1)]);
        let l = norm(t);
        (-t.1 / l, t.0 / l)
    };
    let mut points = Vec::new();
    let mut out_parts = Vec::new();
    let cap = |points: &mut Vec<P>, out_parts: &mut Vec<Part>, centre: P, from: P, part: Part| {
        let a0 = from.1.atan2(from.0);
        for j in 1..4 {
            points.push(add(centre, scale(dir(a0 - j as f64 * PI / 4.0), BAND_HALF_WIDTH)));
            out_parts.push(part);
        }
    };
    for i in 0..m {
        points.push(add(line[i], scale(normal(i), BAND_HALF_WIDTH)));
        out_parts.push(parts[i.min(m - 2)]);
    }
    cap(&mut points, &mut out_parts, line[m - 1], normal(m - 1), parts[m - 2]);
    for i in (0..m).rev() {
        points.push(sub(line[i], scale(normal(i), BAND_HALF_WIDTH)));
        out_parts.push(parts[i.saturating_sub(1)]);
    }
    cap(&mut points, &mut out_parts, line[0], scale(normal(0), -1.0), parts[0]);
    Strand { points, parts: out_parts }
}

struct Hit {
    strands: [usize; 2],
    segs: [usize; 2],
    params: [f64; 2],
    dirs: [P; 2],
    /// Index into `strands` of the over strand.
    over: usize,
}

fn intersections(strands: &[Strand], key: &[(usize, usize, usize)]) -> Vec<Hit> {
    let segs: Vec<Vec<(P, P)>> = strands
        .iter()
        .map(|s| (0..s.points.len()).map(|i| (s.points[i], s.points[(i + 1) % s.points.len()])).collect())
        .collect();
    let mut hits = Vec::new();
    for a in 0..strands.len() {
        for b in a..strands.len() {
            for (i, &(p, p2)) in segs[a].iter().enumerate() {
                let r = sub(p2, p);
                for (j, &(q, q2)) in segs[b].iter().enumerate() {
                    if a == b {
                        let n = segs[a].len();
                        if j <= i || j == i + 1 || (i == 0 && j == n - 1) {
                            continue;
                        }
                    }
                    if p.0.max(p2.0) < q.0.min(q2.0)
                        || q.0.max(q2.0) < p.0.min(p2.0)
                        || p.1.max(p2.1) < q.1.min(q2.1)
                        || q.1.max(q2.1) < p.1.min(p2.1)
                    {
                        continue;
                    }
                    let u = sub(q2, q);
                    let den = cross(r, u);
                    if den.abs() < 1e-18 {
                        continue;
                    }
                    let t = cross(sub(q, p), u) / den;
                    let s = cross(sub(q, p), r) / den;
                    if !(0.0..1.0).contains(&t) || !(0.0..1.0).contains(&s) {
                        continue;
                    }
                    let over = match (strands[a].parts[i], strands[b].parts[j]) {
                        (Part::Finger { vertex: x, slot: sa }, Part::Finger { vertex: y, slot: sb }) if x == y => {
                            if (sa + 1) % 3 == sb {
                                0
                            } else {
                                1
                            }
                        }
                        _ => {
                            if key[a] <= key[b] {
                                0
                            } else {
                                1
                            }
                        }
                    };
                    hits.push(Hit { strands: [a, b], segs: [i, j], params: [t, s], dirs: [r, u], over });
                }
            }
        }
    }
    hits
}

fn pd_from_hits(strands: &[Strand], hits: &[Hit], sign: i64) -> FramedPDLink {
    // passages along each strand: (segment, parameter, hit, which end)
    let mut passages: Vec<Vec<(usize, f64, usize, usize)>> = vec![Vec::new(); strands.len()];
    for (h, hit) in hits.iter().enumerate() {
        for k in 0..2 {
            passages[hit.strands[k]].push((hit.segs[k], hit.params[k], h, k));
        }
    }
    let mut next_arc = 1u32;
    let mut component_arcs = Vec::new();
    // for each hit and end: (incoming arc, outgoing arc)
    let mut arcs_at = vec![[(0u32, 0u32); 2]; hits.len()];
    for list in passages.iter_mut() {
        list.sort_by(|x, y| (x.0, x.1).partial_cmp(&(y.0, y.1)).unwrap());
        let m = list.len() as u32;
        if m == 0 {
            component_arcs.push(vec![next_arc]);
            next_arc += 1;
            continue;
        }
        let base = next_arc;
        for (k, &(_, _, h, end)) in list.iter().enumerate() {
            let k = k as u32;
            arcs_at[h][end] = (base + (k + m - 1) % m, base + k);
        }
        component_arcs.push((base..base + m).collect());
        next_arc += m;
    }
    let pd_crossings = hits
        .iter()
        .enumerate()
        .map(|(h, hit)| {
            let o = hit.over;
            let un = 1 - o;
            let (ui, uo) = arcs_at[h][un];
            let (oi, oo) = arcs_at[h][o];
            let arcs = if cross(hit.dirs[un], hit.dirs[o]) > 0.0 { [ui, oi, uo, oo] } else { [ui, oo, uo, oi] };
            Crossing { arcs, over: oi }
        })
        .collect();
    let components = strands.len();
    FramedPDLink { components, component_arcs, pd_crossings, framings: vec![1; components], sign }
}

/// Expands a manifold diagram into its `2^v` signed links. Bit `i` of the
/// term index selects the second (trivial) picture at vertex `i`.
pub fn ogl_expand(d: &Diagram) -> Result<OGLExpansion> {
    if !d.skeleton().is_empty() || d.vertices().iter().any(|v| *v != Vertex::Trivalent) {
        return Err(Error::UnsupportedDiagram("OGL takes manifold diagrams".into()));
    }
    if d.has_tadpole() {
        return Err(Error::UnsupportedDiagram("tadpole".into()));
    }
    let source = canonical_oriented(d);
    let n = source.num_vertices();
    let layout = Layout::new(n);
    let edges = source.edges();
    let mut family: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, &(a, b)) in edges.iter().enumerate() {
        let (u, v) = (vertex_of(a), vertex_of(b));
        family.entry((u.min(v), u.max(v))).or_default().push(k);
    }
    let mut curves = Vec::new();
    let mut key = Vec::new();
    for (k, &(a, b)) in edges.iter().enumerate() {
        let (u, v) = (vertex_of(a), vertex_of(b));
        let fam = &family[&(u.min(v), u.max(v))];
        let offset = fam.iter().position(|&x| x == k).unwrap() as f64 - (fam.len() - 1) as f64 / 2.0;
        let (from, to) = (layout.centers[u], layout.centers[v]);
        let chord = sub(to, from);
        let normal = (-chord.1, chord.0);
        // offset is measured from the lower-numbered endpoint so siblings stay nested
        let side = if u < v { 1.0 } else { -1.0 };
        let control = add(scale(add(from, to), 0.5), scale(normal, side * offset * BULGE));
        curves.push(EdgeCurve { from, control, to });
        key.push((u.min(v), u.max(v), k));
    }
    let mut terms = Vec::with_capacity(1 << n);
    for mask in 0..(1usize << n) {
        let clasped = |v: usize| mask >> v & 1 == 0;
        let strands: Vec<Strand> = edges
            .iter()
            .zip(&curves)
            .map(|(&(a, b), curve)| {
                let (u, v) = (vertex_of(a), vertex_of(b));
                let ends = [
                    (u, slot_of(a), layout.centers[u], clasped(u)),
                    (v, slot_of(b), layout.centers[v], clasped(v)),
                ];
                let (line, parts) = centre_line(curve, ends);
                band_boundary(&line, &parts)
            })
            .collect();
        let hits = intersections(&strands, &key);
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        terms.push(pd_from_hits(&strands, &hits, sign));
    }
    Ok(OGLExpansion { source, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::named::*;

    #[test]
    fn theta_expansion() {
        let e = ogl_expand(&theta()).unwrap();
        assert_eq!(e.terms.iter().map(|t| t.sign).collect::<Vec<_>>(), vec![1, -1, -1, 1]);
        for t in &e.terms {
            assert_eq!(t.components, 3);
            assert_eq!(t.framings, vec![1, 1, 1]);
            t.validate().unwrap();
            for i in 0..3 {
                for j in i + 1..3 {
                    assert_eq!(t.linking_number(i, j), 0);
                }
            }
        }
        // both vertices clasped: 3 pairs of fingers at 4 crossings, twice
        assert_eq!(e.terms[0].pd_crossings.len(), 24);
        assert!(e.terms[3].pd_crossings.is_empty());
    }

    #[test]
    fn k4_and_empty() {
        let e = ogl_expand(&k4()).unwrap();
        assert_eq!(e.terms.len(), 16);
        for t in &e.terms {
            assert_eq!(t.components, 6);
            t.validate().unwrap();
        }
        let empty = ogl_expand(&Diagram::empty(0)).unwrap();
        assert_eq!(empty.terms.len(), 1);
        assert_eq!(empty.terms[0].components, 0);
        assert_eq!(empty.terms[0].sign, 1);
    }

    #[test]
    fn tadpoles_are_rejected() {
        assert!(matches!(ogl_expand(&dumbbell()), Err(Error::UnsupportedDiagram(_))));
    }
}
