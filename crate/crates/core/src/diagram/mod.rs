//! Jacobi diagrams: trivalent graphs with oriented vertices, labeled legs
//! and labeled directed skeleton lines.
//!
//! A diagram is stored at the half-edge level. Vertex `v` owns the three
//! half-edge slots `3v`, `3v + 1`, `3v + 2`; univalent vertices (legs and
//! skeleton attachments) use only slot `3v`. The cyclic orientation of a
//! trivalent vertex is the slot order `(0 1 2)`.

mod canon;
mod enumerate;

use std::fmt;

pub use canon::{canonical_form, canonical_oriented, SignedCanonical};
pub use enumerate::{enumerate_connected, enumerate_diagrams, EnumerationLimits};
pub(crate) use enumerate::{permutations, skeleton_placements};

pub(crate) const NONE: u32 = u32::MAX;

/// Index of a half-edge: `3 * vertex + slot`.
pub type HalfEdge = u32;

#[inline]
pub(crate) fn he(v: usize, slot: usize) -> HalfEdge {
    (3 * v + slot) as HalfEdge
}

#[inline]
pub(crate) fn vertex_of(h: HalfEdge) -> usize {
    h as usize / 3
}

#[inline]
pub(crate) fn slot_of(h: HalfEdge) -> usize {
    h as usize % 3
}

/// Vertex kinds. The derived order (attachments, then legs, then trivalent
/// vertices) is the order in which canonical diagrams list their vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    /// A point where an internal edge ends on the skeleton line with this index.
    Attach(u8),
    /// A univalent vertex marked by a label index.
    Leg(u8),
    Trivalent,
}

impl Vertex {
    pub fn valence(self) -> usize {
        match self {
            Vertex::Trivalent => 3,
            _ => 1,
        }
    }
}

/// The diagram spaces, plus `BPlus` which is only used for membership checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Space {
    /// Closed trivalent diagrams.
    Aempty,
    /// Diagrams on labeled directed skeleton lines.
    Aup,
    /// Uni-trivalent diagrams with labeled legs.
    B,
    /// Uni-trivalent diagrams whose every component has a trivalent vertex.
    BPlus,
}

impl Space {
    pub fn tag(self) -> &'static str {
        match self {
            Space::Aempty => "Aempty",
            Space::Aup => "Aup",
            Space::B => "B",
            Space::BPlus => "BplusX",
        }
    }

    pub fn from_tag(s: &str) -> Option<Space> {
        match s {
            "Aempty" => Some(Space::Aempty),
            "Aup" => Some(Space::Aup),
            "B" => Some(Space::B),
            "BplusX" | "Bplus" => Some(Space::BPlus),
            _ => None,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Diagram {
    pub(crate) vertices: Vec<Vertex>,
    pub(crate) partner: Vec<HalfEdge>,
    /// Attachment vertex ids per skeleton line, from the tail of the line upward.
    pub(crate) skeleton: Vec<Vec<u32>>,
}

/// First violated membership invariant found by [`Diagram::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Diagram {
    /// The empty diagram with `lines` skeleton lines (0 for `Aempty`/`B`).
    pub fn empty(lines: usize) -> Diagram {
        Diagram { vertices: Vec::new(), partner: Vec::new(), skeleton: vec![Vec::new(); lines] }
    }

    /// Builds a diagram from raw parts, checking the structural invariants.
    pub fn from_parts(
        vertices: Vec<Vertex>,
        partner: Vec<HalfEdge>,
        skeleton: Vec<Vec<u32>>,
    ) -> Result<Diagram, Violation> {
        let d = Diagram { vertices, partner, skeleton };
        d.check_structure()?;
        Ok(d)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn skeleton(&self) -> &[Vec<u32>] {
        &self.skeleton
    }

    pub fn num_lines(&self) -> usize {
        self.skeleton.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Partner of half-edge `(v, slot)`.
    pub fn partner(&self, v: usize, slot: usize) -> (usize, usize) {
        let p = self.partner[3 * v + slot];
        (vertex_of(p), slot_of(p))
    }


    pub fn num_trivalent(&self) -> usize {
        self.vertices.iter().filter(|v| **v == Vertex::Trivalent).count()
    }

    pub fn num_legs(&self) -> usize {
        self.vertices.iter().filter(|v| matches!(v, Vertex::Leg(_))).count()
    }

    pub fn num_attachments(&self) -> usize {
        self.vertices.iter().filter(|v| matches!(v, Vertex::Attach(_))).count()
    }

    /// Half the number of trivalent vertices, legs and skeleton attachments.
    /// Skeleton endpoints are not vertices of the stored graph.
    pub fn degree(&self) -> usize {
        self.vertices.len() / 2
    }

    /// Number of legs carrying each label, indexed by label.
    pub fn leg_counts(&self, labels: usize) -> Vec<usize> {
        let mut counts = vec![0; labels];
        for v in &self.vertices {
            if let Vertex::Leg(l) = v {
                let l = *l as usize;
                if l >= counts.len() {
                    counts.resize(l + 1, 0);
                }
                counts[l] += 1;
            }
        }
        counts
    }

    /// All edges as pairs of half-edges `(h, partner(h))` with `h < partner(h)`.
    pub fn edges(&self) -> Vec<(HalfEdge, HalfEdge)> {
        let mut out = Vec::new();
        for (h, &p) in self.partner.iter().enumerate() {
            if p != NONE && (h as u32) < p {
                out.push((h as u32, p));
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.edges().len()
    }

    /// Edges whose endpoints are two distinct trivalent vertices.
    pub fn internal_edges(&self) -> Vec<(HalfEdge, HalfEdge)> {
        self.edges()
            .into_iter()
            .filter(|&(a, b)| {
                let (u, v) = (vertex_of(a), vertex_of(b));
                u != v
                    && self.vertices[u] == Vertex::Trivalent
                    && self.vertices[v] == Vertex::Trivalent
            })
            .collect()
    }

    /// True if some trivalent vertex carries a self-loop.
    pub fn has_tadpole(&self) -> bool {
        self.edges().iter().any(|&(a, b)| vertex_of(a) == vertex_of(b))
    }

    /// Connected components of the graph (the skeleton is ignored), each
    /// as a sorted list of vertex ids, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![start];
            comp[start] = id;
            let mut members = Vec::new();
            while let Some(v) = stack.pop() {
                members.push(v);
                for s in 0..self.vertices[v].valence() {
                    let w = vertex_of(self.partner[3 * v + s]);
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// The sub-diagram induced on a union of components. Skeleton lines are
    /// kept (restricted to the selected attachments).
    pub fn restrict(&self, members: &[usize]) -> Diagram {
        let mut map = vec![usize::MAX; self.vertices.len()];
        for (i, &v) in members.iter().enumerate() {
            map[v] = i;
        }
        let vertices: Vec<Vertex> = members.iter().map(|&v| self.vertices[v]).collect();
        let mut partner = vec![NONE; 3 * members.len()];
        for (i, &v) in members.iter().enumerate() {
            for s in 0..self.vertices[v].valence() {
                let p = self.partner[3 * v + s];
                let w = map[vertex_of(p)];
                debug_assert!(w != usize::MAX, "restriction must be a union of components");
                partner[3 * i + s] = he(w, slot_of(p));
            }
        }
        let skeleton = self
            .skeleton
            .iter()
            .map(|line| {
                line.iter()
                    .filter(|&&a| map[a as usize] != usize::MAX)
                    .map(|&a| map[a as usize] as u32)
                    .collect()
            })
            .collect();
        Diagram { vertices, partner, skeleton }
    }

    /// Disjoint union. Skeleton lines are concatenated line by line, with
    /// `self` below `other`; this is the stacking product on skeleton diagrams.
    pub fn disjoint_union(&self, other: &Diagram) -> Diagram {
        let off = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut partner = self.partner.clone();
        partner.extend(other.partner.iter().map(|&p| if p == NONE { NONE } else { p + 3 * off as u32 }));
        let lines = self.skeleton.len().max(other.skeleton.len());
        let mut skeleton = vec![Vec::new(); lines];
        for (i, line) in self.skeleton.iter().enumerate() {
            skeleton[i].extend_from_slice(line);
        }
        for (i, line) in other.skeleton.iter().enumerate() {
            skeleton[i].extend(line.iter().map(|&a| a + off as u32));
        }
        Diagram { vertices, partner, skeleton }
    }

    /// Copy with the cyclic order of trivalent vertex `v` reversed
    /// (slots 1 and 2 exchanged).
    pub fn flip_vertex(&self, v: usize) -> Diagram {
        assert_eq!(self.vertices[v], Vertex::Trivalent);
        let mut perm: Vec<HalfEdge> = (0..self.partner.len() as u32).collect();
        perm[3 * v + 1] = he(v, 2);
        perm[3 * v + 2] = he(v, 1);
        self.relocate(&perm)
    }

    /// Moves half-edge `h` to position `perm[h]`, keeping the pairing.
    pub(crate) fn relocate(&self, perm: &[HalfEdge]) -> Diagram {
        let mut partner = vec![NONE; self.partner.len()];
        for (h, &p) in self.partner.iter().enumerate() {
            if p != NONE {
                partner[perm[h] as usize] = perm[p as usize];
            }
        }
        Diagram { vertices: self.vertices.clone(), partner, skeleton: self.skeleton.clone() }
    }

    /// Relabels legs (or skeleton lines) through `map`.
    pub fn map_labels(&self, map: impl Fn(u8) -> u8) -> Diagram {
        let mut d = self.clone();
        for v in d.vertices.iter_mut() {
            match v {
                Vertex::Leg(l) => *l = map(*l),
                Vertex::Attach(l) => *l = map(*l),
                Vertex::Trivalent => {}
            }
        }
        if !d.skeleton.is_empty() {
            let lines = d.skeleton.iter().enumerate().map(|(i, _)| map(i as u8) as usize).max().unwrap_or(0) + 1;
            let mut skeleton = vec![Vec::new(); lines.max(d.skeleton.len())];
            for (i, line) in self.skeleton.iter().enumerate() {
                skeleton[map(i as u8) as usize].extend_from_slice(line);
            }
            d.skeleton = skeleton;
        }
        d
    }

    /// Internal consistency: valences, symmetric pairing, skeleton lists.
    pub fn check_structure(&self) -> Result<(), Violation> {
        let n = self.vertices.len();
        if self.partner.len() != 3 * n {
            return Err(Violation(format!("expected {} half-edge slots, found {}", 3 * n, self.partner.len())));
        }
        for v in 0..n {
            let k = self.vertices[v].valence();
            for s in 0..3 {
                let p = self.partner[3 * v + s];
                if s >= k {
                    if p != NONE {
                        return Err(Violation(format!("univalent vertex {v} has a second half-edge")));
                    }
                    continue;
                }
                if p == NONE || p as usize >= 3 * n {
                    return Err(Violation(format!("half-edge {v}.{s} is not paired")));
                }
                if self.partner[p as usize] != he(v, s) {
                    return Err(Violation(format!("pairing at {v}.{s} is not symmetric")));
                }
                if p == he(v, s) {
                    return Err(Violation(format!("half-edge {v}.{s} paired with itself")));
                }
                if slot_of(p) >= self.vertices[vertex_of(p)].valence() {
                    return Err(Violation(format!("half-edge {v}.{s} paired with an unused slot")));
                }
            }
        }
        let mut seen = vec![false; n];
        for (line, attachments) in self.skeleton.iter().enumerate() {
            for &a in attachments {
                let a = a as usize;
                if a >= n || self.vertices[a] != Vertex::Attach(line as u8) {
                    return Err(Violation(format!("skeleton line {line} lists a non-attachment vertex {a}")));
                }
                if seen[a] {
                    return Err(Violation(format!("attachment {a} listed twice")));
                }
                seen[a] = true;
            }
        }
        for (v, kind) in self.vertices.iter().enumerate() {
            if matches!(kind, Vertex::Attach(_)) && !seen[v] {
                return Err(Violation(format!("attachment {v} is not on its skeleton line")));
            }
        }
        Ok(())
    }

    /// Checks membership in `space` with `labels` labels (or skeleton lines).
    pub fn validate(&self, space: Space, labels: usize) -> Result<(), Violation> {
        self.check_structure()?;
        for (v, kind) in self.vertices.iter().enumerate() {
            match kind {
                Vertex::Leg(l) | Vertex::Attach(l) if *l as usize >= labels => {
                    return Err(Violation(format!("vertex {v} uses label index {l} outside the label set")));
                }
                _ => {}
            }
        }
        let comps = self.components();
        match space {
            Space::Aempty => {
                if self.num_legs() > 0 || self.num_attachments() > 0 || !self.skeleton.is_empty() {
                    return Err(Violation("manifold diagrams have no legs and no skeleton".into()));
                }
            }
            Space::B | Space::BPlus => {
                if self.num_attachments() > 0 || !self.skeleton.is_empty() {
                    return Err(Violation("uni-trivalent diagrams have no skeleton".into()));
                }
                for c in &comps {
                    if !c.iter().any(|&v| matches!(self.vertices[v], Vertex::Leg(_))) {
                        return Err(Violation(format!("component containing vertex {} has no leg", c[0])));
                    }
                    if space == Space::BPlus && !c.iter().any(|&v| self.vertices[v] == Vertex::Trivalent) {
                        return Err(Violation(format!(
                            "component containing vertex {} has no trivalent vertex",
                            c[0]
                        )));
                    }
                }
            }
            Space::Aup => {
                if self.num_legs() > 0 {
                    return Err(Violation("skeleton diagrams have no legs".into()));
                }
                if self.skeleton.len() != labels {
                    return Err(Violation(format!(
                        "expected {labels} skeleton lines, found {}",
                        self.skeleton.len()
                    )));
                }
                for c in &comps {
                    if !c.iter().any(|&v| matches!(self.vertices[v], Vertex::Attach(_))) {
                        return Err(Violation(format!(
                            "component containing vertex {} does not touch the skeleton",
                            c[0]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Diagram[")?;
        for (v, kind) in self.vertices.iter().enumerate() {
            let k = kind.valence();
            let ps: Vec<String> = (0..k)
                .map(|s| {
                    let p = self.partner[3 * v + s];
                    format!("{}.{}", vertex_of(p), slot_of(p))
                })
                .collect();
            match kind {
                Vertex::Trivalent => write!(f, " {v}:T({})", ps.join(","))?,
                Vertex::Leg(l) => write!(f, " {v}:L{l}({})", ps.join(","))?,
                Vertex::Attach(l) => write!(f, " {v}:A{l}({})", ps.join(","))?,
            }
        }
        if !self.skeleton.is_empty() {
            write!(f, " | skel {:?}", self.skeleton)?;
        }
        write!(f, " ]")
    }
}

/// Incremental construction of diagrams. Slots are filled in call order, so
/// the cyclic order at a trivalent vertex is the order of its `connect` calls.
#[derive(Clone, Debug)]
pub struct DiagramBuilder {
    vertices: Vec<Vertex>,
    partner: Vec<HalfEdge>,
    used: Vec<usize>,
    skeleton: Vec<Vec<u32>>,
}

impl DiagramBuilder {
    /// A builder for a diagram on `lines` skeleton lines (0 for `Aempty`/`B`).
    pub fn new(lines: usize) -> Self {
        DiagramBuilder { vertices: Vec::new(), partner: Vec::new(), used: Vec::new(), skeleton: vec![Vec::new(); lines] }
    }

    fn push(&mut self, kind: Vertex) -> usize {
        self.vertices.push(kind);
        self.partner.extend_from_slice(&[NONE; 3]);
        self.used.push(0);
        self.vertices.len() - 1
    }

    pub fn trivalent(&mut self) -> usize {
        self.push(Vertex::Trivalent)
    }

    pub fn leg(&mut self, label: u8) -> usize {
        self.push(Vertex::Leg(label))
    }

    /// Adds an attachment at the current top of skeleton line `line`.
    pub fn attach(&mut self, line: u8) -> usize {
        let v = self.push(Vertex::Attach(line));
        if self.skeleton.len() <= line as usize {
            self.skeleton.resize(line as usize + 1, Vec::new());
        }
        self.skeleton[line as usize].push(v as u32);
        v
    }

    fn take_slot(&mut self, v: usize) -> HalfEdge {
        let s = self.used[v];
        assert!(s < self.vertices[v].valence(), "vertex {v} has no free slot");
        self.used[v] += 1;
        he(v, s)
    }

    /// Joins the next free slot of `a` to the next free slot of `b`.
    pub fn connect(&mut self, a: usize, b: usize) -> &mut Self {
        let ha = self.take_slot(a);
        let hb = self.take_slot(b);
        self.partner[ha as usize] = hb;
        self.partner[hb as usize] = ha;
        self
    }

    pub fn build(self) -> Result<Diagram, Violation> {
        Diagram::from_parts(self.vertices, self.partner, self.skeleton)
    }
}

/// Frequently used small diagrams.
pub mod named {
    use super::{Diagram, DiagramBuilder};

    /// The theta graph: two vertices joined by three edges, both oriented
    /// the same way under the edge bijection.
    pub fn theta() -> Diagram {
        let mut b = DiagramBuilder::new(0);
        let u = b.trivalent();
        let v = b.trivalent();
        b.connect(u, v).connect(u, v).connect(u, v);
        b.build().unwrap()
    }

    /// Two tadpoles joined by an edge.
    pub fn dumbbell() -> Diagram {
        let mut b = DiagramBuilder::new(0);
        let u = b.trivalent();
        let v = b.trivalent();
        b.connect(u, u).connect(u, v).connect(v, v);
        b.build().unwrap()
    }

    /// The complete graph on four vertices with orientations induced from a
    /// planar drawing.
    pub fn k4() -> Diagram {
        let mut b = DiagramBuilder::new(0);
        let v: Vec<usize> = (0..4).map(|_| b.trivalent()).collect();
        // outer triangle 0,1,2 with centre 3
        b.connect(v[0], v[1]).connect(v[1], v[2]).connect(v[2], v[0]);
        b.connect(v[0], v[3]).connect(v[1], v[3]).connect(v[2], v[3]);
        b.build().unwrap()
    }

    pub fn strut(x: u8, y: u8) -> Diagram {
        let mut b = DiagramBuilder::new(0);
        let p = b.leg(x);
        let q = b.leg(y);
        b.connect(p, q);
        b.build().unwrap()
    }

    /// The wheel with one leg per entry of `labels`, legs attached in
    /// cyclic order around the rim.
    pub fn wheel(labels: &[u8]) -> Diagram {
        let k = labels.len();
        assert!(k >= 1);
        let mut b = DiagramBuilder::new(0);
        let rim: Vec<usize> = (0..k).map(|_| b.trivalent()).collect();
        for i in 0..k {
            b.connect(rim[i], rim[(i + 1) % k]);
        }
        for (i, &l) in labels.iter().enumerate() {
            let leg = b.leg(l);
            b.connect(rim[i], leg);
        }
        b.build().unwrap()
    }

    /// One trivalent vertex with three legs, in the given cyclic order.
    pub fn y_graph(a: u8, b_: u8, c: u8) -> Diagram {
        let mut b = DiagramBuilder::new(0);
        let v = b.trivalent();
        for l in [a, b_, c] {
            let leg = b.leg(l);
            b.connect(v, leg);
        }
        b.build().unwrap()
    }

    /// A single chord between lines `a` and `b` (possibly equal) on a
    /// skeleton with `lines` lines.
    pub fn chord(a: u8, b_: u8, lines: usize) -> Diagram {
        let mut b = DiagramBuilder::new(lines);
        let p = b.attach(a);
        let q = b.attach(b_);
        b.connect(p, q);
        b.build().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;

    #[test]
    fn degrees() {
        assert_eq!(Diagram::empty(0).degree(), 0);
        assert_eq!(theta().degree(), 1);
        assert_eq!(strut(0, 1).degree(), 1);
        assert_eq!(wheel(&[0, 0]).degree(), 2);
        assert_eq!(chord(0, 0, 1).degree(), 1);
    }

    #[test]
    fn membership() {
        assert!(theta().validate(Space::B, 1).is_err());
        assert!(theta().validate(Space::Aempty, 0).is_ok());
        assert!(strut(0, 1).validate(Space::B, 2).is_ok());
        assert!(strut(0, 1).validate(Space::BPlus, 2).is_err());
        assert!(wheel(&[0, 0]).validate(Space::BPlus, 1).is_ok());
        assert!(strut(0, 1).validate(Space::B, 1).is_err());
        assert!(chord(0, 1, 2).validate(Space::Aup, 2).is_ok());
        assert!(chord(0, 1, 2).validate(Space::B, 2).is_err());
        // a closed theta floating next to the skeleton is not connected modulo it
        let d = chord(0, 0, 1).disjoint_union(&theta());
        assert!(d.validate(Space::Aup, 1).is_err());
    }

    #[test]
    fn edge_count_identity() {
        for d in [theta(), dumbbell(), k4(), wheel(&[0, 1, 0]), y_graph(0, 0, 1)] {
            assert_eq!(2 * d.num_edges(), 3 * d.num_trivalent() + d.num_legs() + d.num_attachments());
        }
    }

    #[test]
    fn components_of_union() {
        let d = theta().disjoint_union(&strut(0, 0));
        let c = d.components();
        assert_eq!(c, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(d.restrict(&c[1]), strut(0, 0));
    }

    #[test]
    fn broken_pairing_is_reported() {
        let mut d = theta();
        d.partner[0] = he(1, 1);
        assert!(d.check_structure().is_err());
    }
}
