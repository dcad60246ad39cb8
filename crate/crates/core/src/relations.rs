//! Quotients of diagram spaces by the IHX and STU relations.
//!
//! AS is built into canonical forms, so columns of the relation matrices
//! are the AS-nonzero isomorphism classes of a fixed degree. IHX is used in
//! the cyclic form
//!
//! ```text
//! D(u: e a b, v: e c d) + D(u: e b c, v: e a d) + D(u: e c a, v: e b d) = 0
//! ```
//!
//! around an internal edge `e = uv`, which is `I = H - X` after AS. STU at
//! two adjacent skeleton attachments `p` (lower) and `q` reads
//! `D - D(p, q swapped) = U`, where `U` joins the two edges into a new
//! trivalent vertex with cyclic order (edge at `p`, edge at `q`, stem to `p`).
//!
//! Columns are ordered with diagrams carrying more trivalent vertices
//! first, so pivots eliminate those and bases favour chord-like diagrams.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use num_traits::Zero;

use crate::diagram::{
    canonical_form, canonical_oriented, enumerate_connected, enumerate_diagrams, he, slot_of, vertex_of, Diagram,
    EnumerationLimits, HalfEdge, Space, Vertex,
};
use crate::error::{Error, Result};
use crate::linalg::{Echelon, Matrix, SparseRow};
use crate::sum::{GradedSum, Q};

/// The three diagrams of the IHX relation at the internal edge `(hu, hv)`.
pub fn ihx_terms(d: &Diagram, hu: HalfEdge, hv: HalfEdge) -> [Diagram; 3] {
    let (u, su) = (vertex_of(hu), slot_of(hu));
    let (v, sv) = (vertex_of(hv), slot_of(hv));
    let u1 = he(u, (su + 1) % 3);
    let u2 = he(u, (su + 2) % 3);
    let v1 = he(v, (sv + 1) % 3);
    let v2 = he(v, (sv + 2) % 3);
    let (a, b, c, dd) = (u1, u2, v1, v2);
    let place = |p: HalfEdge, q: HalfEdge, r: HalfEdge, s: HalfEdge| {
        let mut perm: Vec<HalfEdge> = (0..d.partner.len() as u32).collect();
        perm[p as usize] = u1;
        perm[q as usize] = u2;
        perm[r as usize] = v1;
        perm[s as usize] = v2;
        d.relocate(&perm)
    };
    [place(a, b, c, dd), place(b, c, a, dd), place(c, a, b, dd)]
}

/// The `T` and `U` diagrams of the STU relation at positions `pos` and
/// `pos + 1` of skeleton line `line`.
pub fn stu_terms(d: &Diagram, line: usize, pos: usize) -> (Diagram, Diagram) {
    let mut t = d.clone();
    t.skeleton[line].swap(pos, pos + 1);

    let p = d.skeleton[line][pos] as usize;
    let w = d.skeleton[line][pos + 1] as usize;
    let mut perm: Vec<HalfEdge> = (0..d.partner.len() as u32).collect();
    perm[3 * p] = he(w, 0);
    perm[3 * w] = he(w, 1);
    let mut u = d.relocate(&perm);
    u.partner[3 * p] = he(w, 2);
    u.partner[3 * w + 2] = he(p, 0);
    u.vertices[w] = Vertex::Trivalent;
    u.skeleton[line].remove(pos + 1);
    (t, u)
}

/// A basis of one graded piece of a quotient space, with the normal form
/// of every spanning diagram in that basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientBasis {
    pub space: Space,
    pub labels: usize,
    pub degree: usize,
    /// Canonical diagrams forming the basis.
    pub basis: Vec<Diagram>,
    pub(crate) normal_forms: HashMap<Diagram, Vec<(usize, Q)>>,
}

impl QuotientBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of a canonical AS-nonzero diagram of this degree.
    pub fn coordinates(&self, d: &Diagram) -> Option<&[(usize, Q)]> {
        self.normal_forms.get(d).map(|v| v.as_slice())
    }

    /// All spanning diagrams with their normal forms.
    pub fn normal_forms(&self) -> impl Iterator<Item = (&Diagram, &[(usize, Q)])> {
        self.normal_forms.iter().map(|(d, v)| (d, v.as_slice()))
    }
}

fn column_order(a: &Diagram, b: &Diagram) -> std::cmp::Ordering {
    b.num_trivalent().cmp(&a.num_trivalent()).then_with(|| a.cmp(b))
}

/// Builds the quotient from the spanning classes, the relation generators
/// (all classes, AS-zero included) and the relation family.
fn build_quotient(
    space: Space,
    labels: usize,
    degree: usize,
    mut spanning: Vec<Diagram>,
    generators: &[Diagram],
) -> QuotientBasis {
    spanning.sort_by(column_order);
    let col: HashMap<&Diagram, usize> = spanning.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut ech = Echelon::new();
    let mut push = |terms: &[(Diagram, i64)]| {
        let mut entries = Vec::with_capacity(terms.len());
        for (t, c) in terms {
            let sc = canonical_form(t);
            if sc.sign == 0 {
                continue;
            }
            let j = *col.get(&sc.canonical).expect("relation term outside the spanning set");
            entries.push((j, c * sc.sign as i64));
        }
        let row = crate::linalg::sparse_row(entries);
        if !row.is_empty() {
            ech.insert(row);
        }
    };
    for g in generators {
        if space == Space::Aup {
            for (line, pts) in g.skeleton.iter().enumerate() {
                for pos in 0..pts.len().saturating_sub(1) {
                    let (t, u) = stu_terms(g, line, pos);
                    push(&[(g.clone(), 1), (t, -1), (u, -1)]);
                }
            }
        } else {
            for (hu, hv) in g.internal_edges() {
                let [i, h, x] = ihx_terms(g, hu, hv);
                push(&[(i, 1), (h, 1), (x, 1)]);
            }
        }
    }
    let rref = ech.into_rref();
    let mut basis_index = vec![usize::MAX; spanning.len()];
    let mut basis = Vec::new();
    for (j, d) in spanning.iter().enumerate() {
        if !rref.pivots.contains_key(&j) {
            basis_index[j] = basis.len();
            basis.push(d.clone());
        }
    }
    let mut normal_forms = HashMap::with_capacity(spanning.len());
    for (j, d) in spanning.iter().enumerate() {
        let nf = match rref.pivots.get(&j) {
            None => vec![(basis_index[j], Q::from_integer(1.into()))],
            Some(row) => row[1..].iter().map(|(k, x)| (basis_index[*k], -x.clone())).collect(),
        };
        normal_forms.insert(d.clone(), nf);
    }
    QuotientBasis { space, labels, degree, basis, normal_forms }
}

fn compute_quotient(space: Space, labels: usize, degree: usize, limits: &EnumerationLimits) -> Result<QuotientBasis> {
    let labels = if space == Space::Aempty { 0 } else { labels };
    let all = enumerate_diagrams(space, degree, labels, limits, true)?;
    let spanning: Vec<Diagram> = all.iter().filter(|c| c.sign != 0).map(|c| c.canonical.clone()).collect();
    let generators: Vec<Diagram> = all.into_iter().map(|c| c.canonical).collect();
    Ok(build_quotient(space, labels, degree, spanning, &generators))
}

/// Connected part of `A(empty)` in one degree, i.e. its primitives.
fn compute_primitive(degree: usize, limits: &EnumerationLimits) -> Result<QuotientBasis> {
    limits.check(Space::Aempty, degree)?;
    if degree == 0 {
        return Ok(build_quotient(Space::Aempty, 0, 0, Vec::new(), &[]));
    }
    let all = enumerate_connected(2 * degree, &[]);
    let spanning: Vec<Diagram> = all.iter().filter(|c| c.sign != 0).map(|c| c.canonical.clone()).collect();
    let generators: Vec<Diagram> = all.iter().map(|c| c.canonical.clone()).collect();
    Ok(build_quotient(Space::Aempty, 0, degree, spanning, &generators))
}

type BasisKey = (Space, usize, usize, bool);
type Slot<T> = Arc<Mutex<Option<Arc<T>>>>;
type MatrixKey = (&'static str, usize, usize);

/// Shared cache of quotient bases. Each key is computed by one caller
/// while concurrent callers for the same key wait for the result.
#[derive(Debug, Default)]
pub struct Kernel {
    pub limits: EnumerationLimits,
    cache_dir: Option<PathBuf>,
    bases: Mutex<HashMap<BasisKey, Slot<QuotientBasis>>>,
    matrices: Mutex<HashMap<MatrixKey, Slot<Matrix>>>,
}

/// Coordinates of a graded sum in the quotient bases of each degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduced {
    pub space: Space,
    pub labels: usize,
    pub max_degree: usize,
    /// Dense coordinate vector per degree `0..=max_degree`.
    pub parts: Vec<Vec<Q>>,
}

impl Reduced {
    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.iter().all(|x| x.is_zero()))
    }
}

impl Kernel {
    pub fn new(limits: EnumerationLimits) -> Self {
        Kernel { limits, cache_dir: None, bases: Mutex::default(), matrices: Mutex::default() }
    }

    /// Persists computed bases as text files under `dir`.
    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    fn slot(&self, key: BasisKey) -> Slot<QuotientBasis> {
        self.bases.lock().unwrap().entry(key).or_default().clone()
    }

    /// Per-key single-writer cache for derived matrices (kept in memory).
    pub(crate) fn cached_matrix(
        &self,
        key: MatrixKey,
        compute: impl FnOnce() -> Result<Matrix>,
    ) -> Result<Arc<Matrix>> {
        let slot = self.matrices.lock().unwrap().entry(key).or_default().clone();
        let mut guard = slot.lock().unwrap();
        if let Some(m) = guard.as_ref() {
            return Ok(m.clone());
        }
        let m = Arc::new(compute()?);
        *guard = Some(m.clone());
        Ok(m)
    }

    fn cached(&self, key: BasisKey, compute: impl FnOnce() -> Result<QuotientBasis>) -> Result<Arc<QuotientBasis>> {
        let slot = self.slot(key);
        let mut guard = slot.lock().unwrap();
        if let Some(b) = guard.as_ref() {
            return Ok(b.clone());
        }
        let path = self.cache_dir.as_ref().map(|dir| {
            let (space, labels, degree, prim) = key;
            dir.join(format!("{}-{}-{}{}.basis", space.tag(), labels, degree, if prim { "-prim" } else { "" }))
        });
        if let Some(p) = &path {
            if let Ok(text) = std::fs::read_to_string(p) {
                if let Ok(b) = crate::io::parse_basis(&text) {
                    if (b.space, b.labels, b.degree) == (key.0, key.1, key.2) {
                        let b = Arc::new(b);
                        *guard = Some(b.clone());
                        return Ok(b);
                    }
                }
            }
        }
        let b = Arc::new(compute()?);
        if let Some(p) = &path {
            if let Some(dir) = p.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, crate::io::serialize_basis(&b))?;
        }
        *guard = Some(b.clone());
        Ok(b)
    }

    /// The quotient basis of `space` over `labels` labels in one degree.
    pub fn quotient(&self, space: Space, labels: usize, degree: usize) -> Result<Arc<QuotientBasis>> {
        let space = if space == Space::BPlus { Space::B } else { space };
        let labels = if space == Space::Aempty { 0 } else { labels };
        self.limits.check(space, degree)?;
        let limits = self.limits;
        self.cached((space, labels, degree, false), || compute_quotient(space, labels, degree, &limits))
    }

    pub fn dimension(&self, space: Space, labels: usize, degree: usize) -> Result<usize> {
        Ok(self.quotient(space, labels, degree)?.dim())
    }

    /// Dimension of the primitive (connected) part of `A(empty)`.
    pub fn primitive_dimension(&self, degree: usize) -> Result<usize> {
        let limits = self.limits;
        Ok(self.cached((Space::Aempty, 0, degree, true), || compute_primitive(degree, &limits))?.dim())
    }

    /// Coordinates of every homogeneous part in the quotient bases.
    pub fn reduce(&self, s: &GradedSum) -> Result<Reduced> {
        let top = s.top_degree().unwrap_or(0).min(s.max_degree());
        let mut parts = Vec::with_capacity(s.max_degree() + 1);
        for m in 0..=s.max_degree() {
            if m > top {
                // degrees without terms reduce to zero vectors
                let dim = if m <= self.limits.cap(s.space()) {
                    self.quotient(s.space(), s.labels(), m)?.dim()
                } else {
                    0
                };
                parts.push(vec![Q::zero(); dim]);
                continue;
            }
            let qb = self.quotient(s.space(), s.labels(), m)?;
            let mut v = vec![Q::zero(); qb.dim()];
            for (d, c) in s.iter().filter(|(d, _)| d.degree() == m) {
                let nf = qb
                    .coordinates(d)
                    .ok_or_else(|| Error::SpaceMismatch(format!("diagram outside {}: {d:?}", s.space())))?;
                for (k, x) in nf {
                    v[*k] += c * x;
                }
            }
            parts.push(v);
        }
        Ok(Reduced { space: s.space(), labels: s.labels(), max_degree: s.max_degree(), parts })
    }

    /// The sum rewritten over basis diagrams.
    pub fn normalize(&self, s: &GradedSum) -> Result<GradedSum> {
        let r = self.reduce(s)?;
        let mut out = GradedSum::zero(s.space(), s.labels(), s.max_degree());
        for (m, v) in r.parts.iter().enumerate() {
            if v.iter().all(|x| x.is_zero()) {
                continue;
            }
            let qb = self.quotient(s.space(), s.labels(), m)?;
            for (k, x) in v.iter().enumerate() {
                out.add_canonical(qb.basis[k].clone(), x.clone());
            }
        }
        Ok(out)
    }

    /// Equality modulo the relations of the common space.
    pub fn equivalent(&self, a: &GradedSum, b: &GradedSum) -> Result<bool> {
        Ok(self.reduce(&a.minus(b)?)?.is_zero())
    }
}

/// Outcome of checking that STU alone implies AS and IHX on skeleton diagrams.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StuConsequences {
    pub as_checked: usize,
    pub as_failures: usize,
    pub ihx_checked: usize,
    pub ihx_failures: usize,
}

/// Works with oriented diagrams (no AS identification) on `lines` skeleton
/// lines in one degree, and tests whether every AS and IHX relator lies in
/// the span of the STU relators.
pub fn stu_consequences(lines: usize, degree: usize, limits: &EnumerationLimits) -> Result<StuConsequences> {
    let classes = enumerate_diagrams(Space::Aup, degree, lines, limits, true)?;
    let mut oriented: Vec<Diagram> = Vec::new();
    {
        let mut seen = std::collections::HashSet::new();
        for c in classes.iter() {
            let tri: Vec<usize> =
                (0..c.canonical.num_vertices()).filter(|&v| c.canonical.vertices[v] == Vertex::Trivalent).collect();
            for mask in 0u32..(1 << tri.len()) {
                let mut d = c.canonical.clone();
                for (i, &v) in tri.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        d = d.flip_vertex(v);
                    }
                }
                let o = canonical_oriented(&d);
                if seen.insert(o.clone()) {
                    oriented.push(o);
                }
            }
        }
    }
    oriented.sort_by(column_order);
    let col: HashMap<Diagram, usize> = oriented.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
    let row_of = |terms: &[(Diagram, i64)]| -> SparseRow {
        crate::linalg::sparse_row(terms.iter().map(|(t, c)| (col[&canonical_oriented(t)], *c)))
    };
    let mut ech = Echelon::new();
    for g in &oriented {
        for (line, pts) in g.skeleton.iter().enumerate() {
            for pos in 0..pts.len().saturating_sub(1) {
                let (t, u) = stu_terms(g, line, pos);
                ech.insert(row_of(&[(g.clone(), 1), (t, -1), (u, -1)]));
            }
        }
    }
    let mut out = StuConsequences::default();
    for g in &oriented {
        for v in 0..g.num_vertices() {
            if g.vertices[v] == Vertex::Trivalent {
                out.as_checked += 1;
                if !ech.reduce(row_of(&[(g.clone(), 1), (g.flip_vertex(v), 1)])).is_empty() {
                    out.as_failures += 1;
                }
            }
        }
        for (hu, hv) in g.internal_edges() {
            let [i, h, x] = ihx_terms(g, hu, hv);
            out.ihx_checked += 1;
            if !ech.reduce(row_of(&[(i, 1), (h, 1), (x, 1)])).is_empty() {
                out.ihx_failures += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_dimensions_low_degree() {
        let k = Kernel::default();
        let dims: Vec<usize> = (0..=4).map(|m| k.dimension(Space::Aempty, 0, m).unwrap()).collect();
        assert_eq!(dims, vec![1, 1, 2, 3, 6]);
        let prims: Vec<usize> = (1..=4).map(|m| k.primitive_dimension(m).unwrap()).collect();
        assert_eq!(prims, vec![1, 1, 1, 2]);
    }

    #[test]
    fn one_line_dimensions() {
        let k = Kernel::default();
        let dims: Vec<usize> = (0..=3).map(|m| k.dimension(Space::Aup, 1, m).unwrap()).collect();
        assert_eq!(dims, vec![1, 1, 2, 3]);
    }

    #[test]
    fn stu_implies_as_and_ihx_small() {
        let r = stu_consequences(1, 3, &EnumerationLimits::default()).unwrap();
        assert!(r.as_checked > 0 && r.ihx_checked > 0);
        assert_eq!((r.as_failures, r.ihx_failures), (0, 0), "{r:?}");
    }
}
