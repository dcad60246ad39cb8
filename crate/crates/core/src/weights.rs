//! Lie algebra weight systems and the formal Wick pairing.
//!
//! A trivalent vertex with cyclic half-edges `(h0 h1 h2)` carries the
//! lowered structure constants `f_{abc}` in that index order, and every
//! edge carries the inverse metric `g^{ab}`. Legs stay open: a leg edge
//! still carries `g^{ab}`, and its free index becomes the variable `x_b`
//! for the leg label `x`.
//!
//! Signs: the diagram side pairs with `exp(-1/2 sum l^{xy} strut_{dx dy})`;
//! on the Lie side this is the Wick pairing with covariance
//! `C[(x,a),(y,b)] = -l^{xy} g_{ab}`, i.e. `-Q^{-1}` for `Q = L (x) g^{-1}`,
//! the inverse metric being the tensor carried by edges.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Zero};

use crate::diagram::{vertex_of, Diagram, Space, Vertex};
use crate::error::{Error, Result};
use crate::gaussian::LinkingMatrix;
use crate::linalg::Matrix;
use crate::sum::{format_q, qi, GradedSum, Q};

/// A Lie algebra with an invariant metric, in a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieData {
    dim: usize,
    metric: Matrix,
    metric_inv: Matrix,
    /// `f_{abc}` with all indices lowered, row-major.
    f: Vec<Q>,
}

impl LieData {
    /// Validates symmetry and invertibility of the metric, total
    /// antisymmetry of `f` and the Jacobi identity
    /// `sum (f_{abe} f_{ecd} + f_{bce} f_{ead} + f_{cae} f_{ebd}) = 0`,
    /// the repeated index contracted through the inverse metric.
    pub fn new(metric: Matrix, f: Vec<Q>) -> Result<LieData> {
        let dim = metric.rows;
        if dim == 0 || metric.cols != dim || f.len() != dim * dim * dim {
            return Err(Error::BadLieData("shape mismatch".into()));
        }
        if !metric.is_symmetric() {
            return Err(Error::BadLieData("metric is not symmetric".into()));
        }
        let metric_inv = metric.inverse().ok_or_else(|| Error::BadLieData("metric is singular".into()))?;
        let g = LieData { dim, metric, metric_inv, f };
        g.check_antisymmetry()?;
        g.check_jacobi()?;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &Matrix {
        &self.metric
    }

    pub fn metric_inverse(&self) -> &Matrix {
        &self.metric_inv
    }

    pub fn f(&self, a: usize, b: usize, c: usize) -> &Q {
        &self.f[(a * self.dim + b) * self.dim + c]
    }

    fn check_antisymmetry(&self) -> Result<()> {
        let n = self.dim;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let x = self.f(a, b, c);
                    if self.f(b, c, a) != x || *self.f(b, a, c) != -x.clone() {
                        return Err(Error::BadLieData(format!("f is not totally antisymmetric at ({a} {b} {c})")));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_jacobi(&self) -> Result<()> {
        let n = self.dim;
        // raised last index: F[a][b][e'] = sum_e f_{abe} g^{e e'}
        let mut raised = vec![Q::zero(); n * n * n];
        for a in 0..n {
            for b in 0..n {
                for e in 0..n {
                    let fe = self.f(a, b, e);
                    if fe.is_zero() {
                        continue;
                    }
                    for e2 in 0..n {
                        raised[(a * n + b) * n + e2] += fe * &self.metric_inv[(e, e2)];
                    }
                }
            }
        }
        let r = |a: usize, b: usize, e: usize| &raised[(a * n + b) * n + e];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut s = Q::zero();
                        for e in 0..n {
                            s += r(a, b, e) * self.f(e, c, d);
                            s += r(b, c, e) * self.f(e, a, d);
                            s += r(c, a, e) * self.f(e, b, d);
                        }
                        if !s.is_zero() {
                            return Err(Error::BadLieData(format!("Jacobi identity fails at ({a} {b} {c} {d})")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// so(3): `f_{abc} = epsilon_{abc}`, metric the identity.
    pub fn so3() -> LieData {
        let mut f = vec![Q::zero(); 27];
        for (a, b, c, s) in [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1), (1, 0, 2, -1), (0, 2, 1, -1), (2, 1, 0, -1)] {
            f[(a * 3 + b) * 3 + c] = qi(s);
        }
        LieData::new(Matrix::identity(3), f).expect("so(3) data is valid")
    }

    /// sl(2) in the basis `H, E + F, E - F` (orthogonal for the trace form
    /// of the defining representation), with `g_{ab} = tr(X_a X_b)` and
    /// `f_{abc} = tr([X_a, X_b] X_c)`.
    pub fn sl2() -> LieData {
        type M2 = [[i64; 2]; 2];
        let basis: [M2; 3] = [[[1, 0], [0, -1]], [[0, 1], [1, 0]], [[0, 1], [-1, 0]]];
        let mul = |x: &M2, y: &M2| -> M2 {
            let mut z = [[0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        z[i][j] += x[i][k] * y[k][j];
                    }
                }
            }
            z
        };
        let tr = |x: &M2| x[0][0] + x[1][1];
        let mut metric = Matrix::zeros(3, 3);
        let mut f = vec![Q::zero(); 27];
        for a in 0..3 {
            for b in 0..3 {
                metric[(a, b)] = qi(tr(&mul(&basis[a], &basis[b])));
                let ab = mul(&basis[a], &basis[b]);
                let ba = mul(&basis[b], &basis[a]);
                let br = [[ab[0][0] - ba[0][0], ab[0][1] - ba[0][1]], [ab[1][0] - ba[1][0], ab[1][1] - ba[1][1]]];
                for c in 0..3 {
                    f[(a * 3 + b) * 3 + c] = qi(tr(&mul(&br, &basis[c])));
                }
            }
        }
        LieData::new(metric, f).expect("sl(2) data is valid")
    }
}

/// Dense tensor over named indices (half-edge ids).
struct Tensor {
    idx: Vec<u32>,
    data: Vec<Q>,
}

impl Tensor {
    fn scalar(x: Q) -> Tensor {
        Tensor { idx: Vec::new(), data: vec![x] }
    }

    fn outer(&self, other_idx: &[u32], other: &[Q]) -> Tensor {
        let mut data = Vec::with_capacity(self.data.len() * other.len());
        for x in &self.data {
            for y in other {
                data.push(if x.is_zero() || y.is_zero() { Q::zero() } else { x * y });
            }
        }
        let mut idx = self.idx.clone();
        idx.extend_from_slice(other_idx);
        Tensor { idx, data }
    }

    /// Contracts positions `i < j` against the matrix `m`.
    fn trace_pair(&self, i: usize, j: usize, m: &Matrix, dim: usize) -> Tensor {
        let k = self.idx.len();
        let stride = |p: usize| dim.pow((k - 1 - p) as u32);
        let (si, sj) = (stride(i), stride(j));
        let idx: Vec<u32> = self.idx.iter().enumerate().filter(|&(p, _)| p != i && p != j).map(|(_, &h)| h).collect();
        let mut data = vec![Q::zero(); dim.pow(idx.len() as u32)];
        for (pos, x) in self.data.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let (a, b) = ((pos / si) % dim, (pos / sj) % dim);
            let w = &m[(a, b)];
            if w.is_zero() {
                continue;
            }
            // drop digits i and j
            let mut out = 0;
            for p in 0..k {
                if p == i || p == j {
                    continue;
                }
                out = out * dim + (pos / stride(p)) % dim;
            }
            data[out] += x * w;
        }
        Tensor { idx, data }
    }

    /// Replaces index at position `i` by `new`, contracting through `m`:
    /// `R[.. b ..] = sum_a T[.. a ..] m[a, b]`.
    fn transform(&self, i: usize, new: u32, m: &Matrix, dim: usize) -> Tensor {
        let k = self.idx.len();
        let si = dim.pow((k - 1 - i) as u32);
        let mut data = vec![Q::zero(); self.data.len()];
        for (pos, x) in self.data.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let a = (pos / si) % dim;
            let base = pos - a * si;
            for b in 0..dim {
                let w = &m[(a, b)];
                if !w.is_zero() {
                    data[base + b * si] += x * w;
                }
            }
        }
        let mut idx = self.idx.clone();
        idx[i] = new;
        Tensor { idx, data }
    }
}

/// Contracts the network of a diagram. Returns the open indices (leg
/// half-edges) and the tensor over them.
fn contract(g: &LieData, d: &Diagram) -> Tensor {
    let dim = g.dim;
    let n = d.num_vertices();
    let is_tri = |v: usize| d.vertices()[v] == Vertex::Trivalent;
    let mut t = Tensor::scalar(Q::one());
    // struts first: legs joined directly
    let mut done_edge = vec![false; 3 * n];
    for (a, b) in d.edges() {
        if !is_tri(vertex_of(a)) && !is_tri(vertex_of(b)) {
            t = t.outer(&[a, b], &g.metric_inv.data);
            done_edge[a as usize] = true;
            done_edge[b as usize] = true;
        }
    }
    // breadth-first over trivalent vertices keeps the open boundary small
    let mut placed = vec![false; n];
    let mut order = Vec::new();
    for start in 0..n {
        if !is_tri(start) || placed[start] {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        placed[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for s in 0..3 {
                let w = vertex_of(d.partner[3 * v + s]);
                if is_tri(w) && !placed[w] {
                    placed[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut present = vec![false; n];
    for &v in &order {
        let hs = [3 * v as u32, 3 * v as u32 + 1, 3 * v as u32 + 2];
        t = t.outer(&hs, &g.f);
        present[v] = true;
        for &h in &hs {
            if done_edge[h as usize] {
                continue;
            }
            let p = d.partner[h as usize];
            let w = vertex_of(p);
            if is_tri(w) && !present[w] {
                continue;
            }
            done_edge[h as usize] = true;
            done_edge[p as usize] = true;
            let i = t.idx.iter().position(|&x| x == h).unwrap();
            if is_tri(w) {
                let j = t.idx.iter().position(|&x| x == p).unwrap();
                let (i, j) = (i.min(j), i.max(j));
                // g^{ab} is symmetric, so the order of the pair is immaterial
                t = t.trace_pair(i, j, &g.metric_inv, dim);
            } else {
                t = t.transform(i, p, &g.metric_inv, dim);
            }
        }
    }
    t
}

/// The weight of a closed diagram.
pub fn tg_diagram(g: &LieData, d: &Diagram) -> Q {
    debug_assert_eq!(d.num_legs() + d.num_attachments(), 0);
    contract(g, d).data[0].clone()
}

/// The weight system on `A(empty)`.
pub fn tg_closed(g: &LieData, s: &GradedSum) -> Result<Q> {
    s.check_space(Space::Aempty)?;
    let mut out = Q::zero();
    for (d, c) in s.iter() {
        out += c * tg_diagram(g, d);
    }
    Ok(out)
}

/// Monomial in the variables `x_a` (`var = label * dim + a`), sorted.
pub type Monomial = Vec<u16>;

/// Polynomial in the variables `x_a`, `x` a label and `a` a basis index,
/// graded by the number of trivalent vertices of the source diagrams.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyTensor {
    pub labels: usize,
    pub dim: usize,
    pub terms: BTreeMap<(usize, Monomial), Q>,
}

impl PolyTensor {
    pub fn zero(labels: usize, dim: usize) -> Self {
        PolyTensor { labels, dim, terms: BTreeMap::new() }
    }

    pub fn add(&mut self, grade: usize, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((grade, m)).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn var(&self, label: usize, a: usize) -> u16 {
        (label * self.dim + a) as u16
    }

    /// Product, grades adding.
    pub fn mul(&self, other: &PolyTensor) -> PolyTensor {
        let mut out = PolyTensor::zero(self.labels, self.dim);
        for ((g1, m1), c1) in &self.terms {
            for ((g2, m2), c2) in &other.terms {
                let mut m = m1.clone();
                m.extend_from_slice(m2);
                m.sort_unstable();
                out.add(g1 + g2, m, c1 * c2);
            }
        }
        out
    }

    /// Evaluation at a point, all grades summed.
    pub fn eval(&self, point: &[Q]) -> Q {
        let mut out = Q::zero();
        for ((_, m), c) in &self.terms {
            let mut x = c.clone();
            for &v in m {
                x *= &point[v as usize];
            }
            out += x;
        }
        out
    }
}

/// Weight of a diagram with legs as a polynomial.
pub fn tg_open_diagram(g: &LieData, d: &Diagram, labels: usize) -> PolyTensor {
    let t = contract(g, d);
    let dim = g.dim;
    let leg_label: Vec<usize> = t
        .idx
        .iter()
        .map(|&h| match d.vertices()[vertex_of(h)] {
            Vertex::Leg(l) => l as usize,
            _ => unreachable!("only leg indices stay open"),
        })
        .collect();
    let k = t.idx.len();
    let grade = d.num_trivalent();
    let mut out = PolyTensor::zero(labels, dim);
    for (pos, x) in t.data.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let mut m: Monomial = (0..k)
            .map(|p| {
                let a = (pos / dim.pow((k - 1 - p) as u32)) % dim;
                (leg_label[p] * dim + a) as u16
            })
            .collect();
        m.sort_unstable();
        out.add(grade, m, x.clone());
    }
    out
}

/// The weight system on `B(X)`.
pub fn tg_open(g: &LieData, s: &GradedSum) -> Result<PolyTensor> {
    s.check_space(Space::B)?;
    let mut out = PolyTensor::zero(s.labels(), g.dim);
    for (d, c) in s.iter() {
        for ((gr, m), x) in tg_open_diagram(g, d, s.labels()).terms {
            out.add(gr, m, x * c);
        }
    }
    Ok(out)
}

/// Formal Wick pairing of the perturbation polynomial `p` (constant term
/// included) against the Gaussian with covariance `-l^{xy} g_{ab}`.
/// Terms of grade above `2 * max_degree` (trivalent vertices) are dropped,
/// matching the truncation of formal Gaussian integration.
pub fn wick_pair(p: &PolyTensor, l: &LinkingMatrix, g: &LieData, max_degree: usize) -> Result<Q> {
    let inv = l.inverse()?;
    if inv.rows != p.labels || g.dim != p.dim {
        return Err(Error::SpaceMismatch("polynomial variables do not match the covariance".into()));
    }
    let dim = g.dim;
    let cov = |u: u16, v: u16| -> Q {
        let (x, a) = (u as usize / dim, u as usize % dim);
        let (y, b) = (v as usize / dim, v as usize % dim);
        -(&inv[(x, y)] * &g.metric[(a, b)])
    };
    let mut out = Q::zero();
    for ((grade, m), c) in &p.terms {
        if *grade > 2 * max_degree || m.len() % 2 == 1 {
            continue;
        }
        out += c * hafnian(m, &cov);
    }
    Ok(out)
}

/// Sum over perfect matchings of the positions of `m` of the product of
/// `cov` over matched pairs.
fn hafnian(m: &[u16], cov: &dyn Fn(u16, u16) -> Q) -> Q {
    if m.is_empty() {
        return Q::one();
    }
    let first = m[0];
    let mut out = Q::zero();
    for i in 1..m.len() {
        let w = cov(first, m[i]);
        if w.is_zero() {
            continue;
        }
        let rest: Vec<u16> = m[1..].iter().enumerate().filter(|(j, _)| j + 1 != i).map(|(_, &v)| v).collect();
        out += w * hafnian(&rest, cov);
    }
    out
}

/// Power series in `hbar` truncated above `max_degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HbarSeries {
    pub coeffs: Vec<Q>,
}

impl HbarSeries {
    pub fn max_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn mul(&self, other: &HbarSeries) -> HbarSeries {
        let n = self.max_degree().min(other.max_degree());
        let mut coeffs = vec![Q::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        HbarSeries { coeffs }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("hbar {k} {}\n", format_q(c)));
        }
        out
    }
}

/// `hbar^deg`: the homogeneous parts of `s`, part `m` carrying `hbar^m`.
pub fn hbar_grade(s: &GradedSum) -> Vec<GradedSum> {
    (0..=s.max_degree()).map(|m| s.degree_part(m)).collect()
}

/// `T_g(hbar^deg(a))` as a series in `hbar`.
pub fn rozansky_series(g: &LieData, a: &GradedSum) -> Result<HbarSeries> {
    a.check_space(Space::Aempty)?;
    let coeffs = hbar_grade(a).iter().map(|part| tg_closed(g, part)).collect::<Result<Vec<Q>>>()?;
    Ok(HbarSeries { coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::named::*;

    #[test]
    fn theta_is_six_for_so3() {
        let g = LieData::so3();
        let t = theta();
        assert_eq!(tg_diagram(&g, &t), qi(6));
        assert_eq!(tg_diagram(&g, &t.flip_vertex(0)), qi(-6));
        assert_eq!(tg_diagram(&g, &t.disjoint_union(&t)), qi(36));
        assert_eq!(tg_diagram(&g, &dumbbell()), qi(0));
    }

    #[test]
    fn struts_are_inverse_metric() {
        let g = LieData::sl2();
        let p = tg_open_diagram(&g, &strut(0, 1), 2);
        let mut want = PolyTensor::zero(2, 3);
        for a in 0..3 {
            for b in 0..3 {
                let mut m = vec![want.var(0, a), want.var(1, b)];
                m.sort_unstable();
                want.add(0, m, g.metric_inverse()[(a, b)].clone());
            }
        }
        assert_eq!(p, want);
    }

    #[test]
    fn bad_data_is_rejected() {
        let mut f = vec![Q::zero(); 27];
        f[5] = qi(1);
        assert!(matches!(LieData::new(Matrix::identity(3), f), Err(Error::BadLieData(_))));
    }

    #[test]
    fn wick_single_contraction() {
        let g = LieData::new(Matrix::identity(1), vec![Q::zero()]).unwrap();
        let l = LinkingMatrix::new(Matrix::identity(1)).unwrap();
        let mut p = PolyTensor::zero(1, 1);
        p.add(0, vec![], qi(1));
        assert_eq!(wick_pair(&p, &l, &g, 3).unwrap(), qi(1));
        p.add(0, vec![0, 0], qi(1));
        assert_eq!(wick_pair(&p, &l, &g, 3).unwrap(), qi(0));
        let mut odd = PolyTensor::zero(1, 1);
        odd.add(0, vec![0, 0, 0], qi(5));
        assert_eq!(wick_pair(&odd, &l, &g, 3).unwrap(), qi(0));
    }

    #[test]
    fn series_examples() {
        let g = LieData::so3();
        let mut a = GradedSum::one(Space::Aempty, 0, 2);
        a.add_term(&theta(), crate::sum::q(-1, 2));
        assert_eq!(rozansky_series(&g, &a).unwrap().coeffs, vec![qi(1), qi(-3), qi(0)]);
    }

    #[test]
    fn integration_commutes_with_weights() {
        use crate::gaussian::{integrate_fg, PerturbedGaussian};
        let mut l = Matrix::zeros(2, 2);
        for (i, j, x) in [(0, 0, 2), (0, 1, 1), (1, 0, 1), (1, 1, 3)] {
            l[(i, j)] = qi(x);
        }
        let mut p = GradedSum::one(Space::B, 2, 4);
        p.add_term(&wheel(&[0, 1]), qi(1));
        p.add_term(&y_graph(0, 0, 1).disjoint_union(&y_graph(0, 1, 1)), crate::sum::q(1, 3));
        p.add_term(&wheel(&[0, 0, 1, 1]), qi(-2));
        let pg = PerturbedGaussian { covariance: LinkingMatrix::new(l).unwrap(), perturbation: p };
        for g in [LieData::so3(), LieData::sl2()] {
            let lhs = tg_closed(&g, &integrate_fg(&pg, 2).unwrap()).unwrap();
            let rhs = wick_pair(&tg_open(&g, &pg.perturbation).unwrap(), &pg.covariance, &g, 2).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
