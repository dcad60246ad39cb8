//! Algebra structure on diagram spaces and the maps between them: the
//! disjoint union product, exp/log, the coproduct, the PBW maps, cabling,
//! the action of one-line diagrams on skeleton components, and the
//! assembly `nu^n . Delta(nu) . Z`.
//!
//! Products on skeleton diagrams are written left to right from the tail
//! of the skeleton: in `a . b` the diagram `a` sits below `b`.
//!
//! Outputs are sums of canonical diagrams (modulo AS and isomorphism);
//! [`Kernel::normalize`] rewrites them over quotient bases when needed.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::diagram::{canonical_form, skeleton_placements, Diagram, Space, Vertex};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::relations::Kernel;
use crate::sum::{format_q, qi, GradedSum, Q};

fn require_commutative(s: &GradedSum) -> Result<()> {
    if s.space() == Space::Aup {
        return Err(Error::SpaceMismatch("disjoint union needs B or Aempty, found Aup".into()));
    }
    Ok(())
}

/// Disjoint union product on `B(X)` or `A(empty)`.
pub fn du_product(a: &GradedSum, b: &GradedSum) -> Result<GradedSum> {
    a.check_compatible(b)?;
    require_commutative(a)?;
    let n = a.max_degree().min(b.max_degree());
    let mut out = GradedSum::zero(a.space(), a.labels(), n);
    for (da, ca) in a.iter() {
        for (db, cb) in b.iter() {
            if da.degree() + db.degree() <= n {
                out.add_term(&da.disjoint_union(db), ca * cb);
            }
        }
    }
    Ok(out)
}

/// Stacking product on `A(up_X)`: `a` below `b`.
pub fn stack(a: &GradedSum, b: &GradedSum) -> Result<GradedSum> {
    a.check_compatible(b)?;
    a.check_space(Space::Aup)?;
    let n = a.max_degree().min(b.max_degree());
    let mut out = GradedSum::zero(Space::Aup, a.labels(), n);
    for (da, ca) in a.iter() {
        for (db, cb) in b.iter() {
            if da.degree() + db.degree() <= n {
                out.add_term(&da.disjoint_union(db), ca * cb);
            }
        }
    }
    Ok(out)
}

/// The product natural to the space: disjoint union, or stacking on `Aup`.
pub fn product(a: &GradedSum, b: &GradedSum) -> Result<GradedSum> {
    if a.space() == Space::Aup {
        stack(a, b)
    } else {
        du_product(a, b)
    }
}

/// `sum_k coeffs[k] x^k` for `x` without constant term, truncated.
fn power_series(x: &GradedSum, coeffs: impl Fn(usize) -> Q) -> Result<GradedSum> {
    let n = x.max_degree();
    let mut out = GradedSum::one(x.space(), x.labels(), n).scaled(&coeffs(0));
    let mut pow = GradedSum::one(x.space(), x.labels(), n);
    for k in 1..=n {
        pow = product(&pow, x)?;
        if pow.is_zero() {
            break;
        }
        out = out.plus(&pow.scaled(&coeffs(k)))?;
    }
    Ok(out)
}

/// Power series exponential for the disjoint union product.
pub fn exp_union(s: &GradedSum) -> Result<GradedSum> {
    require_commutative(s)?;
    if !s.constant_term().is_zero() {
        return Err(Error::BadConstantTerm(format!("exp needs constant term 0, found {}", format_q(&s.constant_term()))));
    }
    let mut fact = Q::one();
    let mut inv_fact = vec![Q::one()];
    for k in 1..=s.max_degree() {
        fact *= qi(k as i64);
        inv_fact.push(Q::one() / &fact);
    }
    power_series(s, |k| inv_fact[k].clone())
}

/// Power series logarithm for the disjoint union product.
pub fn log_union(u: &GradedSum) -> Result<GradedSum> {
    require_commutative(u)?;
    if !u.constant_term().is_one() {
        return Err(Error::BadConstantTerm(format!("log needs constant term 1, found {}", format_q(&u.constant_term()))));
    }
    let one = GradedSum::one(u.space(), u.labels(), u.max_degree());
    let x = u.minus(&one)?;
    power_series(&x, |k| if k == 0 { Q::zero() } else { qi(if k % 2 == 1 { 1 } else { -1 }) / qi(k as i64) })
}

/// Formal sum of pairs of canonical diagrams.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorSum {
    space: Space,
    labels: usize,
    max_degree: usize,
    terms: BTreeMap<(Diagram, Diagram), Q>,
}

impl TensorSum {
    pub fn zero(space: Space, labels: usize, max_degree: usize) -> Self {
        TensorSum { space, labels, max_degree, terms: BTreeMap::new() }
    }

    /// Adds `c * (a (x) b)`, canonicalizing both factors.
    pub fn add_term(&mut self, a: &Diagram, b: &Diagram, c: Q) {
        if a.degree() + b.degree() > self.max_degree || c.is_zero() {
            return;
        }
        let (ca, cb) = (canonical_form(a), canonical_form(b));
        let sign = ca.sign * cb.sign;
        if sign == 0 {
            return;
        }
        let c = if sign < 0 { -c } else { c };
        match self.terms.entry((ca.canonical, cb.canonical)) {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Diagram, Diagram), &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn minus(&self, other: &TensorSum) -> Result<TensorSum> {
        if (self.space, self.labels) != (other.space, other.labels) {
            return Err(Error::SpaceMismatch("tensor factors differ".into()));
        }
        let mut out = self.clone();
        out.max_degree = self.max_degree.min(other.max_degree);
        out.terms.retain(|(a, b), _| a.degree() + b.degree() <= out.max_degree);
        for ((a, b), c) in &other.terms {
            out.add_term(a, b, -c.clone());
        }
        Ok(out)
    }
}

impl fmt::Debug for TensorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorSum<{}({}), N={}>{{", self.space, self.labels, self.max_degree)?;
        for ((a, b), c) in &self.terms {
            write!(f, "\n  {} * {:?} (x) {:?}", format_q(c), a, b)?;
        }
        write!(f, "}}")
    }
}

/// `u (x) v`.
pub fn tensor(u: &GradedSum, v: &GradedSum) -> Result<TensorSum> {
    u.check_compatible(v)?;
    let mut out = TensorSum::zero(u.space(), u.labels(), u.max_degree().min(v.max_degree()));
    for (a, ca) in u.iter() {
        for (b, cb) in v.iter() {
            out.add_term(a, b, ca * cb);
        }
    }
    Ok(out)
}

/// Splitting by connected components: the sum over all ordered
/// bipartitions of the components.
pub fn coproduct(d: &Diagram, space: Space, labels: usize, max_degree: usize) -> Result<TensorSum> {
    if space == Space::Aup || !d.skeleton().is_empty() {
        return Err(Error::SpaceMismatch("coproduct needs B or Aempty".into()));
    }
    let comps = d.components();
    if comps.len() > 24 {
        return Err(Error::UnsupportedDiagram("too many components to split".into()));
    }
    let mut out = TensorSum::zero(space, labels, max_degree);
    for mask in 0u32..(1 << comps.len()) {
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for (i, c) in comps.iter().enumerate() {
            if mask >> i & 1 == 1 {
                left.extend_from_slice(c);
            } else {
                right.extend_from_slice(c);
            }
        }
        left.sort_unstable();
        right.sort_unstable();
        out.add_term(&d.restrict(&left), &d.restrict(&right), Q::one());
    }
    Ok(out)
}

pub fn coproduct_sum(s: &GradedSum) -> Result<TensorSum> {
    require_commutative(s)?;
    let mut out = TensorSum::zero(s.space(), s.labels(), s.max_degree());
    for (d, c) in s.iter() {
        let part = coproduct(d, s.space(), s.labels(), s.max_degree())?;
        for ((a, b), x) in part.iter() {
            out.add_term(a, b, x * c);
        }
    }
    Ok(out)
}

/// True when the coproduct of `u` equals `u (x) u` up to the truncation.
pub fn is_grouplike(u: &GradedSum) -> Result<bool> {
    Ok(coproduct_sum(u)?.minus(&tensor(u, u)?)?.is_zero())
}

/// The PBW map: each diagram goes to the average of its placements of the
/// `x`-legs along the `x`-line, over all orderings.
pub fn chi(s: &GradedSum) -> Result<GradedSum> {
    s.check_space(Space::B)?;
    let mut out = GradedSum::zero(Space::Aup, s.labels(), s.max_degree());
    for (d, c) in s.iter() {
        let placements = skeleton_placements(d, s.labels());
        let w = c / qi(placements.len() as i64);
        for p in &placements {
            out.add_term(p, w.clone());
        }
    }
    Ok(out)
}

/// Matrix of `chi` in one degree, columns indexed by the `B` basis and
/// rows by the `Aup` basis, inverted.
fn chi_inverse(kernel: &Kernel, labels: usize, degree: usize) -> Result<std::sync::Arc<Matrix>> {
    kernel.cached_matrix(("chi-inverse", labels, degree), || {
        let qb = kernel.quotient(Space::B, labels, degree)?;
        let qa = kernel.quotient(Space::Aup, labels, degree)?;
        if qb.dim() != qa.dim() {
            return Err(Error::SolveFailure(format!(
                "degree {degree}: dim B = {} but dim Aup = {}",
                qb.dim(),
                qa.dim()
            )));
        }
        let n = qb.dim();
        let mut m = Matrix::zeros(n, n);
        for (j, b) in qb.basis.iter().enumerate() {
            let img = chi(&GradedSum::from_diagram(Space::B, labels, degree, b))?;
            let v = &kernel.reduce(&img)?.parts[degree];
            for i in 0..n {
                m[(i, j)] = v[i].clone();
            }
        }
        m.inverse().ok_or_else(|| Error::SolveFailure(format!("chi is singular in degree {degree}")))
    })
}

/// Inverse of `chi`, degree by degree over the quotient bases. The output
/// is expressed over `B` basis diagrams.
pub fn sigma(kernel: &Kernel, s: &GradedSum) -> Result<GradedSum> {
    s.check_space(Space::Aup)?;
    let reduced = kernel.reduce(s)?;
    let mut out = GradedSum::zero(Space::B, s.labels(), s.max_degree());
    for (m, v) in reduced.parts.iter().enumerate() {
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let inv = chi_inverse(kernel, s.labels(), m)?;
        let coords = inv.mul_vec(v);
        let qb = kernel.quotient(Space::B, s.labels(), m)?;
        for (k, x) in coords.into_iter().enumerate() {
            out.add_canonical(qb.basis[k].clone(), x);
        }
    }
    Ok(out)
}

/// Lifts every attachment of a one-line diagram to one of `n` parallel
/// copies of the line, summed over all `n^k` choices.
pub fn cable_delta(s: &GradedSum, n: usize) -> Result<GradedSum> {
    s.check_space(Space::Aup)?;
    if s.labels() != 1 {
        return Err(Error::SpaceMismatch(format!("cabling needs a one-line skeleton, found {} lines", s.labels())));
    }
    if n == 0 || n > 250 {
        return Err(Error::SpaceMismatch("cabling needs between 1 and 250 target lines".into()));
    }
    let mut out = GradedSum::zero(Space::Aup, n, s.max_degree());
    for (d, c) in s.iter() {
        for lifted in lifts(d, n) {
            out.add_term(&lifted, c.clone());
        }
    }
    Ok(out)
}

/// All `n^k` liftings of a one-line diagram, before canonicalization.
pub fn lifts(d: &Diagram, n: usize) -> Vec<Diagram> {
    let line = &d.skeleton()[0];
    let k = line.len();
    let mut out = Vec::new();
    let mut choice = vec![0usize; k];
    loop {
        let mut e = d.clone();
        let mut lines = vec![Vec::new(); n];
        for (i, &a) in line.iter().enumerate() {
            lines[choice[i]].push(a);
            e.vertices[a as usize] = Vertex::Attach(choice[i] as u8);
        }
        e.skeleton = lines;
        out.push(e);
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            choice[i] += 1;
            if choice[i] < n {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Deletes skeleton line `line`: diagrams touching it map to zero, the
/// others lose the empty line.
pub fn erase_line(s: &GradedSum, line: usize) -> Result<GradedSum> {
    s.check_space(Space::Aup)?;
    if line >= s.labels() {
        return Err(Error::SpaceMismatch(format!("no skeleton line {line}")));
    }
    let mut out = GradedSum::zero(Space::Aup, s.labels() - 1, s.max_degree());
    for (d, c) in s.iter() {
        if !d.skeleton()[line].is_empty() {
            continue;
        }
        let mut e = d.map_labels(|l| if (l as usize) > line { l - 1 } else { l });
        e.skeleton = d.skeleton().iter().enumerate().filter(|(i, _)| *i != line).map(|(_, l)| l.clone()).collect();
        out.add_term(&e, c.clone());
    }
    Ok(out)
}

/// A one-line diagram moved onto line `i` of an `n`-line skeleton.
fn on_line(d: &Diagram, i: usize, n: usize) -> Diagram {
    let mut e = d.map_labels(|_| i as u8);
    let mut lines = vec![Vec::new(); n];
    lines[i] = d.skeleton()[0].clone();
    e.skeleton = lines;
    e
}

/// Places `factors[i]` (one-line diagrams) on skeleton component `i`
/// below `target`.
pub fn skeleton_act(factors: &[GradedSum], target: &GradedSum) -> Result<GradedSum> {
    target.check_space(Space::Aup)?;
    let n = target.labels();
    if factors.len() != n {
        return Err(Error::SpaceMismatch(format!("{} factors for {n} skeleton lines", factors.len())));
    }
    let mut acc = target.clone();
    for (i, f) in factors.iter().enumerate() {
        f.check_space(Space::Aup)?;
        if f.labels() != 1 {
            return Err(Error::SpaceMismatch("skeleton factors must live on one line".into()));
        }
        let mut placed = GradedSum::zero(Space::Aup, n, f.max_degree());
        for (d, c) in f.iter() {
            placed.add_term(&on_line(d, i, n), c.clone());
        }
        acc = stack(&placed, &acc)?;
    }
    Ok(acc)
}

/// `nu^{(x)n} . Delta(nu) . Z` for `Z` on `n` lines.
pub fn assemble_zcheck(z: &GradedSum, nu: &GradedSum) -> Result<GradedSum> {
    z.check_space(Space::Aup)?;
    nu.check_space(Space::Aup)?;
    if nu.labels() != 1 {
        return Err(Error::SpaceMismatch("nu must live on one line".into()));
    }
    if !nu.constant_term().is_one() {
        return Err(Error::BadConstantTerm(format!("nu needs constant term 1, found {}", format_q(&nu.constant_term()))));
    }
    let n = z.labels();
    let nu = nu.truncated(nu.max_degree().min(z.max_degree()));
    if n == 0 {
        return Ok(z.truncated(nu.max_degree()));
    }
    let delta = cable_delta(&nu, n)?;
    let prod = stack(&delta, z)?;
    skeleton_act(&vec![nu; n], &prod)
}
