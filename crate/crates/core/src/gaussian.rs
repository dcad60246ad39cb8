//! Perturbed Gaussians in `B(X)`, the gluing pairing, formal Gaussian
//! integration, linking matrix signatures and the normalized invariant.
//!
//! The Gaussian part of `G` is `exp(1/2 sum_{x,y} l_xy strut_xy)` with the
//! sum over ordered pairs, so the stored coefficient of `strut_xy` is `l_xy`
//! for `x != y` and `l_xx / 2` on the diagonal.

use num_traits::{One, Zero};

use crate::diagram::named::strut;
use crate::diagram::{he, vertex_of, Diagram, Space, Vertex, NONE};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::maps::{du_product, exp_union, log_union, sigma};
use crate::relations::Kernel;
use crate::sum::{format_q, q, GradedSum, Q};

/// Symmetric rational matrix indexed by the labels, with its inverse when
/// it is invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkingMatrix {
    matrix: Matrix,
    inverse: Option<Matrix>,
}

impl LinkingMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_symmetric() {
            return Err(Error::NotGaussianForm("linking matrix is not symmetric".into()));
        }
        let inverse = matrix.inverse();
        Ok(LinkingMatrix { matrix, inverse })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.rows
    }

    pub fn inverse(&self) -> Result<&Matrix> {
        self.inverse.as_ref().ok_or(Error::SingularCovariance)
    }

    pub fn is_invertible(&self) -> bool {
        self.inverse.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbedGaussian {
    pub covariance: LinkingMatrix,
    /// Element of `B+(X)` with constant term 1.
    pub perturbation: GradedSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignaturePair {
    pub sigma_plus: usize,
    pub sigma_minus: usize,
}

pub fn signature(l: &LinkingMatrix) -> SignaturePair {
    let (p, n) = l.matrix.signature();
    SignaturePair { sigma_plus: p, sigma_minus: n }
}

/// `exp(1/2 sum_{x,y} c * l_xy strut_xy)` in `B(X)` up to `max_degree`.
pub fn gaussian(l: &Matrix, c: &Q, max_degree: usize) -> Result<GradedSum> {
    exp_union(&strut_form(l, c, max_degree))
}

/// `1/2 sum_{x,y} c * l_xy strut_xy`.
fn strut_form(l: &Matrix, c: &Q, max_degree: usize) -> GradedSum {
    let n = l.rows;
    let mut s = GradedSum::zero(Space::B, n, max_degree);
    for x in 0..n {
        for y in x..n {
            let w = if x == y { &l[(x, x)] * c * q(1, 2) } else { &l[(x, y)] * c };
            s.add_term(&strut(x as u8, y as u8), w);
        }
    }
    s
}

/// Splits `G` into its Gaussian part and a perturbation in `B+(X)`.
pub fn split_gaussian(kernel: &Kernel, g: &GradedSum) -> Result<PerturbedGaussian> {
    g.check_space(Space::B)?;
    if !g.constant_term().is_one() {
        return Err(Error::BadConstantTerm(format!(
            "a perturbed Gaussian needs constant term 1, found {}",
            format_q(&g.constant_term())
        )));
    }
    let n = g.labels();
    let log = log_union(g)?;
    let mut l = Matrix::zeros(n, n);
    for x in 0..n {
        for y in x..n {
            let c = log.coefficient(&strut(x as u8, y as u8));
            if x == y {
                l[(x, x)] = c * Q::from_integer(2.into());
            } else {
                l[(x, y)] = c.clone();
                l[(y, x)] = c;
            }
        }
    }
    let unwind = gaussian(&l, &-Q::one(), g.max_degree())?;
    let perturbation = kernel.normalize(&du_product(g, &unwind)?)?;
    for (d, _) in perturbation.iter() {
        if let Err(v) = d.validate(Space::BPlus, n) {
            return Err(Error::NotGaussianForm(format!("residual term outside B+: {v}")));
        }
    }
    let covariance = LinkingMatrix::new(l)?;
    if !covariance.is_invertible() {
        return Err(Error::SingularCovariance);
    }
    Ok(PerturbedGaussian { covariance, perturbation })
}

/// Joins matched legs of `d` into edges: `glue[v]` is the leg matched with
/// leg vertex `v`. Every leg must be matched; the result keeps only the
/// trivalent vertices.
fn contract(d: &Diagram, glue: &[usize]) -> Result<Diagram> {
    let n = d.num_vertices();
    let mut map = vec![usize::MAX; n];
    let mut kept = 0;
    for v in 0..n {
        if d.vertices()[v] == Vertex::Trivalent {
            map[v] = kept;
            kept += 1;
        }
    }
    let mut partner = vec![NONE; 3 * kept];
    let mut seen = vec![false; n];
    for v in 0..n {
        if map[v] == usize::MAX {
            continue;
        }
        for s in 0..3 {
            let mut p = d.partner[3 * v + s];
            let mut steps = 0;
            while d.vertices()[vertex_of(p)] != Vertex::Trivalent {
                let other = glue[vertex_of(p)];
                debug_assert!(other != usize::MAX, "unmatched leg");
                seen[vertex_of(p)] = true;
                seen[other] = true;
                p = d.partner[3 * other];
                steps += 1;
                if steps > n {
                    return Err(Error::UnsupportedDiagram("gluing closes a loop without vertices".into()));
                }
            }
            partner[3 * map[v] + s] = he(map[vertex_of(p)], p as usize % 3);
        }
    }
    // legs never reached from a trivalent vertex form loops without vertices
    if (0..n).any(|v| map[v] == usize::MAX && !seen[v]) {
        return Err(Error::UnsupportedDiagram("gluing closes a loop without vertices".into()));
    }
    Ok(Diagram { vertices: vec![Vertex::Trivalent; kept], partner, skeleton: Vec::new() })
}

fn legs_by_label(d: &Diagram, labels: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); labels];
    for (v, k) in d.vertices().iter().enumerate() {
        if let Vertex::Leg(l) = k {
            out[*l as usize].push(v);
        }
    }
    out
}

/// All `prod_x k_x!` diagrams obtained by gluing the `x`-legs of `d1` to
/// the `x`-legs of `d2` bijectively, before canonicalization. Empty when
/// leg counts differ for some label.
pub fn glue_pair_diagrams(d1: &Diagram, d2: &Diagram, labels: usize) -> Result<Vec<Diagram>> {
    let l1 = legs_by_label(d1, labels);
    let off = d1.num_vertices();
    let l2: Vec<Vec<usize>> = legs_by_label(d2, labels).into_iter().map(|v| v.into_iter().map(|x| x + off).collect()).collect();
    if l1.iter().zip(&l2).any(|(a, b)| a.len() != b.len()) {
        return Ok(Vec::new());
    }
    let u = d1.disjoint_union(d2);
    let perms: Vec<Vec<Vec<u32>>> = l2
        .iter()
        .map(|v| crate::diagram::permutations(&v.iter().map(|&x| x as u32).collect::<Vec<_>>()))
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; labels];
    loop {
        let mut glue = vec![usize::MAX; u.num_vertices()];
        for x in 0..labels {
            for (a, &b) in l1[x].iter().zip(&perms[x][idx[x]]) {
                glue[*a] = b as usize;
                glue[b as usize] = *a;
            }
        }
        out.push(contract(&u, &glue)?);
        let mut x = 0;
        loop {
            if x == labels {
                return Ok(out);
            }
            idx[x] += 1;
            if idx[x] < perms[x].len() {
                break;
            }
            idx[x] = 0;
            x += 1;
        }
    }
}

/// `<c1, c2>`: the sum over all ways of gluing the `dx`-legs of `c1` to the
/// `x`-legs of `c2`. Truncated at the smaller of the two degrees.
pub fn glue_pairing(c1: &GradedSum, c2: &GradedSum) -> Result<GradedSum> {
    c1.check_compatible(c2)?;
    c1.check_space(Space::B)?;
    let labels = c2.labels();
    for (d, _) in c2.iter() {
        if let Err(v) = d.validate(Space::BPlus, labels) {
            return Err(Error::SpaceMismatch(format!("second argument must lie in B+: {v}")));
        }
    }
    let n = c1.max_degree().min(c2.max_degree());
    let mut out = GradedSum::zero(Space::Aempty, 0, n);
    for (d1, a) in c1.iter() {
        for (d2, b) in c2.iter() {
            for g in glue_pair_diagrams(d1, d2, labels)? {
                out.add_term(&g, a * b);
            }
        }
    }
    Ok(out)
}

/// Perfect matchings of `0..k` as lists of pairs.
fn matchings(items: &[usize], acc: &mut Vec<(usize, usize)>, f: &mut dyn FnMut(&[(usize, usize)])) {
    if items.is_empty() {
        f(acc);
        return;
    }
    let first = items[0];
    for i in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().enumerate().filter(|(j, _)| j + 1 != i).map(|(_, &x)| x).collect();
        acc.push((first, items[i]));
        matchings(&rest, acc, f);
        acc.pop();
    }
}

/// Formal Gaussian integration: `<exp(-1/2 sum l^{xy} strut_{dx dy}), P>`.
///
/// The pairing is evaluated term by term as a sum over perfect matchings
/// of the legs of each perturbation diagram, each matched pair `(a, b)`
/// weighted by `-l^{x_a x_b}`; the `prod k!` gluings per strut monomial
/// cancel the exponential's factorials. Output degree `m` collects the
/// perturbation terms of degree `m + k/2` with `k` legs.
pub fn integrate_fg(pg: &PerturbedGaussian, max_degree: usize) -> Result<GradedSum> {
    let labels = pg.perturbation.labels();
    if pg.covariance.size() != labels {
        return Err(Error::SpaceMismatch(format!(
            "{}x{} covariance for {labels} labels",
            pg.covariance.size(),
            pg.covariance.size()
        )));
    }
    let inv = pg.covariance.inverse()?;
    let mut out = GradedSum::zero(Space::Aempty, 0, max_degree);
    for (d, c) in pg.perturbation.iter() {
        if d.num_trivalent() / 2 > max_degree {
            continue;
        }
        let legs: Vec<usize> = (0..d.num_vertices()).filter(|&v| matches!(d.vertices()[v], Vertex::Leg(_))).collect();
        if legs.len() % 2 == 1 {
            continue;
        }
        let label = |v: usize| match d.vertices()[v] {
            Vertex::Leg(l) => l as usize,
            _ => unreachable!(),
        };
        let mut failure = None;
        matchings(&legs, &mut Vec::new(), &mut |m| {
            let mut w = c.clone();
            for &(a, b) in m {
                w *= -inv[(label(a), label(b))].clone();
                if w.is_zero() {
                    return;
                }
            }
            let mut glue = vec![usize::MAX; d.num_vertices()];
            for &(a, b) in m {
                glue[a] = b;
                glue[b] = a;
            }
            match contract(d, &glue) {
                Ok(g) => out.add_term(&g, w),
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(out)
}

/// Inverse of an element of `A(empty)` with nonzero constant term, by a
/// truncated geometric series.
pub fn invert_unit(a: &GradedSum) -> Result<GradedSum> {
    let c = a.constant_term();
    if c.is_zero() {
        return Err(Error::NonInvertibleUnit("constant term is 0".into()));
    }
    let one = GradedSum::one(a.space(), a.labels(), a.max_degree());
    let x = a.scaled(&(Q::one() / &c)).minus(&one)?;
    let mut out = one.clone();
    let mut pow = one;
    for _ in 1..=a.max_degree() {
        pow = du_product(&pow, &x)?.scaled(&-Q::one());
        if pow.is_zero() {
            break;
        }
        out = out.plus(&pow)?;
    }
    Ok(out.scaled(&(Q::one() / c)))
}

pub fn power(a: &GradedSum, k: usize) -> Result<GradedSum> {
    let mut out = GradedSum::one(a.space(), a.labels(), a.max_degree());
    for _ in 0..k {
        out = du_product(&out, a)?;
    }
    Ok(out)
}

/// `integrate_fg(split_gaussian(sigma(zcheck)))`.
pub fn aarhus0(kernel: &Kernel, zcheck: &GradedSum, max_degree: usize) -> Result<GradedSum> {
    let (pg, _) = aarhus0_parts(kernel, zcheck)?;
    integrate_fg(&pg, max_degree)
}

fn aarhus0_parts(kernel: &Kernel, zcheck: &GradedSum) -> Result<(PerturbedGaussian, GradedSum)> {
    zcheck.check_space(Space::Aup)?;
    let b = sigma(kernel, zcheck)?;
    let pg = split_gaussian(kernel, &b)?;
    Ok((pg, b))
}

/// `A0(U+)^{-sigma+} A0(U-)^{-sigma-} A0(L)` where the signature is that of
/// the linking matrix read off `zcheck`.
pub fn aarhus(
    kernel: &Kernel,
    zcheck: &GradedSum,
    uplus: &GradedSum,
    uminus: &GradedSum,
    max_degree: usize,
) -> Result<GradedSum> {
    uplus.check_space(Space::Aempty)?;
    uminus.check_space(Space::Aempty)?;
    let (pg, _) = aarhus0_parts(kernel, zcheck)?;
    let sig = signature(&pg.covariance);
    let a0 = integrate_fg(&pg, max_degree)?;
    normalize_by_signature(&a0, sig, uplus, uminus, max_degree)
}

/// `U+^{-sigma+} U-^{-sigma-} a0` in `A(empty)`.
pub fn normalize_by_signature(
    a0: &GradedSum,
    sig: SignaturePair,
    uplus: &GradedSum,
    uminus: &GradedSum,
    max_degree: usize,
) -> Result<GradedSum> {
    let up = invert_unit(&uplus.truncated(max_degree))?;
    let um = invert_unit(&uminus.truncated(max_degree))?;
    let factor = du_product(&power(&up, sig.sigma_plus)?, &power(&um, sig.sigma_minus)?)?;
    du_product(&factor, &a0.truncated(max_degree))
}

/// Linear substitution on leg labels: every `x`-leg becomes
/// `sum_y a[x][y]` times a `y`-leg, extended multilinearly.
pub fn substitute_legs(g: &GradedSum, a: &Matrix) -> Result<GradedSum> {
    g.check_space(Space::B)?;
    let n = g.labels();
    if a.rows != n || a.cols != n {
        return Err(Error::SpaceMismatch(format!("{}x{} substitution for {n} labels", a.rows, a.cols)));
    }
    let mut out = GradedSum::zero(Space::B, n, g.max_degree());
    for (d, c) in g.iter() {
        let legs: Vec<usize> = (0..d.num_vertices()).filter(|&v| matches!(d.vertices()[v], Vertex::Leg(_))).collect();
        let mut choice = vec![0usize; legs.len()];
        loop {
            let mut w = c.clone();
            let mut e = d.clone();
            for (i, &v) in legs.iter().enumerate() {
                let Vertex::Leg(x) = d.vertices()[v] else { unreachable!() };
                w *= a[(x as usize, choice[i])].clone();
                e.vertices[v] = Vertex::Leg(choice[i] as u8);
            }
            out.add_term(&e, w);
            let mut i = 0;
            loop {
                if i == legs.len() {
                    break;
                }
                choice[i] += 1;
                if choice[i] < n {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == legs.len() {
                break;
            }
        }
    }
    Ok(out)
}
