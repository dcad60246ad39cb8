//! Shared helpers for the integration tests: an independent gluing
//! enumerator and seeded random generators.
#![allow(dead_code)]

use aarhus::diagram::{canonical_form, enumerate_diagrams, EnumerationLimits};
use aarhus::linalg::Matrix;
use aarhus::maps::du_product;
use aarhus::sum::{q, qi};
use aarhus::{gaussian, Diagram, GradedSum, Space, Vertex, Q};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for i in 0..=p.len() {
            let mut r = p.clone();
            r.insert(i, n - 1);
            out.push(r);
        }
    }
    out
}

fn legs_of(d: &Diagram, label: u8) -> Vec<usize> {
    (0..d.num_vertices()).filter(|&v| d.vertices()[v] == Vertex::Leg(label)).collect()
}

/// Glues the legs of `d1` to those of `d2` along one bijection per label,
/// building the closed diagram directly from the two partner tables.
/// `d2` must have no strut components.
fn glue_once(d1: &Diagram, d2: &Diagram, sigma: &[(usize, usize)]) -> Diagram {
    let tri1: Vec<usize> = (0..d1.num_vertices()).filter(|&v| d1.vertices()[v] == Vertex::Trivalent).collect();
    let tri2: Vec<usize> = (0..d2.num_vertices()).filter(|&v| d2.vertices()[v] == Vertex::Trivalent).collect();
    let new1 = |v: usize| tri1.iter().position(|&x| x == v).unwrap();
    let new2 = |v: usize| tri1.len() + tri2.iter().position(|&x| x == v).unwrap();
    let to2 = |p: usize| sigma.iter().find(|(a, _)| *a == p).unwrap().1;
    let to1 = |r: usize| sigma.iter().find(|(_, b)| *b == r).unwrap().0;
    let n = tri1.len() + tri2.len();
    let mut partner = vec![u32::MAX; 3 * n];
    // the far end, in the glued diagram, of the d2 leg `r`
    let through2 = |r: usize| {
        let (w, t) = d2.partner(r, 0);
        assert_eq!(d2.vertices()[w], Vertex::Trivalent, "strut in the second argument");
        (new2(w) * 3 + t) as u32
    };
    for &v in &tri1 {
        for s in 0..3 {
            let (w, t) = d1.partner(v, s);
            partner[new1(v) * 3 + s] = match d1.vertices()[w] {
                Vertex::Trivalent => (new1(w) * 3 + t) as u32,
                _ => through2(to2(w)),
            };
        }
    }
    for &v in &tri2 {
        for s in 0..3 {
            let (w, t) = d2.partner(v, s);
            partner[new2(v) * 3 + s] = match d2.vertices()[w] {
                Vertex::Trivalent => (new2(w) * 3 + t) as u32,
                _ => {
                    let p = to1(w);
                    let (x, u) = d1.partner(p, 0);
                    match d1.vertices()[x] {
                        Vertex::Trivalent => (new1(x) * 3 + u) as u32,
                        // a strut of d1 carries on to another leg of d2
                        _ => through2(to2(x)),
                    }
                }
            };
        }
    }
    Diagram::from_parts(vec![Vertex::Trivalent; n], partner, Vec::new()).expect("glued diagram is well formed")
}

/// Every gluing of the legs of `d1` with those of `d2`, one per tuple of
/// label-preserving bijections. Empty when the leg counts differ.
pub fn oracle_gluings(d1: &Diagram, d2: &Diagram, labels: usize) -> Vec<Diagram> {
    let per_label: Vec<(Vec<usize>, Vec<usize>)> =
        (0..labels as u8).map(|x| (legs_of(d1, x), legs_of(d2, x))).collect();
    if per_label.iter().any(|(a, b)| a.len() != b.len()) {
        return Vec::new();
    }
    let mut partial: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for (a, b) in &per_label {
        let mut next = Vec::new();
        for p in all_permutations(a.len()) {
            for base in &partial {
                let mut s = base.clone();
                s.extend(a.iter().zip(&p).map(|(&x, &i)| (x, b[i])));
                next.push(s);
            }
        }
        partial = next;
    }
    partial.iter().map(|s| glue_once(d1, d2, s)).collect()
}

/// Brute-force pairing of `c1` in `B` with `c2` in `B+`.
pub fn oracle_glue(c1: &GradedSum, c2: &GradedSum) -> GradedSum {
    let n = c1.max_degree().min(c2.max_degree());
    let mut out = GradedSum::zero(Space::Aempty, 0, n);
    for (d1, a) in c1.iter() {
        for (d2, b) in c2.iter() {
            for g in oracle_gluings(d1, d2, c1.labels()) {
                let c = canonical_form(&g);
                if c.sign != 0 {
                    out.add_canonical(c.canonical, a * b * Q::from_integer(c.sign.into()));
                }
            }
        }
    }
    out
}

/// Diagrams of `B(X)` up to `max_degree`, nonzero modulo AS.
pub fn b_diagrams(labels: usize, max_degree: usize) -> Vec<Diagram> {
    let limits = EnumerationLimits::default();
    (0..=max_degree)
        .flat_map(|m| enumerate_diagrams(Space::B, m, labels, &limits, false).unwrap())
        .filter(|c| c.sign != 0)
        .map(|c| c.canonical)
        .collect()
}

/// Diagrams of `B+(X)` (no strut components) with at least one leg.
pub fn b_plus_diagrams(labels: usize, max_degree: usize) -> Vec<Diagram> {
    b_diagrams(labels, max_degree)
        .into_iter()
        .filter(|d| d.num_legs() > 0 && d.validate(Space::BPlus, labels).is_ok())
        .collect()
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Q {
    let mut n = rng.gen_range(-5i64..=5);
    if n == 0 {
        n = 1;
    }
    q(n, rng.gen_range(1i64..=4))
}

/// Random symmetric invertible matrix with small rational entries.
pub fn random_linking(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = small_rational(rng);
                m[(i, j)] = x.clone();
                m[(j, i)] = x;
            }
        }
        if m.inverse().is_some() {
            return m;
        }
    }
}

/// Random invertible matrix with small rational entries.
pub fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = if rng.gen_bool(0.3) { qi(0) } else { small_rational(rng) };
            }
        }
        if m.inverse().is_some() {
            return m;
        }
    }
}

/// `1 + ` a few random `B+` terms of degree at most `max_degree`.
pub fn random_perturbation(labels: usize, max_degree: usize, terms: usize, rng: &mut ChaCha8Rng) -> GradedSum {
    let pool = b_plus_diagrams(labels, max_degree);
    let mut p = GradedSum::one(Space::B, labels, max_degree);
    for _ in 0..terms {
        let d = pool.choose(rng).unwrap();
        p.add_canonical(d.clone(), small_rational(rng));
    }
    p
}

/// A perturbed Gaussian `exp(1/2 sum l strut) * P` and its parts.
pub fn random_gaussian(labels: usize, max_degree: usize, rng: &mut ChaCha8Rng) -> (Matrix, GradedSum, GradedSum) {
    let l = random_linking(labels, rng);
    let p = random_perturbation(labels, max_degree, 4, rng);
    let g = du_product(&gaussian::gaussian(&l, &qi(1), max_degree).unwrap(), &p).unwrap();
    (l, p, g)
}
