//! Randomized algebraic properties over small enumerated diagrams.

mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use aarhus::diagram::{canonical_form, enumerate_diagrams, EnumerationLimits};
use aarhus::gaussian::{signature, LinkingMatrix};
use aarhus::linalg::Matrix;
use aarhus::maps::{cable_delta, chi, coproduct, du_product, erase_line, exp_union, is_grouplike};
use aarhus::sum::{q, qi};
use aarhus::weights::{rozansky_series, tg_closed, LieData};
use aarhus::{Diagram, GradedSum, Kernel, Space, Vertex, Q};
use proptest::prelude::*;

fn pool(space: Space, labels: usize, max_degree: usize) -> Vec<Diagram> {
    (0..=max_degree)
        .flat_map(|m| enumerate_diagrams(space, m, labels, &EnumerationLimits::default(), false).unwrap())
        .filter(|c| c.sign != 0)
        .map(|c| c.canonical)
        .collect()
}

fn closed() -> &'static Vec<Diagram> {
    static P: OnceLock<Vec<Diagram>> = OnceLock::new();
    P.get_or_init(|| pool(Space::Aempty, 0, 3))
}

fn open2() -> &'static Vec<Diagram> {
    static P: OnceLock<Vec<Diagram>> = OnceLock::new();
    P.get_or_init(|| pool(Space::B, 2, 3))
}

fn connected2() -> &'static Vec<Diagram> {
    static P: OnceLock<Vec<Diagram>> = OnceLock::new();
    P.get_or_init(|| open2().iter().filter(|d| d.components().len() == 1).cloned().collect())
}

fn one_line() -> &'static Vec<Diagram> {
    static P: OnceLock<Vec<Diagram>> = OnceLock::new();
    P.get_or_init(|| pool(Space::Aup, 1, 2))
}

fn kernel() -> &'static Kernel {
    static K: OnceLock<Kernel> = OnceLock::new();
    K.get_or_init(Kernel::default)
}

fn rational() -> impl Strategy<Value = Q> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| q(n, d))
}

fn sum_in(space: Space, labels: usize, max_degree: usize, diagrams: &'static [Diagram]) -> impl Strategy<Value = GradedSum> {
    prop::collection::vec((0..diagrams.len(), rational()), 0..5).prop_map(move |terms| {
        let mut s = GradedSum::zero(space, labels, max_degree);
        for (i, c) in terms {
            s.add_canonical(diagrams[i].clone(), c);
        }
        s
    })
}

/// The same diagram with its vertices renumbered by `perm`.
fn renumber(d: &Diagram, perm: &[usize]) -> Diagram {
    let n = d.num_vertices();
    let mut vertices = vec![Vertex::Trivalent; n];
    let mut partner = vec![u32::MAX; 3 * n];
    for v in 0..n {
        vertices[perm[v]] = d.vertices()[v];
        for s in 0..d.vertices()[v].valence() {
            let (w, t) = d.partner(v, s);
            partner[3 * perm[v] + s] = (3 * perm[w] + t) as u32;
        }
    }
    let skeleton = d.skeleton().iter().map(|line| line.iter().map(|&a| perm[a as usize] as u32).collect()).collect();
    Diagram::from_parts(vertices, partner, skeleton).unwrap()
}

/// Rotating the slots at a vertex by one keeps the cyclic order.
fn rotate_vertex(d: &Diagram, v: usize) -> Diagram {
    let n = d.num_vertices();
    let mut partner = vec![u32::MAX; 3 * n];
    let image = |w: usize, t: usize| if w == v { 3 * w + (t + 1) % 3 } else { 3 * w + t };
    for w in 0..n {
        for t in 0..d.vertices()[w].valence() {
            let (x, u) = d.partner(w, t);
            partner[image(w, t)] = image(x, u) as u32;
        }
    }
    Diagram::from_parts(d.vertices().to_vec(), partner, d.skeleton().to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn canonical_form_is_idempotent(i in 0..200usize) {
        let d = &open2()[i % open2().len()];
        let c = canonical_form(d);
        prop_assert_eq!(&c.canonical, d);
        prop_assert_eq!(c.sign, 1);
    }

    #[test]
    fn isomorphic_copies_share_form_and_degree(i in 0..200usize, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let d = &open2()[i % open2().len()];
        let mut perm: Vec<usize> = (0..d.num_vertices()).collect();
        perm.shuffle(&mut common::rng(seed));
        let e = renumber(d, &perm);
        prop_assert_eq!(e.degree(), d.degree());
        prop_assert_eq!(canonical_form(&e).canonical, d.clone());
        prop_assert_eq!(canonical_form(&e).sign, 1);
    }

    #[test]
    fn transposition_flips_sign(i in 0..200usize, v in 0..12usize) {
        let d = &closed()[i % closed().len()];
        prop_assume!(d.num_vertices() > 0);
        let v = v % d.num_vertices();
        let f = canonical_form(&d.flip_vertex(v));
        prop_assert_eq!(&f.canonical, d);
        prop_assert_eq!(f.sign, -1);
        let r = canonical_form(&rotate_vertex(d, v));
        prop_assert_eq!(r.sign, 1);
    }

    #[test]
    fn reduce_is_linear(s in sum_in(Space::B, 2, 3, open2()), t in sum_in(Space::B, 2, 3, open2()), a in rational()) {
        let k = kernel();
        let lhs = k.reduce(&s.scaled(&a).plus(&t).unwrap()).unwrap();
        let (rs, rt) = (k.reduce(&s).unwrap(), k.reduce(&t).unwrap());
        for m in 0..=3 {
            let want: Vec<Q> = rs.parts[m].iter().zip(&rt.parts[m]).map(|(x, y)| x * &a + y).collect();
            prop_assert_eq!(&lhs.parts[m], &want);
        }
    }

    #[test]
    fn chi_is_linear_and_graded(s in sum_in(Space::B, 2, 3, open2()), t in sum_in(Space::B, 2, 3, open2()), a in rational()) {
        let lhs = chi(&s.scaled(&a).plus(&t).unwrap()).unwrap();
        let rhs = chi(&s).unwrap().scaled(&a).plus(&chi(&t).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        for m in 0..=3 {
            let part = chi(&s.degree_part(m)).unwrap();
            prop_assert!(part.iter().all(|(d, _)| d.degree() == m));
        }
    }

    #[test]
    fn disjoint_union_is_commutative_and_associative(
        a in sum_in(Space::B, 2, 3, open2()),
        b in sum_in(Space::B, 2, 3, open2()),
        c in sum_in(Space::B, 2, 3, open2()),
    ) {
        prop_assert_eq!(du_product(&a, &b).unwrap(), du_product(&b, &a).unwrap());
        let left = du_product(&du_product(&a, &b).unwrap(), &c).unwrap();
        let right = du_product(&a, &du_product(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn coproduct_is_cocommutative_and_coassociative(i in 0..200usize) {
        let d = &open2()[i % open2().len()];
        let delta = coproduct(d, Space::B, 2, 3).unwrap();
        let swapped: BTreeMap<(Diagram, Diagram), Q> = delta.iter().map(|((a, b), c)| ((b.clone(), a.clone()), c.clone())).collect();
        let plain: BTreeMap<(Diagram, Diagram), Q> = delta.iter().map(|(k, c)| (k.clone(), c.clone())).collect();
        prop_assert_eq!(plain, swapped);
        let mut left: BTreeMap<[Diagram; 3], Q> = BTreeMap::new();
        let mut right: BTreeMap<[Diagram; 3], Q> = BTreeMap::new();
        for ((a, b), c) in delta.iter() {
            for ((a1, a2), c2) in coproduct(a, Space::B, 2, 3).unwrap().iter() {
                *left.entry([a1.clone(), a2.clone(), b.clone()]).or_insert_with(|| qi(0)) += c * c2;
            }
            for ((b1, b2), c2) in coproduct(b, Space::B, 2, 3).unwrap().iter() {
                *right.entry([a.clone(), b1.clone(), b2.clone()]).or_insert_with(|| qi(0)) += c * c2;
            }
        }
        prop_assert_eq!(left, right);
    }

    #[test]
    fn exponentials_of_primitives_are_grouplike(s in sum_in(Space::B, 2, 3, connected2())) {
        prop_assert!(is_grouplike(&exp_union(&s).unwrap()).unwrap());
    }

    #[test]
    fn cabling_then_erasing_is_identity(
        terms in prop::collection::vec((0..64usize, rational()), 0..4),
        lines in 1..=3usize,
        erase in 0..3usize,
    ) {
        let mut s = GradedSum::zero(Space::Aup, 1, 2);
        for (i, c) in terms {
            s.add_canonical(one_line()[i % one_line().len()].clone(), c);
        }
        let cabled = cable_delta(&s, lines + 1).unwrap();
        let back = erase_line(&cabled, erase % (lines + 1)).unwrap();
        prop_assert_eq!(back, cable_delta(&s, lines).unwrap());
    }

    #[test]
    fn weights_are_multiplicative(a in sum_in(Space::Aempty, 0, 3, closed()), b in sum_in(Space::Aempty, 0, 3, closed())) {
        let ab = du_product(&a.truncated(6), &b.truncated(6)).unwrap();
        for g in [LieData::so3(), LieData::sl2()] {
            prop_assert_eq!(tg_closed(&g, &ab).unwrap(), tg_closed(&g, &a).unwrap() * tg_closed(&g, &b).unwrap());
        }
    }

    #[test]
    fn rozansky_series_is_an_algebra_map(a in sum_in(Space::Aempty, 0, 2, closed()), b in sum_in(Space::Aempty, 0, 2, closed())) {
        let a = a.truncated(2);
        let b = b.truncated(2);
        let ab = du_product(&a, &b).unwrap();
        let g = LieData::so3();
        let lhs = rozansky_series(&g, &ab).unwrap();
        let rhs = rozansky_series(&g, &a).unwrap().mul(&rozansky_series(&g, &b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn signature_is_congruence_invariant(seed in any::<u64>(), n in 1..=3usize) {
        let mut rng = common::rng(seed);
        let l = common::random_linking(n, &mut rng);
        let a = common::random_invertible(n, &mut rng);
        let moved = a.transpose().mul(&l).mul(&a);
        let s0 = signature(&LinkingMatrix::new(l).unwrap());
        let s1 = signature(&LinkingMatrix::new(moved).unwrap());
        prop_assert_eq!(s0, s1);
    }
}

#[test]
fn odd_monomials_pair_to_zero() {
    use aarhus::weights::{wick_pair, PolyTensor};
    let g = LieData::sl2();
    let l = LinkingMatrix::new(Matrix::identity(2)).unwrap();
    let mut p = PolyTensor::zero(2, 3);
    p.add(0, vec![0, 1, 4], qi(3));
    p.add(0, vec![5], qi(-1));
    assert_eq!(wick_pair(&p, &l, &g, 3).unwrap(), qi(0));
}
