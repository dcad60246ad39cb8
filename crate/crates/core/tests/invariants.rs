//! Exhaustive structural checks over small degrees.

mod common;

use std::collections::BTreeSet;

use aarhus::diagram::{canonical_form, enumerate_diagrams, EnumerationLimits};
use aarhus::gaussian::{integrate_fg, PerturbedGaussian, LinkingMatrix};
use aarhus::relations::{ihx_terms, stu_terms};
use aarhus::sum::qi;
use aarhus::{GradedSum, Kernel, Space, Vertex};

fn limits() -> EnumerationLimits {
    EnumerationLimits::default()
}

#[test]
fn enumerations_are_duplicate_free_and_edges_balance() {
    for (space, labels) in [(Space::Aempty, 0), (Space::B, 1), (Space::B, 2), (Space::Aup, 1), (Space::Aup, 2)] {
        for m in 0..=3 {
            let all = enumerate_diagrams(space, m, labels, &limits(), true).unwrap();
            let forms: BTreeSet<_> = all.iter().map(|c| canonical_form(&c.canonical).canonical).collect();
            assert_eq!(forms.len(), all.len(), "{space:?}({labels}) degree {m}");
            for c in all.iter() {
                let d = &c.canonical;
                assert_eq!(d.degree(), m);
                assert_eq!(2 * d.num_edges(), 3 * d.num_trivalent() + d.num_legs() + d.num_attachments());
            }
        }
    }
}

#[test]
fn ihx_relators_reduce_to_zero() {
    let k = Kernel::default();
    for (space, labels) in [(Space::Aempty, 0), (Space::B, 1), (Space::B, 2)] {
        for m in 0..=3 {
            for c in enumerate_diagrams(space, m, labels, &limits(), true).unwrap().iter() {
                for (hu, hv) in c.canonical.internal_edges() {
                    let mut s = GradedSum::zero(space, labels, m);
                    for t in ihx_terms(&c.canonical, hu, hv) {
                        s.add_term(&t, qi(1));
                    }
                    assert!(k.reduce(&s).unwrap().is_zero(), "{:?}", c.canonical);
                }
            }
        }
    }
}

#[test]
fn stu_relators_reduce_to_zero() {
    let k = Kernel::default();
    for labels in 1..=2 {
        for m in 0..=3 {
            for c in enumerate_diagrams(Space::Aup, m, labels, &limits(), true).unwrap().iter() {
                let d = &c.canonical;
                for (line, ids) in d.skeleton().iter().enumerate() {
                    for pos in 0..ids.len().saturating_sub(1) {
                        let (t, u) = stu_terms(d, line, pos);
                        let mut s = GradedSum::zero(Space::Aup, labels, m);
                        s.add_term(d, qi(1));
                        s.add_term(&t, qi(-1));
                        s.add_term(&u, qi(-1));
                        assert!(k.reduce(&s).unwrap().is_zero(), "{d:?} at {line}/{pos}");
                    }
                }
            }
        }
    }
}

#[test]
fn closed_dimensions_match_free_polynomial_algebra() {
    let k = Kernel::default();
    let prims: Vec<usize> = (0..=5).map(|m| k.primitive_dimension(m).unwrap()).collect();
    // coefficients of prod_m (1 - t^m)^(-p_m)
    let mut series = vec![0usize; 6];
    series[0] = 1;
    for (m, &p) in prims.iter().enumerate().skip(1) {
        for _ in 0..p {
            for deg in m..=5 {
                series[deg] += series[deg - m];
            }
        }
    }
    let dims: Vec<usize> = (0..=5).map(|m| k.dimension(Space::Aempty, 0, m).unwrap()).collect();
    assert_eq!(series, dims);
}

#[test]
fn integration_lands_in_trivalent_degree() {
    let l = LinkingMatrix::new(aarhus::linalg::Matrix::from_rows(vec![vec![qi(2), qi(1)], vec![qi(1), qi(-3)]])).unwrap();
    for d in common::b_plus_diagrams(2, 3) {
        let mut p = GradedSum::one(Space::B, 2, 3);
        p.add_term(&d, qi(1));
        let pg = PerturbedGaussian { covariance: l.clone(), perturbation: p };
        let out = integrate_fg(&pg, 3).unwrap();
        let t = d.vertices().iter().filter(|v| **v == Vertex::Trivalent).count();
        for (g, _) in out.iter() {
            let m = g.degree();
            assert!(m == 0 || (m == t / 2 && m == d.degree() - d.num_legs() / 2), "{d:?} gave degree {m}");
        }
    }
}
