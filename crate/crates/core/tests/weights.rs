use aarhus::diagram::named::{dumbbell, strut, theta};
use aarhus::gaussian::LinkingMatrix;
use aarhus::linalg::Matrix;
use aarhus::sum::{q, qi};
use aarhus::weights::{hbar_grade, rozansky_series, tg_closed, tg_diagram, tg_open, wick_pair, LieData, PolyTensor};
use aarhus::{GradedSum, Space, Q};

/// `sum_{abc} eps_{abc} eps_{abc}` by listing the six permutations.
fn epsilon_square() -> Q {
    let sign = |a: usize, b: usize, c: usize| -> i64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
            _ => 0,
        }
    };
    let mut s = 0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                s += sign(a, b, c) * sign(a, b, c);
            }
        }
    }
    qi(s)
}

#[test]
fn closed_examples() {
    let g = LieData::so3();
    assert_eq!(tg_diagram(&g, &theta()), epsilon_square());
    assert_eq!(tg_diagram(&g, &theta().disjoint_union(&theta())), qi(36));
    assert_eq!(tg_diagram(&g, &dumbbell()), qi(0));
    assert_eq!(tg_diagram(&LieData::sl2(), &dumbbell()), qi(0));
}

#[test]
fn reversing_one_cyclic_order_negates() {
    for g in [LieData::so3(), LieData::sl2()] {
        let t = tg_diagram(&g, &theta());
        assert_ne!(t, qi(0));
        assert_eq!(tg_diagram(&g, &theta().flip_vertex(1)), -t);
    }
}

#[test]
fn open_examples() {
    let g = LieData::sl2();
    let one = tg_open(&g, &GradedSum::one(Space::B, 1, 2)).unwrap();
    assert_eq!(one.terms.len(), 1);
    assert_eq!(one.terms[&(0, vec![])], qi(1));
    let xx = tg_open(&g, &GradedSum::from_diagram(Space::B, 1, 2, &strut(0, 0))).unwrap();
    let mut want = PolyTensor::zero(1, 3);
    for a in 0..3 {
        for b in 0..3 {
            let mut m = vec![a as u16, b as u16];
            m.sort_unstable();
            want.add(0, m, g.metric_inverse()[(a, b)].clone());
        }
    }
    assert_eq!(xx, want);
}

#[test]
fn wick_examples() {
    let g = LieData::new(Matrix::identity(1), vec![qi(0)]).unwrap();
    let l = LinkingMatrix::new(Matrix::identity(1)).unwrap();
    let mut p = PolyTensor::zero(1, 1);
    p.add(0, vec![], qi(1));
    assert_eq!(wick_pair(&p, &l, &g, 2).unwrap(), qi(1));
    let mut x2 = p.clone();
    x2.add(0, vec![0, 0], qi(1));
    assert_eq!(wick_pair(&x2, &l, &g, 2).unwrap() - qi(1), qi(-1));
    let mut odd = p.clone();
    odd.add(0, vec![0], qi(4));
    odd.add(0, vec![0, 0, 0], qi(-2));
    assert_eq!(wick_pair(&odd, &l, &g, 2).unwrap(), qi(1));
}

#[test]
fn series_examples() {
    let g = LieData::so3();
    let one = GradedSum::one(Space::Aempty, 0, 2);
    assert_eq!(rozansky_series(&g, &one).unwrap().coeffs, vec![qi(1), qi(0), qi(0)]);
    let th = GradedSum::from_diagram(Space::Aempty, 0, 2, &theta());
    assert_eq!(rozansky_series(&g, &one.plus(&th).unwrap()).unwrap().coeffs, vec![qi(1), qi(6), qi(0)]);
    assert_eq!(rozansky_series(&g, &one.minus(&th.scaled(&q(1, 2))).unwrap()).unwrap().coeffs, vec![qi(1), qi(-3), qi(0)]);
    let graded = hbar_grade(&one.plus(&th).unwrap());
    assert_eq!(graded[1], th);
    assert!(graded[2].is_zero());
}

#[test]
fn open_and_closed_agree_without_legs() {
    let g = LieData::sl2();
    let th = GradedSum::from_diagram(Space::Aempty, 0, 2, &theta());
    let as_open = th.with_space(Space::B, 0);
    let p = tg_open(&g, &as_open).unwrap();
    assert_eq!(p.terms[&(2, vec![])], tg_closed(&g, &th).unwrap());
}
