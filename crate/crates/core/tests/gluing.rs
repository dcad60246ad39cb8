mod common;

use aarhus::diagram::named::{strut, theta, wheel};
use aarhus::gaussian::{glue_pair_diagrams, glue_pairing};
use aarhus::sum::qi;
use aarhus::{GradedSum, Space};
use common::*;
use rand::seq::SliceRandom;

fn single(d: &aarhus::Diagram, labels: usize) -> GradedSum {
    GradedSum::from_diagram(Space::B, labels, 3, d)
}

#[test]
fn strut_closes_wheel_into_two_thetas() {
    let got = oracle_glue(&single(&strut(0, 0), 1), &single(&wheel(&[0, 0]), 1));
    let want = GradedSum::from_diagram(Space::Aempty, 0, 3, &theta()).scaled(&qi(2));
    assert_eq!(got, want);
    assert_eq!(glue_pairing(&single(&strut(0, 0), 1), &single(&wheel(&[0, 0]), 1)).unwrap(), want);
}

#[test]
fn oracle_agrees_on_random_pairs() {
    let mut rng = rng(7);
    for labels in 1..=2 {
        let all = b_diagrams(labels, 3);
        let plus = b_plus_diagrams(labels, 3);
        let mut checked = 0;
        while checked < 25 {
            let d1 = all.choose(&mut rng).unwrap();
            let d2 = plus.choose(&mut rng).unwrap();
            if d1.leg_counts(labels) != d2.leg_counts(labels) || d1.num_legs() > 6 {
                continue;
            }
            let (c1, c2) = (single(d1, labels), single(d2, labels));
            assert_eq!(glue_pairing(&c1, &c2).unwrap(), oracle_glue(&c1, &c2), "{d1:?} {d2:?}");
            let count: usize = d1.leg_counts(labels).iter().map(|&k| (1..=k).product::<usize>()).product();
            assert_eq!(glue_pair_diagrams(d1, d2, labels).unwrap().len(), count);
            checked += 1;
        }
    }
}
