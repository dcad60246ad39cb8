//! Truncated formal linear combinations of canonical diagrams.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::diagram::{canonical_form, Diagram, Space};
use crate::error::{Error, Result};

pub type Q = num_rational::BigRational;

/// Shorthand for the rational `n / d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Formats as `p/q`, or `p` for integers.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

/// A finite sum of canonical diagrams of one space with nonzero exact
/// coefficients, truncated above `max_degree`.
///
/// `labels` is the number of leg labels (`B`) or skeleton lines (`Aup`);
/// it is 0 for `Aempty`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GradedSum {
    space: Space,
    labels: usize,
    max_degree: usize,
    terms: BTreeMap<Diagram, Q>,
}

impl GradedSum {
    pub fn zero(space: Space, labels: usize, max_degree: usize) -> Self {
        let labels = if space == Space::Aempty { 0 } else { labels };
        GradedSum { space, labels, max_degree, terms: BTreeMap::new() }
    }

    /// The unit: the empty diagram (on `labels` lines for `Aup`).
    pub fn one(space: Space, labels: usize, max_degree: usize) -> Self {
        let mut s = Self::zero(space, labels, max_degree);
        s.terms.insert(s.empty_diagram(), Q::one());
        s
    }

    pub fn from_diagram(space: Space, labels: usize, max_degree: usize, d: &Diagram) -> Self {
        let mut s = Self::zero(space, labels, max_degree);
        s.add_term(d, Q::one());
        s
    }

    pub fn empty_diagram(&self) -> Diagram {
        Diagram::empty(if self.space == Space::Aup { self.labels } else { 0 })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Diagram, &Q)> {
        self.terms.iter()
    }

    /// Adds `c * d`, canonicalizing `d` and absorbing its AS sign.
    /// Terms above the truncation degree are dropped.
    pub fn add_term(&mut self, d: &Diagram, c: Q) {
        if d.degree() > self.max_degree || c.is_zero() {
            return;
        }
        let sc = canonical_form(d);
        match sc.sign {
            0 => {}
            1 => self.add_canonical(sc.canonical, c),
            _ => self.add_canonical(sc.canonical, -c),
        }
    }

    /// Adds `c * d` for a diagram already in canonical form.
    pub fn add_canonical(&mut self, d: Diagram, c: Q) {
        if d.degree() > self.max_degree || c.is_zero() {
            return;
        }
        let entry = self.terms.entry(d);
        match entry {
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

    /// Coefficient of `d` (canonicalized, sign applied).
    pub fn coefficient(&self, d: &Diagram) -> Q {
        let sc = canonical_form(d);
        match (sc.sign, self.terms.get(&sc.canonical)) {
            (0, _) | (_, None) => Q::zero(),
            (1, Some(c)) => c.clone(),
            (_, Some(c)) => -c.clone(),
        }
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&self.empty_diagram()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn check_compatible(&self, other: &GradedSum) -> Result<()> {
        if self.space != other.space || self.labels != other.labels {
            return Err(Error::SpaceMismatch(format!(
                "{}({}) vs {}({})",
                self.space, self.labels, other.space, other.labels
            )));
        }
        Ok(())
    }

    pub fn check_space(&self, space: Space) -> Result<()> {
        if self.space != space {
            return Err(Error::SpaceMismatch(format!("expected {space}, found {}", self.space)));
        }
        Ok(())
    }

    /// Sum; truncation is the smaller of the two.
    pub fn plus(&self, other: &GradedSum) -> Result<GradedSum> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.max_degree = self.max_degree.min(other.max_degree);
        out.terms.retain(|d, _| d.degree() <= out.max_degree);
        for (d, c) in &other.terms {
            out.add_canonical(d.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn minus(&self, other: &GradedSum) -> Result<GradedSum> {
        self.plus(&other.scaled(&-Q::one()))
    }

    pub fn scaled(&self, c: &Q) -> GradedSum {
        let mut out = Self::zero(self.space, self.labels, self.max_degree);
        if c.is_zero() {
            return out;
        }
        for (d, x) in &self.terms {
            out.terms.insert(d.clone(), x * c);
        }
        out
    }

    /// The homogeneous part of degree `m`.
    pub fn degree_part(&self, m: usize) -> GradedSum {
        let mut out = Self::zero(self.space, self.labels, self.max_degree);
        for (d, c) in &self.terms {
            if d.degree() == m {
                out.terms.insert(d.clone(), c.clone());
            }
        }
        out
    }

    /// Highest degree carrying a nonzero term.
    pub fn top_degree(&self) -> Option<usize> {
        self.terms.keys().map(|d| d.degree()).max()
    }

    pub fn truncated(&self, max_degree: usize) -> GradedSum {
        let mut out = self.clone();
        out.max_degree = max_degree;
        out.terms.retain(|d, _| d.degree() <= max_degree);
        out
    }

    /// Same terms, reinterpreted in another space (used when a map does not
    /// change diagram shapes, e.g. between `B(X)` and `B(dX)`).
    pub fn with_space(&self, space: Space, labels: usize) -> GradedSum {
        let mut out = self.clone();
        out.space = space;
        out.labels = labels;
        out
    }

    /// Builds from canonical terms, dropping zeros and out-of-range degrees.
    pub fn from_terms(
        space: Space,
        labels: usize,
        max_degree: usize,
        terms: impl IntoIterator<Item = (Diagram, Q)>,
    ) -> GradedSum {
        let mut out = Self::zero(space, labels, max_degree);
        for (d, c) in terms {
            out.add_term(&d, c);
        }
        out
    }

    /// Largest absolute numerator among the coefficients, for diagnostics.
    pub fn height(&self) -> BigInt {
        self.terms.values().map(|c| c.numer().abs()).max().unwrap_or_else(BigInt::zero)
    }
}

impl fmt::Debug for GradedSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedSum<{}({}), N={}>{{", self.space, self.labels, self.max_degree)?;
        for (d, c) in &self.terms {
            write!(f, "\n  {} * {:?}", format_q(c), d)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::named::*;

    #[test]
    fn as_sign_is_absorbed() {
        let t = theta();
        let mut s = GradedSum::zero(Space::Aempty, 0, 3);
        s.add_term(&t, qi(1));
        s.add_term(&t.flip_vertex(0), qi(1));
        assert!(s.is_zero());
        s.add_term(&dumbbell(), qi(5));
        assert!(s.is_zero());
        s.add_term(&t, q(1, 2));
        assert_eq!(s.coefficient(&t), q(1, 2));
        assert_eq!(s.coefficient(&t.flip_vertex(1)), q(-1, 2));
    }

    #[test]
    fn truncation_drops_high_degrees() {
        let mut s = GradedSum::one(Space::Aempty, 0, 0);
        s.add_term(&theta(), qi(1));
        assert_eq!(s.len(), 1);
        assert_eq!(s.constant_term(), qi(1));
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = GradedSum::one(Space::B, 1, 2);
        let b = GradedSum::one(Space::B, 2, 2);
        assert!(matches!(a.plus(&b), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn rational_text() {
        for s in ["-3/7", "5", "0", "12/4"] {
            let x = parse_q(s).unwrap();
            assert_eq!(parse_q(&format_q(&x)).unwrap(), x);
        }
        assert_eq!(format_q(&parse_q("12/4").unwrap()), "3");
        assert!(parse_q("1/0").is_none());
        assert!(parse_q("x").is_none());
    }
}
