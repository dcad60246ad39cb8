//! Exact linear algebra: fraction-free sparse elimination over the
//! integers for relation matrices, and small dense rational matrices.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::sum::Q;

/// Sparse row: strictly increasing column indices with nonzero entries.
pub type SparseRow = Vec<(usize, BigInt)>;

/// Collects `(column, coefficient)` pairs into a sorted sparse row.
pub fn sparse_row(entries: impl IntoIterator<Item = (usize, i64)>) -> SparseRow {
    let mut acc: BTreeMap<usize, BigInt> = BTreeMap::new();
    for (c, x) in entries {
        *acc.entry(c).or_insert_with(BigInt::zero) += x;
    }
    acc.into_iter().filter(|(_, x)| !x.is_zero()).collect()
}

fn make_primitive(row: &mut SparseRow) {
    let mut g = BigInt::zero();
    for (_, x) in row.iter() {
        g = g.gcd(x);
        if g.is_one() {
            break;
        }
    }
    let negate = row.first().map(|(_, x)| x.is_negative()).unwrap_or(false);
    if g.is_zero() {
        return;
    }
    if negate {
        g = -g;
    }
    if !g.is_one() {
        for (_, x) in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

/// `a * row - b * pivot`, dropping cancelled entries.
fn combine(row: &SparseRow, a: &BigInt, pivot: &SparseRow, b: &BigInt) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let take_row = j >= pivot.len() || (i < row.len() && row[i].0 < pivot[j].0);
        let take_piv = i >= row.len() || (j < pivot.len() && pivot[j].0 < row[i].0);
        if take_row {
            out.push((row[i].0, a * &row[i].1));
            i += 1;
        } else if take_piv {
            out.push((pivot[j].0, -(b * &pivot[j].1)));
            j += 1;
        } else {
            let x = a * &row[i].1 - b * &pivot[j].1;
            if !x.is_zero() {
                out.push((row[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row echelon form built one row at a time, pivoting on the least column.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `row` against the current pivots and returns what is left
    /// (empty when `row` is in the span).
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let mut k = 0;
        while k < row.len() {
            let c = row[k].0;
            if let Some(p) = self.pivots.get(&c) {
                let a = &p[0].1;
                let b = &row[k].1;
                let g = a.gcd(b);
                let (a, b) = (a / &g, b / &g);
                row = combine(&row, &a, p, &b);
                make_primitive(&mut row);
                // entries before k are untouched by the pivot (it starts at c)
            } else {
                k += 1;
            }
        }
        row
    }

    /// Inserts a relation; returns true if the rank grew.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let mut row = row;
        make_primitive(&mut row);
        // only the leading column needs to be free of pivots for echelon form
        loop {
            let Some((c, _)) = row.first() else { return false };
            let c = *c;
            match self.pivots.get(&c) {
                Some(p) => {
                    let a = &p[0].1;
                    let b = &row[0].1;
                    let g = a.gcd(b);
                    let (a, b) = (a / &g, b / &g);
                    row = combine(&row, &a, p, &b);
                    make_primitive(&mut row);
                }
                None => {
                    self.pivots.insert(c, row);
                    return true;
                }
            }
        }
    }

    /// Reduced row echelon form with unit pivots.
    pub fn into_rref(mut self) -> Rref {
        let cols: Vec<usize> = self.pivots.keys().rev().copied().collect();
        for &c in &cols {
            let mut row = self.pivots.remove(&c).unwrap();
            let mut k = 1;
            while k < row.len() {
                let col = row[k].0;
                if let Some(p) = self.pivots.get(&col) {
                    let a = &p[0].1;
                    let b = &row[k].1;
                    let g = a.gcd(b);
                    let (a, b) = (a / &g, b / &g);
                    row = combine(&row, &a, p, &b);
                    make_primitive(&mut row);
                } else {
                    k += 1;
                }
            }
            self.pivots.insert(c, row);
        }
        let pivots = self
            .pivots
            .into_iter()
            .map(|(c, row)| {
                let lead = Q::from_integer(row[0].1.clone());
                let r: Vec<(usize, Q)> = row.into_iter().map(|(j, x)| (j, Q::from_integer(x) / &lead)).collect();
                (c, r)
            })
            .collect();
        Rref { pivots }
    }
}

/// Reduced row echelon form: each pivot row has a 1 at its pivot column
/// and zeros in every other pivot column.
#[derive(Clone, Debug)]
pub struct Rref {
    pub pivots: BTreeMap<usize, Vec<(usize, Q)>>,
}

/// Dense rational matrix, row major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Q>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Inverse by Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let p = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if p != col {
                a.swap_rows(p, col);
                inv.swap_rows(p, col);
            }
            let piv = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] /= &piv;
                inv[(col, j)] /= &piv;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let x = &f * &a[(col, j)];
                    a[(r, j)] -= x;
                    let y = &f * &inv[(col, j)];
                    inv[(r, j)] -= y;
                }
            }
        }
        Some(inv)
    }

    pub fn solve(&self, b: &[Q]) -> Result<Vec<Q>> {
        let inv = self.inverse().ok_or_else(|| Error::SolveFailure("singular matrix".into()))?;
        Ok(inv.mul_vec(b))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Numbers of positive and negative eigenvalues of a symmetric matrix,
    /// by exact congruence diagonalization.
    pub fn signature(&self) -> (usize, usize) {
        assert!(self.is_symmetric(), "signature needs a symmetric matrix");
        let n = self.rows;
        let mut a = self.clone();
        let (mut pos, mut neg) = (0, 0);
        let mut live: Vec<usize> = (0..n).collect();
        while let Some(&first) = live.first() {
            let _ = first;
            // a nonzero diagonal entry, or create one by adding row/col j to i
            let pivot = live.iter().copied().find(|&i| !a[(i, i)].is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => {
                    let pair = live
                        .iter()
                        .flat_map(|&i| live.iter().map(move |&j| (i, j)))
                        .find(|&(i, j)| i != j && !a[(i, j)].is_zero());
                    match pair {
                        None => break,
                        Some((i, j)) => {
                            // x_i -> x_i + x_j on both sides
                            for k in 0..n {
                                let v = a[(j, k)].clone();
                                a[(i, k)] += v;
                            }
                            for k in 0..n {
                                let v = a[(k, j)].clone();
                                a[(k, i)] += v;
                            }
                            i
                        }
                    }
                }
            };
            let d = a[(pivot, pivot)].clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            live.retain(|&i| i != pivot);
            for &r in &live {
                if a[(r, pivot)].is_zero() {
                    continue;
                }
                let f = &a[(r, pivot)] / &d;
                for k in 0..n {
                    let x = &f * &a[(pivot, k)];
                    a[(r, k)] -= x;
                }
                for k in 0..n {
                    let x = &f * &a[(k, pivot)];
                    a[(k, r)] -= x;
                }
            }
        }
        (pos, neg)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sum::{q, qi};

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect())
    }

    #[test]
    fn signatures() {
        assert_eq!(m(&[&[1, 0], &[0, 1]]).signature(), (2, 0));
        assert_eq!(m(&[&[1, 0], &[0, -1]]).signature(), (1, 1));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).signature(), (1, 1));
        assert_eq!(m(&[&[0, 0], &[0, 0]]).signature(), (0, 0));
        assert_eq!(m(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]]).signature(), (3, 0));
    }

    #[test]
    fn inverse_round_trip() {
        let a = Matrix::from_rows(vec![vec![q(1, 2), qi(3)], vec![qi(-1), qi(4)]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn echelon_rank_and_rref() {
        let mut e = Echelon::new();
        assert!(e.insert(sparse_row([(0, 1), (1, -1), (2, -1)])));
        assert!(e.insert(sparse_row([(1, 2), (2, 2)])));
        assert!(!e.insert(sparse_row([(0, 2), (1, 0), (2, 0)])));
        assert_eq!(e.rank(), 2);
        assert!(e.reduce(sparse_row([(0, 1)])).is_empty());
        assert!(!e.reduce(sparse_row([(0, 1), (2, -2)])).is_empty());
        let r = e.into_rref();
        assert_eq!(r.pivots[&0], vec![(0, qi(1))]);
        assert_eq!(r.pivots[&1], vec![(1, qi(1)), (2, qi(1))]);
    }
}
