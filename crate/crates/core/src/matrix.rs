//! Dense matrices over an arbitrary [`Scalar`] ring.

use std::ops::{Index, IndexMut};

use crate::scalar::{Field, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| c.clone() * x.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    /// Matrix product; zero entries of `self` are skipped.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let x = &self[(i, l)];
                if x.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let y = &other[(l, j)];
                    if y.is_zero() {
                        continue;
                    }
                    let acc = std::mem::replace(&mut out[(i, j)], T::zero());
                    out[(i, j)] = acc + x.clone() * y.clone();
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn trace(&self) -> T {
        assert!(self.is_square());
        (0..self.rows).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().cloned().fold(T::zero(), |a, b| a + b))
            .collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// `tr(m^k)` for `k = 1..=upto`.
///
/// Only powers up to `ceil(upto / 2)` are formed; the remaining traces come
/// from `tr(X Y) = sum_ij X_ij Y_ji`.
pub fn power_traces<T: Scalar>(m: &Matrix<T>, upto: usize) -> Vec<T> {
    assert!(m.is_square());
    if upto == 0 {
        return Vec::new();
    }
    let n = m.rows();
    let half = upto.div_ceil(2);
    // Sparse copy of the right factor, which stays fixed.
    let sparse: Vec<Vec<(usize, T)>> = (0..n)
        .map(|l| {
            m.row(l)
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(j, x)| (j, x.clone()))
                .collect()
        })
        .collect();
    let mut powers: Vec<Matrix<T>> = vec![m.clone()];
    while powers.len() < half {
        let last = powers.last().unwrap();
        let mut next = Matrix::zeros(n, n);
        for i in 0..n {
            for (l, row) in sparse.iter().enumerate() {
                let x = &last[(i, l)];
                if x.is_zero() {
                    continue;
                }
                for (j, y) in row {
                    let acc = std::mem::replace(&mut next[(i, *j)], T::zero());
                    next[(i, *j)] = acc + x.clone() * y.clone();
                }
            }
        }
        powers.push(next);
    }
    (1..=upto)
        .map(|k| {
            if k <= powers.len() {
                return powers[k - 1].trace();
            }
            let a = &powers[k.div_ceil(2) - 1];
            let b = &powers[k / 2 - 1];
            let mut acc = T::zero();
            for i in 0..n {
                for j in 0..n {
                    let x = &a[(i, j)];
                    let y = &b[(j, i)];
                    if !x.is_zero() && !y.is_zero() {
                        acc = acc + x.clone() * y.clone();
                    }
                }
            }
            acc
        })
        .collect()
}

impl<T: Field> Matrix<T> {
    /// Reduces in place to reduced row echelon form and returns the pivot
    /// columns.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = T::one() / self[(r, c)].clone();
            for j in c..self.cols {
                self[(r, j)] = self[(r, j)].clone() * inv.clone();
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    let delta = f.clone() * self[(r, j)].clone();
                    self[(i, j)] = self[(i, j)].clone() - delta;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().row_reduce().len()
    }

    /// Solves `self * x = rhs` when the solution is unique.
    ///
    /// Returns `None` for inconsistent or underdetermined systems.
    pub fn solve_unique(&self, rhs: &[T]) -> Option<Vec<T>> {
        assert_eq!(rhs.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = rhs[i].clone();
        }
        let pivots = aug.row_reduce();
        if pivots.contains(&self.cols) || pivots.len() != self.cols {
            return None;
        }
        Some((0..self.cols).map(|i| aug[(i, self.cols)].clone()).collect())
    }
}

impl Matrix<num_bigint::BigInt> {
    /// Fraction-free (Bareiss) row echelon form in place; returns the pivot
    /// columns. Every division is exact, so entries stay bounded by minors.
    pub fn bareiss_echelon(&mut self) -> Vec<usize> {
        use num_bigint::BigInt;
        use num_traits::{One, Zero};
        let mut pivots = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let pivot = self[(r, c)].clone();
            for i in r + 1..self.rows {
                let f = std::mem::take(&mut self[(i, c)]);
                for j in c + 1..self.cols {
                    let x = &pivot * &self[(i, j)] - &f * &self[(r, j)];
                    self[(i, j)] = x / &prev;
                }
            }
            prev = pivot;
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn power_traces_match_repeated_products() {
        let m = Matrix::from_rows(vec![
            vec![q(1, 2), q(1, 3), q(1, 6)],
            vec![q(0, 1), q(1, 1), q(0, 1)],
            vec![q(1, 4), q(1, 4), q(1, 2)],
        ]);
        let traces = power_traces(&m, 7);
        for (k, t) in traces.iter().enumerate() {
            assert_eq!(*t, m.pow(k as u32 + 1).trace(), "k = {}", k + 1);
        }
    }

    #[test]
    fn rank_and_unique_solution() {
        let a = Matrix::from_rows(vec![vec![2.0f64, 1.0], vec![1.0, 3.0]]);
        let x = a.solve_unique(&[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        let singular = Matrix::from_rows(vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]]);
        assert_eq!(singular.rank(), 1);
        assert!(singular.solve_unique(&[q(1, 1), q(2, 1)]).is_none());
    }

    #[test]
    fn transpose_and_identity() {
        let m = Matrix::from_rows(vec![vec![1i64, 2], vec![3, 4]]);
        assert_eq!(m.transpose().row(0), &[1, 3]);
        assert_eq!(m.mul(&Matrix::identity(2)), m);
        assert_eq!(m.row_sums(), vec![3, 7]);
    }
}
