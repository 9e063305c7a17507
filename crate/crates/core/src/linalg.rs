//! Dense exact linear algebra over [`Rational`].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::exact::{normalize, Rational};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
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

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
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

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&i| !self[(i, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = self[(row, col)].recip().expect("nonzero pivot");
            for j in col..self.cols {
                let v = &self[(row, j)] * &inv;
                self[(row, j)] = v;
            }
            for i in 0..self.rows {
                if i == row || self[(i, col)].is_zero() {
                    continue;
                }
                let f = self[(i, col)].clone();
                for j in col..self.cols {
                    if self[(row, j)].is_zero() {
                        continue;
                    }
                    let v = &self[(i, j)] - &(&f * &self[(row, j)]);
                    self[(i, j)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right nullspace, one vector per free column, each with a
    /// `1` in its free column.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -&m[(r, f)];
                }
                v
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Integer rows obtained by clearing each row's denominators, with the
    /// per-row scale factors.
    fn integer_rows(&self, rhs: Option<&[Rational]>) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let mut out = Vec::with_capacity(self.rows);
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row: Vec<&Rational> = self.row(i).iter().collect();
            if let Some(b) = rhs {
                row.push(&b[i]);
            }
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            out.push(row.iter().map(|x| x.numer() * (&l / x.denom())).collect());
            scales.push(l);
        }
        (out, scales)
    }

    /// Fraction-free determinant.
    pub fn determinant(&self) -> Rational {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Rational::one();
        }
        let (mut a, scales) = self.integer_rows(None);
        let Some(sign) = bareiss_forward(&mut a, n) else {
            return Rational::zero();
        };
        let scale = scales.iter().fold(BigInt::one(), |acc, s| acc * s);
        normalize(a[n - 1][n - 1].clone() * sign, scale).expect("positive scale")
    }

    /// Solves `self * x = rhs` by fraction-free elimination. Returns `None`
    /// when the matrix is singular.
    pub fn solve(&self, rhs: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(rhs.len(), self.rows);
        let n = self.rows;
        let (mut a, _) = self.integer_rows(Some(rhs));
        bareiss_forward(&mut a, n)?;
        let mut x = vec![Rational::zero(); n];
        for i in (0..n).rev() {
            let mut acc = Rational::from(a[i][n].clone());
            for j in i + 1..n {
                if !a[i][j].is_zero() {
                    acc -= Rational::from(a[i][j].clone()) * &x[j];
                }
            }
            x[i] = normalize(acc.numer().clone(), acc.denom() * &a[i][i]).expect("nonzero pivot");
        }
        Some(x)
    }
}

/// Bareiss elimination on the first `n` columns of `a` (which may carry extra
/// augmented columns). Returns the sign of the row permutation, or `None` if
/// the leading `n x n` block is singular.
fn bareiss_forward(a: &mut [Vec<BigInt>], n: usize) -> Option<i32> {
    let width = a.first().map_or(0, |r| r.len());
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&i| !a[i][k].is_zero())?;
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..width {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    Some(sign)
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| q(x, 1)).collect())
                .collect(),
        )
    }

    #[test]
    fn determinant_and_solve() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(a.determinant(), q(18, 1));
        let x = a.solve(&[q(1, 1), q(2, 1), q(3, 1)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![q(1, 1), q(2, 1), q(3, 1)]);
        let s = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.determinant(), Rational::zero());
        assert!(s.solve(&[q(1, 1), q(0, 1)]).is_none());
        // needs a row swap
        let p = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(p.determinant(), q(-1, 1));
        assert_eq!(
            p.solve(&[q(3, 1), q(5, 1)]).unwrap(),
            vec![q(5, 1), q(3, 1)]
        );
    }

    #[test]
    fn nullspace_basis() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(a.mul_vec(v).iter().all(Rational::is_zero));
        }
        assert_eq!(a.rank(), 1);
    }

    proptest! {
        #[test]
        fn solve_inverts_multiplication(
            entries in proptest::collection::vec((-9i64..9, 1i64..5), 16),
            xs in proptest::collection::vec((-9i64..9, 1i64..5), 4),
        ) {
            let a = Matrix::from_rows(entries.chunks(4).map(|r| r.iter().map(|&(p, d)| q(p, d)).collect()).collect());
            let x: Vec<Rational> = xs.iter().map(|&(p, d)| q(p, d)).collect();
            let b = a.mul_vec(&x);
            match a.solve(&b) {
                Some(y) => {
                    prop_assert!(!a.determinant().is_zero());
                    prop_assert_eq!(y, x);
                }
                None => prop_assert!(a.determinant().is_zero()),
            }
        }
    }
}
