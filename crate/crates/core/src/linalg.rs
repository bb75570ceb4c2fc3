//! Small dense linear algebra over any [`Scalar`].

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{abs_max, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, found: row.len() });
            }
            data.extend(row);
        }
        Ok(Matrix { rows: r, cols: c, data })
    }

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

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let cols = self.cols;
        self.data.iter().enumerate().map(move |(k, v)| (k / cols, k % cols, v))
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |a, v| a + v.clone()))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (i, j, v) in self.entries() {
            t[(j, i)] = v.clone();
        }
        t
    }

    /// Extracts the block with the given row and column index sets.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (bi, &i) in rows.iter().enumerate() {
            for (bj, &j) in cols.iter().enumerate() {
                m[(bi, bj)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> Self {
        let mut m = self.clone();
        for v in m.data.iter_mut() {
            *v = -v.clone();
        }
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] = T::one() + m[(i, i)].clone();
        }
        m
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: other.rows * other.cols });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v M`.
    pub fn left_mul(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                if !m.is_zero() {
                    *o = o.clone() + vi.clone() * m.clone();
                }
            }
        }
        out
    }

    /// Matrix times column vector: `M v`.
    pub fn right_mul(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn max_abs(&self) -> T {
        abs_max(&self.data)
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

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    original: Matrix<T>,
    lu: Matrix<T>,
    perm: Vec<usize>,
    min_relative_pivot: f64,
}

impl<T: Scalar> Lu<T> {
    /// Factorizes a square matrix, failing when a pivot falls below the scalar's
    /// relative singularity threshold.
    pub fn factor(a: &Matrix<T>, context: &str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
        }
        let n = a.rows();
        let scale = {
            let m = a.max_abs();
            if m.is_zero() { T::one() } else { m }
        };
        let threshold = T::singular_threshold() * scale.clone();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;

        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            let rel = (best.clone() / scale.clone()).to_f64_lossy();
            min_pivot = min_pivot.min(rel);
            if best.is_zero() || best <= threshold {
                return Err(Error::Singular { context: context.to_string(), pivot: rel });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)].clone();
                    lu[(k, j)] = lu[(p, j)].clone();
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)].clone();
            for i in k + 1..n {
                if lu[(i, k)].is_zero() {
                    continue;
                }
                let factor = lu[(i, k)].clone() / pivot.clone();
                for j in k + 1..n {
                    let ukj = lu[(k, j)].clone();
                    if !ukj.is_zero() {
                        lu[(i, j)] = lu[(i, j)].clone() - factor.clone() * ukj;
                    }
                }
                lu[(i, k)] = factor;
            }
        }
        Ok(Lu { original: a.clone(), lu, perm, min_relative_pivot: min_pivot })
    }

    /// Smallest pivot seen during elimination, relative to the largest entry.
    pub fn min_relative_pivot(&self) -> f64 {
        self.min_relative_pivot
    }

    #[allow(clippy::needless_range_loop)]
    fn substitute(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            let mut acc = x[i].clone();
            for j in 0..i {
                acc = acc - self.lu[(i, j)].clone() * x[j].clone();
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i].clone();
            for j in i + 1..n {
                acc = acc - self.lu[(i, j)].clone() * x[j].clone();
            }
            x[i] = acc / self.lu[(i, i)].clone();
        }
        x
    }

    /// Solves `A x = b`, with one round of iterative refinement for inexact scalars.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = self.substitute(b);
        if T::REFINE {
            let ax = self.original.right_mul(&x);
            let r: Vec<T> = b.iter().zip(ax).map(|(bi, ai)| bi.clone() - ai).collect();
            let d = self.substitute(&r);
            for (xi, di) in x.iter_mut().zip(d) {
                *xi = xi.clone() + di;
            }
        }
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col: Vec<T> = (0..b.rows()).map(|i| b[(i, j)].clone()).collect();
            for (i, v) in self.solve(&col).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}
