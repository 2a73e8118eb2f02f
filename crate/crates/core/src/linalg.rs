//! Small dense linear algebra: row-major matrices, a one-sided Jacobi SVD,
//! pseudo-inverse solves and Gram-Schmidt orthonormalization.
//!
//! Everything here operates on matrices with a handful of rows and columns
//! (Jacobians of maps `R^n -> R^p` with `n <= 6`), so clarity wins over
//! blocking or cache tricks.

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Euclidean norm computed with scaling so that tiny vectors do not underflow.
pub fn norm<T: Scalar>(a: &[T]) -> T {
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let s: T = a.iter().map(|&v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

pub fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    let scale = a
        .iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let s: T = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = (x - y) / scale;
            d * d
        })
        .sum();
    scale * s.sqrt()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scaled<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    /// Builds a matrix from equally sized rows.
    ///
    /// Panics if the rows have different lengths.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Operator 2-norm (largest singular value).
    pub fn spectral_norm(&self) -> T {
        svd(self).singular.first().copied().unwrap_or_else(T::zero)
    }

    pub fn frobenius_norm(&self) -> T {
        norm(&self.data)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin singular value decomposition `A = U diag(s) V^T`.
///
/// With `m = min(rows, cols)`, `u` holds `m` left singular vectors (each of
/// length `rows`) and `v` holds `m` right singular vectors (length `cols`).
/// Singular values are sorted in non-increasing order.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Vec<Vec<T>>,
    pub singular: Vec<T>,
    pub v: Vec<Vec<T>>,
}

impl<T: Scalar> Svd<T> {
    /// Number of singular values above `rel_tol` times the largest one.
    pub fn rank(&self, rel_tol: T) -> usize {
        match self.singular.first() {
            Some(&s0) if s0 > T::zero() => {
                self.singular.iter().filter(|&&s| s > rel_tol * s0).count()
            }
            _ => 0,
        }
    }

    /// Minimum-norm least-squares solution of `A x = b`, discarding singular
    /// values at or below `rel_tol` times the largest.
    pub fn solve(&self, b: &[T], rel_tol: T) -> Vec<T> {
        let n = self.v.first().map_or(0, Vec::len);
        let mut x = vec![T::zero(); n];
        let Some(&s0) = self.singular.first() else {
            return x;
        };
        for ((u, v), &s) in self.u.iter().zip(&self.v).zip(&self.singular) {
            if s <= rel_tol * s0 || s == T::zero() {
                continue;
            }
            let coef = dot(u, b) / s;
            for (xi, &vi) in x.iter_mut().zip(v) {
                *xi += coef * vi;
            }
        }
        x
    }
}

/// One-sided Jacobi SVD. Accurate to high relative precision in the small
/// singular values, which the rank tests depend on.
pub fn svd<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    if a.rows() < a.cols() {
        let t = jacobi_columns(&a.transpose());
        return Svd {
            u: t.v,
            singular: t.singular,
            v: t.u,
        };
    }
    jacobi_columns(a)
}

// Orthogonalizes the columns of a tall (rows >= cols) matrix.
fn jacobi_columns<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    let m = a.rows();
    let n = a.cols();
    // Columns stored contiguously.
    let mut w: Vec<Vec<T>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let eps = T::epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for j in 0..n {
            for k in j + 1..n {
                let alpha = dot(&w[j], &w[j]);
                let beta = dot(&w[k], &w[k]);
                let gamma = dot(&w[j], &w[k]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, j, k, c, s);
                rotate(&mut v, j, k, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut triples: Vec<(T, Vec<T>, Vec<T>)> = w
        .into_iter()
        .zip(v)
        .map(|(col, vj)| {
            let s = norm(&col);
            let u = if s > T::zero() {
                scaled(&col, T::one() / s)
            } else {
                vec![T::zero(); m]
            };
            (s, u, vj)
        })
        .collect();
    triples.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = Svd {
        u: Vec::with_capacity(n),
        singular: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
    };
    for (s, u, vj) in triples {
        out.singular.push(s);
        out.u.push(u);
        out.v.push(vj);
    }
    out
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], j: usize, k: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(k);
    let a = &mut left[j];
    let b = &mut right[0];
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xv, yv) = (*x, *y);
        *x = c * xv - s * yv;
        *y = s * xv + c * yv;
    }
}

/// Orthonormalizes `vectors` with modified Gram-Schmidt applied twice.
/// Returns `None` when a vector collapses below `rel_tol` of its original
/// norm (numerically dependent input).
pub fn orthonormalize<T: Scalar>(vectors: &[Vec<T>], rel_tol: T) -> Option<Vec<Vec<T>>> {
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let original = norm(v);
        if original == T::zero() {
            return None;
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, &qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let nw = norm(&w);
        if nw <= rel_tol * original {
            return None;
        }
        basis.push(scaled(&w, T::one() / nw));
    }
    Some(basis)
}
