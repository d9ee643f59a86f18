//! Small dense linear algebra: vectors, symmetric and general matrices,
//! Cholesky solves, Jacobi eigenvalues and one-sided Jacobi SVD.
//!
//! Everything here targets the handful-of-dimensions regime (p up to a few
//! dozen). Matrices are row-major `Vec`s.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct Vector<T>(Vec<T>);

impl<T: Scalar> Vector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("vector", "dimension must be at least 1"));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Vector(entries))
    }

    pub fn from_f64(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| T::lit(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![T::zero(); dim])
    }

    /// `i`-th standard basis vector.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = T::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, s: T) -> Self {
        Vector(self.0.iter().map(|&x| x * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| a + s * b).collect())
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= T::tol(1e-12) {
            return Err(Error::invalid("vector", "cannot normalize a zero vector"));
        }
        Ok(self.scaled(T::one() / n))
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn cast<U: Scalar>(&self) -> Vector<U> {
        Vector(self.0.iter().map(|&x| U::lit(x.as_f64())).collect())
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// Dense general matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vector<T>]) -> Result<Self> {
        let rows = cols.first().map_or(0, Vector::dim);
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.dim() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: c.dim() });
            }
            for i in 0..rows {
                m.data[i * cols.len() + j] = c[i];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vector<T> {
        Vector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &Vector<T>) -> Result<Vector<T>> {
        if x.dim() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: x.dim() });
        }
        Ok(Vector(
            (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
                .collect(),
        ))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Singular values (descending) and right singular vectors as the columns
    /// of `V`, via one-sided Jacobi on the columns of `self`.
    pub fn svd_right(&self) -> (Vec<T>, Matrix<T>) {
        let (m, n) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut v = Matrix::identity(n);
        let eps = T::epsilon();
        for _ in 0..MAX_JACOBI_SWEEPS {
            let mut rotated = false;
            for j in 0..n {
                for k in (j + 1)..n {
                    let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                    for i in 0..m {
                        let (x, y) = (a.get(i, j), a.get(i, k));
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for i in 0..m {
                        let (x, y) = (a.get(i, j), a.get(i, k));
                        a.set(i, j, c * x - s * y);
                        a.set(i, k, s * x + c * y);
                    }
                    for i in 0..n {
                        let (x, y) = (v.get(i, j), v.get(i, k));
                        v.set(i, j, c * x - s * y);
                        v.set(i, k, s * x + c * y);
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let norms: Vec<T> = (0..n).map(|j| a.column(j).norm()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(std::cmp::Ordering::Equal));
        let sigma = order.iter().map(|&j| norms[j]).collect();
        let mut vs = Matrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..n {
                vs.set(i, dst, v.get(i, src));
            }
        }
        (sigma, vs)
    }

    pub fn singular_values(&self) -> Vec<T> {
        self.svd_right().0
    }

    pub fn gram(&self) -> SymMatrix<T> {
        let n = self.cols;
        let mut g = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let s: T = (0..self.rows).map(|k| self.get(k, i) * self.get(k, j)).sum();
                g[i * n + j] = s;
                g[j * n + i] = s;
            }
        }
        SymMatrix { n, data: g }
    }
}

/// Dense symmetric matrix. Symmetry is checked at construction and the stored
/// array is exactly symmetric afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn new(n: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("matrix", "dimension must be at least 1"));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("symmetric matrix"));
        }
        let scale = data.iter().fold(T::one(), |m, &x| m.max(x.abs()));
        let mut asym = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        if asym > T::tol(1e-12) * scale {
            return Err(Error::NonSymmetric { asymmetry: asym.as_f64() });
        }
        let mut m = SymMatrix { n, data };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        Self::new(n, rows.concat())
    }

    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n])
    }

    pub fn diagonal(d: &[T]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    /// `v vᵀ`
    pub fn outer(v: &Vector<T>) -> Self {
        let n = v.dim();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j];
            }
        }
        m
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        let half = T::lit(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i]) * half;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &Vector<T>) -> Vector<T> {
        debug_assert_eq!(x.dim(), self.n);
        Vector(
            (0..self.n)
                .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x.iter()).map(|(&a, &b)| a * b).sum())
                .collect(),
        )
    }

    /// `xᵀ A x`
    pub fn quad_form(&self, x: &Vector<T>) -> T {
        x.dot(&self.mul_vec(x))
    }

    pub fn add(&self, other: &Self) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect() }
    }

    pub fn scaled(&self, s: T) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().map(|&a| a * s).collect() }
    }

    /// `self + s I`
    pub fn shifted(&self, s: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += s;
        }
        m
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: T, other: &Self) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + s * b).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn to_matrix(&self) -> Matrix<T> {
        Matrix { rows: self.n, cols: self.n, data: self.data.clone() }
    }

    /// `Qᵀ A Q` for a basis `Q` with orthonormal columns.
    pub fn compress(&self, basis: &Matrix<T>) -> Result<SymMatrix<T>> {
        let aq = self.to_matrix().matmul(basis)?;
        let c = basis.transpose().matmul(&aq)?;
        let mut s = SymMatrix { n: c.rows, data: c.data };
        s.symmetrize();
        Ok(s)
    }

    /// Eigenvalues in ascending order by cyclic Jacobi rotations.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut vals = jacobi_eigen(self, false).0;
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        vals
    }

    /// Eigenvalues (ascending) with eigenvectors as matching columns.
    pub fn eigen(&self) -> (Vec<T>, Matrix<T>) {
        let (vals, vecs) = jacobi_eigen(self, true);
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let mut sorted = Matrix::zeros(self.n, self.n);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..self.n {
                sorted.set(i, dst, vecs.get(i, src));
            }
        }
        (order.iter().map(|&i| vals[i]).collect(), sorted)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        *self.eigenvalues().last().expect("nonempty matrix")
    }

    pub fn cholesky(&self) -> Result<Cholesky<T>> {
        let n = self.n;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) {
                return Err(Error::SingularCurvature { min_eigenvalue: self.min_eigenvalue().as_f64() });
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn cast<U: Scalar>(&self) -> SymMatrix<U> {
        SymMatrix { n: self.n, data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect() }
    }
}

fn jacobi_eigen<T: Scalar>(m: &SymMatrix<T>, want_vectors: bool) -> (Vec<T>, Matrix<T>) {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = if want_vectors { Matrix::identity(n) } else { Matrix::zeros(0, 0) };
    let scale = m.frobenius_norm();
    let two = T::lit(2.0);
    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off.sqrt() <= T::epsilon() * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                if want_vectors {
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn solve(&self, b: &Vector<T>) -> Vector<T> {
        let n = self.n;
        let mut y = b.0.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        Vector(y)
    }

    /// `A⁻¹`, assembled column by column from triangular solves.
    pub fn inverse(&self) -> SymMatrix<T> {
        let n = self.n;
        let mut inv = SymMatrix::zeros(n);
        for j in 0..n {
            let col = self.solve(&Vector::unit(n, j));
            for i in 0..n {
                inv.data[i * n + j] = col[i];
            }
        }
        inv.symmetrize();
        inv
    }
}

/// Householder reflector sending `u/‖u‖` to a multiple of `e₁`; its trailing
/// `p-1` columns are an orthonormal basis of `span(u)⊥`.
pub fn orthonormal_complement<T: Scalar>(u: &Vector<T>) -> Result<Matrix<T>> {
    let p = u.dim();
    let v = u.normalized().map_err(|_| Error::ZeroWelfareGradient)?;
    let sign = if v[0] >= T::zero() { T::one() } else { -T::one() };
    let mut w = v.clone();
    w.0[0] += sign;
    let wn = w.norm_sq();
    let two = T::lit(2.0);
    let mut basis = Matrix::zeros(p, p.saturating_sub(1));
    for j in 1..p {
        for i in 0..p {
            let delta = if i == j { T::one() } else { T::zero() };
            basis.set(i, j - 1, delta - two * w[i] * w[j] / wn);
        }
    }
    Ok(basis)
}
