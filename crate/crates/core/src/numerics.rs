//! Dense small-scale linear algebra.
//!
//! Everything here works on row-major `f64` matrices of a few dozen rows and
//! columns. The singular value decomposition is a one-sided Jacobi sweep,
//! which is accurate to working precision at this scale and needs no external
//! LAPACK.

use crate::error::{Error, Result};

/// Relative singular-value cutoff below which a matrix is treated as rank deficient.
pub const RANK_RTOL: f64 = 1e-10;
/// Absolute cutoff used when the largest singular value is itself zero.
pub const RANK_ATOL: f64 = 1e-14;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn unit_vector(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = *v;
        }
        m
    }

    /// Builds a matrix from a list of equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Builds an `n x columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns(n: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut m = Self::zeros(n, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
            for (i, v) in c.iter().enumerate() {
                m.data[i * columns.len() + j] = *v;
            }
        }
        if m.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Largest absolute elementwise difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Thin singular value decomposition `A = U diag(s) V^T` with singular values
/// sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x k` left singular vectors, `k = min(rows, cols)`.
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    /// `cols x k` right singular vectors.
    pub v: DenseMatrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.s.last().copied().unwrap_or(0.0)
    }

    /// Number of singular values above the rank cutoff.
    pub fn rank(&self) -> usize {
        let cut = rank_cutoff(self.sigma_max());
        self.s.iter().filter(|&&s| s > cut).count()
    }
}

fn rank_cutoff(sigma_max: f64) -> f64 {
    if sigma_max == 0.0 {
        RANK_ATOL
    } else {
        RANK_RTOL * sigma_max
    }
}

/// One-sided Jacobi SVD.
pub fn svd(a: &DenseMatrix) -> Svd {
    if a.rows < a.cols {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let (m, n) = (a.rows, a.cols);
    // Work column-major: w[j] is column j of A V.
    let mut w: Vec<Vec<f64>> = a.columns();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| unit_vector(n, j)).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (wp, wq) = (w[p][i], w[q][i]);
                    w[p][i] = c * wp - s * wq;
                    w[q][i] = s * wp + c * wq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[p][i], v[q][i]);
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let sig: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]).then(i.cmp(&j)));
    let mut u = DenseMatrix::zeros(m, n);
    let mut vm = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        s.push(sig[j]);
        for i in 0..m {
            u.set(i, k, if sig[j] > 0.0 { w[j][i] / sig[j] } else { 0.0 });
        }
        for i in 0..n {
            vm.set(i, k, v[j][i]);
        }
    }
    Svd { u, s, v: vm }
}

fn full_column_rank_svd(a: &DenseMatrix) -> Result<Svd> {
    if a.cols > a.rows {
        return Err(Error::RankDeficient {
            sigma_min: 0.0,
            sigma_max: svd(a).sigma_max(),
        });
    }
    let d = svd(a);
    if a.cols > 0 && d.sigma_min() <= rank_cutoff(d.sigma_max()) {
        return Err(Error::RankDeficient {
            sigma_min: d.sigma_min(),
            sigma_max: d.sigma_max(),
        });
    }
    Ok(d)
}

/// Moore-Penrose pseudoinverse `(A^T A)^{-1} A^T` of a full-column-rank matrix.
pub fn pseudoinverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let d = full_column_rank_svd(a)?;
    // A^+ = V diag(1/s) U^T
    let (m, n) = (a.rows, a.cols);
    let mut out = DenseMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for k in 0..n {
                acc += d.v.get(i, k) * d.u.get(j, k) / d.s[k];
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// 2-norm condition number `sigma_max / sigma_min` of a full-column-rank matrix.
pub fn condition_number(a: &DenseMatrix) -> Result<f64> {
    let d = full_column_rank_svd(a)?;
    if a.cols == 0 {
        return Ok(1.0);
    }
    Ok(d.sigma_max() / d.sigma_min())
}

/// Orthonormal basis for the orthogonal complement of `col(A)`, for `A` of full
/// column rank. Empty when `A` is square.
pub fn orthonormal_complement(a: &DenseMatrix) -> Result<Vec<Vec<f64>>> {
    let d = full_column_rank_svd(a)?;
    let basis = d.u.columns();
    Ok(complete_basis(&basis, a.rows))
}

/// Orthonormal basis of `col(A)` for a matrix of any rank.
pub fn range_basis(a: &DenseMatrix) -> Vec<Vec<f64>> {
    let d = svd(a);
    let r = d.rank();
    (0..r).map(|k| d.u.column(k)).collect()
}

/// Orthonormal basis of the null space `{y : A y = 0}`.
pub fn null_space_basis(a: &DenseMatrix) -> Vec<Vec<f64>> {
    let n = a.cols;
    if a.rows == 0 {
        return (0..n).map(|j| unit_vector(n, j)).collect();
    }
    let row_space = range_basis(&a.transpose());
    complete_basis(&row_space, n)
}

/// Extends an orthonormal family in `R^n` by vectors spanning its orthogonal
/// complement, returning only the new vectors. Candidates are the coordinate
/// vectors, picked greedily by largest residual so the result is deterministic.
pub fn complete_basis(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut current: Vec<Vec<f64>> = basis.to_vec();
    let mut added = Vec::new();
    let mut used = vec![false; n];
    while current.len() < n {
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let mut r = unit_vector(n, j);
            for _ in 0..2 {
                for b in &current {
                    let c = dot(&r, b);
                    axpy(&mut r, -c, b);
                }
            }
            let nr = norm(&r);
            if best.as_ref().map_or(true, |(_, _, bn)| nr > *bn + 1e-14) {
                best = Some((j, r, nr));
            }
        }
        let Some((j, mut r, nr)) = best else { break };
        if nr <= 1e-12 {
            break;
        }
        used[j] = true;
        for _ in 0..2 {
            for b in &current {
                let c = dot(&r, b);
                axpy(&mut r, -c, b);
            }
        }
        let nr = norm(&r);
        for x in &mut r {
            *x /= nr;
        }
        current.push(r.clone());
        added.push(r);
    }
    added
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Returns `None` when a pivot falls below `1e-13` times the largest entry.
    pub fn factor(a: &DenseMatrix) -> Option<Self> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if n > 0 && scale == 0.0 {
            return None;
        }
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            if pv <= 1e-13 * scale {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Some(Self { n, lu, perm })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^T y = c`.
    pub fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = c.to_vec();
        // U^T z = c
        for i in 0..n {
            for j in 0..i {
                z[i] -= self.lu[j * n + i] * z[j];
            }
            z[i] /= self.lu[i * n + i];
        }
        // L^T w = z
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                z[i] -= self.lu[j * n + i] * z[j];
            }
        }
        let mut y = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = z[k];
        }
        y
    }
}
