//! Dense linear algebra for desk-sized symmetric problems.
//!
//! Row-major storage, Cholesky factorization with forward/back substitution,
//! power iteration for the largest eigenvalue and Cholesky-backed inverse
//! iteration for the smallest one. Generalized problems `S v = λ A v` are
//! reduced by the congruence `L⁻¹ S L⁻ᵀ` with `A = L Lᵀ`.

use std::ops::{Index, IndexMut};
use thiserror::Error;

/// Iteration cap shared by the eigenvalue routines.
pub const EIGEN_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error(
        "eigen iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("ragged rows: row {row} has {got} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from nested rows. `cols` is required so that empty
    /// row lists still carry a shape.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::Ragged {
                    row: i,
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x` without forming the transpose.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Largest `|a_ij − a_ji|`; `+inf` for non-square input.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol
    }

    /// `(A + Aᵀ) / 2`, exactly symmetric.
    pub fn symmetrized(&self) -> Matrix {
        assert!(self.is_square());
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    /// Contiguous sub-block `[r0, r0 + nr) × [c0, c0 + nc)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Matrix {
        Matrix::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    /// `xᵀ self x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Max-row-sum norm, used as a cheap scale for tolerances.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Lower-triangular Cholesky factor `L` with `K = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn factor(k: &Matrix) -> Result<Self, LinalgError> {
        if !k.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", k.rows(), k.cols()),
            });
        }
        let n = k.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = k[(j, j)];
            for p in 0..j {
                d -= l[(j, p)] * l[(j, p)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = k[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let s = y[i] - (0..i).map(|p| self.l[(i, p)] * y[p]).sum::<f64>();
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let s = x[i] - ((i + 1)..n).map(|p| self.l[(p, i)] * x[p]).sum::<f64>();
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `K x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// Solves `K X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col: Vec<f64> = (0..b.rows()).map(|i| b[(i, j)]).collect();
            let x = self.solve(&col);
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// `L⁻¹ S L⁻ᵀ`, the symmetric matrix whose spectrum equals that of the
    /// pencil `S v = λ K v`.
    pub fn congruence(&self, s: &Matrix) -> Matrix {
        let n = self.dim();
        // Y = L⁻¹ S, column by column.
        let mut y = Matrix::zeros(n, n);
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| s[(i, j)]).collect();
            for (i, v) in self.solve_lower(&col).into_iter().enumerate() {
                y[(i, j)] = v;
            }
        }
        // Z = L⁻¹ Yᵀ = (Y L⁻ᵀ)ᵀ; S symmetric so Z = L⁻¹ S L⁻ᵀ.
        let yt = y.transpose();
        let mut z = Matrix::zeros(n, n);
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| yt[(i, j)]).collect();
            for (i, v) in self.solve_lower(&col).into_iter().enumerate() {
                z[(i, j)] = v;
            }
        }
        z.symmetrized()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EigenEstimate {
    pub value: f64,
    /// `‖K v − λ v‖ / ‖v‖` at the returned vector.
    pub residual: f64,
    pub iterations: usize,
}

fn start_vectors(n: usize) -> Vec<Vec<f64>> {
    // Deterministic and generic enough to not be orthogonal to an extremal
    // eigenvector of structured matrices.
    let first: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 1.618_033_988_75 + 0.3).sin())
        .collect();
    let second: Vec<f64> = (0..n)
        .map(|i| ((i as f64) * 2.414_213_562_37 + 1.1).cos())
        .collect();
    let mut basis = Vec::new();
    for v in [first, second].into_iter().take(n.min(2)) {
        push_orthonormal(&mut basis, v);
    }
    basis
}

/// Appends `v` orthonormalized against `basis` (twice), unless it is
/// numerically dependent on it.
fn push_orthonormal(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) -> bool {
    let original = norm2(&v);
    if original == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for u in basis.iter() {
            let c = dot(u, &v);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= c * ui;
            }
        }
    }
    let nv = norm2(&v);
    if nv <= 1e-10 * original {
        return false;
    }
    basis.push(scale(&v, 1.0 / nv));
    true
}

fn check_symmetric_square(k: &Matrix) -> Result<(), LinalgError> {
    if !k.is_square() || k.rows() == 0 {
        return Err(LinalgError::DimensionMismatch {
            expected: "non-empty square matrix".into(),
            got: format!("{}x{}", k.rows(), k.cols()),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Extreme {
    Largest,
    Smallest,
}

/// Rayleigh–Ritz on an orthonormal basis of one or two vectors: the chosen
/// extreme Ritz pair and its residual `‖Ku − λu‖`.
fn ritz(k: &Matrix, basis: &[Vec<f64>], which: Extreme) -> (f64, Vec<f64>, f64) {
    let kb: Vec<Vec<f64>> = basis.iter().map(|v| k.matvec(v)).collect();
    let (lambda, coeffs) = if basis.len() == 1 {
        (
            dot(&basis[0], &kb[0]) / dot(&basis[0], &basis[0]),
            vec![1.0],
        )
    } else {
        // diagonal entries as exact Rayleigh quotients of the basis vectors
        let a = dot(&basis[0], &kb[0]) / dot(&basis[0], &basis[0]);
        let c = dot(&basis[1], &kb[1]) / dot(&basis[1], &basis[1]);
        let b = 0.5 * (dot(&basis[0], &kb[1]) + dot(&basis[1], &kb[0]));
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let lambda = match which {
            Extreme::Largest => mid + rad,
            Extreme::Smallest => mid - rad,
        };
        // the better conditioned of the two null vectors of H − λI
        let y1 = [b, lambda - a];
        let y2 = [lambda - c, b];
        let n1 = y1[0].hypot(y1[1]);
        let n2 = y2[0].hypot(y2[1]);
        let y = if n1 == 0.0 && n2 == 0.0 {
            [1.0, 0.0]
        } else if n1 >= n2 {
            [y1[0] / n1, y1[1] / n1]
        } else {
            [y2[0] / n2, y2[1] / n2]
        };
        (lambda, y.to_vec())
    };
    let n = k.rows();
    let mut u = vec![0.0; n];
    let mut ku = vec![0.0; n];
    for ((v, kv), c) in basis.iter().zip(&kb).zip(&coeffs) {
        for i in 0..n {
            u[i] += c * v[i];
            ku[i] += c * kv[i];
        }
    }
    let nu = norm2(&u);
    let r: Vec<f64> = ku.iter().zip(&u).map(|(a, b)| a - lambda * b).collect();
    (lambda, scale(&u, 1.0 / nu), norm2(&r) / nu)
}

/// Subspace iteration with a two-dimensional basis; `apply` is `K` for the
/// largest and `K⁻¹` for the smallest eigenvalue. The extra vector keeps
/// convergence fast when the two extreme eigenvalues nearly coincide.
fn subspace_iteration(
    k: &Matrix,
    tol: f64,
    which: Extreme,
    apply: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<EigenEstimate, LinalgError> {
    let mut basis = start_vectors(k.rows());
    let mut residual = f64::INFINITY;
    for it in 0..=EIGEN_MAX_ITERATIONS {
        let (lambda, _, r) = ritz(k, &basis, which);
        residual = r;
        if r <= tol {
            return Ok(EigenEstimate {
                value: lambda,
                residual: r,
                iterations: it,
            });
        }
        let mut next = Vec::with_capacity(basis.len());
        for v in &basis {
            push_orthonormal(&mut next, apply(v));
        }
        if next.is_empty() {
            // K vanishes on the basis; for PSD K the start vectors are generic
            // enough that this means K = 0.
            return Ok(EigenEstimate {
                value: 0.0,
                residual: 0.0,
                iterations: it,
            });
        }
        basis = next;
    }
    Err(LinalgError::NoConvergence {
        iterations: EIGEN_MAX_ITERATIONS,
        residual,
    })
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// (subspace) iteration.
pub fn power_iteration(k: &Matrix, tol: f64) -> Result<EigenEstimate, LinalgError> {
    check_symmetric_square(k)?;
    subspace_iteration(k, tol, Extreme::Largest, |v| k.matvec(v))
}

/// Smallest eigenvalue of a symmetric positive definite matrix by inverse
/// (subspace) iteration with zero shift.
pub fn inverse_iteration(k: &Matrix, tol: f64) -> Result<EigenEstimate, LinalgError> {
    check_symmetric_square(k)?;
    let chol = Cholesky::factor(k)?;
    subspace_iteration(k, tol, Extreme::Smallest, |v| chol.solve(v))
}

fn gershgorin(k: &Matrix) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k.rows() {
        let row = k.row(i);
        let off: f64 = row
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v.abs())
            .sum();
        lo = lo.min(row[i] - off);
        hi = hi.max(row[i] + off);
    }
    (lo, hi)
}

fn shifted(k: &Matrix, sign: f64, t: f64) -> Matrix {
    Matrix::from_fn(k.rows(), k.cols(), |i, j| {
        sign * k[(i, j)] - if i == j { sign * t } else { 0.0 }
    })
}

const BISECTION_STEPS: usize = 200;

/// Largest `t` found with `K − tI` numerically positive definite (Cholesky
/// succeeds), lowered by `4ε‖K‖∞`: a lower bound on `λmin(K)` that does not
/// depend on eigenvalue gaps.
pub fn min_eigenvalue_lower_bound(k: &Matrix) -> Result<f64, LinalgError> {
    check_symmetric_square(k)?;
    let (g_lo, _) = gershgorin(k);
    let scale = k.norm_inf().max(f64::MIN_POSITIVE);
    let mut lo = g_lo - scale * 1e-12;
    let mut hi = k.diag().into_iter().fold(f64::INFINITY, f64::min);
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if Cholesky::factor(&shifted(k, 1.0, mid)).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo - 4.0 * f64::EPSILON * scale)
}

/// Upper bound on `λmax(K)` by the same bisection applied to `tI − K`.
pub fn max_eigenvalue_upper_bound(k: &Matrix) -> Result<f64, LinalgError> {
    check_symmetric_square(k)?;
    let (_, g_hi) = gershgorin(k);
    let scale = k.norm_inf().max(f64::MIN_POSITIVE);
    let mut lo = k.diag().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let mut hi = g_hi + scale * 1e-12;
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        // mid·I − K positive definite iff mid > λmax
        if Cholesky::factor(&shifted(k, -1.0, mid)).is_ok() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi + 4.0 * f64::EPSILON * scale)
}

/// `(λmin, λmax)` of a symmetric positive definite matrix.
pub fn extremal_eigenvalues(
    k: &Matrix,
    tol: f64,
) -> Result<(EigenEstimate, EigenEstimate), LinalgError> {
    let min = inverse_iteration(k, tol)?;
    let max = power_iteration(k, tol)?;
    Ok((min, max))
}

/// Smallest `λ` with `S v = λ K v`, `K` positive definite and `S` symmetric
/// positive definite. The residual refers to the reduced symmetric problem.
pub fn generalized_min_eigenvalue(
    s: &Matrix,
    k: &Matrix,
    tol: f64,
) -> Result<EigenEstimate, LinalgError> {
    let chol = Cholesky::factor(k)?;
    let reduced = chol.congruence(s);
    inverse_iteration(&reduced, tol)
}
