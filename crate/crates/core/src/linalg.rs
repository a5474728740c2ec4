//! Dense complex linear algebra.
//!
//! Row-major [`CMatrix`] and [`CVector`] with the handful of factorizations
//! the optimizer needs: a Hermitian eigensolver (Householder reduction to a
//! real tridiagonal matrix followed by implicit QL), the generalized
//! Hermitian-definite eigenproblem via Cholesky, projection onto the PSD
//! cone, and the real symmetric embedding of a Hermitian matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Deref, DerefMut, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::math;

pub type C64 = Complex64;

/// Elementwise tolerance for the Hermitian check, relative to `max(1, max|a_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue of `B` below which the generalized solve regularizes.
pub const PD_THRESHOLD: f64 = 1e-12;
/// Diagonal shift applied to a marginally definite `B`.
pub const PD_REGULARIZATION: f64 = 1e-10;
/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_QL_ITERATIONS: usize = 100;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn unit_phase(angle: f64) -> C64 {
    let (s, co) = math::sin_cos(angle);
    C64::new(co, s)
}

#[inline]
pub(crate) fn abs(z: C64) -> f64 {
    math::hypot(z.re, z.im)
}

#[inline]
pub(crate) fn arg(z: C64) -> f64 {
    math::atan2(z.im, z.re)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("data length {got} does not match a {rows}x{cols} matrix")]
    InvalidData { rows: usize, cols: usize, got: usize },
}

/// A dense complex column vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Self {
        Self(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); len])
    }

    /// The `i`-th standard basis vector of length `len`.
    pub fn basis(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sqr())
    }

    /// Inner product `selfᴴ other`.
    pub fn dot(&self, other: &CVector) -> C64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, factor: C64) -> CVector {
        CVector(self.0.iter().map(|z| z * factor).collect())
    }

    /// Unit-norm copy, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVector> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            None
        } else {
            Some(self.scale(C64::new(1.0 / n, 0.0)))
        }
    }

    /// Outer product `self otherᴴ`.
    pub fn outer(&self, other: &CVector) -> CMatrix {
        CMatrix::from_fn(self.len(), other.len(), |i, j| self.0[i] * other.0[j].conj())
    }

    /// Rotates the vector so that its largest-magnitude entry is real and
    /// nonnegative.
    pub fn normalize_phase(&mut self) {
        normalize_phase(&mut self.0);
    }
}

impl Deref for CVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for CVector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

impl From<Vec<C64>> for CVector {
    fn from(v: Vec<C64>) -> Self {
        Self(v)
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

fn normalize_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let pivot = v[best];
        let rot = pivot.conj() / abs(pivot);
        for z in v.iter_mut() {
            *z *= rot;
        }
        v[best] = C64::new(v[best].re.max(0.0), 0.0);
    }
}

/// A dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::InvalidData {
                rows,
                cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { c(diag[i], 0.0) } else { c(0.0, 0.0) })
    }

    /// Builds a matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[CVector]) -> Self {
        for col in columns {
            assert_eq!(col.len(), rows, "column length mismatch");
        }
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> CVector {
        assert!(j < self.cols, "column {j} out of range");
        CVector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Matrix product.
    ///
    /// # Panics
    /// Panics if the inner dimensions differ.
    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> CVector {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        CVector(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// `selfᴴ v` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> CVector {
        assert_eq!(self.rows, v.len(), "vector length mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        CVector(out)
    }

    pub fn scale(&self, factor: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> CMatrix {
        self.scale(C64::new(factor, 0.0))
    }

    /// `self += factor · other`.
    pub fn add_scaled(&mut self, factor: f64, other: &CMatrix) {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| abs(*z)).fold(0.0, f64::max)
    }

    /// Real Frobenius inner product `Re tr(selfᴴ other)`; equals `tr(self·other)`
    /// when both are Hermitian.
    pub fn frobenius_inner(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Quadratic form `vᴴ A v`.
    pub fn quad_form(&self, v: &[C64]) -> C64 {
        assert!(self.is_square() && self.rows == v.len(), "dimension mismatch");
        let mut acc = C64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            let row_dot: C64 = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
            acc += vi.conj() * row_dot;
        }
        acc
    }

    /// Largest elementwise deviation `|a_ij − conj(a_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max(abs(self[(i, j)] - self[(j, i)].conj()));
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_deviation() <= tol
    }

    /// `(A + Aᴴ)/2`.
    pub fn hermitian_part(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// A dense real matrix in row-major order (the output of [`real_embed`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// The same matrix with zero imaginary parts.
    pub fn to_complex(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| c(self[(i, j)], 0.0))
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

/// Full spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl EigResult {
    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.col(i)
    }

    /// Largest eigenvalue and its eigenvector.
    pub fn leading(&self) -> (f64, CVector) {
        let last = self.values.len() - 1;
        (self.values[last], self.vector(last))
    }

    /// `V diag(f(λ)) Vᴴ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = C64::new(0.0, 0.0);
                for (k, w) in weights.iter().enumerate() {
                    if *w != 0.0 {
                        acc += self.vectors[(i, k)] * self.vectors[(j, k)].conj() * *w;
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
            out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
        }
        out
    }
}

fn ensure_hermitian(a: &CMatrix) -> Result<(), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let deviation = a.hermitian_deviation();
    let scale = a.max_abs().max(1.0);
    if !(deviation <= HERMITIAN_TOL * scale) {
        return Err(LinalgError::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The matrix is reduced to a complex Hermitian tridiagonal form by
/// Householder reflections, rotated to a real symmetric tridiagonal by a
/// diagonal unitary, and diagonalized by the implicit QL algorithm with
/// Wilkinson-style shifts. Eigenvalues come back ascending; each eigenvector
/// has its largest-magnitude entry real and nonnegative.
pub fn herm_eig(a: &CMatrix) -> Result<EigResult, LinalgError> {
    ensure_hermitian(a)?;
    herm_eig_unchecked(a)
}

/// [`herm_eig`] without the symmetry check; the input is symmetrized first.
pub(crate) fn herm_eig_unchecked(a: &CMatrix) -> Result<EigResult, LinalgError> {
    let n = a.rows;
    if n == 0 {
        return Ok(EigResult {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let (red, d, zt) = reduce_and_solve(a)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut column = red.back_transform(&zt[src * n..(src + 1) * n]);
        normalize_phase(&mut column);
        for (i, z) in column.iter().enumerate() {
            vectors[(i, dst)] = *z;
        }
    }
    Ok(EigResult { values, vectors })
}

/// Nearest PSD matrix without the symmetry check. Only the eigenvectors of
/// the smaller of the positive and negative parts are formed.
pub(crate) fn psd_part_unchecked(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = a.rows;
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let (red, d, zt) = reduce_and_solve(a)?;
    let positive = d.iter().filter(|&&l| l > 0.0).count();
    let negative = d.iter().filter(|&&l| l < 0.0).count();
    if negative == 0 {
        return Ok(a.hermitian_part());
    }
    // Q₊ = Σ_{λ>0} λvvᴴ, or equivalently A − Σ_{λ<0} λvvᴴ
    let keep_positive = positive <= negative;
    let mut out = if keep_positive {
        CMatrix::zeros(n, n)
    } else {
        a.hermitian_part()
    };
    for (j, &lambda) in d.iter().enumerate() {
        let weight = if keep_positive && lambda > 0.0 {
            lambda
        } else if !keep_positive && lambda < 0.0 {
            -lambda
        } else {
            continue;
        };
        let v = red.back_transform(&zt[j * n..(j + 1) * n]);
        for r in 0..n {
            let vr = v[r] * weight;
            let row = &mut out.data[r * n..(r + 1) * n];
            for (x, vc) in row.iter_mut().zip(&v) {
                *x += vr * vc.conj();
            }
        }
    }
    for i in 0..n {
        out.data[i * n + i].im = 0.0;
    }
    Ok(out)
}

// Unitary reduction `A = U D T D̄ Uᴴ` with `T` real symmetric tridiagonal,
// `U` a product of Householder reflections and `D` a diagonal of phases.
struct Reduced {
    n: usize,
    // reflector for step k acts on indices k+1..n; empty when skipped
    reflectors: Vec<Vec<C64>>,
    phases: Vec<C64>,
}

impl Reduced {
    // Maps an eigenvector of `T` to one of `A`.
    fn back_transform(&self, z: &[f64]) -> Vec<C64> {
        let n = self.n;
        let mut y: Vec<C64> = z.iter().zip(&self.phases).map(|(zi, p)| p * *zi).collect();
        for k in (0..self.reflectors.len()).rev() {
            let v = &self.reflectors[k];
            if v.is_empty() {
                continue;
            }
            let tail = &mut y[k + 1..n];
            let s: C64 = v.iter().zip(tail.iter()).map(|(vj, yj)| vj.conj() * yj).sum();
            let s2 = s * 2.0;
            for (yj, vj) in tail.iter_mut().zip(v) {
                *yj -= s2 * vj;
            }
        }
        y
    }
}

// Tridiagonalizes and diagonalizes; returns the eigenvalues (unsorted) and
// the eigenvectors of `T` as rows of a row-major `n × n` array.
fn reduce_and_solve(a: &CMatrix) -> Result<(Reduced, Vec<f64>, Vec<f64>), LinalgError> {
    let n = a.rows;
    let mut work = a.hermitian_part();
    let mut off = vec![C64::new(0.0, 0.0); n];
    let reflectors = tridiagonalize(&mut work, &mut off);

    let mut d: Vec<f64> = (0..n).map(|i| work[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    // Rotate the complex subdiagonal onto the nonnegative reals.
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut phase = C64::new(1.0, 0.0);
    for k in 0..n.saturating_sub(1) {
        let mag = abs(off[k]);
        e[k] = mag;
        if mag > 0.0 {
            phase *= off[k] / mag;
        }
        phases[k + 1] = phase;
    }
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut zt, n)?;
    Ok((Reduced { n, reflectors, phases }, d, zt))
}

// Householder reduction to Hermitian tridiagonal form. On return `off[k]`
// holds T[k+1, k]; the reflectors are returned in order of application.
fn tridiagonalize(a: &mut CMatrix, off: &mut [C64]) -> Vec<Vec<C64>> {
    let n = a.rows;
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x0 = a[(k + 1, k)];
        let xnorm = math::sqrt((k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum());
        if xnorm == 0.0 {
            off[k] = C64::new(0.0, 0.0);
            reflectors.push(Vec::new());
            continue;
        }
        let x0_abs = abs(x0);
        let ph = if x0_abs > 0.0 { x0 / x0_abs } else { C64::new(1.0, 0.0) };
        let alpha = -ph * xnorm;
        // v = (x − αe₁)/‖x − αe₁‖
        for (j, vj) in v[..m].iter_mut().enumerate() {
            *vj = a[(k + 1 + j, k)];
        }
        v[0] -= alpha;
        let vnorm = math::sqrt(v[..m].iter().map(|z| z.norm_sqr()).sum());
        if vnorm == 0.0 {
            off[k] = x0;
            reflectors.push(Vec::new());
            continue;
        }
        for vj in &mut v[..m] {
            *vj /= vnorm;
        }
        // p = A_t v, c = vᴴ p, w = p − c v; A_t ← A_t − 2 v wᴴ − 2 w vᴴ
        for i in 0..m {
            let row = &a.data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            p[i] = row.iter().zip(&v[..m]).map(|(x, y)| x * y).sum();
        }
        let cval: C64 = v[..m].iter().zip(&p[..m]).map(|(x, y)| x.conj() * y).sum();
        let cre = cval.re;
        for i in 0..m {
            p[i] -= v[i] * cre;
        }
        for i in 0..m {
            let vi2 = v[i] * 2.0;
            let pi2 = p[i] * 2.0;
            let row = &mut a.data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for (j, x) in row.iter_mut().enumerate() {
                *x -= vi2 * p[j].conj() + pi2 * v[j].conj();
            }
        }
        for i in k + 1..n {
            a[(i, k)] = C64::new(0.0, 0.0);
            a[(k, i)] = C64::new(0.0, 0.0);
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        off[k] = alpha;
        reflectors.push(v[..m].to_vec());
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1, n - 2)];
    }
    reflectors
}

// Implicit QL on the real symmetric tridiagonal (d, e) where e[i] couples
// d[i] and d[i+1]. Rotations are applied to the rows of `zt` (the
// transposed eigenvector matrix).
fn tql2(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<(), LinalgError> {
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(LinalgError::NoConvergence {
                        iterations: MAX_QL_ITERATIONS,
                    });
                }
                let g0 = d[l];
                let mut p = (d[l + 1] - g0) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h0 = g0 - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h0;
                }
                f += h0;

                p = d[m];
                let mut cc = 1.0;
                let mut c2 = cc;
                let mut c3 = cc;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = cc;
                    s2 = s;
                    let g = cc * e[i];
                    let h = cc * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    cc = p / r;
                    p = cc * d[i] - s * g;
                    d[i + 1] = h + s * (cc * g + s * d[i]);

                    let (lo, hi) = zt.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let t = *b;
                        *b = *a * s + t * cc;
                        *a = *a * cc - t * s;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = cc * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Lower-triangular Cholesky factor `L` with `L Lᴴ = B`, or `None` when a
/// pivot is not strictly positive.
pub fn cholesky(b: &CMatrix) -> Option<CMatrix> {
    let n = b.rows;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = b[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if !(diag > 0.0) {
            return None;
        }
        let ljj = math::sqrt(diag);
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Inverse and log-determinant of a Hermitian positive definite matrix, or
/// `None` when the Cholesky factorization breaks down.
pub(crate) fn hpd_inverse(b: &CMatrix) -> Option<(CMatrix, f64)> {
    let n = b.rows;
    let l = cholesky(b)?;
    let logdet = 2.0 * (0..n).map(|i| math::ln(l[(i, i)].re)).sum::<f64>();
    let mut linv = CMatrix::identity(n);
    forward_substitute(&l, &mut linv);
    // S⁻¹ = L⁻ᴴ L⁻¹, accumulated on the lower triangle of L⁻¹
    let mut inv = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = C64::new(0.0, 0.0);
            for k in i..n {
                acc += linv[(k, i)].conj() * linv[(k, j)];
            }
            inv[(i, j)] = acc;
            inv[(j, i)] = acc.conj();
        }
        inv[(i, i)].im = 0.0;
    }
    Some((inv, logdet))
}

/// Largest `α` with `x + α·dx ⪰ 0` for Hermitian positive definite `x`
/// (`f64::INFINITY` when `dx ⪰ 0`), or `None` when `x` is not positive
/// definite.
pub(crate) fn max_psd_step(x: &CMatrix, dx: &CMatrix) -> Result<Option<f64>, LinalgError> {
    let Some(l) = cholesky(x) else {
        return Ok(None);
    };
    let mut y = dx.clone();
    forward_substitute(&l, &mut y);
    let mut w = y.adjoint();
    forward_substitute(&l, &mut w);
    let (_, d, _) = reduce_and_solve(&w.hermitian_part())?;
    let lowest = d.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Some(if lowest < 0.0 { -1.0 / lowest } else { f64::INFINITY }))
}

// Solves L X = R in place for lower-triangular L.
fn forward_substitute(l: &CMatrix, r: &mut CMatrix) {
    let n = l.rows;
    for col in 0..r.cols {
        for i in 0..n {
            let mut s = r[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * r[(k, col)];
            }
            r[(i, col)] = s / l[(i, i)];
        }
    }
}

// Solves Lᴴ x = y for lower-triangular L.
fn backward_substitute_adjoint(l: &CMatrix, y: &mut [C64]) {
    let n = l.rows;
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)].conj() * y[k];
        }
        y[i] = s / l[(i, i)].conj();
    }
}

/// Leading eigenpair of the pencil `(A, B)`: the maximizer of the generalized
/// Rayleigh quotient `vᴴAv / vᴴBv` and the maximal quotient.
///
/// Solved through the Cholesky factor of `B` as the standard problem
/// `L⁻¹ A L⁻ᴴ`. A `B` whose smallest eigenvalue lies in `(0, 1e-12]` is
/// shifted by `1e-10·I`; a nonpositive one is rejected.
pub fn generalized_max_eigvec(a: &CMatrix, b: &CMatrix) -> Result<(f64, CVector), LinalgError> {
    ensure_hermitian(a)?;
    ensure_hermitian(b)?;
    if a.shape() != b.shape() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.shape(),
            got: b.shape(),
        });
    }
    let n = a.rows;
    let b_eig = herm_eig_unchecked(b)?;
    let min_eigenvalue = b_eig.values[0];
    if !(min_eigenvalue > 0.0) {
        return Err(LinalgError::NotPositiveDefinite { min_eigenvalue });
    }
    let mut b_used = b.hermitian_part();
    if min_eigenvalue <= PD_THRESHOLD {
        for i in 0..n {
            b_used[(i, i)] += PD_REGULARIZATION;
        }
    }
    let l = cholesky(&b_used).ok_or(LinalgError::NotPositiveDefinite { min_eigenvalue })?;

    let mut y = a.hermitian_part();
    forward_substitute(&l, &mut y);
    let mut reduced = y.adjoint();
    forward_substitute(&l, &mut reduced);
    let eig = herm_eig_unchecked(&reduced.hermitian_part())?;
    let (lambda, top) = eig.leading();
    let mut v = top.into_inner();
    backward_substitute_adjoint(&l, &mut v);
    let mut v = CVector::new(v).normalized().unwrap_or_else(|| CVector::basis(n, 0));
    v.normalize_phase();
    Ok((lambda, v))
}

/// Frobenius-nearest positive semidefinite matrix: negative eigenvalues are
/// clamped to zero.
pub fn psd_project(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    ensure_hermitian(a)?;
    psd_part_unchecked(a)
}

/// Real symmetric embedding `[[Re A, −Im A], [Im A, Re A]]`.
pub fn real_embed(a: &CMatrix) -> Result<RealMatrix, LinalgError> {
    ensure_hermitian(a)?;
    let n = a.rows;
    let m = 2 * n;
    let mut data = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            data[i * m + j] = z.re;
            data[i * m + n + j] = -z.im;
            data[(n + i) * m + j] = z.im;
            data[(n + i) * m + n + j] = z.re;
        }
    }
    Ok(RealMatrix { rows: m, cols: m, data })
}

/// Solves the real symmetric positive-definite system `A x = b` (row-major
/// `A`, dimension `b.len()`), returning `None` if `A` is not numerically PD.
pub(crate) fn solve_spd_real(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if !(diag > 0.0) {
            return None;
        }
        let ljj = math::sqrt(diag);
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i * n + k] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= l[k * n + i] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
        })
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        random_matrix(rng, n, n).hermitian_part()
    }

    fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let x = random_matrix(rng, n, n);
        let mut b = x.matmul(&x.adjoint());
        for i in 0..n {
            b[(i, i)] += c(0.5, 0.0);
        }
        b.hermitian_part()
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> CVector {
        let v = CVector::new(
            (0..n)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect(),
        );
        v.normalized().unwrap()
    }

    fn assert_decomposition(a: &CMatrix, eig: &EigResult) {
        let n = a.rows();
        let scale = a.frobenius_norm().max(1e-300);
        for i in 0..n {
            let v = eig.vector(i);
            let av = a.mul_vec(&v);
            let resid: f64 = av
                .iter()
                .zip(v.iter())
                .map(|(x, y)| (x - y * eig.values[i]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-8 * scale, "residual {resid} for pair {i}");
            for j in 0..n {
                let ip = v.dot(&eig.vector(j));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(expected, 0.0)).norm() <= 1e-8, "orthonormality {i},{j}");
            }
        }
        let recon = eig.reconstruct_with(|l| l);
        assert!((&recon - a).frobenius_norm() <= 1e-8 * scale);
        for w in eig.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = herm_eig(&CMatrix::identity(3)).unwrap();
        for l in &eig.values {
            assert!((l - 1.0).abs() < 1e-14);
        }
        assert_decomposition(&CMatrix::identity(3), &eig);
    }

    #[test]
    fn diagonal_spectrum_is_sorted_with_permuted_basis() {
        let a = CMatrix::from_real_diag(&[3.0, -1.0]);
        let eig = herm_eig(&a).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
        assert!((eig.vectors[(1, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((eig.vectors[(0, 1)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn random_hermitian_residual_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 6, 17, 33] {
            let a = random_hermitian(&mut rng, n);
            let eig = herm_eig(&a).unwrap();
            assert_decomposition(&a, &eig);
            let trace = a.trace().re;
            let sum: f64 = eig.values.iter().sum();
            assert!((trace - sum).abs() <= 1e-8 * trace.abs().max(1.0));
        }
    }

    #[test]
    fn repeated_eigenvalues_and_zero_blocks() {
        // Already tridiagonal/diagonal inputs exercise the zero-reflector paths.
        let mut a = CMatrix::from_real_diag(&[2.0, 2.0, 2.0, -1.0, 0.0]);
        a[(3, 4)] = c(0.0, 1.0);
        a[(4, 3)] = c(0.0, -1.0);
        let eig = herm_eig(&a).unwrap();
        assert_decomposition(&a, &eig);
        let rank_one = CVector::new(vec![c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.5), c(-1.0, 0.0)]);
        let p = rank_one.outer(&rank_one);
        let eig = herm_eig(&p).unwrap();
        assert_decomposition(&p, &eig);
        assert!((eig.values[3] - rank_one.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn eigenvector_phase_is_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 5);
        let eig = herm_eig(&a).unwrap();
        for k in 0..5 {
            let v = eig.vector(k);
            let (imax, _) = v
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
                .unwrap();
            assert!(v[imax].im.abs() < 1e-14 && v[imax].re > 0.0);
        }
    }

    #[test]
    fn non_hermitian_and_non_square_are_rejected() {
        let mut a = CMatrix::identity(2);
        a[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(herm_eig(&a), Err(LinalgError::NotHermitian { .. })));
        assert!(matches!(
            herm_eig(&CMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn generalized_rank_one_is_matched_filter() {
        let a_vec = CVector::new(vec![c(1.0, 1.0), c(-2.0, 0.5), c(0.0, 3.0)]);
        let a = a_vec.outer(&a_vec);
        let (lambda, v) = generalized_max_eigvec(&a, &CMatrix::identity(3)).unwrap();
        assert!((lambda - a_vec.norm_sqr()).abs() < 1e-10);
        let expected = a_vec.normalized().unwrap();
        assert!((abs(v.dot(&expected)) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn generalized_diagonal_ratio() {
        let a = CMatrix::from_real_diag(&[1.0, 4.0]);
        let b = CMatrix::from_real_diag(&[1.0, 2.0]);
        let (lambda, v) = generalized_max_eigvec(&a, &b).unwrap();
        assert!((lambda - 2.0).abs() < 1e-12);
        assert!(v[0].norm() < 1e-12 && (v[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn generalized_beats_random_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(&mut rng, 4);
        let b = random_pd(&mut rng, 4);
        let (lambda, v) = generalized_max_eigvec(&a, &b).unwrap();
        let quotient = |w: &CVector| a.quad_form(w).re / b.quad_form(w).re;
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!((quotient(&v) - lambda).abs() <= 1e-8 * lambda.abs().max(1.0));
        for _ in 0..10_000 {
            let w = random_unit(&mut rng, 4);
            assert!(quotient(&w) <= lambda + 1e-10);
        }
    }

    #[test]
    fn generalized_with_identity_matches_herm_eig() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(&mut rng, 6);
        let (lambda, v) = generalized_max_eigvec(&a, &CMatrix::identity(6)).unwrap();
        let (l2, v2) = herm_eig(&a).unwrap().leading();
        assert!((lambda - l2).abs() < 1e-8);
        assert!((&v - &v2).norm() < 1e-8);
    }

    #[test]
    fn rayleigh_quotient_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(&mut rng, 4);
        let b = random_pd(&mut rng, 4);
        let v = random_unit(&mut rng, 4);
        let q = |w: &CVector| a.quad_form(w).re / b.quad_form(w).re;
        for _ in 0..20 {
            let s = c(rng.random::<f64>() * 10.0 - 5.0, rng.random::<f64>() * 10.0 - 5.0);
            assert!((q(&v.scale(s)) - q(&v)).abs() < 1e-10 * q(&v).abs().max(1.0));
        }
    }

    #[test]
    fn generalized_rejects_indefinite_and_regularizes_marginal() {
        let a = CMatrix::identity(2);
        let b = CMatrix::from_real_diag(&[1.0, -1.0]);
        assert!(matches!(
            generalized_max_eigvec(&a, &b),
            Err(LinalgError::NotPositiveDefinite { .. })
        ));
        let b = CMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(generalized_max_eigvec(&a, &b).is_err());
        let b = CMatrix::from_real_diag(&[1.0, 1e-13]);
        let (lambda, v) = generalized_max_eigvec(&a, &b).unwrap();
        assert!(lambda.is_finite() && lambda > 1e9);
        assert!(v[1].norm() > 0.99);
    }

    #[test]
    fn psd_projection_cases() {
        let a = CMatrix::from_real_diag(&[2.0, -3.0]);
        let p = psd_project(&a).unwrap();
        assert!((&p - &CMatrix::from_real_diag(&[2.0, 0.0])).frobenius_norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_matrix(&mut rng, 4, 4);
        let psd = x.matmul(&x.adjoint()).hermitian_part();
        assert!((&psd_project(&psd).unwrap() - &psd).frobenius_norm() < 1e-9);

        let h = random_hermitian(&mut rng, 4);
        let p = psd_project(&h).unwrap();
        assert!(herm_eig(&p).unwrap().values[0] >= -1e-10);
        let p2 = psd_project(&p).unwrap();
        assert!((&p2 - &p).frobenius_norm() < 1e-10);
        let best = (&p - &h).frobenius_norm();
        for _ in 0..1000 {
            let y = random_matrix(&mut rng, 4, 4);
            let candidate = y.matmul(&y.adjoint());
            assert!((&candidate - &h).frobenius_norm() >= best - 1e-12);
        }
    }

    #[test]
    fn psd_projection_routes_agree() {
        // partial back-transform vs clamping the full decomposition
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [1, 2, 5, 12, 33] {
            for shift in [-2.0, -0.5, 0.0, 0.5, 2.0] {
                let mut h = random_hermitian(&mut rng, n);
                for i in 0..n {
                    h[(i, i)] += c(shift, 0.0);
                }
                let fast = psd_project(&h).unwrap();
                let full = herm_eig(&h).unwrap().reconstruct_with(|l| l.max(0.0));
                assert!((&fast - &full).frobenius_norm() <= 1e-10 * h.frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn real_embedding_structure() {
        let e = real_embed(&CMatrix::from_real_diag(&[2.5])).unwrap();
        assert_eq!(e.as_slice(), &[2.5, 0.0, 0.0, 2.5]);

        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(0.0, 1.0);
        a[(1, 0)] = c(0.0, -1.0);
        let herm = herm_eig(&a).unwrap();
        assert!((herm.values[0] + 1.0).abs() < 1e-12 && (herm.values[1] - 1.0).abs() < 1e-12);
        let e = real_embed(&a).unwrap();
        assert!(e.is_symmetric(0.0));
        let eig = herm_eig(&e.to_complex()).unwrap();
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (l, x) in eig.values.iter().zip(expected) {
            assert!((l - x).abs() < 1e-12);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(&mut rng, 5);
        let e = real_embed(&h).unwrap();
        assert!((e.trace() - 2.0 * h.trace().re).abs() < 1e-12);
    }

    #[test]
    fn spd_real_solve() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let x = solve_spd_real(&a, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        assert!(solve_spd_real(&[1.0, 2.0, 2.0, 1.0], &[1.0, 1.0]).is_none());
    }
}
