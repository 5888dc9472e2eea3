//! Small dense real matrices, one-sided Jacobi SVD, Moore–Penrose
//! pseudoinverse, nullspace bases and minimum-norm least squares.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use thiserror::Error;

pub const DEFAULT_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "Mat::from_vec: wrong length");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "Mat::from_rows: ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn column_vector(v: &[f64]) -> Self {
        Mat::from_vec(v.len(), 1, v.to_vec())
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, k: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "mul_vec: dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ v` without forming the transpose.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "tr_mul_vec: dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn symmetrize(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                s[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        s
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Mat) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        let mut b = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                b[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        b
    }

    /// `self += k * other`
    pub fn axpy(&mut self, k: f64, other: &Mat) {
        assert_eq!(self.shape(), other.shape(), "axpy: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += k * b;
        }
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul: dimension mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>14.6e}", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Where singular values stop counting toward the rank: `s <= rtol * max(s_max, floor)`.
///
/// `floor` is a reference magnitude for matrices that should be exactly zero
/// but carry round-off (a pure relative cutoff would see full rank there).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub rtol: f64,
    pub floor: f64,
}

impl Cutoff {
    pub fn relative(rtol: f64) -> Self {
        Cutoff { rtol, floor: 0.0 }
    }

    pub fn with_floor(self, floor: f64) -> Self {
        Cutoff { floor, ..self }
    }

    pub fn threshold(&self, s_max: f64) -> f64 {
        self.rtol * s_max.max(self.floor)
    }
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::relative(DEFAULT_RTOL)
    }
}

/// Thin SVD `M = U diag(s) Vᵀ`, `k = min(rows, cols)` triplets.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
    /// Effective rank under [`DEFAULT_RTOL`].
    pub rank: usize,
}

impl SvdFactors {
    pub fn rank_with(&self, cut: Cutoff) -> usize {
        let smax = self.s.first().copied().unwrap_or(0.0);
        let thr = cut.threshold(smax);
        self.s.iter().filter(|&&s| s > thr).count()
    }

    pub fn reconstruct(&self) -> Mat {
        let mut us = self.u.clone();
        for j in 0..us.cols() {
            for i in 0..us.rows() {
                us[(i, j)] *= self.s[j];
            }
        }
        &us * &self.v.transpose()
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(m: &Mat) -> Result<SvdFactors, LinalgError> {
    if m.rows() < m.cols() {
        let t = svd(&m.transpose())?;
        return Ok(SvdFactors {
            u: t.v,
            s: t.s,
            v: t.u,
            rank: t.rank,
        });
    }
    let (rows, cols) = m.shape();
    // work on columns: W = M V
    let mut w = m.clone();
    let mut v = Mat::identity(cols);
    let max_sweeps = 100 * rows.max(cols).max(1);
    // columns below this squared norm are numerically zero; rotating them
    // against the rest only churns round-off
    let negligible = (f64::EPSILON * m.frobenius_norm()).powi(2);
    let tol = f64::EPSILON * (rows as f64).sqrt();
    let mut converged = cols < 2;
    for _ in 0..max_sweeps {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let a = w[(i, p)];
                    let b = w[(i, q)];
                    alpha += a * a;
                    beta += b * b;
                    gamma += a * b;
                }
                if gamma == 0.0 || alpha.min(beta) <= negligible || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let a = w[(i, p)];
                    let b = w[(i, q)];
                    w[(i, p)] = c * a - s * b;
                    w[(i, q)] = s * a + c * b;
                }
                for i in 0..cols {
                    let a = v[(i, p)];
                    let b = v[(i, q)];
                    v[(i, p)] = c * a - s * b;
                    v[(i, q)] = s * a + c * b;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: max_sweeps });
    }

    let norms: Vec<f64> = (0..cols).map(|j| norm2(&w.column(j))).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mut u = Mat::zeros(rows, cols);
    let mut vs = Mat::zeros(cols, cols);
    let mut s = Vec::with_capacity(cols);
    let mut filled = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        for i in 0..cols {
            vs[(i, k)] = v[(i, j)];
        }
        if norms[j] > 0.0 {
            for i in 0..rows {
                u[(i, k)] = w[(i, j)] / norms[j];
            }
            filled.push(k);
        }
    }
    complete_orthonormal(&mut u, &filled);
    let mut out = SvdFactors { u, s, v: vs, rank: 0 };
    out.rank = out.rank_with(Cutoff::default());
    Ok(out)
}

/// Fills the columns of `u` not listed in `filled` so that all columns are
/// orthonormal (Gram–Schmidt against the standard basis).
fn complete_orthonormal(u: &mut Mat, filled: &[usize]) {
    let rows = u.rows();
    let mut basis: Vec<Vec<f64>> = filled.iter().map(|&j| u.column(j)).collect();
    let mut candidates = 0..rows;
    for j in 0..u.cols() {
        if filled.contains(&j) {
            continue;
        }
        loop {
            let Some(e) = candidates.next() else { return };
            let mut x = vec![0.0; rows];
            x[e] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let d = dot(&x, b);
                    for (xi, bi) in x.iter_mut().zip(b) {
                        *xi -= d * bi;
                    }
                }
            }
            let nx = norm2(&x);
            if nx > 1e-8 {
                x.iter_mut().for_each(|xi| *xi /= nx);
                for i in 0..rows {
                    u[(i, j)] = x[i];
                }
                basis.push(x);
                break;
            }
        }
    }
}

pub fn pinv(m: &Mat, rtol: f64) -> Result<Mat, LinalgError> {
    pinv_cut(m, Cutoff::relative(rtol))
}

pub fn pinv_cut(m: &Mat, cut: Cutoff) -> Result<Mat, LinalgError> {
    let f = svd(m)?;
    Ok(pinv_from(&f, cut))
}

fn pinv_from(f: &SvdFactors, cut: Cutoff) -> Mat {
    let r = f.rank_with(cut);
    let (n, m) = (f.v.rows(), f.u.rows());
    let mut out = Mat::zeros(n, m);
    for k in 0..r {
        let inv = 1.0 / f.s[k];
        for i in 0..n {
            let vik = f.v[(i, k)] * inv;
            for j in 0..m {
                out[(i, j)] += vik * f.u[(j, k)];
            }
        }
    }
    out
}

pub fn nullspace_basis(m: &Mat, rtol: f64) -> Result<Mat, LinalgError> {
    nullspace_cut(m, Cutoff::relative(rtol))
}

/// Orthonormal basis of `N(m)`, one column per null direction.
pub fn nullspace_cut(m: &Mat, cut: Cutoff) -> Result<Mat, LinalgError> {
    let cols = m.cols();
    // pad with zero rows so the Jacobi sweep produces a full right factor
    let padded = if m.rows() < cols {
        let mut p = Mat::zeros(cols, cols);
        p.set_block(0, 0, m);
        p
    } else {
        m.clone()
    };
    let f = svd(&padded)?;
    let r = f.rank_with(cut);
    let mut basis = Mat::zeros(cols, cols - r);
    for k in r..cols {
        for i in 0..cols {
            basis[(i, k - r)] = f.v[(i, k)];
        }
    }
    Ok(basis)
}

#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub x: Vec<f64>,
    pub residual: f64,
    pub rank: usize,
}

pub fn solve_min_norm(m: &Mat, b: &[f64], rtol: f64) -> Result<MinNormSolution, LinalgError> {
    solve_min_norm_cut(m, b, Cutoff::relative(rtol))
}

/// `x = M⁺ b` and the least-squares residual `‖Mx − b‖₂`.
pub fn solve_min_norm_cut(m: &Mat, b: &[f64], cut: Cutoff) -> Result<MinNormSolution, LinalgError> {
    if b.len() != m.rows() {
        return Err(LinalgError::Dimension(format!(
            "rhs has length {} but matrix has {} rows",
            b.len(),
            m.rows()
        )));
    }
    let f = svd(m)?;
    let r = f.rank_with(cut);
    let mut x = vec![0.0; m.cols()];
    for k in 0..r {
        let coef = dot(&f.u.column(k), b) / f.s[k];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += coef * f.v[(i, k)];
        }
    }
    let mx = m.mul_vec(&x);
    let residual = norm2(&mx.iter().zip(b).map(|(a, c)| a - c).collect::<Vec<_>>());
    Ok(MinNormSolution { x, residual, rank: r })
}
