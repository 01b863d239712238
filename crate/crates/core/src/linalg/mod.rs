//! Dense matrix primitives: skinny SVD, pseudoinverse, norms, projections.

mod support;
pub mod text;

pub use support::SupportSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative cut used when the caller has no better rank rule.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Build a matrix from row-major values, rejecting non-finite entries.
pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Result<Matrix> {
    if values.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a {rows}x{cols} matrix",
            values.len()
        )));
    }
    let m = Matrix::from_row_slice(rows, cols, values);
    ensure_finite(&m)?;
    Ok(m)
}

pub fn ensure_finite(m: &Matrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Skinny SVD `M = U diag(sigma) Vᵀ` with only the retained singular triplets.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// `U Vᵀ`, the sign matrix of the nuclear norm.
    pub fn uvt(&self) -> Matrix {
        &self.u * self.v.transpose()
    }
}

fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn svd_failure(m: &Matrix) -> Error {
    Error::Numerical(format!("SVD of a {}x{} matrix did not converge", m.nrows(), m.ncols()))
}

/// Singular values only, descending.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let mut s = to_faer(m).singular_values().map_err(|_| svd_failure(m))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Skinny SVD keeping singular values strictly above `zero_tol * sigma_max`.
pub fn svd(m: &Matrix, zero_tol: f64) -> Result<SvdFactors> {
    if !(zero_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("zero_tol must be >= 0, got {zero_tol}")));
    }
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(SvdFactors {
            u: Matrix::zeros(m.nrows(), 0),
            sigma: Vec::new(),
            v: Matrix::zeros(m.ncols(), 0),
        });
    }
    let dec = to_faer(m).thin_svd().map_err(|_| svd_failure(m))?;
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let smax = order.first().map(|&i| s[i]).unwrap_or(0.0);
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| s[i] > 0.0 && s[i] > zero_tol * smax)
        .collect();

    let r = keep.len();
    let uk = Matrix::from_fn(m.nrows(), r, |i, j| u[(i, keep[j])]);
    let vk = Matrix::from_fn(m.ncols(), r, |i, j| v[(i, keep[j])]);
    let sigma = keep.iter().map(|&i| s[i]).collect();
    Ok(SvdFactors { u: uk, sigma, v: vk })
}

/// Moore–Penrose pseudoinverse through the skinny SVD.
pub fn pinv(m: &Matrix) -> Result<Matrix> {
    pinv_with_tol(m, DEFAULT_ZERO_TOL)
}

pub fn pinv_with_tol(m: &Matrix, zero_tol: f64) -> Result<Matrix> {
    let f = svd(m, zero_tol)?;
    let mut v = f.v.clone();
    for (j, s) in f.sigma.iter().enumerate() {
        v.column_mut(j).scale_mut(1.0 / s);
    }
    Ok(v * f.u.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Largest singular value.
    Operator,
    Frobenius,
    /// Sum of singular values.
    Nuclear,
    /// Sum of absolute entries.
    L1,
    /// Largest absolute entry.
    Sup,
    /// Largest column ℓ2 length.
    L2Inf,
}

pub fn norm(m: &Matrix, kind: NormKind) -> Result<f64> {
    Ok(match kind {
        NormKind::Frobenius => m.norm(),
        NormKind::L1 => m.iter().map(|x| x.abs()).sum(),
        NormKind::Sup => m.iter().fold(0.0_f64, |a, x| a.max(x.abs())),
        NormKind::L2Inf => m.column_iter().map(|c| c.norm()).fold(0.0_f64, f64::max),
        NormKind::Operator => {
            if m.is_empty() {
                0.0
            } else {
                singular_values(m)?.first().copied().unwrap_or(0.0)
            }
        }
        NormKind::Nuclear => {
            if m.is_empty() {
                0.0
            } else {
                singular_values(m)?.iter().sum()
            }
        }
    })
}

/// `U Uᵀ M`.
pub fn project_colspace(u: &Matrix, m: &Matrix) -> Result<Matrix> {
    if u.nrows() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, matrix has {}",
            u.nrows(),
            m.nrows()
        )));
    }
    Ok(u * (u.transpose() * m))
}

/// `M V Vᵀ`.
pub fn project_rowspace(v: &Matrix, m: &Matrix) -> Result<Matrix> {
    if v.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, matrix has {} columns",
            v.nrows(),
            m.ncols()
        )));
    }
    Ok((m * v) * v.transpose())
}

/// Keep the entries on `omega` (or off it when `complement`), zero the rest.
pub fn project_support(omega: &SupportSet, m: &Matrix, complement: bool) -> Result<Matrix> {
    omega.check_shape(m.nrows(), m.ncols())?;
    let mut out = m.clone();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if omega.contains(i, j) == complement {
                out[(i, j)] = 0.0;
            }
        }
    }
    Ok(out)
}

/// Number of singular values strictly above `rel_tol * sigma[0]`.
pub fn rank_by_threshold(sigma: &[f64], rel_tol: f64) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > 0.0 => sigma.iter().filter(|&&s| s > rel_tol * s1).count(),
        _ => 0,
    }
}

/// `‖a − b‖_F / ‖b‖_F`, or the plain difference norm when `b` is zero.
pub fn relative_diff(a: &Matrix, b: &Matrix) -> f64 {
    let d = (a - b).norm();
    let nb = b.norm();
    if nb > 0.0 {
        d / nb
    } else {
        d
    }
}

pub fn diag(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&DVector::from_column_slice(values))
}

/// Orthonormal basis of the column space of `m`, via the skinny SVD.
pub fn orth(m: &Matrix, zero_tol: f64) -> Result<Matrix> {
    Ok(svd(m, zero_tol)?.u)
}
