//! Coherence parameters of low-rank matrices and the Zipf-type law relating
//! coherence to rank.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, NormKind, SvdFactors};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoherenceReport {
    /// Column-space coherence, in `[1, m]`.
    pub mu1: f64,
    /// Row-space coherence, in `[1, n]`.
    pub mu2: f64,
    /// Joint coherence `(mn/r)·‖U Vᵀ‖_∞²`.
    pub mu3: f64,
    /// Coherence relative to a dictionary, when one was supplied.
    pub mu3_dict: Option<f64>,
    pub rank_used: usize,
    /// Condition number of the dictionary, when one was supplied.
    pub gamma_dict: Option<f64>,
}

fn factors(l: &Matrix, zero_tol: f64) -> Result<SvdFactors> {
    let f = linalg::svd(l, zero_tol)?;
    if f.rank() == 0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(f)
}

fn max_row_norm_sq(u: &Matrix) -> f64 {
    u.row_iter().map(|r| r.norm_squared()).fold(0.0, f64::max)
}

fn mu_from_basis(basis: &Matrix) -> f64 {
    basis.nrows() as f64 / basis.ncols() as f64 * max_row_norm_sq(basis)
}

fn mu3_from_factors(f: &SvdFactors) -> f64 {
    let (m, n) = (f.u.nrows() as f64, f.v.nrows() as f64);
    let sup = f.uvt().iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    m * n / f.rank() as f64 * sup * sup
}

pub fn mu1(l: &Matrix, zero_tol: f64) -> Result<f64> {
    Ok(mu_from_basis(&factors(l, zero_tol)?.u))
}

pub fn mu2(l: &Matrix, zero_tol: f64) -> Result<f64> {
    Ok(mu_from_basis(&factors(l, zero_tol)?.v))
}

pub fn mu3(l: &Matrix, zero_tol: f64) -> Result<f64> {
    Ok(mu3_from_factors(&factors(l, zero_tol)?))
}

/// `(mu1, mu2, rank)` from a single SVD.
pub fn mu1_mu2(l: &Matrix, zero_tol: f64) -> Result<(f64, f64, usize)> {
    let f = factors(l, zero_tol)?;
    Ok((mu_from_basis(&f.u), mu_from_basis(&f.v), f.rank()))
}

/// Ratio of the largest to the smallest retained singular value.
pub fn condition_number(a: &Matrix, zero_tol: f64) -> Result<f64> {
    let f = factors(a, zero_tol)?;
    Ok(f.sigma[0] / f.sigma[f.rank() - 1])
}

const UNIT_COLUMN_TOL: f64 = 1e-8;
const SUBSPACE_TOL: f64 = 1e-6;

/// Coherence of `l0` relative to dictionary `a`:
/// `n²‖(Aᵀ)⁺ U Vᵀ‖²_{2,∞} / ((ln n)²·r0·γ_A)` with `U, V` from the SVD of `A⁺ L0`.
///
/// `a` must have unit columns and its column space must contain that of `l0`.
pub fn mu3_dict(l0: &Matrix, a: &Matrix, zero_tol: f64) -> Result<f64> {
    if a.nrows() != l0.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary has {} rows, data has {}",
            a.nrows(),
            l0.nrows()
        )));
    }
    let n = l0.ncols();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two columns (ln n > 0)".into()));
    }
    if let Some((j, c)) = a
        .column_iter()
        .enumerate()
        .find(|(_, c)| (c.norm() - 1.0).abs() > UNIT_COLUMN_TOL)
    {
        return Err(Error::DictionaryMismatch(format!(
            "column {j} has norm {}, expected unit columns",
            c.norm()
        )));
    }
    let fl = factors(l0, zero_tol)?;
    let fa = factors(a, zero_tol)?;
    let outside = (linalg::project_colspace(&fa.u, &fl.u)? - &fl.u).norm();
    if outside > SUBSPACE_TOL {
        return Err(Error::DictionaryMismatch(format!(
            "column space of the data leaves the dictionary span by {outside:.3e}"
        )));
    }
    let a_pinv = linalg::pinv_with_tol(a, zero_tol)?;
    let coef = factors(&(&a_pinv * l0), zero_tol)?;
    let b = a_pinv.transpose() * coef.uvt();
    let l2inf = linalg::norm(&b, NormKind::L2Inf)?;
    let gamma = fa.sigma[0] / fa.sigma[fa.rank() - 1];
    let nf = n as f64;
    let ln = nf.ln();
    Ok(nf * nf * l2inf * l2inf / (ln * ln * fl.rank() as f64 * gamma))
}

/// All coherence parameters of `l`, plus the dictionary-relative ones when `dict` is given.
pub fn coherence_report(l: &Matrix, dict: Option<&Matrix>, zero_tol: f64) -> Result<CoherenceReport> {
    let f = factors(l, zero_tol)?;
    let (mu3_dict, gamma_dict) = match dict {
        Some(a) => (Some(mu3_dict(l, a, zero_tol)?), Some(condition_number(a, zero_tol)?)),
        None => (None, None),
    };
    Ok(CoherenceReport {
        mu1: mu_from_basis(&f.u),
        mu2: mu_from_basis(&f.v),
        mu3: mu3_from_factors(&f),
        mu3_dict,
        rank_used: f.rank(),
        gamma_dict,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ZipfSample {
    pub m: usize,
    pub n: usize,
    pub r0: usize,
    pub mu1: f64,
    pub mu2: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ZipfFit {
    pub c1_mean: f64,
    pub c2_mean: f64,
    pub c1_std: f64,
    pub c2_std: f64,
}

/// `ln(mu)·ln(1 + r0)`, approximately constant for uniformly sampled data.
pub fn zipf_constant(mu: f64, r0: usize) -> f64 {
    mu.ln() * (1.0 + r0 as f64).ln()
}

/// Means and population standard deviations of the per-sample constants.
pub fn zipf_fit(samples: &[ZipfSample]) -> Result<ZipfFit> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples to fit".into()));
    }
    let c1: Vec<f64> = samples.iter().map(|s| zipf_constant(s.mu1, s.r0)).collect();
    let c2: Vec<f64> = samples.iter().map(|s| zipf_constant(s.mu2, s.r0)).collect();
    let (c1_mean, c1_std) = mean_std(&c1);
    let (c2_mean, c2_std) = mean_std(&c2);
    Ok(ZipfFit { c1_mean, c2_mean, c1_std, c2_std })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Predicted row coherence of data drawn from `k` equal subspaces of total rank `r0`:
/// `exp(c2 / ln(1 + r0/k))`.
pub fn predict_mu2(c2: f64, r0: usize, k: usize) -> Result<f64> {
    if k == 0 || r0 < k {
        return Err(Error::InvalidClusterCount { rank: r0, clusters: k });
    }
    Ok((c2 / (1.0 + r0 as f64 / k as f64).ln()).exp())
}
