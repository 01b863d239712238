//! Numerical checks of the optimality certificate for LRR: operator norms of
//! projection products, the Neumann-series inverse on a column space, the
//! certificate matrix itself, and the three dual conditions it must meet.
//!
//! The dual conditions for `(A⁺L0, S0)` to be the unique optimum are
//!
//! ```text
//! (a) U Vᵀ = λ Aᵀ (sign(S0) + F)
//! (b) P_Ω(F) = 0
//! (c) ‖P_Ω⊥(F)‖_∞ < 1
//! ```
//!
//! with `U Σ Vᵀ` the skinny SVD of `A⁺ L0` and `Ω` the support of `S0`.

use serde::{Deserialize, Serialize};

use crate::coherence;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, NormKind, SupportSet};
use crate::synth::{gaussian_matrix, rng_from_seed};

const POWER_REL_TOL: f64 = 1e-13;
const POWER_MAX_ITERS: usize = 200_000;
const POWER_SEED: u64 = 0x00c0_ffee;

fn mask_in_place(omega: &SupportSet, m: &mut Matrix) {
    for (v, &keep) in m.as_mut_slice().iter_mut().zip(omega.mask()) {
        if !keep {
            *v = 0.0;
        }
    }
}

fn mask_out_in_place(omega: &SupportSet, m: &mut Matrix) {
    for (v, &drop) in m.as_mut_slice().iter_mut().zip(omega.mask()) {
        if drop {
            *v = 0.0;
        }
    }
}

fn check_basis(u: &Matrix, omega: &SupportSet) -> Result<()> {
    if u.nrows() != omega.rows() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, support has {}",
            u.nrows(),
            omega.rows()
        )));
    }
    Ok(())
}

/// Largest eigenvalue of a positive semidefinite map by power iteration from `x`.
fn power_iteration(mut x: Matrix, apply: impl Fn(&Matrix) -> Matrix) -> Result<f64> {
    let mut nx = x.norm();
    if nx == 0.0 {
        return Ok(0.0);
    }
    x /= nx;
    let mut prev = f64::NAN;
    for _ in 0..POWER_MAX_ITERS {
        let y = apply(&x);
        let rayleigh = x.dot(&y);
        nx = y.norm();
        if nx == 0.0 {
            return Ok(0.0);
        }
        if (rayleigh - prev).abs() <= POWER_REL_TOL * rayleigh.abs() {
            return Ok(rayleigh.max(0.0));
        }
        prev = rayleigh;
        x = y / nx;
    }
    Err(Error::Numerical(format!(
        "power iteration did not settle within {POWER_MAX_ITERS} steps"
    )))
}

fn start_vector(rows: usize, cols: usize) -> Matrix {
    gaussian_matrix(rows, cols, &mut rng_from_seed(POWER_SEED))
}

/// `‖P_U P_Ω‖`: the largest singular value of `M ↦ U Uᵀ P_Ω(M)`.
///
/// Computed as the square root of the top eigenvalue of `P_Ω P_U P_Ω`.
pub fn op_norm_composed(u: &Matrix, omega: &SupportSet) -> Result<f64> {
    check_basis(u, omega)?;
    if omega.is_empty() || u.ncols() == 0 {
        return Ok(0.0);
    }
    let mut x = start_vector(omega.rows(), omega.cols());
    mask_in_place(omega, &mut x);
    let ut = u.transpose();
    let top = power_iteration(x, |v| {
        let mut y = u * (&ut * v);
        mask_in_place(omega, &mut y);
        y
    })?;
    Ok(top.sqrt())
}

/// `‖P_U P_Ω P_U‖`.
pub fn op_norm_sandwich(u: &Matrix, omega: &SupportSet) -> Result<f64> {
    check_basis(u, omega)?;
    if omega.is_empty() || u.ncols() == 0 {
        return Ok(0.0);
    }
    let ut = u.transpose();
    let x = u * (&ut * start_vector(omega.rows(), omega.cols()));
    power_iteration(x, |v| {
        let mut y = v.clone();
        mask_in_place(omega, &mut y);
        u * (&ut * y)
    })
}

#[derive(Debug, Clone)]
pub struct NeumannOutput {
    pub value: Matrix,
    /// Measured `‖P_U P_Ω‖`.
    pub psi: f64,
    pub terms: usize,
    /// Bound on the neglected tail relative to `‖M‖_F`: `ψ^{2(terms+1)} / (1 − ψ²)`.
    pub truncation_bound: f64,
}

/// Geometric tail bound of the truncated series.
pub fn truncation_bound(psi: f64, terms: usize) -> f64 {
    psi.powi(2 * (terms as i32 + 1)) / (1.0 - psi * psi)
}

/// Smallest series length whose tail bound is below `1e-10`.
pub fn default_neumann_terms(psi: f64) -> usize {
    if psi <= 0.0 {
        return 0;
    }
    let mut t = 0;
    while truncation_bound(psi, t) >= 1e-10 && t < 100_000 {
        t += 1;
    }
    t
}

/// Apply `I + Σ_{i=1}^{terms} (P_U P_Ω P_U)^i` to `m`, which inverts `P_U P_Ω⊥ P_U` on
/// the column space of `u` when `‖P_U P_Ω‖ < 1`.
pub fn neumann_apply_inverse(
    u: &Matrix,
    omega: &SupportSet,
    m: &Matrix,
    terms: Option<usize>,
) -> Result<NeumannOutput> {
    check_basis(u, omega)?;
    omega.check_shape(m.nrows(), m.ncols())?;
    let ut = u.transpose();
    let outside = (u * (&ut * m) - m).norm();
    if outside > 1e-8 * m.norm() {
        return Err(Error::InvalidArgument(format!(
            "input leaves the column space by {outside:.3e}"
        )));
    }
    let psi = op_norm_composed(u, omega)?;
    // within power-iteration accuracy of 1 the series cannot be trusted
    if psi >= 1.0 - 1e-9 {
        return Err(Error::DivergentSeries(psi));
    }
    let terms = terms.unwrap_or_else(|| default_neumann_terms(psi));
    let mut acc = m.clone();
    let mut t = m.clone();
    for _ in 0..terms {
        mask_in_place(omega, &mut t);
        t = u * (&ut * &t);
        acc += &t;
    }
    Ok(NeumannOutput { value: acc, psi, terms, truncation_bound: truncation_bound(psi, terms) })
}

/// Entrywise sign with `sign(0) = 0`.
pub fn sign(m: &Matrix) -> Matrix {
    m.map(|v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })
}

struct Pieces {
    omega: SupportSet,
    a_pinv: Matrix,
    uvt: Matrix,
}

fn pieces(a: &Matrix, l0: &Matrix, s0: &Matrix) -> Result<Pieces> {
    if a.nrows() != l0.nrows() || l0.shape() != s0.shape() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary {:?}, low-rank part {:?}, sparse part {:?}",
            a.shape(),
            l0.shape(),
            s0.shape()
        )));
    }
    let a_pinv = linalg::pinv(a)?;
    let uvt = linalg::svd(&(&a_pinv * l0), linalg::DEFAULT_ZERO_TOL)?.uvt();
    Ok(Pieces { omega: SupportSet::from_nonzeros(s0), a_pinv, uvt })
}

#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub f: Matrix,
    /// `‖P_{U_A} P_Ω‖`; 1 when the dictionary spans every row direction.
    pub psi: f64,
    pub terms: usize,
    pub truncation_bound: f64,
    /// The dictionary has full row rank, so the series reduces to `P_Ω⊥`.
    pub collapsed: bool,
}

/// Build the certificate candidate
/// `F = P_Ω⊥ P_{U_A} (I + Σ (P_{U_A} P_Ω P_{U_A})ⁱ) ((1/λ)(Aᵀ)⁺ U Vᵀ − P_{U_A}(sign S0))`.
pub fn build_dual_certificate(
    a: &Matrix,
    l0: &Matrix,
    s0: &Matrix,
    lambda: f64,
    terms: Option<usize>,
) -> Result<DualCertificate> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let p = pieces(a, l0, s0)?;
    let ua = linalg::orth(a, linalg::DEFAULT_ZERO_TOL)?;
    let lead = p.a_pinv.transpose() * &p.uvt / lambda;

    if ua.ncols() == a.nrows() {
        // P_{U_A} = I: the P_Ω part of the series is removed by the final P_Ω⊥,
        // leaving F = P_Ω⊥((1/λ)(Aᵀ)⁺UVᵀ).
        let mut f = lead;
        mask_out_in_place(&p.omega, &mut f);
        let psi = if p.omega.is_empty() { 0.0 } else { 1.0 };
        return Ok(DualCertificate { f, psi, terms: 0, truncation_bound: 0.0, collapsed: true });
    }

    let g = lead - linalg::project_colspace(&ua, &sign(s0))?;
    let series = neumann_apply_inverse(&ua, &p.omega, &g, terms)?;
    let mut f = series.value;
    mask_out_in_place(&p.omega, &mut f);
    Ok(DualCertificate {
        f,
        psi: series.psi,
        terms: series.terms,
        truncation_bound: series.truncation_bound,
        collapsed: false,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct DualCertificateReport {
    /// `‖U Vᵀ − λ Aᵀ(sign(S0) + F)‖_F`
    pub cond_a_residual: f64,
    /// `‖P_Ω(F)‖_F`
    pub cond_b_residual: f64,
    /// `‖P_Ω⊥(F)‖_∞`
    pub cond_c_value: f64,
    pub tol_a: f64,
    pub tol_b: f64,
    pub satisfied: bool,
}

pub fn check_dual_conditions(
    a: &Matrix,
    l0: &Matrix,
    s0: &Matrix,
    f: &Matrix,
    lambda: f64,
) -> Result<DualCertificateReport> {
    let p = pieces(a, l0, s0)?;
    if f.shape() != s0.shape() {
        return Err(Error::DimensionMismatch(format!(
            "certificate is {:?}, sparse part is {:?}",
            f.shape(),
            s0.shape()
        )));
    }
    let cond_a_residual = (&p.uvt - a.transpose() * (sign(s0) + f) * lambda).norm();
    let on = linalg::project_support(&p.omega, f, false)?;
    let off = linalg::project_support(&p.omega, f, true)?;
    let cond_b_residual = on.norm();
    let cond_c_value = linalg::norm(&off, NormKind::Sup)?;
    let tol = 1e-6 * p.uvt.norm().max(1.0);
    Ok(DualCertificateReport {
        cond_a_residual,
        cond_b_residual,
        cond_c_value,
        tol_a: tol,
        tol_b: tol,
        satisfied: cond_a_residual <= tol && cond_b_residual <= tol && cond_c_value < 1.0,
    })
}

/// The weight `√(μ3_A·γ_A / (μ1(A)·n1))` suggested by the certificate bound.
pub fn theory_lambda(l0: &Matrix, a: &Matrix) -> Result<f64> {
    let tol = linalg::DEFAULT_ZERO_TOL;
    let mu3a = coherence::mu3_dict(l0, a, tol)?;
    let gamma = coherence::condition_number(a, tol)?;
    let mu1a = coherence::mu1(a, tol)?;
    let n1 = l0.nrows().max(l0.ncols()) as f64;
    Ok((mu3a * gamma / (mu1a * n1)).sqrt())
}
