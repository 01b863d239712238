//! Augmented Lagrangian solver for low-rank representation,
//!
//! ```text
//! min ‖Z‖_* + λ‖S‖_1   s.t.  X = A Z + S,
//! ```
//!
//! with robust PCA as the identity-dictionary case. The nuclear-norm term is
//! split through an auxiliary `J = Z`, so every step is a closed-form prox or
//! a linear solve with the fixed matrix `I + AᵀA`.

use nalgebra::{Cholesky, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, NormKind};
use crate::prox::{soft_threshold, svt};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerMode {
    /// One sweep over (J, Z, S) per multiplier update.
    Inexact,
    /// Repeat the sweep until the iterates move less than `inner_tol`
    /// (relative to ‖X‖_F) or `max_inner` sweeps have run.
    Exact { inner_tol: f64, max_inner: usize },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SolverOptions {
    /// Initial penalty.
    pub theta0: f64,
    /// Penalty growth factor, applied after outer iterations whose dual
    /// residual is below `dual_tol`.
    pub tau_growth: f64,
    pub theta_max: f64,
    /// Stopping tolerance on primal residuals scaled by ‖X‖_F.
    pub primal_tol: f64,
    /// Stopping tolerance on the dual residual `θ·‖iterate change‖ / ‖X‖_F`.
    pub dual_tol: f64,
    pub max_outer: usize,
    pub inner_mode: InnerMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            theta0: 0.1,
            tau_growth: 1.1,
            theta_max: 1e8,
            primal_tol: 1e-7,
            dual_tol: 1e-4,
            max_outer: 1000,
            inner_mode: InnerMode::Inexact,
        }
    }
}

impl SolverOptions {
    /// Exact inner minimization with fast penalty growth (θ0 = 0.1, τ = 5).
    pub fn exact_alm() -> Self {
        Self {
            tau_growth: 5.0,
            inner_mode: InnerMode::Exact { inner_tol: 1e-6, max_inner: 20 },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("theta0", self.theta0)?;
        positive("theta_max", self.theta_max)?;
        positive("primal_tol", self.primal_tol)?;
        positive("dual_tol", self.dual_tol)?;
        if !(self.tau_growth > 1.0) || !self.tau_growth.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tau_growth must exceed 1, got {}",
                self.tau_growth
            )));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidArgument("max_outer must be at least 1".into()));
        }
        if let InnerMode::Exact { inner_tol, max_inner } = self.inner_mode {
            if !(inner_tol > 0.0 && inner_tol < 1.0) || max_inner == 0 {
                return Err(Error::InvalidArgument(format!(
                    "exact inner loop needs 0 < inner_tol < 1 and max_inner >= 1, got {inner_tol}, {max_inner}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LrrProblem {
    pub x: Matrix,
    /// `None` means the identity dictionary.
    pub dictionary: Option<Matrix>,
    pub lambda: f64,
    /// Zero for the equality-constrained program; otherwise the Frobenius
    /// tolerance on `X − AZ − S`.
    pub noise_eps: f64,
}

impl LrrProblem {
    pub fn new(x: Matrix, lambda: f64) -> Self {
        Self { x, dictionary: None, lambda, noise_eps: 0.0 }
    }

    pub fn with_dictionary(mut self, a: Matrix) -> Self {
        self.dictionary = Some(a);
        self
    }

    pub fn with_noise_eps(mut self, eps: f64) -> Self {
        self.noise_eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        linalg::ensure_finite(&self.x)?;
        if let Some(a) = &self.dictionary {
            linalg::ensure_finite(a)?;
            if a.nrows() != self.x.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "dictionary has {} rows, data has {}",
                    a.nrows(),
                    self.x.nrows()
                )));
            }
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.noise_eps >= 0.0) || !self.noise_eps.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise_eps must be >= 0, got {}",
                self.noise_eps
            )));
        }
        Ok(())
    }
}

/// The standard weight `1/√max(m, n)`.
pub fn default_lambda(m: usize, n: usize) -> f64 {
    1.0 / (m.max(n) as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub z: Matrix,
    pub s: Matrix,
    /// `A Z`, the recovered low-rank part.
    pub l_hat: Matrix,
    pub outer_iters: usize,
    /// `‖X − AZ − S‖_F / ‖X‖_F` at exit.
    pub primal_residual: f64,
    /// `‖Z − J‖_F / ‖X‖_F` at exit.
    pub gap_residual: f64,
    pub converged: bool,
    /// `‖Z‖_* + λ‖S‖_1`.
    pub objective: f64,
    /// Scaled primal residual after every outer iteration.
    pub residual_history: Vec<f64>,
}

enum Dict {
    Identity,
    Dense { a: Matrix, at: Matrix, chol: Cholesky<f64, Dyn> },
}

impl Dict {
    fn new(a: Option<&Matrix>) -> Result<Self> {
        let Some(a) = a else { return Ok(Self::Identity) };
        let at = a.transpose();
        let d = a.ncols();
        let gram = Matrix::identity(d, d) + &at * a;
        let chol = Cholesky::new(gram)
            .ok_or_else(|| Error::Numerical("I + AᵀA is not positive definite".into()))?;
        Ok(Self::Dense { a: a.clone(), at, chol })
    }

    fn width(&self, m: usize) -> usize {
        match self {
            Self::Identity => m,
            Self::Dense { a, .. } => a.ncols(),
        }
    }

    fn apply(&self, z: &Matrix) -> Matrix {
        match self {
            Self::Identity => z.clone(),
            Self::Dense { a, .. } => a * z,
        }
    }

    fn apply_t(&self, m: &Matrix) -> Matrix {
        match self {
            Self::Identity => m.clone(),
            Self::Dense { at, .. } => at * m,
        }
    }

    /// `(I + AᵀA)⁻¹ rhs`
    fn solve(&self, rhs: Matrix) -> Matrix {
        match self {
            Self::Identity => rhs * 0.5,
            Self::Dense { chol, .. } => chol.solve(&rhs),
        }
    }
}

fn trivial_result(m: usize, n: usize, d: usize) -> SolverResult {
    SolverResult {
        z: Matrix::zeros(d, n),
        s: Matrix::zeros(m, n),
        l_hat: Matrix::zeros(m, n),
        outer_iters: 0,
        primal_residual: 0.0,
        gap_residual: 0.0,
        converged: true,
        objective: 0.0,
        residual_history: Vec::new(),
    }
}

fn objective(z: &Matrix, s: &Matrix, lambda: f64) -> Result<f64> {
    Ok(linalg::norm(z, NormKind::Nuclear)? + lambda * linalg::norm(s, NormKind::L1)?)
}

fn stop(primal_abs: f64, primal: f64, gap: f64, dual: f64, problem: &LrrProblem, opts: &SolverOptions) -> bool {
    let feasible = if problem.noise_eps > 0.0 {
        primal_abs <= problem.noise_eps
    } else {
        primal <= opts.primal_tol
    };
    feasible && gap <= opts.primal_tol && dual <= opts.dual_tol
}

/// The penalty grows only after an iteration whose dual residual is below `dual_tol`.
fn next_theta(theta: f64, dual: f64, opts: &SolverOptions) -> f64 {
    if dual < opts.dual_tol {
        (theta * opts.tau_growth).min(opts.theta_max)
    } else {
        theta
    }
}

/// Solve the LRR program (or its noisy relaxation when `noise_eps > 0`).
pub fn solve_lrr(problem: &LrrProblem, opts: &SolverOptions) -> Result<SolverResult> {
    problem.validate()?;
    opts.validate()?;
    let x = &problem.x;
    let (m, n) = x.shape();
    let dict = Dict::new(problem.dictionary.as_ref())?;
    let d = dict.width(m);
    let xnorm = x.norm();
    if xnorm == 0.0 {
        return Ok(trivial_result(m, n, d));
    }
    let lambda = problem.lambda;

    let mut z = Matrix::zeros(d, n);
    let mut j = Matrix::zeros(d, n);
    let mut s = Matrix::zeros(m, n);
    let mut y = Matrix::zeros(m, n);
    let mut w = Matrix::zeros(d, n);
    let mut az = Matrix::zeros(m, n);
    let mut theta = opts.theta0;
    let mut history = Vec::new();
    let (mut primal, mut gap, mut converged) = (f64::INFINITY, f64::INFINITY, false);
    let mut iters = 0;

    let sweeps = match opts.inner_mode {
        InnerMode::Inexact => 1,
        InnerMode::Exact { max_inner, .. } => max_inner,
    };

    while iters < opts.max_outer {
        iters += 1;
        let aty = dict.apply_t(&y);
        let (z_prev, s_prev) = (z.clone(), s.clone());
        for _ in 0..sweeps {
            let j_new = svt(&(&z + &w / theta), 1.0 / theta)?;
            let rhs = dict.apply_t(&(x - &s)) + &j_new + (&aty - &w) / theta;
            let z_new = dict.solve(rhs);
            az = dict.apply(&z_new);
            let s_new = soft_threshold(&(x - &az + &y / theta), lambda / theta);
            let change = (&j_new - &j).norm().max((&z_new - &z).norm()).max((&s_new - &s).norm());
            j = j_new;
            z = z_new;
            s = s_new;
            if let InnerMode::Exact { inner_tol, .. } = opts.inner_mode {
                if change <= inner_tol * xnorm {
                    break;
                }
            }
        }
        let r = x - &az - &s;
        let zj = &z - &j;
        let primal_abs = r.norm();
        primal = primal_abs / xnorm;
        gap = zj.norm() / xnorm;
        let dual = theta * (&z - &z_prev).norm().max(dict.apply_t(&(&s - &s_prev)).norm()) / xnorm;
        history.push(primal);
        if stop(primal_abs, primal, gap, dual, problem, opts) {
            converged = true;
            break;
        }
        y += &r * theta;
        w += &zj * theta;
        theta = next_theta(theta, dual, opts);
    }

    let objective = objective(&z, &s, lambda)?;
    Ok(SolverResult {
        l_hat: az,
        z,
        s,
        outer_iters: iters,
        primal_residual: primal,
        gap_residual: gap,
        converged,
        objective,
        residual_history: history,
    })
}

/// Robust PCA, `min ‖L‖_* + λ‖S‖_1 s.t. X = L + S`, with a direct SVT update for `L`.
pub fn solve_rpca(x: &Matrix, lambda: f64, opts: &SolverOptions) -> Result<SolverResult> {
    solve_rpca_noisy(x, lambda, 0.0, opts)
}

pub fn solve_rpca_noisy(x: &Matrix, lambda: f64, noise_eps: f64, opts: &SolverOptions) -> Result<SolverResult> {
    let problem = LrrProblem { x: x.clone(), dictionary: None, lambda, noise_eps };
    problem.validate()?;
    opts.validate()?;
    let (m, n) = x.shape();
    let xnorm = x.norm();
    if xnorm == 0.0 {
        return Ok(trivial_result(m, n, m));
    }

    let mut l = Matrix::zeros(m, n);
    let mut s = Matrix::zeros(m, n);
    let mut y = Matrix::zeros(m, n);
    let mut theta = opts.theta0;
    let mut history = Vec::new();
    let (mut primal, mut converged) = (f64::INFINITY, false);
    let mut iters = 0;
    let sweeps = match opts.inner_mode {
        InnerMode::Inexact => 1,
        InnerMode::Exact { max_inner, .. } => max_inner,
    };

    while iters < opts.max_outer {
        iters += 1;
        let scaled_y = &y / theta;
        let s_prev = s.clone();
        for _ in 0..sweeps {
            let l_new = svt(&(x - &s + &scaled_y), 1.0 / theta)?;
            let s_new = soft_threshold(&(x - &l_new + &scaled_y), lambda / theta);
            let change = (&l_new - &l).norm().max((&s_new - &s).norm());
            l = l_new;
            s = s_new;
            if let InnerMode::Exact { inner_tol, .. } = opts.inner_mode {
                if change <= inner_tol * xnorm {
                    break;
                }
            }
        }
        let r = x - &l - &s;
        let primal_abs = r.norm();
        primal = primal_abs / xnorm;
        let dual = theta * (&s - &s_prev).norm() / xnorm;
        history.push(primal);
        if stop(primal_abs, primal, 0.0, dual, &problem, opts) {
            converged = true;
            break;
        }
        y += &r * theta;
        theta = next_theta(theta, dual, opts);
    }

    let objective = objective(&l, &s, lambda)?;
    Ok(SolverResult {
        z: l.clone(),
        l_hat: l,
        s,
        outer_iters: iters,
        primal_residual: primal,
        gap_residual: 0.0,
        converged,
        objective,
        residual_history: history,
    })
}

/// `‖L̂ − L0‖_F / ‖L0‖_F`.
pub fn recovery_error(l_hat: &Matrix, l0: &Matrix) -> Result<f64> {
    if l_hat.shape() != l0.shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {:?}, reference is {:?}",
            l_hat.shape(),
            l0.shape()
        )));
    }
    let n0 = l0.norm();
    if n0 == 0.0 {
        return Err(Error::InvalidArgument("reference matrix is zero".into()));
    }
    Ok((l_hat - l0).norm() / n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::*;

    fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> Matrix {
        let mut rng = rng_from_seed(seed);
        gaussian_matrix(m, r, &mut rng) * gaussian_matrix(r, n, &mut rng)
    }

    fn corrupted(l0: &Matrix, rho: f64, seed: u64) -> (Matrix, Matrix) {
        let (m, n) = l0.shape();
        let spec = CorruptionSpec { model: SupportModel::Bernoulli { rho }, compose: Composition::Additive, seed };
        let (s0, omega) = gen_corruption(m, n, &spec).unwrap();
        (compose_observation(l0, &s0, &omega, Composition::Additive).unwrap(), s0)
    }

    #[test]
    fn clean_low_rank_input_has_no_sparse_part() {
        let x = low_rank(40, 40, 2, 1);
        let lam = default_lambda(40, 40);
        let r = solve_lrr(&LrrProblem::new(x.clone(), lam), &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.s.norm() <= 1e-5 * x.norm(), "{}", r.s.norm() / x.norm());
        assert!(linalg::relative_diff(&r.l_hat, &x) < 1e-5);
        let r = solve_rpca(&x, lam, &SolverOptions::default()).unwrap();
        assert!(r.s.norm() <= 1e-5 * x.norm());
    }

    #[test]
    fn zero_input_returns_trivial_solution() {
        let r = solve_lrr(
            &LrrProblem::new(Matrix::zeros(3, 4), 1.0).with_dictionary(Matrix::identity(3, 2)),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.z.shape(), (2, 4));
        assert_eq!(r.outer_iters, 0);
    }

    #[test]
    fn invalid_problems_rejected() {
        let o = SolverOptions::default();
        assert!(solve_lrr(&LrrProblem::new(Matrix::zeros(3, 3), 0.0), &o).is_err());
        let p = LrrProblem::new(Matrix::identity(3, 3), 1.0).with_dictionary(Matrix::identity(4, 4));
        assert!(matches!(solve_lrr(&p, &o), Err(Error::DimensionMismatch(_))));
        let bad = SolverOptions { tau_growth: 1.0, ..o };
        assert!(solve_rpca(&Matrix::identity(3, 3), 1.0, &bad).is_err());
        let bad = SolverOptions { inner_mode: InnerMode::Exact { inner_tol: 2.0, max_inner: 3 }, ..o };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sparse_only_input_with_heavy_weight_keeps_nothing_low_rank() {
        let (x, _) = corrupted(&Matrix::zeros(30, 30), 0.1, 3);
        let r = solve_rpca(&x, 10.0, &SolverOptions::default()).unwrap();
        // with a huge sparsity weight the low-rank part absorbs everything,
        // with a tiny one the sparse part does
        assert!(linalg::relative_diff(&r.l_hat, &x) < 1e-4);
        let r = solve_rpca(&x, 0.01, &SolverOptions::default()).unwrap();
        assert!(r.l_hat.norm() < 1e-3 * x.norm());
    }

    #[test]
    fn rpca_recovers_incoherent_low_rank() {
        let l0 = low_rank(100, 100, 5, 4);
        let (x, s0) = corrupted(&l0, 0.05, 5);
        let r = solve_rpca(&x, default_lambda(100, 100), &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!(recovery_error(&r.l_hat, &l0).unwrap() < 1e-5);
        assert!(linalg::relative_diff(&r.s, &s0) < 1e-5);
    }

    #[test]
    fn exact_mode_recovers_too() {
        let l0 = low_rank(60, 60, 3, 6);
        let (x, _) = corrupted(&l0, 0.05, 7);
        let lam = default_lambda(60, 60);
        let opts = SolverOptions::exact_alm();
        let r = solve_rpca(&x, lam, &opts).unwrap();
        assert!(recovery_error(&r.l_hat, &l0).unwrap() < 1e-4);
        let r = solve_lrr(&LrrProblem::new(x, lam), &opts).unwrap();
        assert!(recovery_error(&r.l_hat, &l0).unwrap() < 1e-4);
    }

    #[test]
    fn noisy_mode_stops_at_tolerance() {
        let l0 = low_rank(40, 40, 2, 8);
        let (x, _) = corrupted(&l0, 0.05, 9);
        let x = x + gen_noise(40, 40, 1e-3, 10);
        let eps = 1e-2 * x.norm();
        let p = LrrProblem::new(x.clone(), default_lambda(40, 40)).with_noise_eps(eps);
        let r = solve_lrr(&p, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!((&x - &r.l_hat - &r.s).norm() <= eps);
    }

    #[test]
    fn non_convergence_is_reported_not_raised() {
        let l0 = low_rank(30, 30, 2, 11);
        let (x, _) = corrupted(&l0, 0.1, 12);
        let opts = SolverOptions { max_outer: 3, ..Default::default() };
        let r = solve_rpca(&x, default_lambda(30, 30), &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.outer_iters, 3);
        assert_eq!(r.residual_history.len(), 3);
    }

    #[test]
    fn residual_trend_decreases() {
        let l0 = low_rank(50, 50, 3, 13);
        let (x, _) = corrupted(&l0, 0.1, 14);
        let r = solve_rpca(&x, default_lambda(50, 50), &SolverOptions::default()).unwrap();
        assert!(r.converged);
        let h = &r.residual_history;
        assert!(h[h.len() - 1] <= h[0] / 1e4);
    }

    #[test]
    fn objective_not_above_ground_truth() {
        let l0 = low_rank(50, 50, 3, 15);
        let (x, s0) = corrupted(&l0, 0.1, 16);
        let lam = default_lambda(50, 50);
        let truth = objective(&l0, &s0, lam).unwrap();
        for r in [
            solve_rpca(&x, lam, &SolverOptions::default()).unwrap(),
            solve_lrr(&LrrProblem::new(x.clone(), lam), &SolverOptions::default()).unwrap(),
        ] {
            assert!(r.objective <= truth + 1e-4, "{} vs {}", r.objective, truth);
        }
    }

    #[test]
    fn small_primal_residual_alone_does_not_stop() {
        // these instances stopped ~0.1% above the optimum under ungated penalty growth
        for seed in [3, 5, 6] {
            let inst = gen_dictionary_instance(&DictionaryInstanceSpec {
                m: 100, n: 100, r0: 5, dict_rank: 10, rho: 0.1, factors: FactorKind::Gaussian, seed,
            })
            .unwrap();
            let p = LrrProblem::new(inst.x.clone(), 0.1).with_dictionary(inst.dictionary.clone());
            let r = solve_lrr(&p, &SolverOptions::default()).unwrap();
            assert!(r.converged);
            let z0 = inst.dictionary.transpose() * &inst.l0;
            assert!(linalg::relative_diff(&r.z, &z0) < 1e-5, "seed {seed}");
            assert!(linalg::relative_diff(&r.s, &inst.s0) < 1e-5, "seed {seed}");
        }
    }

    #[test]
    fn recovery_error_formula() {
        let l0 = low_rank(5, 4, 2, 17);
        assert_eq!(recovery_error(&l0, &l0).unwrap(), 0.0);
        assert!((recovery_error(&(&l0 * 2.0), &l0).unwrap() - 1.0).abs() < 1e-15);
        let other = low_rank(5, 4, 2, 18);
        let by_hand = (&other - &l0).norm() / l0.norm();
        assert_eq!(recovery_error(&other, &l0).unwrap(), by_hand);
        assert!(recovery_error(&l0, &Matrix::zeros(5, 4)).is_err());
        assert!(recovery_error(&l0, &Matrix::zeros(4, 4)).is_err());
    }
}
