//! Dictionary pursuit: estimate the low-rank part with robust PCA, turn its
//! leading singular directions into a unit-column dictionary, then solve LRR
//! with that dictionary.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::solver::{default_lambda, solve_lrr, solve_rpca, LrrProblem, SolverOptions, SolverResult};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PursuitOptions {
    /// Weight for both stages; `None` means `1/√max(m, n)`.
    pub lambda: Option<f64>,
    /// Singular values above `rank_rel_tol·σ₁` of the robust PCA estimate count toward its rank.
    pub rank_rel_tol: f64,
    /// Number of learn-dictionary/solve rounds; the first uses the robust PCA
    /// estimate, later ones the previous round's output.
    pub rounds: usize,
    /// Solve over the rank-sized factor `U_A Σ_A` of the learned dictionary
    /// instead of its full width. Both give the same optimum.
    pub reduce_dictionary: bool,
    pub solver: SolverOptions,
}

impl Default for PursuitOptions {
    fn default() -> Self {
        Self {
            lambda: None,
            rank_rel_tol: 1e-3,
            rounds: 1,
            reduce_dictionary: true,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PursuitResult {
    /// Robust PCA stage; `rpca.l_hat` is the first low-rank estimate.
    pub rpca: SolverResult,
    /// Estimated rank of the last dictionary source.
    pub rank_estimate: usize,
    /// Learned dictionary with unit columns.
    pub dictionary: Matrix,
    /// LRR stage over `dictionary`; `result.z` is in dictionary coordinates.
    pub result: SolverResult,
    /// `dictionary · result.z`.
    pub l_final: Matrix,
    pub rpca_seconds: f64,
    pub total_seconds: f64,
}

impl PursuitResult {
    pub fn l_rpca(&self) -> &Matrix {
        &self.rpca.l_hat
    }

    pub fn converged(&self) -> bool {
        self.rpca.converged && self.result.converged
    }
}

/// Best rank-`r` approximation in Frobenius norm.
pub fn rank_truncate(m: &Matrix, r: usize) -> Result<Matrix> {
    let max = m.nrows().min(m.ncols());
    if r == 0 || r > max {
        return Err(Error::InvalidArgument(format!("rank {r} outside [1, {max}]")));
    }
    let mut f = linalg::svd(m, 0.0)?;
    let keep = r.min(f.rank());
    f.u = f.u.columns(0, keep).into_owned();
    f.v = f.v.columns(0, keep).into_owned();
    f.sigma.truncate(keep);
    Ok(f.reconstruct())
}

/// Scale columns to unit length, dropping those with norm `≤ 1e-12·‖M‖_F`.
pub fn normalize_columns(m: &Matrix) -> Result<Matrix> {
    let cut = 1e-12 * m.norm();
    let kept: Vec<_> = m
        .column_iter()
        .filter_map(|c| {
            let n = c.norm();
            (n > cut && n > 0.0).then(|| c / n)
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::DegenerateDictionary);
    }
    Ok(Matrix::from_columns(&kept))
}

/// Learn a dictionary from a low-rank estimate: rank estimate, truncation, unit columns.
pub fn learn_dictionary(estimate: &Matrix, rank_rel_tol: f64) -> Result<(Matrix, usize)> {
    let f = linalg::svd(estimate, 0.0)?;
    let r = linalg::rank_by_threshold(&f.sigma, rank_rel_tol);
    if r == 0 {
        return Err(Error::DegenerateDictionary);
    }
    Ok((normalize_columns(&rank_truncate(estimate, r)?)?, r))
}

/// LRR over `a`, optionally through the equivalent rank-sized dictionary.
pub fn solve_with_dictionary(
    x: &Matrix,
    a: &Matrix,
    lambda: f64,
    reduce: bool,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    if !reduce {
        return solve_lrr(&LrrProblem::new(x.clone(), lambda).with_dictionary(a.clone()), opts);
    }
    // Any Z splits into a part in the row space of A and a part A annihilates;
    // dropping the latter keeps AZ and cannot raise ‖Z‖_*, so the optimum lies
    // in range(V_A) and Z = V_A Z̃ with dictionary U_A Σ_A loses nothing.
    let f = linalg::svd(a, linalg::DEFAULT_ZERO_TOL)?;
    let mut reduced = f.u.clone();
    for (j, s) in f.sigma.iter().enumerate() {
        reduced.column_mut(j).scale_mut(*s);
    }
    let mut res = solve_lrr(&LrrProblem::new(x.clone(), lambda).with_dictionary(reduced), opts)?;
    res.z = &f.v * &res.z;
    Ok(res)
}

pub fn recover(x: &Matrix, opts: &PursuitOptions) -> Result<PursuitResult> {
    if x.norm() == 0.0 {
        return Err(Error::InvalidArgument("observation matrix is zero".into()));
    }
    if opts.rounds == 0 {
        return Err(Error::InvalidArgument("at least one round is required".into()));
    }
    if !(opts.rank_rel_tol > 0.0 && opts.rank_rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rank_rel_tol must lie in (0, 1), got {}",
            opts.rank_rel_tol
        )));
    }
    let lambda = opts.lambda.unwrap_or_else(|| default_lambda(x.nrows(), x.ncols()));
    let start = Instant::now();
    let rpca = solve_rpca(x, lambda, &opts.solver)?;
    let rpca_seconds = start.elapsed().as_secs_f64();

    let mut source = rpca.l_hat.clone();
    let mut last = None;
    for _ in 0..opts.rounds {
        let (dictionary, rank_estimate) = learn_dictionary(&source, opts.rank_rel_tol)?;
        let result = solve_with_dictionary(x, &dictionary, lambda, opts.reduce_dictionary, &opts.solver)?;
        source = result.l_hat.clone();
        last = Some((dictionary, rank_estimate, result));
    }
    let (dictionary, rank_estimate, result) = last.expect("at least one round");
    Ok(PursuitResult {
        rpca,
        rank_estimate,
        l_final: result.l_hat.clone(),
        dictionary,
        result,
        rpca_seconds,
        total_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;
    use crate::solver::recovery_error;
    use crate::synth::*;
    use proptest::prelude::*;

    fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> Matrix {
        let mut rng = rng_from_seed(seed);
        gaussian_matrix(m, r, &mut rng) * gaussian_matrix(r, n, &mut rng)
    }

    fn corrupt(l0: &Matrix, rho: f64, seed: u64) -> Matrix {
        let spec = CorruptionSpec { model: SupportModel::Bernoulli { rho }, compose: Composition::Additive, seed };
        let (s0, omega) = gen_corruption(l0.nrows(), l0.ncols(), &spec).unwrap();
        compose_observation(l0, &s0, &omega, Composition::Additive).unwrap()
    }

    #[test]
    fn truncation_cases() {
        let t = rank_truncate(&diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        assert!((t - diag(&[3.0, 2.0, 0.0])).norm() < 1e-14);
        let m = low_rank(6, 5, 2, 1);
        assert!((rank_truncate(&m, 4).unwrap() - &m).norm() < 1e-10 * m.norm());
        assert!(rank_truncate(&m, 0).is_err());
        assert!(rank_truncate(&m, 6).is_err());
    }

    #[test]
    fn normalization_cases() {
        let m = Matrix::from_column_slice(2, 1, &[3.0, 4.0]);
        assert_eq!(normalize_columns(&m).unwrap(), Matrix::from_column_slice(2, 1, &[0.6, 0.8]));
        let q = random_orthonormal(5, 3, &mut rng_from_seed(2));
        assert!((normalize_columns(&q).unwrap() - &q).norm() < 1e-15);
        let mut z = gaussian_matrix(4, 3, &mut rng_from_seed(3));
        z.column_mut(1).fill(0.0);
        let out = normalize_columns(&z).unwrap();
        assert_eq!(out.ncols(), 2);
        assert!(out.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
        assert!(matches!(normalize_columns(&Matrix::zeros(3, 3)), Err(Error::DegenerateDictionary)));
    }

    #[test]
    fn clean_input_is_reproduced() {
        let l0 = low_rank(60, 60, 3, 4);
        let res = recover(&l0, &PursuitOptions::default()).unwrap();
        assert_eq!(res.rank_estimate, 3);
        let u0 = linalg::orth(&l0, 1e-9).unwrap();
        let a = &res.dictionary;
        assert!((&u0 * (u0.transpose() * a) - a).norm() < 1e-6 * a.norm());
        assert!(recovery_error(&res.l_final, &l0).unwrap() < 1e-6);
    }

    #[test]
    fn exact_rpca_is_kept() {
        let l0 = low_rank(80, 80, 4, 5);
        let x = corrupt(&l0, 0.05, 6);
        let res = recover(&x, &PursuitOptions::default()).unwrap();
        assert!(res.converged());
        assert!(recovery_error(res.l_rpca(), &l0).unwrap() < 1e-5);
        assert!(linalg::relative_diff(&res.l_final, res.l_rpca()) < 1e-4);
        assert!(res.dictionary.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-10));
        assert!(linalg::svd(&res.dictionary, 1e-10).unwrap().rank() <= res.rank_estimate);
    }

    #[test]
    fn reduced_and_full_dictionaries_agree() {
        let l0 = low_rank(30, 40, 2, 7);
        let x = corrupt(&l0, 0.08, 8);
        let full = PursuitOptions { reduce_dictionary: false, ..Default::default() };
        let a = recover(&x, &PursuitOptions::default()).unwrap();
        let b = recover(&x, &full).unwrap();
        assert!(linalg::relative_diff(&a.l_final, &b.l_final) < 1e-5);
        assert!((a.result.objective - b.result.objective).abs() < 1e-5 * b.result.objective);
        assert_eq!(a.result.z.shape(), b.result.z.shape());
    }

    #[test]
    fn fixed_point_is_stable() {
        let l0 = low_rank(50, 50, 2, 9);
        let x = corrupt(&l0, 0.05, 10);
        let first = recover(&x, &PursuitOptions::default()).unwrap();
        let again = recover(&first.l_final, &PursuitOptions::default()).unwrap();
        assert!(linalg::relative_diff(&again.l_final, &first.l_final) < 1e-6);
        let twice = recover(&x, &PursuitOptions { rounds: 2, ..Default::default() }).unwrap();
        assert!(linalg::relative_diff(&twice.l_final, &first.l_final) < 1e-6);
    }

    #[test]
    fn invalid_inputs() {
        assert!(recover(&Matrix::zeros(4, 4), &PursuitOptions::default()).is_err());
        let x = low_rank(5, 5, 1, 1);
        assert!(recover(&x, &PursuitOptions { rounds: 0, ..Default::default() }).is_err());
        assert!(recover(&x, &PursuitOptions { rank_rel_tol: 1.0, ..Default::default() }).is_err());
        assert!(matches!(learn_dictionary(&Matrix::zeros(3, 3), 1e-3), Err(Error::DegenerateDictionary)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn eckart_young(m in 2usize..9, n in 2usize..9, r in 1usize..8, seed in any::<u64>()) {
            let r = r.min(m).min(n);
            let a = gaussian_matrix(m, n, &mut rng_from_seed(seed));
            let s = linalg::singular_values(&a).unwrap();
            let tail: f64 = s[r..].iter().map(|x| x * x).sum::<f64>().sqrt();
            let err = (rank_truncate(&a, r).unwrap() - &a).norm();
            prop_assert!((err - tail).abs() < 1e-8 * a.norm());
        }

        #[test]
        fn learned_dictionary_has_unit_columns(seed in any::<u64>(), r in 1usize..4) {
            let l = low_rank(12, 10, r, seed);
            let (a, rank) = learn_dictionary(&l, 1e-3).unwrap();
            prop_assert_eq!(rank, r);
            prop_assert!(a.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-10));
        }
    }
}
