use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{par_map, stats};
use crate::coherence::{self, ZipfFit, ZipfSample};
use crate::error::{Error, Result};
use crate::linalg;
use crate::solver::{default_lambda, recovery_error, solve_lrr, solve_rpca, LrrProblem, SolverOptions};
use crate::synth::{
    compose_observation, gaussian_matrix, gen_coherent_instance, gen_corruption, gen_union_subspaces,
    mix_seed, rng_from_seed, unit_columns, Composition, CorruptionSpec, SupportModel, UnionSubspaceSpec,
    COHERENT_DIM,
};

// ---------------------------------------------------------------------------
// cluster sweep

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClusterSweepConfig {
    pub m: usize,
    pub n: usize,
    pub r0: usize,
    pub k_values: Vec<usize>,
    /// Bernoulli corruption rate.
    pub corruption_frac: f64,
    pub trials: usize,
    pub seed: u64,
}

impl ClusterSweepConfig {
    pub fn desk() -> Self {
        Self {
            m: 200,
            n: 200,
            r0: 40,
            k_values: vec![1, 2, 4, 5, 8, 10, 20, 40],
            corruption_frac: 0.13,
            trials: 10,
            seed: 0,
        }
    }

    pub fn full() -> Self {
        Self {
            m: 500,
            n: 500,
            r0: 100,
            k_values: vec![1, 2, 4, 5, 10, 20, 25, 50, 100],
            ..Self::desk()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.trials == 0 {
            return Err(Error::InvalidArgument("need at least one k and one trial".into()));
        }
        for &k in &self.k_values {
            if k == 0 || self.r0 % k != 0 || self.n % k != 0 {
                return Err(Error::InvalidClusterCount { rank: self.r0, clusters: k });
            }
        }
        if !(0.0..1.0).contains(&self.corruption_frac) {
            return Err(Error::InvalidArgument(format!("corruption rate {} outside [0, 1)", self.corruption_frac)));
        }
        Ok(())
    }
}

/// Per-k trial averages.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClusterSweepRow {
    pub k: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub rpca_error: f64,
}

/// Coherence and robust PCA error as the number of clusters grows at fixed rank.
///
/// Data are sup-normalized and corrupted additively by ±1 entries.
pub fn run_cluster_sweep(cfg: &ClusterSweepConfig) -> Result<Vec<ClusterSweepRow>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..cfg.k_values.len()).flat_map(|ki| (0..cfg.trials).map(move |t| (ki, t))).collect();
    let lambda = default_lambda(cfg.m, cfg.n);
    let opts = SolverOptions::default();
    let trials = par_map(&jobs, |&(ki, t)| -> Result<[f64; 4]> {
        let seed = mix_seed(cfg.seed, &[ki as u64, t as u64]);
        let (l0, _) = gen_union_subspaces(&UnionSubspaceSpec {
            m: cfg.m,
            n: cfg.n,
            k: cfg.k_values[ki],
            r0: cfg.r0,
            normalize_sup: true,
            seed: mix_seed(seed, &[0]),
        })?;
        let (s0, omega) = gen_corruption(
            cfg.m,
            cfg.n,
            &CorruptionSpec {
                model: SupportModel::Bernoulli { rho: cfg.corruption_frac },
                compose: Composition::Additive,
                seed: mix_seed(seed, &[1]),
            },
        )?;
        let x = compose_observation(&l0, &s0, &omega, Composition::Additive)?;
        let (mu1, mu2, _) = coherence::mu1_mu2(&l0, linalg::DEFAULT_ZERO_TOL)?;
        let mu3 = coherence::mu3(&l0, linalg::DEFAULT_ZERO_TOL)?;
        let err = recovery_error(&solve_rpca(&x, lambda, &opts)?.l_hat, &l0)?;
        Ok([mu1, mu2, mu3, err])
    })?;
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(cfg
        .k_values
        .iter()
        .enumerate()
        .map(|(ki, &k)| {
            let col = |c: usize| -> f64 {
                stats::mean(&trials[ki * cfg.trials..(ki + 1) * cfg.trials].iter().map(|v| v[c]).collect::<Vec<_>>())
            };
            ClusterSweepRow { k, mu1: col(0), mu2: col(1), mu3: col(2), rpca_error: col(3) }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Zipf constants

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ZipfConfig {
    pub num_matrices: usize,
    pub dim_min: usize,
    pub dim_max: usize,
    /// Rank is `round(h·min(m, n))` with `h` uniform on `[h_min, h_max)`.
    pub h_min: f64,
    pub h_max: f64,
    pub seed: u64,
}

impl ZipfConfig {
    pub fn desk() -> Self {
        Self { num_matrices: 1000, dim_min: 100, dim_max: 300, h_min: 0.1, h_max: 0.9, seed: 0 }
    }

    pub fn full() -> Self {
        Self { num_matrices: 1_000_000, dim_max: 1000, ..Self::desk() }
    }

    fn validate(&self) -> Result<()> {
        if self.num_matrices == 0 || self.dim_min == 0 || self.dim_min > self.dim_max {
            return Err(Error::InvalidArgument(format!(
                "need at least one matrix and 1 <= dim_min <= dim_max, got {} in [{}, {}]",
                self.num_matrices, self.dim_min, self.dim_max
            )));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_max && self.h_max <= 1.0) {
            return Err(Error::InvalidArgument(format!("rank fractions [{}, {}] invalid", self.h_min, self.h_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ZipfStudy {
    pub fit: ZipfFit,
    pub samples: Vec<ZipfSample>,
}

/// Coherence of uniformly sampled low-rank matrices `L0 = B Cᵀ` with Gaussian factors.
pub fn run_zipf(cfg: &ZipfConfig) -> Result<ZipfStudy> {
    cfg.validate()?;
    let idx: Vec<usize> = (0..cfg.num_matrices).collect();
    let samples = par_map(&idx, |&i| -> Result<ZipfSample> {
        let mut rng = rng_from_seed(mix_seed(cfg.seed, &[i as u64]));
        let m = rng.random_range(cfg.dim_min..=cfg.dim_max);
        let n = rng.random_range(cfg.dim_min..=cfg.dim_max);
        let h = if cfg.h_min < cfg.h_max { rng.random_range(cfg.h_min..cfg.h_max) } else { cfg.h_min };
        let r0 = ((h * m.min(n) as f64).round() as usize).clamp(1, m.min(n));
        let b = gaussian_matrix(m, r0, &mut rng);
        let c = gaussian_matrix(n, r0, &mut rng);
        // B and C have full column rank, so B Cᵀ shares their column spaces
        let mu1 = coherence::mu1(&b, linalg::DEFAULT_ZERO_TOL)?;
        let mu2 = coherence::mu1(&c, linalg::DEFAULT_ZERO_TOL)?;
        Ok(ZipfSample { m, n, r0, mu1, mu2 })
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ZipfStudy { fit: coherence::zipf_fit(&samples)?, samples })
}

// ---------------------------------------------------------------------------
// dictionary coherence

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Mu3aAxis {
    VaryN,
    VaryM,
    VaryBoth,
    VaryR0,
}

impl std::str::FromStr for Mu3aAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vary_n" => Ok(Self::VaryN),
            "vary_m" => Ok(Self::VaryM),
            "vary_both" => Ok(Self::VaryBoth),
            "vary_r0" => Ok(Self::VaryR0),
            _ => Err(Error::Parse(format!("unknown axis '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Mu3aConfig {
    pub axis: Mu3aAxis,
    /// Values taken by the varying quantity.
    pub values: Vec<usize>,
    /// Fixed dimensions for the quantities not being varied.
    pub m: usize,
    pub n: usize,
    pub r0: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Mu3aConfig {
    pub fn desk(axis: Mu3aAxis) -> Self {
        let values = match axis {
            Mu3aAxis::VaryR0 => vec![2, 4, 8, 12, 24, 48, 96],
            _ => vec![40, 60, 80, 120, 160, 240],
        };
        Self { axis, values, m: 120, n: 120, r0: 12, trials: 10, seed: 0 }
    }

    pub fn full(axis: Mu3aAxis) -> Self {
        let values = match axis {
            Mu3aAxis::VaryR0 => (1..=9).map(|i| i * 50).collect(),
            _ => (1..=10).map(|i| i * 100).collect(),
        };
        Self { axis, values, m: 500, n: 500, r0: 50, trials: 10, seed: 0 }
    }

    fn dims(&self, v: usize) -> (usize, usize, usize) {
        match self.axis {
            Mu3aAxis::VaryN => (self.m, v, self.r0),
            Mu3aAxis::VaryM => (v, self.n, self.r0),
            Mu3aAxis::VaryBoth => (v, v, self.r0),
            Mu3aAxis::VaryR0 => (self.m, self.n, v),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Mu3aRow {
    pub m: usize,
    pub n: usize,
    pub r0: usize,
    pub mu3_dict: f64,
    pub gamma_dict: f64,
}

/// Dictionary-relative coherence with `A = P_{U0}(R)`, unit columns, `R` Gaussian `m × n`.
pub fn run_mu3a_study(cfg: &Mu3aConfig) -> Result<Vec<Mu3aRow>> {
    if cfg.values.is_empty() || cfg.trials == 0 {
        return Err(Error::InvalidArgument("need at least one grid value and one trial".into()));
    }
    for &v in &cfg.values {
        let (m, n, r0) = cfg.dims(v);
        if r0 == 0 || r0 > m.min(n) || n < 2 {
            return Err(Error::InvalidArgument(format!("rank {r0} does not fit {m}x{n}")));
        }
    }
    let jobs: Vec<(usize, usize)> =
        (0..cfg.values.len()).flat_map(|vi| (0..cfg.trials).map(move |t| (vi, t))).collect();
    let trials = par_map(&jobs, |&(vi, t)| -> Result<[f64; 2]> {
        let (m, n, r0) = cfg.dims(cfg.values[vi]);
        let mut rng = rng_from_seed(mix_seed(cfg.seed, &[vi as u64, t as u64]));
        let l0 = gaussian_matrix(m, r0, &mut rng) * gaussian_matrix(r0, n, &mut rng);
        let u0 = linalg::orth(&l0, 1e-9)?;
        let r = gaussian_matrix(m, n, &mut rng);
        let a = unit_columns(&linalg::project_colspace(&u0, &r)?);
        let tol = linalg::DEFAULT_ZERO_TOL;
        Ok([coherence::mu3_dict(&l0, &a, tol)?, coherence::condition_number(&a, tol)?])
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(cfg
        .values
        .iter()
        .enumerate()
        .map(|(vi, &v)| {
            let (m, n, r0) = cfg.dims(v);
            let slice = &trials[vi * cfg.trials..(vi + 1) * cfg.trials];
            let col = |c: usize| stats::mean(&slice.iter().map(|x| x[c]).collect::<Vec<_>>());
            Mu3aRow { m, n, r0, mu3_dict: col(0), gamma_dict: col(1) }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// coherent-instance demo

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoherentDemoConfig {
    /// Number of random atoms next to the all-ones column; each in `[0, 199]`.
    pub p_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub lrr_lambda: f64,
    /// Relative error below which LRR counts as exact.
    pub exact_tol: f64,
}

impl Default for CoherentDemoConfig {
    fn default() -> Self {
        Self { p_values: (0..10).collect(), seeds: (0..10).collect(), lrr_lambda: 0.08, exact_tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoherentDemoRow {
    pub p: usize,
    pub seed: u64,
    pub rpca_error: f64,
    pub lrr_error: f64,
    pub lrr_converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoherentDemoSummary {
    pub p: usize,
    pub seeds: usize,
    /// Seeds with LRR error below the exactness tolerance.
    pub lrr_exact: usize,
    pub mean_lrr_error: f64,
    pub mean_rpca_error: f64,
}

/// Robust PCA (`λ = 1/√200`) and LRR with `A = [1, W]` on the coherent instance.
///
/// The observation does not depend on `p`, so robust PCA runs once per seed.
pub fn run_coherent_demo(cfg: &CoherentDemoConfig) -> Result<Vec<CoherentDemoRow>> {
    if let Some(&p) = cfg.p_values.iter().find(|&&p| p >= COHERENT_DIM) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, {}]", COHERENT_DIM - 1)));
    }
    if !(cfg.lrr_lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", cfg.lrr_lambda)));
    }
    let opts = SolverOptions::default();
    let rpca = par_map(&cfg.seeds, |&seed| -> Result<f64> {
        let inst = gen_coherent_instance(0, seed)?;
        let lambda = default_lambda(COHERENT_DIM, COHERENT_DIM);
        recovery_error(&solve_rpca(&inst.x, lambda, &opts)?.l_hat, &inst.l0)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> =
        (0..cfg.p_values.len()).flat_map(|pi| (0..cfg.seeds.len()).map(move |si| (pi, si))).collect();
    par_map(&jobs, |&(pi, si)| -> Result<CoherentDemoRow> {
        let (p, seed) = (cfg.p_values[pi], cfg.seeds[si]);
        let inst = gen_coherent_instance(p, seed)?;
        let problem = LrrProblem::new(inst.x.clone(), cfg.lrr_lambda).with_dictionary(inst.dictionary.clone());
        let res = solve_lrr(&problem, &opts)?;
        Ok(CoherentDemoRow {
            p,
            seed,
            rpca_error: rpca[si],
            lrr_error: recovery_error(&res.l_hat, &inst.l0)?,
            lrr_converged: res.converged,
        })
    })?
    .into_iter()
    .collect()
}

pub fn summarize_coherent_demo(rows: &[CoherentDemoRow], exact_tol: f64) -> Vec<CoherentDemoSummary> {
    let mut ps: Vec<usize> = rows.iter().map(|r| r.p).collect();
    ps.sort_unstable();
    ps.dedup();
    ps.into_iter()
        .map(|p| {
            let sel: Vec<&CoherentDemoRow> = rows.iter().filter(|r| r.p == p).collect();
            CoherentDemoSummary {
                p,
                seeds: sel.len(),
                lrr_exact: sel.iter().filter(|r| r.lrr_error < exact_tol).count(),
                mean_lrr_error: stats::mean(&sel.iter().map(|r| r.lrr_error).collect::<Vec<_>>()),
                mean_rpca_error: stats::mean(&sel.iter().map(|r| r.rpca_error).collect::<Vec<_>>()),
            }
        })
        .collect()
}
