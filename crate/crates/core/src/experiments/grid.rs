use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Method, PhaseGridConfig};
use super::{par_map, stats};
use crate::error::Result;
use crate::pursuit::{self, PursuitOptions};
use crate::solver::{recovery_error, solve_rpca, SolverOptions};
use crate::synth::{
    compose_observation, gen_corruption, gen_union_subspaces, mix_seed, Composition, CorruptionSpec,
    SupportModel, UnionSubspaceSpec,
};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CellResult {
    pub method: Method,
    pub rank_frac: f64,
    pub corruption_frac: f64,
    pub rank: usize,
    pub corrupted_entries: usize,
    pub trials: usize,
    pub success_rate: f64,
    /// Mean relative error over trials whose solve returned; NaN if none did.
    pub mean_error: f64,
    pub mean_runtime_s: f64,
    /// Trials whose solve returned an error.
    pub failures: usize,
}

/// A success rate that rises by more than one trial's worth along an axis.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MonotonicityViolation {
    pub method: Method,
    /// `"rank"` or `"corruption"`.
    pub axis: String,
    pub rank_frac: f64,
    pub corruption_frac: f64,
    pub increase: f64,
}

/// A cell where pursuit trails robust PCA by more than 0.1.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DominanceViolation {
    pub rank_frac: f64,
    pub corruption_frac: f64,
    pub pursuit_rate: f64,
    pub rpca_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhaseGridResult {
    pub config: PhaseGridConfig,
    /// Ordered by method, then rank fraction, then corruption fraction.
    pub cells: Vec<CellResult>,
    /// Sum of success rates over cells, per method.
    pub success_area_cells: BTreeMap<Method, f64>,
    pub monotonicity_violations: Vec<MonotonicityViolation>,
    pub dominance_violations: Vec<DominanceViolation>,
}

impl PhaseGridResult {
    pub fn cell(&self, method: Method, ri: usize, ci: usize) -> Option<&CellResult> {
        let per = self.config.rank_fracs.len() * self.config.corruption_fracs.len();
        let mi = self.config.methods.iter().position(|&m| m == method)?;
        self.cells.get(mi * per + ri * self.config.corruption_fracs.len() + ci)
    }

    /// Cells where pursuit succeeds at rate `≥ hi` while robust PCA is at most `lo`.
    pub fn pursuit_only_cells(&self, hi: f64, lo: f64) -> usize {
        let (nr, nc) = (self.config.rank_fracs.len(), self.config.corruption_fracs.len());
        let mut count = 0;
        for ri in 0..nr {
            for ci in 0..nc {
                if let (Some(p), Some(r)) = (self.cell(Method::Pursuit, ri, ci), self.cell(Method::Rpca, ri, ci)) {
                    if p.success_rate >= hi && r.success_rate <= lo {
                        count += 1;
                    }
                }
            }
        }
        count
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    error: Option<f64>,
    seconds: f64,
}

/// Relative error and wall time for each configured method on one trial.
fn run_trial(cfg: &PhaseGridConfig, ri: usize, ci: usize, t: usize, opts: &SolverOptions) -> Vec<Outcome> {
    let seed = mix_seed(cfg.base_seed, &[ri as u64, ci as u64, t as u64]);
    let failed = vec![Outcome { error: None, seconds: 0.0 }; cfg.methods.len()];
    let instance = (|| {
        let (l0, _) = gen_union_subspaces(&UnionSubspaceSpec {
            m: cfg.m,
            n: cfg.n,
            k: cfg.k,
            r0: cfg.rank_for(cfg.rank_fracs[ri]),
            normalize_sup: true,
            seed: mix_seed(seed, &[0]),
        })?;
        let (s0, omega) = gen_corruption(
            cfg.m,
            cfg.n,
            &CorruptionSpec {
                model: SupportModel::FixedCount { count: cfg.corruptions_for(cfg.corruption_fracs[ci]) },
                compose: Composition::Replace,
                seed: mix_seed(seed, &[1]),
            },
        )?;
        let x = compose_observation(&l0, &s0, &omega, Composition::Replace)?;
        Ok::<_, crate::Error>((l0, x))
    })();
    let Ok((l0, x)) = instance else { return failed };
    let lambda = cfg.lambda_rule.lambda(cfg.m, cfg.n);

    let err = |l_hat: &crate::Matrix| recovery_error(l_hat, &l0).ok();
    if cfg.methods.contains(&Method::Pursuit) {
        let popts = PursuitOptions { lambda: Some(lambda), solver: *opts, ..PursuitOptions::default() };
        match pursuit::recover(&x, &popts) {
            Ok(res) => cfg
                .methods
                .iter()
                .map(|m| match m {
                    Method::Rpca => Outcome { error: err(res.l_rpca()), seconds: res.rpca_seconds },
                    Method::Pursuit => Outcome { error: err(&res.l_final), seconds: res.total_seconds },
                })
                .collect(),
            Err(_) => {
                // pursuit failed; robust PCA may still stand on its own
                cfg.methods
                    .iter()
                    .map(|m| match m {
                        Method::Rpca => rpca_outcome(&x, lambda, opts, &err),
                        Method::Pursuit => Outcome { error: None, seconds: 0.0 },
                    })
                    .collect()
            }
        }
    } else {
        vec![rpca_outcome(&x, lambda, opts, &err)]
    }
}

fn rpca_outcome(
    x: &crate::Matrix,
    lambda: f64,
    opts: &SolverOptions,
    err: &dyn Fn(&crate::Matrix) -> Option<f64>,
) -> Outcome {
    let start = Instant::now();
    let error = solve_rpca(x, lambda, opts).ok().and_then(|r| err(&r.l_hat));
    Outcome { error, seconds: start.elapsed().as_secs_f64() }
}

/// Run every (cell, trial) pair in parallel and aggregate per cell.
///
/// Solver failures count as unsuccessful trials. Results depend only on the
/// configuration, not on scheduling.
pub fn run_phase_grid(cfg: &PhaseGridConfig) -> Result<PhaseGridResult> {
    run_phase_grid_with(cfg, &SolverOptions::default())
}

pub fn run_phase_grid_with(cfg: &PhaseGridConfig, opts: &SolverOptions) -> Result<PhaseGridResult> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.methods.sort();
    cfg.methods.dedup();
    let (nr, nc, nt) = (cfg.rank_fracs.len(), cfg.corruption_fracs.len(), cfg.trials);
    let jobs: Vec<(usize, usize, usize)> = (0..nr)
        .flat_map(|ri| (0..nc).flat_map(move |ci| (0..nt).map(move |t| (ri, ci, t))))
        .collect();
    let outcomes = par_map(&jobs, |&(ri, ci, t)| run_trial(&cfg, ri, ci, t, opts))?;

    let mut cells = Vec::with_capacity(cfg.methods.len() * nr * nc);
    for (mi, &method) in cfg.methods.iter().enumerate() {
        for ri in 0..nr {
            for ci in 0..nc {
                let base = (ri * nc + ci) * nt;
                let trial: Vec<Outcome> = (0..nt).map(|t| outcomes[base + t][mi]).collect();
                let errors: Vec<f64> = trial.iter().filter_map(|o| o.error).collect();
                let wins = errors.iter().filter(|&&e| e < cfg.success_threshold).count();
                cells.push(CellResult {
                    method,
                    rank_frac: cfg.rank_fracs[ri],
                    corruption_frac: cfg.corruption_fracs[ci],
                    rank: cfg.rank_for(cfg.rank_fracs[ri]),
                    corrupted_entries: cfg.corruptions_for(cfg.corruption_fracs[ci]),
                    trials: nt,
                    success_rate: wins as f64 / nt as f64,
                    mean_error: stats::mean(&errors),
                    mean_runtime_s: stats::mean(&trial.iter().map(|o| o.seconds).collect::<Vec<_>>()),
                    failures: nt - errors.len(),
                });
            }
        }
    }

    let mut result = PhaseGridResult {
        success_area_cells: BTreeMap::new(),
        monotonicity_violations: Vec::new(),
        dominance_violations: Vec::new(),
        cells,
        config: cfg,
    };
    result.success_area_cells = result
        .config
        .methods
        .iter()
        .map(|&m| (m, result.cells.iter().filter(|c| c.method == m).map(|c| c.success_rate).sum()))
        .collect();
    result.monotonicity_violations = monotonicity_violations(&result);
    result.dominance_violations = dominance_violations(&result);
    Ok(result)
}

fn monotonicity_violations(res: &PhaseGridResult) -> Vec<MonotonicityViolation> {
    let cfg = &res.config;
    let slack = 1.0 / cfg.trials as f64 + 1e-12;
    let (nr, nc) = (cfg.rank_fracs.len(), cfg.corruption_fracs.len());
    let mut out = Vec::new();
    for &method in &cfg.methods {
        let rate = |ri, ci| res.cell(method, ri, ci).map(|c| c.success_rate).unwrap_or(0.0);
        for ri in 0..nr {
            for ci in 0..nc {
                let here = rate(ri, ci);
                for (axis, prev) in [("rank", ri.checked_sub(1).map(|p| (p, ci))), ("corruption", ci.checked_sub(1).map(|p| (ri, p)))] {
                    if let Some((pr, pc)) = prev {
                        let increase = here - rate(pr, pc);
                        if increase > slack {
                            out.push(MonotonicityViolation {
                                method,
                                axis: axis.to_string(),
                                rank_frac: cfg.rank_fracs[ri],
                                corruption_frac: cfg.corruption_fracs[ci],
                                increase,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn dominance_violations(res: &PhaseGridResult) -> Vec<DominanceViolation> {
    let cfg = &res.config;
    let mut out = Vec::new();
    for ri in 0..cfg.rank_fracs.len() {
        for ci in 0..cfg.corruption_fracs.len() {
            if let (Some(p), Some(r)) = (res.cell(Method::Pursuit, ri, ci), res.cell(Method::Rpca, ri, ci)) {
                if p.success_rate < r.success_rate - 0.1 - 1e-12 {
                    out.push(DominanceViolation {
                        rank_frac: p.rank_frac,
                        corruption_frac: p.corruption_frac,
                        pursuit_rate: p.success_rate,
                        rpca_rate: r.success_rate,
                    });
                }
            }
        }
    }
    out
}

/// One CSV row per cell, without wall-clock fields so reruns are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct CellCsvRow {
    pub method: Method,
    pub rank_frac: f64,
    pub corruption_frac: f64,
    pub rank: usize,
    pub corrupted_entries: usize,
    pub trials: usize,
    pub success_rate: f64,
    pub mean_error: f64,
    pub failures: usize,
}

impl PhaseGridResult {
    pub fn csv_rows(&self) -> Vec<CellCsvRow> {
        self.cells
            .iter()
            .map(|c| CellCsvRow {
                method: c.method,
                rank_frac: c.rank_frac,
                corruption_frac: c.corruption_frac,
                rank: c.rank,
                corrupted_entries: c.corrupted_entries,
                trials: c.trials,
                success_rate: c.success_rate,
                mean_error: c.mean_error,
                failures: c.failures,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::output;

    fn tiny() -> PhaseGridConfig {
        PhaseGridConfig {
            m: 30,
            n: 40,
            k: 2,
            rank_fracs: vec![0.05, 0.5],
            corruption_fracs: vec![0.02, 0.45],
            trials: 2,
            base_seed: 3,
            ..PhaseGridConfig::desk()
        }
    }

    #[test]
    fn easy_and_hard_corners() {
        let res = run_phase_grid(&tiny()).unwrap();
        assert_eq!(res.cells.len(), 8);
        for m in [Method::Rpca, Method::Pursuit] {
            assert_eq!(res.cell(m, 0, 0).unwrap().success_rate, 1.0, "{m} easy corner");
            assert_eq!(res.cell(m, 1, 1).unwrap().success_rate, 0.0, "{m} hard corner");
        }
        for c in &res.cells {
            assert!((0.0..=1.0).contains(&c.success_rate));
        }
        let area: f64 = res.cells.iter().filter(|c| c.method == Method::Rpca).map(|c| c.success_rate).sum();
        assert_eq!(res.success_area_cells[&Method::Rpca], area);
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = PhaseGridConfig { methods: vec![Method::Rpca], ..tiny() };
        let mut a = Vec::new();
        let mut b = Vec::new();
        output::write_csv_stamped(&mut a, &run_phase_grid(&cfg).unwrap().csv_rows(), 1).unwrap();
        output::write_csv_stamped(&mut b, &run_phase_grid(&cfg).unwrap().csv_rows(), 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn violations_are_detected() {
        let mut res = run_phase_grid(&PhaseGridConfig { methods: vec![Method::Rpca], ..tiny() }).unwrap();
        assert!(res.monotonicity_violations.is_empty());
        res.cells[3].success_rate = 1.0;
        assert_eq!(monotonicity_violations(&res).len(), 2);
    }
}
