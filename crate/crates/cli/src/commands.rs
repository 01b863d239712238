use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Subcommand;
use serde::Serialize;
use serde_json::json;

use lodict::certify;
use lodict::coherence;
use lodict::experiments::{self, output, ClusterSweepConfig, CoherentDemoConfig, Mu3aConfig, PhaseGridConfig, ZipfConfig};
use lodict::linalg::text::{load_matrix, save_matrix};
use lodict::pursuit::{self, PursuitOptions};
use lodict::solver::{self, LrrProblem, SolverOptions, SolverResult};
use lodict::synth::{self, Composition, CorruptionSpec, FactorKind, StoredInstance, SupportModel};
use lodict::{Error, Matrix, Result};

use crate::{Format, OutputArgs, SolveArgs, TableOutput};

fn solver_options(args: &SolveArgs) -> SolverOptions {
    let base = if args.exact { SolverOptions::exact_alm() } else { SolverOptions::default() };
    SolverOptions { primal_tol: args.tol, max_outer: args.max_iters, ..base }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Write rows as CSV or `{"config": ..., "rows": [...]}` as JSON.
fn emit_table<C: Serialize, T: Serialize>(out: &TableOutput, config: &C, rows: &[T]) -> Result<()> {
    let w = sink(out.out.as_deref())?;
    match out.format {
        Format::Csv => output::write_csv(w, rows),
        Format::Json => output::write_json(w, &json!({ "config": config, "rows": rows })),
    }
}

fn warn_full_scale(full: bool) {
    if full {
        eprintln!("warning: full-size settings; this run can take hours");
    }
}

#[derive(Serialize)]
struct SolveSummary {
    rows: usize,
    cols: usize,
    lambda: f64,
    converged: bool,
    outer_iters: usize,
    primal_residual: f64,
    gap_residual: f64,
    objective: f64,
    rank: usize,
    nonzeros: usize,
}

fn summarize(x: &Matrix, lambda: f64, res: &SolverResult) -> Result<SolveSummary> {
    Ok(SolveSummary {
        rows: x.nrows(),
        cols: x.ncols(),
        lambda,
        converged: res.converged,
        outer_iters: res.outer_iters,
        primal_residual: res.primal_residual,
        gap_residual: res.gap_residual,
        objective: res.objective,
        rank: lodict::linalg::svd(&res.l_hat, 1e-9)?.rank(),
        nonzeros: res.s.iter().filter(|v| **v != 0.0).count(),
    })
}

fn print_summary<T: Serialize>(format: Format, summary: &T) -> Result<()> {
    let out = io::stdout().lock();
    match format {
        Format::Json => output::write_json(out, summary),
        Format::Csv => output::write_csv(out, std::slice::from_ref(summary)),
    }
}

fn save_all(dir: &Path, items: &[(&str, &Matrix)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, m) in items {
        save_matrix(&dir.join(name), m)?;
    }
    Ok(())
}

fn exit_for(converged: bool) -> ExitCode {
    if converged {
        ExitCode::SUCCESS
    } else {
        eprintln!("warning: solver stopped at the iteration limit without converging");
        ExitCode::from(1)
    }
}

pub fn recover(
    matrix: &Path,
    dict: Option<&Path>,
    noise_eps: f64,
    solve: &SolveArgs,
    out: &OutputArgs,
) -> Result<ExitCode> {
    let x = load_matrix(matrix)?;
    let lambda = solve.lambda.unwrap_or_else(|| solver::default_lambda(x.nrows(), x.ncols()));
    let opts = solver_options(solve);
    let res = match dict {
        Some(p) => {
            let a = load_matrix(p)?;
            solver::solve_lrr(&LrrProblem::new(x.clone(), lambda).with_dictionary(a).with_noise_eps(noise_eps), &opts)?
        }
        None => solver::solve_rpca_noisy(&x, lambda, noise_eps, &opts)?,
    };
    if let Some(dir) = &out.out {
        save_all(dir, &[("L.txt", &res.l_hat), ("S.txt", &res.s), ("Z.txt", &res.z)])?;
    }
    print_summary(out.format, &summarize(&x, lambda, &res)?)?;
    Ok(exit_for(res.converged))
}

#[derive(Serialize)]
struct PursuitSummary {
    rank_estimate: usize,
    dictionary_columns: usize,
    rpca_iters: usize,
    rpca_seconds: f64,
    total_seconds: f64,
    #[serde(flatten)]
    solve: SolveSummary,
}

pub fn pursuit(
    matrix: &Path,
    rank_tol: f64,
    rounds: usize,
    reduce: bool,
    solve: &SolveArgs,
    out: &OutputArgs,
) -> Result<ExitCode> {
    let x = load_matrix(matrix)?;
    let lambda = solve.lambda.unwrap_or_else(|| solver::default_lambda(x.nrows(), x.ncols()));
    let opts = PursuitOptions {
        lambda: Some(lambda),
        rank_rel_tol: rank_tol,
        rounds,
        reduce_dictionary: reduce,
        solver: solver_options(solve),
    };
    let res = pursuit::recover(&x, &opts)?;
    if let Some(dir) = &out.out {
        save_all(
            dir,
            &[
                ("L.txt", &res.l_final),
                ("L_rpca.txt", res.l_rpca()),
                ("S.txt", &res.result.s),
                ("A.txt", &res.dictionary),
                ("Z.txt", &res.result.z),
            ],
        )?;
    }
    // CSV cannot hold flattened structs, so both formats go through a JSON value
    let summary = PursuitSummary {
        rank_estimate: res.rank_estimate,
        dictionary_columns: res.dictionary.ncols(),
        rpca_iters: res.rpca.outer_iters,
        rpca_seconds: res.rpca_seconds,
        total_seconds: res.total_seconds,
        solve: summarize(&x, lambda, &res.result)?,
    };
    match out.format {
        Format::Json => output::write_json(io::stdout().lock(), &summary)?,
        Format::Csv => {
            let value = serde_json::to_value(&summary)?;
            let obj = value.as_object().expect("summary is an object");
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{}", obj.keys().cloned().collect::<Vec<_>>().join(","))?;
            writeln!(stdout, "{}", obj.values().map(|v| v.to_string()).collect::<Vec<_>>().join(","))?;
        }
    }
    Ok(exit_for(res.converged()))
}

pub fn coherence(matrix: &Path, dict: Option<&Path>, zero_tol: f64, format: Format) -> Result<ExitCode> {
    let l = load_matrix(matrix)?;
    let a = dict.map(load_matrix).transpose()?;
    let report = coherence::coherence_report(&l, a.as_ref(), zero_tol)?;
    print_summary(format, &report)?;
    Ok(ExitCode::SUCCESS)
}

pub fn phase_grid(config: Option<&Path>, print_config: bool, out: &TableOutput) -> Result<ExitCode> {
    let cfg = match config {
        Some(p) => PhaseGridConfig::parse(&fs::read_to_string(p)?)?,
        None if out.full => PhaseGridConfig::full(),
        None => PhaseGridConfig::desk(),
    };
    if print_config {
        print!("{}", cfg.to_text());
        return Ok(ExitCode::SUCCESS);
    }
    warn_full_scale(out.full);
    let res = experiments::run_phase_grid(&cfg)?;
    let w = sink(out.out.as_deref())?;
    match out.format {
        Format::Csv => output::write_csv(w, &res.csv_rows())?,
        Format::Json => output::write_json(w, &res)?,
    }
    for v in &res.monotonicity_violations {
        eprintln!(
            "note: {} success rate rises by {:.2} along {} at rank {} corruption {}",
            v.method, v.increase, v.axis, v.rank_frac, v.corruption_frac
        );
    }
    for (method, area) in &res.success_area_cells {
        eprintln!("{method}: success area {area:.2} cells");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn cluster_sweep(
    k_values: Option<Vec<usize>>,
    trials: Option<usize>,
    seed: Option<u64>,
    out: &TableOutput,
) -> Result<ExitCode> {
    let mut cfg = if out.full { ClusterSweepConfig::full() } else { ClusterSweepConfig::desk() };
    if let Some(k) = k_values {
        cfg.k_values = k;
    }
    cfg.trials = trials.unwrap_or(cfg.trials);
    cfg.seed = seed.unwrap_or(cfg.seed);
    warn_full_scale(out.full);
    let rows = experiments::run_cluster_sweep(&cfg)?;
    emit_table(out, &cfg, &rows)?;
    Ok(ExitCode::SUCCESS)
}

pub fn zipf(
    num_matrices: Option<usize>,
    dim_min: Option<usize>,
    dim_max: Option<usize>,
    seed: Option<u64>,
    samples: bool,
    out: &TableOutput,
) -> Result<ExitCode> {
    let mut cfg = if out.full { ZipfConfig::full() } else { ZipfConfig::desk() };
    cfg.num_matrices = num_matrices.unwrap_or(cfg.num_matrices);
    cfg.dim_min = dim_min.unwrap_or(cfg.dim_min);
    cfg.dim_max = dim_max.unwrap_or(cfg.dim_max);
    cfg.seed = seed.unwrap_or(cfg.seed);
    warn_full_scale(out.full);
    let study = experiments::run_zipf(&cfg)?;
    if samples {
        emit_table(out, &cfg, &study.samples)?;
    } else {
        emit_table(out, &cfg, std::slice::from_ref(&study.fit))?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn mu3a(
    axis: &str,
    values: Option<Vec<usize>>,
    trials: Option<usize>,
    seed: Option<u64>,
    out: &TableOutput,
) -> Result<ExitCode> {
    let axis = axis.parse()?;
    let mut cfg = if out.full { Mu3aConfig::full(axis) } else { Mu3aConfig::desk(axis) };
    if let Some(v) = values {
        cfg.values = v;
    }
    cfg.trials = trials.unwrap_or(cfg.trials);
    cfg.seed = seed.unwrap_or(cfg.seed);
    warn_full_scale(out.full);
    let rows = experiments::run_mu3a_study(&cfg)?;
    emit_table(out, &cfg, &rows)?;
    Ok(ExitCode::SUCCESS)
}

pub fn coherent_demo(
    p_values: Option<Vec<usize>>,
    seeds: Option<Vec<u64>>,
    lambda: f64,
    summary: bool,
    out: &TableOutput,
) -> Result<ExitCode> {
    let mut cfg = CoherentDemoConfig { lrr_lambda: lambda, ..CoherentDemoConfig::default() };
    if let Some(p) = p_values {
        cfg.p_values = p;
    }
    if let Some(s) = seeds {
        cfg.seeds = s;
    }
    let rows = experiments::run_coherent_demo(&cfg)?;
    if summary {
        emit_table(out, &cfg, &experiments::summarize_coherent_demo(&rows, cfg.exact_tol))?;
    } else {
        emit_table(out, &cfg, &rows)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn certify(instance: &Path, lambda: Option<f64>, theory_lambda: bool, terms: Option<usize>) -> Result<ExitCode> {
    let inst = synth::read_instance(instance)?;
    let missing = |name: &str| Error::InvalidArgument(format!("{} has no {name}", instance.display()));
    let l0 = inst.l0.ok_or_else(|| missing("L0.txt"))?;
    let s0 = inst.s0.ok_or_else(|| missing("S0.txt"))?;
    let a = inst.dictionary.unwrap_or_else(|| Matrix::identity(l0.nrows(), l0.nrows()));
    let lambda = match (lambda, theory_lambda) {
        (Some(v), _) => v,
        (None, true) => certify::theory_lambda(&l0, &a)?,
        (None, false) => solver::default_lambda(l0.nrows(), l0.ncols()),
    };
    let cert = certify::build_dual_certificate(&a, &l0, &s0, lambda, terms)?;
    let report = certify::check_dual_conditions(&a, &l0, &s0, &cert.f, lambda)?;
    output::write_json(
        io::stdout().lock(),
        &json!({
            "lambda": lambda,
            "psi": cert.psi,
            "terms": cert.terms,
            "truncation_bound": cert.truncation_bound,
            "collapsed": cert.collapsed,
            "report": report,
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Subcommand, Debug, Clone)]
pub enum GenerateKind {
    /// Union of independent subspaces plus ±1 corruption
    Union {
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Number of clusters
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        r0: usize,
        /// Bernoulli corruption rate
        #[arg(long, default_value_t = 0.05)]
        rho: f64,
        #[arg(long, default_value = "replace")]
        compose: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One all-ones column, ±1 corruption, and the dictionary [1, W]
    Coherent {
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Low-rank data with an orthonormal dictionary spanning its columns
    Dictionary {
        #[arg(long, default_value_t = 40)]
        m: usize,
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        r0: usize,
        #[arg(long, default_value_t = 4)]
        dict_rank: usize,
        #[arg(long, default_value_t = 0.05)]
        rho: f64,
        /// Sign or gaussian factors
        #[arg(long, default_value = "sign")]
        factors: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn generate(kind: GenerateKind) -> Result<ExitCode> {
    let (dir, inst) = match kind {
        GenerateKind::Union { m, n, k, r0, rho, compose, seed, out } => {
            let compose: Composition = compose.parse()?;
            let spec = synth::UnionSubspaceSpec { m, n, k, r0, normalize_sup: true, seed };
            let (l0, labels) = synth::gen_union_subspaces(&spec)?;
            let (s0, omega) = synth::gen_corruption(
                m,
                n,
                &CorruptionSpec {
                    model: SupportModel::Bernoulli { rho },
                    compose,
                    seed: synth::mix_seed(seed, &[1]),
                },
            )?;
            let x = synth::compose_observation(&l0, &s0, &omega, compose)?;
            let meta = json!({
                "kind": "union",
                "spec": spec,
                "rho": rho,
                "compose": compose,
                "coefficients": "standard_normal",
                "labels": labels,
            });
            (out, StoredInstance { x, l0: Some(l0), s0: Some(s0), omega: Some(omega), dictionary: None, meta })
        }
        GenerateKind::Coherent { p, seed, out } => {
            let c = synth::gen_coherent_instance(p, seed)?;
            let meta = json!({ "kind": "coherent", "p": p, "seed": seed, "rho": synth::COHERENT_CORRUPTION });
            (
                out,
                StoredInstance {
                    x: c.x,
                    l0: Some(c.l0),
                    s0: Some(c.s0),
                    omega: Some(c.omega),
                    dictionary: Some(c.dictionary),
                    meta,
                },
            )
        }
        GenerateKind::Dictionary { m, n, r0, dict_rank, rho, factors, seed, out } => {
            let factors = match factors.as_str() {
                "sign" => FactorKind::Sign,
                "gaussian" => FactorKind::Gaussian,
                other => return Err(Error::Parse(format!("unknown factor kind '{other}'"))),
            };
            let spec = synth::DictionaryInstanceSpec { m, n, r0, dict_rank, rho, factors, seed };
            let d = synth::gen_dictionary_instance(&spec)?;
            let meta = json!({ "kind": "dictionary", "spec": spec });
            (
                out,
                StoredInstance {
                    x: d.x,
                    l0: Some(d.l0),
                    s0: Some(d.s0),
                    omega: Some(d.omega),
                    dictionary: Some(d.dictionary),
                    meta,
                },
            )
        }
    };
    synth::write_instance(&dir, &inst)?;
    eprintln!("wrote {}", dir.display());
    Ok(ExitCode::SUCCESS)
}
