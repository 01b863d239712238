//! `lodict` command-line front end.
//!
//! Exit status: 0 on success, 1 when a single solve stops without
//! converging, 2 on invalid input.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "lodict", version, about = "Low-rank recovery from sparse gross corruption")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// Sparsity weight; defaults to 1/sqrt(max(m, n))
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Relative primal residual at which to stop
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Repeat each inner sweep to convergence with fast penalty growth
    #[arg(long)]
    pub exact: bool,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file (tables) or directory (matrices); stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct TableOutput {
    /// Write the table here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Use the full-size settings (slow)
    #[arg(long)]
    pub full: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve robust PCA or LRR on a matrix file
    Recover {
        matrix: PathBuf,
        /// Dictionary matrix file
        #[arg(long, conflicts_with = "identity")]
        dict: Option<PathBuf>,
        /// Use the identity dictionary (robust PCA); the default
        #[arg(long)]
        identity: bool,
        /// Frobenius bound on the residual for noisy data
        #[arg(long, default_value_t = 0.0)]
        noise_eps: f64,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Robust PCA, learn a dictionary from its estimate, then LRR
    Pursuit {
        matrix: PathBuf,
        /// Relative singular value cut for the rank estimate
        #[arg(long, default_value_t = 1e-3)]
        rank_tol: f64,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Solve over the full learned dictionary instead of its rank-sized factor
        #[arg(long)]
        no_reduce: bool,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Coherence parameters of a matrix
    Coherence {
        matrix: PathBuf,
        /// Dictionary for the dictionary-relative coherence
        #[arg(long)]
        dict: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        zero_tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Success-rate grid over rank and corruption fractions
    PhaseGrid {
        /// key = value configuration file
        #[arg(long, conflicts_with = "full")]
        config: Option<PathBuf>,
        /// Print the effective configuration and exit
        #[arg(long)]
        print_config: bool,
        #[command(flatten)]
        output: TableOutput,
    },
    /// Coherence and robust PCA error against the number of clusters
    ClusterSweep {
        #[arg(long, value_delimiter = ',')]
        k_values: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: TableOutput,
    },
    /// Zipf constants of uniformly sampled low-rank matrices
    Zipf {
        #[arg(long)]
        num_matrices: Option<usize>,
        #[arg(long)]
        dim_min: Option<usize>,
        #[arg(long)]
        dim_max: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit every sample instead of the fitted summary
        #[arg(long)]
        samples: bool,
        #[command(flatten)]
        output: TableOutput,
    },
    /// Dictionary-relative coherence along one dimension
    Mu3a {
        #[arg(long, default_value = "vary_n")]
        axis: String,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: TableOutput,
    },
    /// Robust PCA against LRR on the single-column coherent instance
    #[command(alias = "fig3-demo")]
    CoherentDemo {
        #[arg(long, value_delimiter = ',')]
        p_values: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, default_value_t = 0.08)]
        lambda: f64,
        /// Emit per-p summaries instead of per-seed rows
        #[arg(long)]
        summary: bool,
        #[command(flatten)]
        output: TableOutput,
    },
    /// Build and check the optimality certificate for a stored instance
    Certify {
        instance: PathBuf,
        #[arg(long, conflicts_with = "theory_lambda")]
        lambda: Option<f64>,
        /// Use sqrt(mu3_A * gamma_A / (mu1(A) * n1)) as the weight
        #[arg(long)]
        theory_lambda: bool,
        /// Neumann series length; chosen from the measured norm when omitted
        #[arg(long)]
        terms: Option<usize>,
    },
    /// Write a synthetic instance directory
    Generate {
        #[command(subcommand)]
        kind: commands::GenerateKind,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Recover { matrix, dict, identity: _, noise_eps, solve, output } => {
            commands::recover(&matrix, dict.as_deref(), noise_eps, &solve, &output)
        }
        Command::Pursuit { matrix, rank_tol, rounds, no_reduce, solve, output } => {
            commands::pursuit(&matrix, rank_tol, rounds, !no_reduce, &solve, &output)
        }
        Command::Coherence { matrix, dict, zero_tol, format } => {
            commands::coherence(&matrix, dict.as_deref(), zero_tol, format)
        }
        Command::PhaseGrid { config, print_config, output } => {
            commands::phase_grid(config.as_deref(), print_config, &output)
        }
        Command::ClusterSweep { k_values, trials, seed, output } => {
            commands::cluster_sweep(k_values, trials, seed, &output)
        }
        Command::Zipf { num_matrices, dim_min, dim_max, seed, samples, output } => {
            commands::zipf(num_matrices, dim_min, dim_max, seed, samples, &output)
        }
        Command::Mu3a { axis, values, trials, seed, output } => commands::mu3a(&axis, values, trials, seed, &output),
        Command::CoherentDemo { p_values, seeds, lambda, summary, output } => {
            commands::coherent_demo(p_values, seeds, lambda, summary, &output)
        }
        Command::Certify { instance, lambda, theory_lambda, terms } => {
            commands::certify(&instance, lambda, theory_lambda, terms)
        }
        Command::Generate { kind } => commands::generate(kind),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
