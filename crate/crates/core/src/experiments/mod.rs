//! Synthetic studies at configurable scale: the recovery phase grid, the
//! cluster-count sweep, Zipf constants, dictionary coherence, and the
//! coherent-instance demo. Each study returns plain rows for CSV/JSON output.

mod config;
mod grid;
pub mod output;
pub mod stats;
mod studies;

pub use config::{LambdaRule, Method, PhaseGridConfig};
pub use grid::{
    run_phase_grid, run_phase_grid_with, CellCsvRow, CellResult, DominanceViolation, MonotonicityViolation, PhaseGridResult,
};
pub use studies::{
    run_cluster_sweep, run_coherent_demo, run_mu3a_study, run_zipf, summarize_coherent_demo,
    ClusterSweepConfig, ClusterSweepRow, CoherentDemoConfig, CoherentDemoRow, CoherentDemoSummary,
    Mu3aAxis, Mu3aConfig, Mu3aRow, ZipfConfig, ZipfStudy,
};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "LODICT_THREADS";

/// Worker pool sized by `LODICT_THREADS`, or rayon's default when unset.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV}={v} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Map `f` over `jobs` in parallel, returning results in job order.
pub(crate) fn par_map<J, T, F>(jobs: &[J], f: F) -> Result<Vec<T>>
where
    J: Sync,
    T: Send,
    F: Fn(&J) -> T + Sync + Send,
{
    let pool = thread_pool()?;
    Ok(pool.install(|| jobs.par_iter().map(&f).collect()))
}
