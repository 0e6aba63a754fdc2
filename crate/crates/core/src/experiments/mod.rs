//! Study drivers behind `colehopf-lab`.
//!
//! Every driver is a pure function of its [`RunConfig`]: replica `k` draws
//! its noise from [`replica_seed`]`(seed, k)`, replicas run on a rayon pool,
//! and their outputs are collected in index order before being reduced, so
//! the result does not depend on the number of worker threads.

mod config;
mod correction;
mod covariance;
mod refinement;
mod result;
mod section;
mod simulate;

pub use config::{CovarianceConfig, GridConfig, Overrides, RunConfig, SectionConfig, Study, Tolerances};
pub use correction::run_correction_study;
pub use covariance::run_covariance_study;
pub use refinement::{run_residual_study, run_stability_study};
pub use result::{decreasing, fit_order, fit_slope, fit_slope_origin, Check, Record, Slope, StudyResult, SummaryEntry, Trend};
pub use section::run_section_study;
pub use simulate::run_simulation;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{replica_seed, NoisePath};
use crate::grid::GridSpec;

/// Validates `cfg`, runs its study on a pool of `cfg.jobs` threads, and saves
/// the result when `cfg.out` is set.
pub fn run_study(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let result = pool.install(|| match cfg.study()? {
        Study::Covariance => run_covariance_study(cfg),
        Study::Correction => run_correction_study(cfg),
        Study::Stability => run_stability_study(cfg),
        Study::Residual => run_residual_study(cfg),
        Study::Section => run_section_study(cfg),
        Study::Simulate => run_simulation(cfg),
    })?;
    if let Some(out) = &cfg.out {
        result.save(out)?;
    }
    Ok(result)
}

/// Runs `job` for replicas `range` in parallel and returns the outputs in
/// replica order.
pub(crate) fn replicas<T: Send>(range: std::ops::Range<u64>, job: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    range.into_par_iter().map(job).collect()
}

/// The noise path of replica `k`.
pub(crate) fn replica_path(grid: GridSpec, master: u64, k: u64) -> Result<NoisePath> {
    NoisePath::sample(grid, replica_seed(master, k))
}

/// Evenly spaced subsample of at most `max` points, always keeping the last.
pub(crate) fn thin<T: Copy>(points: &[T], max: usize) -> Vec<T> {
    if points.len() <= max {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(max);
    let mut out: Vec<T> = points.iter().step_by(stride).copied().collect();
    if (points.len() - 1) % stride != 0 {
        out.push(points[points.len() - 1]);
    }
    out
}
