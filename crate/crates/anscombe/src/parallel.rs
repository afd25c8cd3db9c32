//! Chunked Monte Carlo on a rayon pool.
//!
//! Chunks are collected in index order before merging, so the estimate does not depend
//! on the number of threads.

use anscombe_core::oracle::{finish, n_chunks, run_chunk, PathEstimator, RunningStats};
use anscombe_core::PolicyValueEstimate;
use rayon::prelude::*;

use crate::error::{AppError, AppResult};

pub const THREADS_ENV: &str = "ANSCOMBE_THREADS";

/// Worker cap from `ANSCOMBE_THREADS`; `None` means rayon's default.
pub fn thread_cap() -> AppResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(AppError::validation(format!("{THREADS_ENV}={v:?} must be a positive integer"))),
        },
    }
}

pub fn run_parallel<E: PathEstimator + Sync>(est: &E) -> AppResult<PolicyValueEstimate> {
    run_with_threads(est, thread_cap()?)
}

pub fn run_with_threads<E: PathEstimator + Sync>(est: &E, threads: Option<usize>) -> AppResult<PolicyValueEstimate> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| AppError::validation(format!("thread pool: {e}")))?;
    let chunks: Vec<RunningStats> =
        pool.install(|| (0..n_chunks(est.config().n_paths)).into_par_iter().map(|c| run_chunk(est, c)).collect());
    Ok(finish(est, &chunks)?)
}
