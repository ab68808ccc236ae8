use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{ecdf, empirical_moments, ks_distance, StatsError};
use crate::construction::simulate_standardized_mean;
use crate::limitlaw::LimitLaw;
use crate::margins::SplitMargin;
use crate::rng::replication_rng;
use crate::scalar::Real;

/// Execution knobs that never change results.
#[derive(Clone, Copy, Debug, Default)]
pub struct StudyOptions {
    /// Cap on worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl StudyOptions {
    pub(crate) fn run<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R, StatsError> {
        match self.workers {
            None => Ok(job()),
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map(|pool| pool.install(job))
                .map_err(|e| StatsError::InvalidParameter(format!("cannot start worker pool: {e}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct ConvergenceRow<T> {
    pub m: usize,
    pub reps: usize,
    pub ks: T,
    pub skew: Option<T>,
    pub kurt: Option<T>,
}

/// KS distance and shape statistics of `S_n` against the limit law, per `m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct ConvergenceReport<T> {
    pub ell: u32,
    pub r: T,
    pub master_seed: u64,
    pub rows: Vec<ConvergenceRow<T>>,
}

impl<T: Real> ConvergenceReport<T> {
    /// CSV with header `m,reps,ks,skew,kurt`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,reps,ks,skew,kurt\n");
        let opt = |v: Option<T>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.16e}"));
        for row in &self.rows {
            let _ = writeln!(out, "{},{},{:.16e},{},{}", row.m, row.reps, row.ks, opt(row.skew), opt(row.kurt));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `reps` independent standardized means at size `m`. Replication `i` uses
/// the stream `(master_seed, m, i)`, so the output is independent of the
/// number of workers.
pub fn simulate_replications<T: Real>(
    split: &SplitMargin<T>,
    m: usize,
    reps: usize,
    master_seed: u64,
    options: StudyOptions,
) -> Result<Vec<T>, StatsError> {
    options.run(|| {
        (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(master_seed, m as u64, rep as u64);
                simulate_standardized_mean(split, m, &mut rng)
            })
            .collect::<Result<Vec<T>, _>>()
    })?
    .map_err(StatsError::from)
}

pub fn convergence_study<T: Real>(
    split: &SplitMargin<T>,
    m_grid: &[usize],
    reps: usize,
    master_seed: u64,
    options: StudyOptions,
) -> Result<ConvergenceReport<T>, StatsError> {
    if reps < 100 {
        return Err(StatsError::InvalidParameter(format!("reps must be >= 100, got {reps}")));
    }
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[0] >= w[1]) || m_grid[0] < 2 {
        return Err(StatsError::InvalidParameter(
            "m grid must be non-empty, strictly increasing and start at m >= 2".into(),
        ));
    }
    let law = LimitLaw::new(split.ell(), split.r())?;
    let mut rows = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        let values = simulate_replications(split, m, reps, master_seed, options)?;
        let ks = ks_distance(&ecdf(&values)?, |s| law.cdf(s));
        let mom = empirical_moments(&values)?;
        rows.push(ConvergenceRow {
            m,
            reps,
            ks,
            skew: mom.skewness,
            kurt: mom.kurtosis,
        });
    }
    Ok(ConvergenceReport {
        ell: split.ell(),
        r: split.r(),
        master_seed,
        rows,
    })
}
