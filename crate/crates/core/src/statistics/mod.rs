//! Empirical distributions, exact enumeration of the indicator law, and the
//! Monte-Carlo studies connecting the construction to the limit law.

mod convergence;
mod correlation;
mod empirical;
mod exact;

use thiserror::Error;

use crate::construction::ConstructionError;
use crate::limitlaw::LimitLawError;

pub use convergence::{convergence_study, simulate_replications, ConvergenceReport, ConvergenceRow, StudyOptions};
pub use correlation::{pairwise_correlation_check, sample_correlation, CorrelationReport, PairCorrelation};
pub use empirical::{ecdf, empirical_moments, ks_distance, EmpiricalDistribution, EmpiricalMoments};
pub use exact::{enumerate_exact, ExactCheck, ExactPairLaw, PairTable, TripleTable, ENUMERATION_LIMIT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains NaN")]
    NotANumber,
    #[error("{ell}^{m} label sequences exceed the enumeration limit of {limit}")]
    TooLarge { ell: u32, m: usize, limit: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    LimitLaw(#[from] LimitLawError),
}
