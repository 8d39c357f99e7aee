use crate::instance::JobId;
use thiserror::Error;

/// Rejections raised while assembling an [`crate::Instance`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("machine count must be at least 1")]
    NoMachines,
    #[error("job {id} has non-positive processing time {p}")]
    NonPositiveProcessing { id: u32, p: i64 },
    #[error("job {id} has negative release date {r}")]
    NegativeRelease { id: u32, r: i64 },
    #[error("duplicate job id {id}")]
    DuplicateJob { id: u32 },
    #[error("edge ({from}, {to}) references unknown job {id}")]
    UnknownEdgeEndpoint { id: u32, from: u32, to: u32 },
    #[error("job {id} has a self-loop")]
    SelfLoop { id: u32 },
}

/// The instance admits no feasible schedule: some jobs cannot be reached
/// from the dummy source.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("no feasible schedule: jobs unreachable from the source: {}", fmt_ids(.unreachable))]
pub struct Infeasible {
    pub unreachable: Vec<JobId>,
}

fn fmt_ids(ids: &[JobId]) -> String {
    ids.iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Failures of the exact solvers.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Infeasible(#[from] Infeasible),
    #[error("solver requires unit processing times, but job {id} has p = {p}")]
    NotUnitProcessing { id: JobId, p: u64 },
    #[error("internal contract violated: {0}")]
    ContractViolation(String),
}

/// Failures of the verification oracles.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Infeasible(#[from] Infeasible),
    #[error("instance exceeds oracle limit: {what} is {actual}, limit {limit}")]
    LimitExceeded {
        what: &'static str,
        actual: u64,
        limit: u64,
    },
    #[error("grid refinement check failed: value {coarse} at K={k} but {fine} at K={k2}; result inconclusive")]
    Inconclusive {
        k: u32,
        k2: u32,
        coarse: crate::RatTime,
        fine: crate::RatTime,
    },
}
