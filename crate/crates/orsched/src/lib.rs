//! Makespan minimization of jobs with OR-precedence constraints and release
//! dates on identical parallel machines.
//!
//! A job with predecessors becomes available once *at least one* of them has
//! completed (in contrast to the usual all-predecessors rule), and no job
//! may start before its release date. The crate provides:
//!
//! - a non-preemptive list scheduler whose makespan is within `2 - 1/m` of
//!   optimal, together with a per-run certificate of that bound
//!   ([`list_schedule`], [`ratio_certificate`]);
//! - an exact polynomial-time preemptive solver that prunes the precedence
//!   graph to an outforest of minimal chains and schedules it by levels
//!   ([`solve_pmtn`]), plus an exact non-preemptive solver for unit
//!   processing times ([`solve_unit_nonpreemptive`]);
//! - exhaustive oracles for verification at small sizes ([`brute_nonpmtn`],
//!   [`brute_pmtn_grid`]) and structural counters;
//! - analytic machinery shared by all of them: earliest start schedules,
//!   minimal chains with dominators, closed chain collections, and the
//!   volume/chain lower bounds;
//! - JSON serialization with exact rational times.
//!
//! All types are immutable after construction and every operation is a pure
//! function of its inputs, so concurrent use needs no synchronization.

pub mod chains;
pub mod error;
pub mod instance;
pub mod io;
pub mod listsched;
pub mod oracle;
pub mod pmtn;
pub mod rational;
pub mod schedule;

#[doc(hidden)]
pub mod testutil;

pub use chains::{
    closed_collection, earliest_start_schedule, lower_bounds, minimal_chain, ClosedCollection,
    EssResult, LowerBounds, MinimalChain,
};
pub use error::{BuildError, Infeasible, OracleError, SolveError};
pub use instance::{build_instance, check_reachable, Instance, Job, JobId, RawJob, ReachabilityReport};
pub use io::{parse_instance, parse_schedule, serialize_instance, serialize_schedule, IoError, NamedInstance};
pub use listsched::{list_schedule, lpt_order, ratio_certificate, PriorityOrder, RatioCertificate};
pub use oracle::{
    brute_nonpmtn, brute_pmtn_grid, count_inversions, expand_to_unit_jobs, GridLimits, GridResult,
    InversionCount, NonPmtnLimits, NonPmtnResult, UnitExpansion,
};
pub use pmtn::{
    modified_starts, pmtn_optimum_value, solve_pmtn, solve_unit_nonpreemptive,
    transform_to_outforest, ModifiedStarts, OutforestInstance, PmtnSolution,
};
pub use rational::RatTime;
pub use schedule::{makespan, validate_schedule, Piece, Schedule, ValidationReport, Violation};
