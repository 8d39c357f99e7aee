//! Schedules as sets of pieces, and the validator that every solver output
//! must pass.

use crate::instance::{Instance, JobId};
use crate::rational::RatTime;
use std::collections::HashMap;
use std::fmt;

/// One contiguous run of a job on a machine over `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Piece {
    pub job: JobId,
    pub machine: usize,
    pub start: RatTime,
    pub end: RatTime,
}

/// A (possibly preemptive) schedule. Derived per job: the start time `S_j`
/// is the earliest piece start, the completion time `C_j` the latest piece
/// end. Feasibility is defined by [`validate_schedule`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Schedule {
    pub pieces: Vec<Piece>,
}

impl Schedule {
    pub fn new(pieces: Vec<Piece>) -> Schedule {
        Schedule { pieces }
    }

    /// Maximum piece end; 0 for the empty schedule.
    pub fn makespan(&self) -> RatTime {
        self.pieces
            .iter()
            .map(|p| p.end)
            .max()
            .unwrap_or_else(RatTime::zero)
    }

    pub fn start_time(&self, job: JobId) -> Option<RatTime> {
        self.pieces
            .iter()
            .filter(|p| p.job == job)
            .map(|p| p.start)
            .min()
    }

    pub fn completion_time(&self, job: JobId) -> Option<RatTime> {
        self.pieces
            .iter()
            .filter(|p| p.job == job)
            .map(|p| p.end)
            .max()
    }

    /// Completion time of every job appearing in the schedule.
    pub fn completion_times(&self) -> HashMap<JobId, RatTime> {
        let mut out: HashMap<JobId, RatTime> = HashMap::new();
        for p in &self.pieces {
            out.entry(p.job)
                .and_modify(|c| *c = (*c).max(p.end))
                .or_insert(p.end);
        }
        out
    }

    /// True if some job is split over more than one piece.
    pub fn is_preemptive(&self) -> bool {
        let mut count: HashMap<JobId, usize> = HashMap::new();
        for p in &self.pieces {
            *count.entry(p.job).or_insert(0) += 1;
        }
        count.values().any(|&c| c > 1)
    }
}

/// Convenience mirror of [`Schedule::makespan`].
pub fn makespan(sched: &Schedule) -> RatTime {
    sched.makespan()
}

/// A single feasibility defect. Violations are data, not errors: the
/// validator reports all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownJob { job: JobId },
    MachineOutOfRange { job: JobId, machine: usize, machines: usize },
    EmptyPiece { job: JobId, start: RatTime, end: RatTime },
    /// Total piece length differs from the processing time (jobs missing
    /// from the schedule show up here with `scheduled = 0`).
    WrongTotalProcessing { job: JobId, required: u64, scheduled: RatTime },
    /// Two pieces on one machine overlap with positive measure (touching
    /// endpoints are legal).
    MachineOverlap { machine: usize, first: JobId, second: JobId, at: RatTime },
    /// Two pieces of one job overlap in time: a job runs on at most one
    /// machine at any instant.
    JobOverlap { job: JobId, at: RatTime },
    ReleaseViolated { job: JobId, start: RatTime, release: u64 },
    /// Start precedes the earliest completion among the job's predecessors.
    PrecedenceViolated { job: JobId, start: RatTime, min_pred_completion: Option<RatTime> },
    NotContiguous { job: JobId, pieces: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownJob { job } => write!(f, "piece references unknown job {job}"),
            Violation::MachineOutOfRange { job, machine, machines } => {
                write!(f, "job {job} placed on machine {machine}, instance has {machines}")
            }
            Violation::EmptyPiece { job, start, end } => {
                write!(f, "job {job} has a degenerate piece [{start}, {end})")
            }
            Violation::WrongTotalProcessing { job, required, scheduled } => {
                write!(f, "job {job} scheduled for {scheduled}, requires {required}")
            }
            Violation::MachineOverlap { machine, first, second, at } => {
                write!(f, "machine {machine} runs {first} and {second} simultaneously at {at}")
            }
            Violation::JobOverlap { job, at } => {
                write!(f, "job {job} runs on two machines at {at}")
            }
            Violation::ReleaseViolated { job, start, release } => {
                write!(f, "job {job} starts at {start} before its release {release}")
            }
            Violation::PrecedenceViolated { job, start, min_pred_completion } => match min_pred_completion {
                Some(c) => write!(f, "job {job} starts at {start} before any predecessor completes (earliest {c})"),
                None => write!(f, "job {job} starts at {start} but no predecessor is scheduled"),
            },
            Violation::NotContiguous { job, pieces } => {
                write!(f, "job {job} split into {pieces} pieces in a non-preemptive schedule")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a schedule against an instance. The empty report is exactly
/// feasibility:
/// every job runs for its full processing time, machines run one job at a
/// time, a job occupies one machine at a time, no job starts before its
/// release, and every job with predecessors starts no earlier than the first
/// completion among them. With `require_contiguous`, each job must be a
/// single piece.
pub fn validate_schedule(
    inst: &Instance,
    sched: &Schedule,
    require_contiguous: bool,
) -> ValidationReport {
    let mut violations = Vec::new();
    let machines = inst.machines();

    // Pieces that survive basic sanity checks take part in interval checks.
    let mut per_job: Vec<Vec<&Piece>> = vec![Vec::new(); inst.len()];
    let mut per_machine: HashMap<usize, Vec<&Piece>> = HashMap::new();
    for piece in &sched.pieces {
        let Some(pos) = inst.position(piece.job) else {
            violations.push(Violation::UnknownJob { job: piece.job });
            continue;
        };
        if piece.machine >= machines {
            violations.push(Violation::MachineOutOfRange {
                job: piece.job,
                machine: piece.machine,
                machines,
            });
            continue;
        }
        if piece.end <= piece.start {
            violations.push(Violation::EmptyPiece {
                job: piece.job,
                start: piece.start,
                end: piece.end,
            });
            continue;
        }
        per_job[pos].push(piece);
        per_machine.entry(piece.machine).or_default().push(piece);
    }

    // (b) machine exclusivity: strict-overlap on sorted pieces.
    let mut machine_ids: Vec<usize> = per_machine.keys().copied().collect();
    machine_ids.sort_unstable();
    for machine in machine_ids {
        let pieces = per_machine.get_mut(&machine).unwrap();
        pieces.sort_by(|a, b| a.start.cmp(&b.start).then(a.end.cmp(&b.end)));
        for w in pieces.windows(2) {
            if w[1].start < w[0].end {
                violations.push(Violation::MachineOverlap {
                    machine,
                    first: w[0].job,
                    second: w[1].job,
                    at: w[1].start,
                });
            }
        }
    }

    for pieces in &mut per_job {
        pieces.sort_by(|a, b| a.start.cmp(&b.start).then(a.end.cmp(&b.end)));
    }
    let starts: Vec<Option<RatTime>> = per_job
        .iter()
        .map(|ps| ps.first().map(|p| p.start))
        .collect();
    let completions: Vec<Option<RatTime>> = per_job
        .iter()
        .map(|ps| ps.iter().map(|p| p.end).max())
        .collect();

    for pos in 0..inst.len() {
        let job = inst.job(pos);
        let pieces = &per_job[pos];

        // (a) full processing.
        let scheduled: RatTime = pieces.iter().map(|p| p.end - p.start).sum();
        if scheduled != RatTime::from_int(job.p) {
            violations.push(Violation::WrongTotalProcessing {
                job: job.id,
                required: job.p,
                scheduled,
            });
        }

        // (c) one machine at a time.
        for w in pieces.windows(2) {
            if w[1].start < w[0].end {
                violations.push(Violation::JobOverlap {
                    job: job.id,
                    at: w[1].start,
                });
            }
        }

        let Some(start) = starts[pos] else { continue };

        // (d) release date.
        if start < RatTime::from_int(job.r) {
            violations.push(Violation::ReleaseViolated {
                job: job.id,
                start,
                release: job.r,
            });
        }

        // (e) OR-precedence: some predecessor completes before the start.
        if !inst.is_root(pos) {
            let min_pred: Option<RatTime> = inst
                .preds(pos)
                .iter()
                .filter_map(|&pp| completions[pp])
                .min();
            match min_pred {
                Some(c) if start >= c => {}
                other => violations.push(Violation::PrecedenceViolated {
                    job: job.id,
                    start,
                    min_pred_completion: other,
                }),
            }
        }

        // (f) contiguity.
        if require_contiguous && pieces.len() != 1 {
            violations.push(Violation::NotContiguous {
                job: job.id,
                pieces: pieces.len(),
            });
        }
    }

    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::earliest_start_schedule;
    use crate::instance::build_instance;
    use crate::instance::RawJob;
    use crate::testutil::{ess_as_schedule, fig1};

    fn rt(v: i128) -> RatTime {
        RatTime::from_int(v)
    }

    #[test]
    fn fig1_ess_on_nine_machines_is_feasible() {
        let inst = fig1(9);
        let ess = earliest_start_schedule(&inst).unwrap();
        let sched = ess_as_schedule(&inst, &ess);
        let report = validate_schedule(&inst, &sched, true);
        assert!(report.is_feasible(), "{:?}", report.violations);
    }

    #[test]
    fn early_start_violates_release() {
        // j6 released at 4; start it at 3.
        let inst = fig1(9);
        let ess = earliest_start_schedule(&inst).unwrap();
        let mut sched = ess_as_schedule(&inst, &ess);
        let j6 = inst.id(5);
        for p in &mut sched.pieces {
            if p.job == j6 {
                p.start = rt(3);
                p.end = rt(4);
            }
        }
        let report = validate_schedule(&inst, &sched, false);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ReleaseViolated { job, .. } if *job == j6)));
    }

    #[test]
    fn start_before_min_pred_completion_is_flagged() {
        // k's predecessors complete at 7 (j7) and 8 (j8); starting k at 6
        // beats both.
        let inst = fig1(9);
        let ess = earliest_start_schedule(&inst).unwrap();
        let mut sched = ess_as_schedule(&inst, &ess);
        let k = inst.id(8);
        for p in &mut sched.pieces {
            if p.job == k {
                p.start = rt(6);
                p.end = rt(7);
            }
        }
        let report = validate_schedule(&inst, &sched, false);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::PrecedenceViolated { job, min_pred_completion: Some(c), .. }
                if *job == k && *c == rt(7)
        )));
    }

    #[test]
    fn touching_pieces_are_legal_and_overlap_is_not() {
        let inst = build_instance(
            1,
            &[RawJob { id: 0, p: 1, r: 0 }, RawJob { id: 1, p: 1, r: 0 }],
            &[],
        )
        .unwrap();
        let touching = Schedule::new(vec![
            Piece { job: JobId(0), machine: 0, start: rt(1), end: rt(2) },
            Piece { job: JobId(1), machine: 0, start: rt(2), end: rt(3) },
        ]);
        assert!(validate_schedule(&inst, &touching, true).is_feasible());

        let overlapping = Schedule::new(vec![
            Piece { job: JobId(0), machine: 0, start: rt(1), end: rt(2) },
            Piece { job: JobId(1), machine: 0, start: RatTime::new(3, 2), end: RatTime::new(5, 2) },
        ]);
        let report = validate_schedule(&inst, &overlapping, true);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MachineOverlap { .. })));
    }

    #[test]
    fn contiguous_check_only_fires_when_requested() {
        let inst = build_instance(2, &[RawJob { id: 0, p: 2, r: 0 }], &[]).unwrap();
        let split = Schedule::new(vec![
            Piece { job: JobId(0), machine: 0, start: rt(0), end: rt(1) },
            Piece { job: JobId(0), machine: 1, start: rt(1), end: rt(2) },
        ]);
        assert!(validate_schedule(&inst, &split, false).is_feasible());
        let report = validate_schedule(&inst, &split, true);
        assert_eq!(
            report.violations,
            vec![Violation::NotContiguous { job: JobId(0), pieces: 2 }]
        );
    }

    #[test]
    fn makespan_basics() {
        let empty = Schedule::default();
        assert_eq!(empty.makespan(), rt(0));

        let inst = fig1(9);
        let ess = earliest_start_schedule(&inst).unwrap();
        let mut sched = ess_as_schedule(&inst, &ess);
        assert_eq!(sched.makespan(), rt(8));

        // Translation shifts the makespan by the same amount.
        for p in &mut sched.pieces {
            p.start += rt(5);
            p.end += rt(5);
        }
        assert_eq!(sched.makespan(), rt(13));

        // Machine permutation leaves it unchanged.
        for p in &mut sched.pieces {
            p.machine = (p.machine + 3) % 9;
        }
        assert_eq!(sched.makespan(), rt(13));
    }

    #[test]
    fn missing_job_reported_as_wrong_total() {
        let inst = build_instance(1, &[RawJob { id: 0, p: 3, r: 0 }], &[]).unwrap();
        let report = validate_schedule(&inst, &Schedule::default(), false);
        assert_eq!(
            report.violations,
            vec![Violation::WrongTotalProcessing {
                job: JobId(0),
                required: 3,
                scheduled: rt(0)
            }]
        );
    }
}
