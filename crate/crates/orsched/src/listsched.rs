//! Greedy list scheduling under OR-availability with release dates, plus a
//! per-run certificate bounding the makespan without consulting an oracle.
//!
//! Whenever a machine is idle, the first available unscheduled job in the
//! priority order starts on it; when nothing is available the clock jumps to
//! the next completion or release. Ties are resolved deterministically:
//! completions are folded in before availability is evaluated, assignments
//! prefer the lowest idle machine index.

use crate::chains::EssResult;
use crate::error::{Infeasible, SolveError};
use crate::instance::{check_reachable, Instance, JobId};
use crate::rational::RatTime;
use crate::schedule::{Piece, Schedule};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

/// A priority order: a permutation of the instance's jobs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriorityOrder {
    positions: Vec<usize>,
}

impl PriorityOrder {
    /// Validates that `ids` is a bijection over the instance's jobs.
    pub fn from_ids(inst: &Instance, ids: &[JobId]) -> Option<PriorityOrder> {
        if ids.len() != inst.len() {
            return None;
        }
        let mut seen = vec![false; inst.len()];
        let mut positions = Vec::with_capacity(ids.len());
        for id in ids {
            let pos = inst.position(*id)?;
            if seen[pos] {
                return None;
            }
            seen[pos] = true;
            positions.push(pos);
        }
        Some(PriorityOrder { positions })
    }

    /// Jobs in their instance order.
    pub fn input(inst: &Instance) -> PriorityOrder {
        PriorityOrder {
            positions: (0..inst.len()).collect(),
        }
    }

    /// Deterministic shuffle of the input order.
    pub fn random(inst: &Instance, seed: u64) -> PriorityOrder {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut positions: Vec<usize> = (0..inst.len()).collect();
        positions.shuffle(&mut rng);
        PriorityOrder { positions }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn ids(&self, inst: &Instance) -> Vec<JobId> {
        self.positions.iter().map(|&p| inst.id(p)).collect()
    }
}

/// Non-increasing processing times, ties by smaller id.
pub fn lpt_order(inst: &Instance) -> PriorityOrder {
    let mut positions: Vec<usize> = (0..inst.len()).collect();
    positions.sort_by_key(|&p| (Reverse(inst.job(p).p), inst.id(p)));
    PriorityOrder { positions }
}

/// Runs list scheduling; the output is contiguous (one piece per job) and
/// non-idling: no machine rests while an available unscheduled job exists.
pub fn list_schedule(inst: &Instance, order: &PriorityOrder) -> Result<Schedule, Infeasible> {
    let reach = check_reachable(inst);
    if !reach.all_reachable {
        return Err(Infeasible {
            unreachable: reach.unreachable,
        });
    }
    let n = inst.len();
    assert_eq!(order.positions.len(), n, "order must cover all jobs");
    if n == 0 {
        return Ok(Schedule::default());
    }
    let mut rank_of = vec![0usize; n];
    for (rank, &pos) in order.positions.iter().enumerate() {
        rank_of[pos] = rank;
    }

    // Machines: idle ones by index, busy ones by the time they free up.
    let mut idle: BTreeSet<usize> = (0..inst.machines()).collect();
    let mut busy: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();

    // Jobs ready to run, keyed by rank; future availability triggers lazily
    // keyed by time. A job may be triggered once per predecessor; the
    // earliest trigger wins.
    let mut ready: BTreeSet<usize> = BTreeSet::new();
    let mut queued = vec![false; n];
    let mut scheduled = vec![false; n];
    let mut triggers: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    for pos in 0..n {
        if inst.is_root(pos) {
            triggers.push(Reverse((inst.job(pos).r, pos)));
        }
    }

    let mut pieces: Vec<Piece> = Vec::with_capacity(n);
    let mut remaining = n;
    let mut t = 0u64;
    while remaining > 0 {
        while let Some(&Reverse((free_at, machine))) = busy.peek() {
            if free_at > t {
                break;
            }
            busy.pop();
            idle.insert(machine);
        }
        while let Some(&Reverse((when, pos))) = triggers.peek() {
            if when > t {
                break;
            }
            triggers.pop();
            if !queued[pos] && !scheduled[pos] {
                queued[pos] = true;
                ready.insert(rank_of[pos]);
            }
        }
        while !ready.is_empty() && !idle.is_empty() {
            let rank = *ready.first().unwrap();
            ready.remove(&rank);
            let pos = order.positions[rank];
            let machine = *idle.first().unwrap();
            idle.remove(&machine);
            let end = t + inst.job(pos).p;
            pieces.push(Piece {
                job: inst.id(pos),
                machine,
                start: RatTime::from_int(t),
                end: RatTime::from_int(end),
            });
            scheduled[pos] = true;
            remaining -= 1;
            busy.push(Reverse((end, machine)));
            for &succ in inst.succs(pos) {
                if !scheduled[succ] && !queued[succ] {
                    triggers.push(Reverse((inst.job(succ).r.max(end), succ)));
                }
            }
        }
        if remaining == 0 {
            break;
        }
        let next_busy = busy.peek().map(|&Reverse((w, _))| w);
        let next_trigger = triggers.peek().map(|&Reverse((w, _))| w);
        t = match (next_busy, next_trigger) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!("reachable instance cannot stall"),
        };
    }
    Ok(Schedule::new(pieces))
}

/// The certificate produced for each list-scheduling run: with `l` the job
/// completing last, the makespan is at most
/// `volume + (1 - 1/m) * mc(l) + dead / m`, where `volume` is the total work
/// split over the machines and `dead` measures the time before the makespan
/// in which no machine runs at all. Dead intervals only arise while nothing
/// is available, and they delay every schedule of the instance equally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioCertificate {
    pub last_job: JobId,
    /// Total processing time divided by the machine count.
    pub volume: RatTime,
    /// Minimal-chain length of the last-completing job.
    pub mc_last: u64,
    /// Measure of the all-machines-idle time before the makespan.
    pub dead: RatTime,
    /// The certified upper bound on the makespan.
    pub bound: RatTime,
}

/// Derives the certificate for a schedule produced by [`list_schedule`] and
/// checks it. A violation means the scheduler itself is broken, so it is a
/// hard error rather than a report entry.
pub fn ratio_certificate(
    inst: &Instance,
    ess: &EssResult,
    sched: &Schedule,
) -> Result<RatioCertificate, SolveError> {
    let m = RatTime::from_int(inst.machines() as u64);
    let one = RatTime::from_int(1u64);

    // Last-completing job: largest completion, then smallest id.
    let completions = sched.completion_times();
    let last_job = completions
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(id, _)| *id)
        .ok_or_else(|| SolveError::ContractViolation("certificate of an empty schedule".into()))?;
    let last_pos = inst
        .position(last_job)
        .ok_or_else(|| SolveError::ContractViolation("schedule references unknown job".into()))?;

    let volume = RatTime::from_int(inst.total_processing()) / m;
    let mc_last = ess.chain_length(last_pos);
    let dead = dead_time(sched);
    let bound = volume + (one - one / m) * RatTime::from_int(mc_last) + dead / m;

    let makespan = sched.makespan();
    if makespan > bound {
        return Err(SolveError::ContractViolation(format!(
            "certificate violated: makespan {makespan} exceeds bound {bound}"
        )));
    }
    Ok(RatioCertificate {
        last_job,
        volume,
        mc_last,
        dead,
        bound,
    })
}

/// Total measure of `[0, makespan)` during which no machine is busy.
fn dead_time(sched: &Schedule) -> RatTime {
    let mut intervals: Vec<(RatTime, RatTime)> =
        sched.pieces.iter().map(|p| (p.start, p.end)).collect();
    intervals.sort();
    let mut busy = RatTime::zero();
    let mut cur: Option<(RatTime, RatTime)> = None;
    for (s, e) in intervals {
        match &mut cur {
            Some((_, ce)) if s <= *ce => {
                if e > *ce {
                    *ce = e;
                }
            }
            _ => {
                if let Some((cs, ce)) = cur {
                    busy += ce - cs;
                }
                cur = Some((s, e));
            }
        }
    }
    if let Some((cs, ce)) = cur {
        busy += ce - cs;
    }
    sched.makespan() - busy
}
