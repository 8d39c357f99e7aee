//! Independent exact solvers and structural counters, used only to verify
//! the real solvers at desk scale. They share no code path with the solvers
//! they check: availability is evaluated directly on the OR-precedence
//! digraph.

use crate::chains::{earliest_start_schedule, ClosedCollection};
use crate::error::{Infeasible, OracleError};
use crate::instance::{build_instance, check_reachable, Instance, JobId, RawJob};
use crate::listsched::{list_schedule, lpt_order, PriorityOrder};
use crate::rational::RatTime;
use crate::schedule::{Piece, Schedule};
use std::collections::HashSet;

/// Exhaustive non-preemptive optimum with a witness schedule.
#[derive(Clone, Debug)]
pub struct NonPmtnResult {
    pub makespan: u64,
    pub schedule: Schedule,
    /// Search nodes expanded.
    pub nodes: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct NonPmtnLimits {
    pub max_jobs: usize,
}

impl Default for NonPmtnLimits {
    fn default() -> Self {
        NonPmtnLimits { max_jobs: 8 }
    }
}

/// Branch-and-bound over decision epochs (time 0, completions, releases).
/// At each epoch any available job may start on an idle machine, or the
/// clock may advance — so deliberate idling is fully explored. Starts at
/// epochs lose no optimality: any schedule left-shifts onto them.
pub fn brute_nonpmtn(inst: &Instance, limits: &NonPmtnLimits) -> Result<NonPmtnResult, OracleError> {
    let n = inst.len();
    if n > limits.max_jobs {
        return Err(OracleError::LimitExceeded {
            what: "job count",
            actual: n as u64,
            limit: limits.max_jobs as u64,
        });
    }
    let reach = check_reachable(inst);
    if !reach.all_reachable {
        return Err(Infeasible {
            unreachable: reach.unreachable,
        }
        .into());
    }
    if n == 0 {
        return Ok(NonPmtnResult {
            makespan: 0,
            schedule: Schedule::default(),
            nodes: 1,
        });
    }
    let ess = earliest_start_schedule(inst).expect("reachable");

    // Seed the incumbent with two list-scheduling runs.
    let mut incumbent_sched = None;
    let mut incumbent = u64::MAX;
    for order in [lpt_order(inst), PriorityOrder::input(inst)] {
        let sched = list_schedule(inst, &order).expect("reachable");
        let ms = sched.makespan();
        debug_assert!(ms.is_integer());
        let ms = ms.numer() as u64;
        if ms < incumbent {
            incumbent = ms;
            incumbent_sched = Some(sched);
        }
    }

    let mut search = Search {
        inst,
        ess_completion: (0..n).map(|p| ess.completion(p)).collect(),
        sum_remaining: inst.total_processing(),
        free: vec![0; inst.machines()],
        completion: vec![None; n],
        assignment: vec![None; n],
        best: incumbent,
        best_assignment: None,
        nodes: 0,
    };
    search.run(0, 0, n);

    let schedule = match search.best_assignment {
        Some(assignment) => {
            let pieces = assignment
                .iter()
                .enumerate()
                .map(|(pos, slot)| {
                    let (machine, start) = slot.expect("complete assignment");
                    Piece {
                        job: inst.id(pos),
                        machine,
                        start: RatTime::from_int(start),
                        end: RatTime::from_int(start + inst.job(pos).p),
                    }
                })
                .collect();
            Schedule::new(pieces)
        }
        None => incumbent_sched.expect("incumbent seeded"),
    };
    Ok(NonPmtnResult {
        makespan: search.best,
        schedule,
        nodes: search.nodes,
    })
}

struct Search<'a> {
    inst: &'a Instance,
    ess_completion: Vec<u64>,
    sum_remaining: u64,
    free: Vec<u64>,
    completion: Vec<Option<u64>>,
    assignment: Vec<Option<(usize, u64)>>,
    best: u64,
    best_assignment: Option<Vec<Option<(usize, u64)>>>,
    nodes: u64,
}

impl Search<'_> {
    fn available(&self, pos: usize, t: u64) -> bool {
        if self.completion[pos].is_some() || self.inst.job(pos).r > t {
            return false;
        }
        self.inst.is_root(pos)
            || self
                .inst
                .preds(pos)
                .iter()
                .any(|&p| matches!(self.completion[p], Some(c) if c <= t))
    }

    fn lower_bound(&self, t: u64, unscheduled: usize) -> u64 {
        let mut lb = self
            .completion
            .iter()
            .filter_map(|c| *c)
            .max()
            .unwrap_or(0);
        if unscheduled > 0 {
            // Earliest-completion bound over unscheduled jobs.
            for pos in 0..self.inst.len() {
                if self.completion[pos].is_none() {
                    lb = lb.max(self.ess_completion[pos]);
                }
            }
            // Capacity bound: remaining work fits after each machine frees.
            let capacity: u64 = self.free.iter().map(|&f| f.max(t)).sum();
            let m = self.inst.machines() as u64;
            lb = lb.max((capacity + self.sum_remaining + m - 1) / m);
        }
        lb
    }

    /// `min_rank` canonicalizes simultaneous assignments: within one epoch,
    /// jobs start in increasing position order.
    fn run(&mut self, t: u64, min_rank: usize, unscheduled: usize) {
        self.nodes += 1;
        if unscheduled == 0 {
            let makespan = self
                .completion
                .iter()
                .map(|c| c.expect("all scheduled"))
                .max()
                .unwrap_or(0);
            if makespan < self.best {
                self.best = makespan;
                self.best_assignment = Some(self.assignment.clone());
            }
            return;
        }
        if self.lower_bound(t, unscheduled) >= self.best {
            return;
        }

        let idle = self.free.iter().position(|&f| f <= t);
        let mut any_unavailable = false;
        let mut assigned_any = false;
        for pos in 0..self.inst.len() {
            if self.completion[pos].is_none() && !self.available(pos, t) {
                any_unavailable = true;
            }
        }
        if let Some(machine) = idle {
            for pos in min_rank..self.inst.len() {
                if !self.available(pos, t) {
                    continue;
                }
                assigned_any = true;
                let end = t + self.inst.job(pos).p;
                let saved_free = self.free[machine];
                self.free[machine] = end;
                self.completion[pos] = Some(end);
                self.assignment[pos] = Some((machine, t));
                self.sum_remaining -= self.inst.job(pos).p;
                self.run(t, pos + 1, unscheduled - 1);
                self.sum_remaining += self.inst.job(pos).p;
                self.assignment[pos] = None;
                self.completion[pos] = None;
                self.free[machine] = saved_free;
            }
        }

        // Advance to the next epoch. When every unscheduled job is already
        // available, waiting cannot help (the remainder left-shifts), so the
        // branch is skipped — unless nothing could start now.
        if any_unavailable || !assigned_any {
            let mut next = u64::MAX;
            for &f in &self.free {
                if f > t {
                    next = next.min(f);
                }
            }
            for pos in 0..self.inst.len() {
                if self.completion[pos].is_none() {
                    let r = self.inst.job(pos).r;
                    if r > t {
                        next = next.min(r);
                    }
                }
            }
            if next != u64::MAX {
                self.run(next, 0, unscheduled);
            }
        }
    }
}

/// Exact preemptive optimum over schedules aligned to a grid of `1/(K*m)`
/// time units, with a mandatory refinement check at `2K`.
#[derive(Clone, Debug)]
pub struct GridResult {
    pub value: RatTime,
    /// Search states expanded (across both granularities).
    pub states: u64,
    pub refinement_checked: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct GridLimits {
    pub max_jobs: usize,
    pub max_machines: usize,
    pub max_total_processing: u64,
    /// Base granularity multiplier K; slots have length `1/(K*m)`.
    pub granularity: u32,
    /// Re-solve at `2K` and require the same value.
    pub refine: bool,
}

impl Default for GridLimits {
    fn default() -> Self {
        GridLimits {
            max_jobs: 5,
            max_machines: 3,
            max_total_processing: 12,
            granularity: 1,
            refine: true,
        }
    }
}

/// Scales the instance by `K*m` and runs a forward search over unit slots:
/// a state is the per-job remaining work at a slot boundary; each slot runs
/// up to `m` distinct eligible jobs. Running a maximal set of jobs always
/// dominates idling under preemption, so only maximal subsets are branched.
///
/// Grid alignment of some optimum at granularity `1/m` is an assumption made
/// falsifiable by the refinement check: a mismatch is reported, never
/// silently trusted.
pub fn brute_pmtn_grid(inst: &Instance, limits: &GridLimits) -> Result<GridResult, OracleError> {
    let n = inst.len();
    if n > limits.max_jobs {
        return Err(OracleError::LimitExceeded {
            what: "job count",
            actual: n as u64,
            limit: limits.max_jobs as u64,
        });
    }
    if inst.machines() > limits.max_machines {
        return Err(OracleError::LimitExceeded {
            what: "machine count",
            actual: inst.machines() as u64,
            limit: limits.max_machines as u64,
        });
    }
    if inst.total_processing() > limits.max_total_processing {
        return Err(OracleError::LimitExceeded {
            what: "total processing time",
            actual: inst.total_processing(),
            limit: limits.max_total_processing,
        });
    }
    let reach = check_reachable(inst);
    if !reach.all_reachable {
        return Err(Infeasible {
            unreachable: reach.unreachable,
        }
        .into());
    }

    let mut states = 0u64;
    let k = limits.granularity.max(1);
    let coarse = grid_value(inst, k, &mut states);
    if !limits.refine {
        return Ok(GridResult {
            value: coarse,
            states,
            refinement_checked: false,
        });
    }
    let fine = grid_value(inst, 2 * k, &mut states);
    if coarse != fine {
        return Err(OracleError::Inconclusive {
            k,
            k2: 2 * k,
            coarse,
            fine,
        });
    }
    Ok(GridResult {
        value: coarse,
        states,
        refinement_checked: true,
    })
}

fn grid_value(inst: &Instance, k: u32, states: &mut u64) -> RatTime {
    let n = inst.len();
    let m = inst.machines();
    let scale = k as u64 * m as u64;
    if n == 0 {
        return RatTime::zero();
    }

    // Upper bound from a non-preemptive run, in slots.
    let ub_sched = list_schedule(inst, &lpt_order(inst)).expect("reachable");
    let ub = ub_sched.makespan().numer() as u64 * scale;

    let releases: Vec<u64> = (0..n).map(|p| inst.job(p).r * scale).collect();
    let work: Vec<u64> = (0..n).map(|p| inst.job(p).p * scale).collect();

    let mut frontier: HashSet<Vec<u64>> = HashSet::new();
    frontier.insert(work.clone());
    let mut slot = 0u64;
    loop {
        if frontier.iter().any(|rem| rem.iter().all(|&r| r == 0)) {
            return RatTime::from_int(slot) / RatTime::from_int(scale);
        }
        assert!(slot < ub, "grid search exceeded its upper bound");
        let mut next: HashSet<Vec<u64>> = HashSet::new();
        for rem in &frontier {
            *states += 1;
            // Cheap admissible bound: remaining volume over m machines.
            let total: u64 = rem.iter().sum();
            if slot + total.div_ceil(m as u64) > ub {
                continue;
            }
            let eligible: Vec<usize> = (0..n)
                .filter(|&p| {
                    rem[p] > 0
                        && releases[p] <= slot
                        && (inst.is_root(p) || inst.preds(p).iter().any(|&q| rem[q] == 0))
                })
                .collect();
            if eligible.is_empty() {
                // Nothing can run; this state persists into the next slot.
                next.insert(rem.clone());
                continue;
            }
            let take = m.min(eligible.len());
            for_each_subset(&eligible, take, &mut |chosen| {
                let mut nr = rem.clone();
                for &p in chosen {
                    nr[p] -= 1;
                }
                next.insert(nr);
            });
        }
        frontier = next;
        slot += 1;
    }
}

fn for_each_subset(items: &[usize], take: usize, f: &mut impl FnMut(&[usize])) {
    let mut chosen = Vec::with_capacity(take);
    fn rec(items: &[usize], take: usize, start: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if chosen.len() == take {
            f(chosen);
            return;
        }
        let needed = take - chosen.len();
        for i in start..=items.len().saturating_sub(needed) {
            chosen.push(items[i]);
            rec(items, take, i + 1, chosen, f);
            chosen.pop();
        }
    }
    rec(items, take, 0, &mut chosen, f);
}

/// Every job split into a chain of unit-duration jobs; arcs enter the first
/// unit and leave the last, release dates are inherited.
#[derive(Clone, Debug)]
pub struct UnitExpansion {
    pub instance: Instance,
    /// Original position of each unit job.
    pub origin: Vec<usize>,
    /// First unit position of each original job; units of a job are
    /// consecutive.
    pub first_unit: Vec<usize>,
}

pub fn expand_to_unit_jobs(inst: &Instance) -> UnitExpansion {
    let mut raw = Vec::with_capacity(inst.total_processing() as usize);
    let mut origin = Vec::with_capacity(raw.capacity());
    let mut first_unit = Vec::with_capacity(inst.len());
    for pos in 0..inst.len() {
        let job = inst.job(pos);
        first_unit.push(raw.len());
        for _ in 0..job.p {
            origin.push(pos);
            raw.push(RawJob {
                id: raw.len() as u32,
                p: 1,
                r: job.r as i64,
            });
        }
    }
    let last_unit = |pos: usize| (first_unit[pos] + inst.job(pos).p as usize - 1) as u32;
    let mut edges = Vec::new();
    for pos in 0..inst.len() {
        // Internal chain.
        for u in 1..inst.job(pos).p as usize {
            edges.push(((first_unit[pos] + u - 1) as u32, (first_unit[pos] + u) as u32));
        }
        // Original arcs: last unit of the predecessor feeds the first unit.
        for &p in inst.preds(pos) {
            edges.push((last_unit(p), first_unit[pos] as u32));
        }
    }
    let instance =
        build_instance(inst.machines(), &raw, &edges).expect("expansion of a valid instance");
    UnitExpansion {
        instance,
        origin,
        first_unit,
    }
}

/// Pairs `(i, j)` with `i` on the chain of `j` (and distinct from it) whose
/// completions are out of order: `C_i >= C_j`. An optimal preemptive
/// schedule without inversions always exists; the preemptive solver must
/// emit none.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InversionCount {
    pub count: usize,
    pub witnesses: Vec<(JobId, JobId)>,
}

pub fn count_inversions(
    inst: &Instance,
    sched: &Schedule,
    collection: &ClosedCollection,
) -> InversionCount {
    let completions = sched.completion_times();
    let mut witnesses = Vec::new();
    for pos in 0..inst.len() {
        let Some(&cj) = completions.get(&inst.id(pos)) else { continue };
        let mut anc = collection.parent(pos);
        while let Some(a) = anc {
            if let Some(&ci) = completions.get(&inst.id(a)) {
                if ci >= cj {
                    witnesses.push((inst.id(a), inst.id(pos)));
                }
            }
            anc = collection.parent(a);
        }
    }
    witnesses.sort();
    InversionCount {
        count: witnesses.len(),
        witnesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::closed_collection;
    use crate::schedule::validate_schedule;
    use crate::testutil::{ess_as_schedule, fig1};

    fn units(n: u32, machines: usize) -> Instance {
        let raw: Vec<RawJob> = (0..n).map(|i| RawJob { id: i, p: 1, r: 0 }).collect();
        build_instance(machines, &raw, &[]).unwrap()
    }

    #[test]
    fn three_unit_jobs_two_machines() {
        let inst = units(3, 2);
        let exact = brute_nonpmtn(&inst, &NonPmtnLimits::default()).unwrap();
        assert_eq!(exact.makespan, 2);
        assert!(validate_schedule(&inst, &exact.schedule, true).is_feasible());

        let grid = brute_pmtn_grid(&inst, &GridLimits::default()).unwrap();
        assert_eq!(grid.value, RatTime::new(3, 2));
        assert!(grid.refinement_checked);
    }

    #[test]
    fn grid_example_with_chain() {
        // a -> b plus independent c; preemption cannot beat 2 on two
        // machines, and the refinement check agrees.
        let raw = [
            RawJob { id: 0, p: 2, r: 0 },
            RawJob { id: 1, p: 1, r: 0 },
            RawJob { id: 2, p: 1, r: 0 },
        ];
        let inst = build_instance(2, &raw, &[(0, 1)]).unwrap();
        let grid = brute_pmtn_grid(&inst, &GridLimits::default()).unwrap();
        assert_eq!(grid.value, RatTime::from_int(2u64));
    }

    #[test]
    fn grid_with_enough_machines_hits_chain_bound() {
        let inst = fig1(9);
        let limits = GridLimits {
            max_jobs: 9,
            max_machines: 9,
            max_total_processing: 18,
            granularity: 1,
            refine: false,
        };
        let grid = brute_pmtn_grid(&inst, &limits).unwrap();
        assert_eq!(grid.value, RatTime::from_int(8u64));
    }

    #[test]
    fn limits_are_enforced() {
        let inst = units(9, 2);
        assert!(matches!(
            brute_nonpmtn(&inst, &NonPmtnLimits::default()),
            Err(OracleError::LimitExceeded { .. })
        ));
        assert!(matches!(
            brute_pmtn_grid(&inst, &GridLimits::default()),
            Err(OracleError::LimitExceeded { .. })
        ));
    }

    #[test]
    fn expansion_of_single_job_is_a_chain() {
        let inst = build_instance(1, &[RawJob { id: 0, p: 3, r: 0 }], &[]).unwrap();
        let exp = expand_to_unit_jobs(&inst);
        assert_eq!(exp.instance.len(), 3);
        assert_eq!(exp.instance.preds(1), &[0]);
        assert_eq!(exp.instance.preds(2), &[1]);
        assert_eq!(exp.origin, vec![0, 0, 0]);
    }

    #[test]
    fn expansion_preserves_chain_lengths_on_fig1() {
        let inst = fig1(3);
        let exp = expand_to_unit_jobs(&inst);
        assert_eq!(exp.instance.len(), 18);
        let ess = earliest_start_schedule(&inst).unwrap();
        let ess_exp = earliest_start_schedule(&exp.instance).unwrap();
        for pos in 0..inst.len() {
            let last = exp.first_unit[pos] + inst.job(pos).p as usize - 1;
            assert_eq!(ess_exp.completion(last), ess.completion(pos));
        }
    }

    #[test]
    fn expansion_arc_endpoints() {
        // (i, j) becomes (last unit of i, first unit of j).
        let raw = [RawJob { id: 0, p: 2, r: 0 }, RawJob { id: 1, p: 2, r: 0 }];
        let inst = build_instance(1, &raw, &[(0, 1)]).unwrap();
        let exp = expand_to_unit_jobs(&inst);
        assert_eq!(exp.instance.preds(2), &[1]);
    }

    #[test]
    fn inversions_on_ess_schedule_are_zero_and_ties_count() {
        let inst = fig1(9);
        let ess = earliest_start_schedule(&inst).unwrap();
        let coll = closed_collection(&inst, &ess);
        let sched = ess_as_schedule(&inst, &ess);
        assert_eq!(count_inversions(&inst, &sched, &coll).count, 0);

        // Force C_{j7} = C_k: j7 lies on k's chain, and ties count.
        let mut tied = sched.clone();
        for p in &mut tied.pieces {
            if p.job == JobId(6) {
                p.start = RatTime::from_int(6u64);
                p.end = RatTime::from_int(8u64);
            }
        }
        let inv = count_inversions(&inst, &tied, &coll);
        assert!(inv.witnesses.contains(&(JobId(6), JobId(8))));
    }

    #[test]
    fn single_machine_brute_matches_list_scheduling() {
        // On one machine list scheduling is optimal; check both directions.
        let inst = fig1(1);
        let exact = brute_nonpmtn(&inst, &NonPmtnLimits { max_jobs: 9 }).unwrap();
        let ls = list_schedule(&inst, &lpt_order(&inst)).unwrap();
        assert_eq!(RatTime::from_int(exact.makespan), ls.makespan());
    }

    #[test]
    fn deliberate_idling_never_beats_the_oracle() {
        // m = 1 with a release-gated successor: the oracle may wait at an
        // epoch even though a job is available, so it is never worse than
        // any list order.
        let raw = [
            RawJob { id: 0, p: 3, r: 0 },
            RawJob { id: 1, p: 1, r: 1 },
            RawJob { id: 2, p: 1, r: 0 },
        ];
        let inst = build_instance(1, &raw, &[(1, 2)]).unwrap();
        let exact = brute_nonpmtn(&inst, &NonPmtnLimits::default()).unwrap();
        for ids in [[0u32, 1, 2], [2, 1, 0], [1, 0, 2], [1, 2, 0], [0, 2, 1], [2, 0, 1]] {
            let order = PriorityOrder::from_ids(&inst, &ids.map(JobId)).unwrap();
            let ls = list_schedule(&inst, &order).unwrap();
            assert!(RatTime::from_int(exact.makespan) <= ls.makespan());
        }
    }
}
