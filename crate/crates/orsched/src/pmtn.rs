//! Exact preemptive solving.
//!
//! The pipeline: compute the earliest start schedule, fix a closed
//! collection of minimal chains, delete every arc not in line with it (the
//! rest is an outforest, where OR- and AND-precedence coincide), and solve
//! the outforest instance optimally. An inversion-free optimal schedule for
//! the original OR-instance is always feasible for the outforest, so the
//! outforest optimum is also the OR-optimum.
//!
//! The outforest optimum value is the largest capacity bound over chain
//! start breakpoints; a level-driven processor-sharing sweep constructs a
//! schedule meeting it. Failing to meet it is a hard internal error, and the
//! grid oracle cross-checks the value at desk scale.

use crate::chains::{closed_collection, earliest_start_schedule, ClosedCollection};
use crate::error::SolveError;
use crate::instance::{build_instance, Instance, JobId};
use crate::listsched::{list_schedule, lpt_order};
use crate::rational::RatTime;
use crate::schedule::{Piece, Schedule};
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

/// An instance whose precedence graph is an outforest: every job has exactly
/// one incoming arc, from its chain predecessor or from the source.
#[derive(Clone, Debug)]
pub struct OutforestInstance {
    instance: Instance,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    dropped_arcs: Vec<(JobId, JobId)>,
}

impl OutforestInstance {
    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn parent(&self, pos: usize) -> Option<usize> {
        self.parent[pos]
    }

    pub fn children(&self, pos: usize) -> &[usize] {
        &self.children[pos]
    }

    /// Arcs of the original instance that were not in line with the chains.
    pub fn dropped_arcs(&self) -> &[(JobId, JobId)] {
        &self.dropped_arcs
    }
}

/// Keeps, for every job, only the arc from its chain predecessor; jobs whose
/// chain starts at the source keep their source attachment. Every retained
/// arc is in line with the collection by construction.
pub fn transform_to_outforest(inst: &Instance, collection: &ClosedCollection) -> OutforestInstance {
    assert_eq!(collection.len(), inst.len());
    let (raw, _) = inst.to_raw();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (from, to) in inst.arcs() {
        if collection.parent(to) == Some(from) {
            kept.push((inst.id(from).0, inst.id(to).0));
        } else {
            dropped.push((inst.id(from), inst.id(to)));
        }
    }
    let instance = build_instance(inst.machines(), &raw, &kept)
        .expect("pruning arcs preserves validity");
    let parent: Vec<Option<usize>> = (0..instance.len())
        .map(|pos| collection.parent(pos))
        .collect();
    let mut children = vec![Vec::new(); instance.len()];
    for (pos, par) in parent.iter().enumerate() {
        if let Some(p) = par {
            children[*p].push(pos);
        }
    }
    OutforestInstance {
        instance,
        parent,
        children,
        dropped_arcs: dropped,
    }
}

/// Chain-respecting earliest starts on the outforest:
/// `start(j) = max(r_j, start(parent) + p_parent)`. These equal the earliest
/// start schedule of the original instance, and `start(j) + p_j` is the
/// minimal-chain length of `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModifiedStarts {
    start: Vec<u64>,
}

impl ModifiedStarts {
    pub fn start(&self, pos: usize) -> u64 {
        self.start[pos]
    }

    pub fn len(&self) -> usize {
        self.start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_empty()
    }
}

pub fn modified_starts(of: &OutforestInstance) -> ModifiedStarts {
    let inst = &of.instance;
    let n = inst.len();
    let mut start = vec![0u64; n];
    let mut stack: Vec<usize> = (0..n).filter(|&p| of.parent[p].is_none()).collect();
    let mut seen = 0usize;
    while let Some(pos) = stack.pop() {
        seen += 1;
        let job = inst.job(pos);
        start[pos] = match of.parent[pos] {
            None => job.r,
            Some(par) => job.r.max(start[par] + inst.job(par).p),
        };
        // Parents precede children on the stack because each child is pushed
        // only after its parent's start is final.
        for &c in &of.children[pos] {
            stack.push(c);
        }
    }
    assert_eq!(seen, n, "outforest must cover every job");
    ModifiedStarts { start }
}

/// Optimal preemptive makespan of the outforest instance. For every time
/// `u`, job `j` can have processed at most `max(0, u - start(j))` by `u`, so
/// the remaining work must fit into `m * (T - u)`:
/// `T >= u + sum_j max(0, p_j - max(0, u - start_j)) / m`. The bound is
/// piecewise linear in `u` with breakpoints at the starts and chain
/// completions, and no schedule can finish before the last chain completes.
pub fn pmtn_optimum_value(of: &OutforestInstance, rho: &ModifiedStarts) -> RatTime {
    let inst = &of.instance;
    let m = RatTime::from_int(inst.machines() as u64);
    let mut breakpoints: BTreeSet<u64> = BTreeSet::new();
    breakpoints.insert(0);
    for pos in 0..inst.len() {
        breakpoints.insert(rho.start(pos));
        breakpoints.insert(rho.start(pos) + inst.job(pos).p);
    }
    let mut best = RatTime::zero();
    for &u in &breakpoints {
        let load: u64 = (0..inst.len())
            .map(|pos| {
                let done = u.saturating_sub(rho.start(pos)).min(inst.job(pos).p);
                inst.job(pos).p - done
            })
            .sum();
        let value = RatTime::from_int(u) + RatTime::from_int(load) / m;
        best = best.max(value);
    }
    for pos in 0..inst.len() {
        best = best.max(RatTime::from_int(rho.start(pos) + inst.job(pos).p));
    }
    best
}

/// Result of the preemptive solver.
#[derive(Clone, Debug)]
pub struct PmtnSolution {
    pub schedule: Schedule,
    pub t_star: RatTime,
    pub collection: ClosedCollection,
    pub outforest: OutforestInstance,
    /// Number of processor-sharing intervals the sweep produced.
    pub segments: usize,
}

/// Solves the preemptive problem to optimality.
pub fn solve_pmtn(inst: &Instance) -> Result<PmtnSolution, SolveError> {
    let ess = earliest_start_schedule(inst)?;
    let collection = closed_collection(inst, &ess);
    let of = transform_to_outforest(inst, &collection);
    let rho = modified_starts(&of);
    let t_star = pmtn_optimum_value(&of, &rho);
    let (schedule, segments) = fluid_schedule(&of, &rho);
    let makespan = schedule.makespan();
    if makespan != t_star {
        return Err(SolveError::ContractViolation(format!(
            "preemptive construction reached {makespan}, capacity optimum is {t_star}"
        )));
    }
    Ok(PmtnSolution {
        schedule,
        t_star,
        collection,
        outforest: of,
        segments,
    })
}

// ---------------------------------------------------------------------------
// Level-driven processor sharing.
//
// At any time each eligible job has a level: the earliest its deepest
// descendant chain could finish if the job ran alone from now on, counted
// relative to now. With `cw` the heaviest descendant path weight and `cpin`
// the strongest release-anchored tail bound below the job,
//
//     level(j, t) = max(rem_j(t) + cw_j, cpin_j - t).
//
// Machines go to the highest levels first; a level class that does not fit
// entirely shares the remaining capacity. Levels fall at the processing rate
// while the first branch is active and at rate 1 while the release anchor
// dominates, so between events every level is linear in t. The sweep
// advances from event to event (releases, depletions, branch switches, and
// the waiting front catching the served front) and re-balances at each one.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum EventKind {
    Depletion,
    Switch,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Residence {
    /// Not yet released or waiting for its parent.
    Out,
    /// In `wait0`: unserved, level constant.
    Wait,
    /// In `fall_idle`: unserved, anchor-pinned, level falls at rate 1.
    FallIdle,
    /// Served this interval (share recorded in `beta`).
    Served,
    Done,
}

struct Segment {
    from: RatTime,
    to: RatTime,
    alloc: Vec<(usize, RatTime)>,
}

struct Engine<'a> {
    of: &'a OutforestInstance,
    machines: usize,
    cw: Vec<u64>,
    cpin: Vec<Option<u64>>,
    t: RatTime,
    rem: Vec<RatTime>,
    settle_t: Vec<RatTime>,
    beta: Vec<RatTime>,
    res: Vec<Residence>,
    version: Vec<u64>,
    /// Unserved jobs whose level is constant: (level, id).
    wait0: BTreeSet<(RatTime, u32)>,
    /// Unserved anchor-pinned jobs: level(t) = cpin - t, keyed by cpin.
    fall_idle: BTreeSet<(RatTime, u32)>,
    served: Vec<usize>,
    /// The partially shared class, if any: members, per-job share, and its
    /// level at `class_t0`.
    class: Option<SharedClass>,
    /// Lowest level among served jobs falling at rate 1, at the time of the
    /// last rebuild.
    fall_served_min: Option<RatTime>,
    events: BinaryHeap<Reverse<(RatTime, u64, u32, EventKind)>>,
    releases: BinaryHeap<Reverse<(u64, u32)>>,
    remaining: usize,
    segments: Vec<Segment>,
}

struct SharedClass {
    sigma: RatTime,
    lvl0: RatTime,
    t0: RatTime,
}

impl<'a> Engine<'a> {
    fn new(of: &'a OutforestInstance, rho: &ModifiedStarts) -> Engine<'a> {
        let inst = &of.instance;
        let n = inst.len();
        // Heaviest descendant path weight and strongest release anchor,
        // bottom-up. `w` includes the job itself; `pin` is the best
        // `start + w` in its subtree.
        let mut w = vec![0u64; n];
        let mut pin = vec![0u64; n];
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut stack: Vec<usize> = (0..n).filter(|&p| of.parent[p].is_none()).collect();
        while let Some(pos) = stack.pop() {
            order.push(pos);
            stack.extend(of.children[pos].iter().copied());
        }
        for &pos in order.iter().rev() {
            let below = of.children[pos].iter().map(|&c| w[c]).max().unwrap_or(0);
            w[pos] = inst.job(pos).p + below;
            pin[pos] = of.children[pos]
                .iter()
                .map(|&c| pin[c])
                .max()
                .unwrap_or(0)
                .max(rho.start(pos) + w[pos]);
        }
        let cw = (0..n)
            .map(|pos| of.children[pos].iter().map(|&c| w[c]).max().unwrap_or(0))
            .collect();
        let cpin = (0..n)
            .map(|pos| of.children[pos].iter().map(|&c| pin[c]).max())
            .collect();

        let mut engine = Engine {
            of,
            machines: inst.machines(),
            cw,
            cpin,
            t: RatTime::zero(),
            rem: (0..n).map(|p| RatTime::from_int(inst.job(p).p)).collect(),
            settle_t: vec![RatTime::zero(); n],
            beta: vec![RatTime::zero(); n],
            res: vec![Residence::Out; n],
            version: vec![0; n],
            wait0: BTreeSet::new(),
            fall_idle: BTreeSet::new(),
            served: Vec::new(),
            class: None,
            fall_served_min: None,
            events: BinaryHeap::new(),
            releases: BinaryHeap::new(),
            remaining: n,
            segments: Vec::new(),
        };
        for pos in 0..n {
            if of.parent[pos].is_none() {
                let r = inst.job(pos).r;
                if r == 0 {
                    engine.enter_pool(pos);
                } else {
                    engine.releases.push(Reverse((r, pos as u32)));
                }
            }
        }
        engine
    }

    fn level(&self, pos: usize) -> RatTime {
        let rem_branch = self.rem[pos] + RatTime::from_int(self.cw[pos]);
        match self.cpin[pos] {
            Some(p) => rem_branch.max(RatTime::from_int(p) - self.t),
            None => rem_branch,
        }
    }

    /// The anchor dominates strictly; on ties the remaining-work branch (the
    /// slower-falling one) governs the future.
    fn is_pinned(&self, pos: usize) -> bool {
        match self.cpin[pos] {
            Some(p) => RatTime::from_int(p) - self.t > self.rem[pos] + RatTime::from_int(self.cw[pos]),
            None => false,
        }
    }

    fn enter_pool(&mut self, pos: usize) {
        self.version[pos] += 1;
        if self.is_pinned(pos) {
            self.res[pos] = Residence::FallIdle;
            let cpin = RatTime::from_int(self.cpin[pos].unwrap());
            self.fall_idle.insert((cpin, self.of.instance.id(pos).0));
            // With no share, the branches meet at a fixed time.
            let switch_at = cpin - self.rem[pos] - RatTime::from_int(self.cw[pos]);
            self.events.push(Reverse((switch_at, self.version[pos], pos as u32, EventKind::Switch)));
        } else {
            self.res[pos] = Residence::Wait;
            self.wait0.insert((self.level(pos), self.of.instance.id(pos).0));
        }
    }

    fn remove_from_trees(&mut self, pos: usize) {
        let id = self.of.instance.id(pos).0;
        match self.res[pos] {
            Residence::Wait => {
                let key = (self.level(pos), id);
                let removed = self.wait0.remove(&key);
                debug_assert!(removed);
            }
            Residence::FallIdle => {
                let key = (RatTime::from_int(self.cpin[pos].unwrap()), id);
                let removed = self.fall_idle.remove(&key);
                debug_assert!(removed);
            }
            _ => {}
        }
        self.version[pos] += 1;
    }

    fn settle(&mut self, pos: usize) {
        if self.beta[pos] > RatTime::zero() {
            self.rem[pos] = self.rem[pos] - self.beta[pos] * (self.t - self.settle_t[pos]);
            debug_assert!(!self.rem[pos].is_negative());
        }
        self.settle_t[pos] = self.t;
        self.beta[pos] = RatTime::zero();
    }

    /// Marks a settled job complete and wakes its children.
    fn complete(&mut self, pos: usize) {
        debug_assert!(self.rem[pos].is_zero());
        self.res[pos] = Residence::Done;
        self.version[pos] += 1;
        self.remaining -= 1;
        for &c in &self.of.children[pos] {
            let r = self.of.instance.job(c).r;
            if RatTime::from_int(r) <= self.t {
                self.enter_pool(c);
            } else {
                self.releases.push(Reverse((r, c as u32)));
            }
        }
    }

    /// Tears down the previous allocation, completing depleted jobs, and
    /// re-derives shares from the level order.
    fn rebuild(&mut self) {
        // Dissolve: settle served jobs and return the unfinished ones to the
        // unserved trees.
        let served = std::mem::take(&mut self.served);
        self.class = None;
        self.fall_served_min = None;
        for pos in served {
            self.settle(pos);
            if self.rem[pos].is_zero() {
                self.complete(pos);
            } else {
                self.enter_pool(pos);
            }
        }

        // Allocate top levels first.
        let mut avail = self.machines;
        let mut min_fall: Option<RatTime> = None;
        while avail > 0 {
            let top_wait = self.wait0.last().map(|&(lvl, _)| lvl);
            let top_fall = self
                .fall_idle
                .last()
                .map(|&(cpin, _)| cpin - self.t);
            let lvl = match (top_wait, top_fall) {
                (Some(a), Some(b)) => a.max(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => break,
            };
            let mut tie: Vec<usize> = Vec::new();
            while let Some(&(l, id)) = self.wait0.last() {
                if l != lvl {
                    break;
                }
                self.wait0.remove(&(l, id));
                tie.push(self.of.instance.position(JobId(id)).unwrap());
            }
            while let Some(&(cpin, id)) = self.fall_idle.last() {
                if cpin - self.t != lvl {
                    break;
                }
                self.fall_idle.remove(&(cpin, id));
                tie.push(self.of.instance.position(JobId(id)).unwrap());
            }
            for &pos in &tie {
                self.version[pos] += 1;
            }
            if avail >= tie.len() {
                avail -= tie.len();
                for pos in tie {
                    self.serve(pos, RatTime::from_int(1u64));
                    min_fall = Some(min_fall.map_or(lvl, |m: RatTime| m.min(lvl)));
                }
                continue;
            }
            // Saturated class: remaining-work members first; anchor-pinned
            // members fall at rate 1 whatever their share, so they only get
            // what is left.
            let (rem_members, pin_members): (Vec<usize>, Vec<usize>) =
                tie.into_iter().partition(|&p| !self.is_pinned(p));
            if rem_members.len() <= avail {
                let leftover = avail - rem_members.len();
                for pos in &rem_members {
                    self.serve(*pos, RatTime::from_int(1u64));
                }
                if leftover > 0 {
                    let share = RatTime::from_int(leftover as u64)
                        / RatTime::from_int(pin_members.len() as u64);
                    for pos in &pin_members {
                        self.serve(*pos, share);
                    }
                } else {
                    for pos in pin_members {
                        self.enter_pool(pos);
                    }
                }
                min_fall = Some(min_fall.map_or(lvl, |m: RatTime| m.min(lvl)));
            } else {
                let sigma =
                    RatTime::from_int(avail as u64) / RatTime::from_int(rem_members.len() as u64);
                for pos in &rem_members {
                    self.serve(*pos, sigma);
                }
                self.class = Some(SharedClass {
                    sigma,
                    lvl0: lvl,
                    t0: self.t,
                });
                for pos in pin_members {
                    self.enter_pool(pos);
                }
            }
            avail = 0;
        }
        self.fall_served_min = min_fall;

        // Timing hints for the new allocation.
        let served_snapshot: Vec<usize> = self.served.clone();
        for pos in served_snapshot {
            let beta = self.beta[pos];
            debug_assert!(beta > RatTime::zero());
            let deplete_at = self.t + self.rem[pos] / beta;
            self.events
                .push(Reverse((deplete_at, self.version[pos], pos as u32, EventKind::Depletion)));
            if self.is_pinned(pos) && beta < RatTime::from_int(1u64) {
                let gap = RatTime::from_int(self.cpin[pos].unwrap())
                    - self.t
                    - self.rem[pos]
                    - RatTime::from_int(self.cw[pos]);
                let switch_at = self.t + gap / (RatTime::from_int(1u64) - beta);
                self.events
                    .push(Reverse((switch_at, self.version[pos], pos as u32, EventKind::Switch)));
            }
        }
    }

    fn serve(&mut self, pos: usize, share: RatTime) {
        self.res[pos] = Residence::Served;
        self.settle_t[pos] = self.t;
        self.beta[pos] = share;
        self.served.push(pos);
    }

    /// Earliest moment the current share assignment stops being valid.
    fn next_event(&mut self) -> Option<RatTime> {
        let mut next: Option<RatTime> = None;
        let mut consider = |cand: RatTime| {
            if next.is_none() || cand < next.unwrap() {
                next = Some(cand);
            }
        };
        if let Some(&Reverse((r, _))) = self.releases.peek() {
            consider(RatTime::from_int(r));
        }
        // Drop stale heap entries before peeking.
        while let Some(&Reverse((when, version, pos, kind))) = self.events.peek() {
            if self.version[pos as usize] == version {
                let _ = kind;
                consider(when);
                break;
            }
            self.events.pop();
        }
        // Waiting front catching the served front.
        if let Some(&(wait_lvl, _)) = self.wait0.last() {
            if let Some(class) = &self.class {
                let lvl = class.lvl0 - class.sigma * (self.t - class.t0);
                debug_assert!(lvl > wait_lvl);
                consider(self.t + (lvl - wait_lvl) / class.sigma);
            } else if let Some(fall_lvl0) = self.fall_served_min {
                // Falls at rate 1 since the last rebuild.
                debug_assert!(fall_lvl0 >= wait_lvl);
                consider(self.t + (fall_lvl0 - wait_lvl));
            }
        }
        // Full-share front falling onto the shared class.
        if let (Some(class), Some(fall_lvl0)) = (&self.class, self.fall_served_min) {
            let one = RatTime::from_int(1u64);
            if class.sigma < one {
                let class_lvl = class.lvl0 - class.sigma * (self.t - class.t0);
                debug_assert!(fall_lvl0 >= class_lvl);
                consider(self.t + (fall_lvl0 - class_lvl) / (one - class.sigma));
            }
        }
        next
    }

    fn run(mut self) -> (RatTime, Vec<Segment>) {
        self.rebuild();
        while self.remaining > 0 {
            let tn = self
                .next_event()
                .expect("a reachable instance cannot stall");
            assert!(tn > self.t, "event sweep must advance");
            if !self.served.is_empty() {
                self.segments.push(Segment {
                    from: self.t,
                    to: tn,
                    alloc: self.served.iter().map(|&p| (p, self.beta[p])).collect(),
                });
            }
            self.t = tn;
            // Consume timing markers at tn; effects are re-derived from the
            // settled state inside rebuild.
            while let Some(&Reverse((when, version, pos, kind))) = self.events.peek() {
                if when > self.t {
                    break;
                }
                self.events.pop();
                let pos = pos as usize;
                if self.version[pos] != version {
                    continue;
                }
                if kind == EventKind::Switch && self.res[pos] == Residence::FallIdle {
                    // The anchor no longer dominates; the level freezes.
                    self.remove_from_trees(pos);
                    self.enter_pool(pos);
                }
            }
            while let Some(&Reverse((r, pos))) = self.releases.peek() {
                if RatTime::from_int(r) > self.t {
                    break;
                }
                self.releases.pop();
                self.enter_pool(pos as usize);
            }
            self.rebuild();
        }
        (self.t, self.segments)
    }
}

/// Runs the sweep and converts each sharing interval into pieces by
/// wrap-around filling: jobs in id order are laid out end to end over the
/// interval's machine capacity, splitting at machine boundaries. A job's two
/// boundary pieces never overlap in time because its share is at most one
/// machine.
fn fluid_schedule(of: &OutforestInstance, rho: &ModifiedStarts) -> (Schedule, usize) {
    let inst = &of.instance;
    if inst.is_empty() {
        return (Schedule::default(), 0);
    }
    let (_, segments) = Engine::new(of, rho).run();
    let mut pieces: Vec<Piece> = Vec::new();
    for seg in &segments {
        let delta = seg.to - seg.from;
        let mut alloc = seg.alloc.clone();
        alloc.sort_by_key(|&(pos, _)| inst.id(pos));
        let mut cursor = RatTime::zero();
        for (pos, share) in alloc {
            let mut amount = share * delta;
            debug_assert!(amount <= delta);
            while amount > RatTime::zero() {
                let machine = (cursor / delta).floor_int() as usize;
                let offset = cursor - RatTime::from_int(machine as u64) * delta;
                let room = delta - offset;
                let take = amount.min(room);
                pieces.push(Piece {
                    job: inst.id(pos),
                    machine,
                    start: seg.from + offset,
                    end: seg.from + offset + take,
                });
                cursor += take;
                amount -= take;
            }
        }
        debug_assert!(cursor <= RatTime::from_int(inst.machines() as u64) * delta);
    }
    (Schedule::new(merge_pieces(pieces)), segments.len())
}

/// Joins touching pieces of the same job on the same machine.
fn merge_pieces(mut pieces: Vec<Piece>) -> Vec<Piece> {
    pieces.sort_by(|a, b| {
        (a.job, a.machine, a.start).cmp(&(b.job, b.machine, b.start))
    });
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        match out.last_mut() {
            Some(last) if last.job == p.job && last.machine == p.machine && last.end == p.start => {
                last.end = p.end;
            }
            _ => out.push(p),
        }
    }
    out.sort_by(|a, b| (a.start, a.machine).cmp(&(b.start, b.machine)));
    out
}

/// Optimal non-preemptive schedule for unit processing times with integral
/// starts.
///
/// On the outforest, reversing time turns chain-respecting starts into
/// deadlines `T - start(j)` on an intree with a common release; the start
/// recursion already folds each deadline below its successor's, so
/// slot-by-slot earliest-deadline-first over ready jobs decides feasibility
/// of a horizon `T` exactly. The smallest feasible integer `T` is found by
/// binary search between the chain bound and a list-scheduling run.
pub fn solve_unit_nonpreemptive(inst: &Instance) -> Result<Schedule, SolveError> {
    for pos in 0..inst.len() {
        let job = inst.job(pos);
        if job.p != 1 {
            return Err(SolveError::NotUnitProcessing { id: job.id, p: job.p });
        }
    }
    let ess = earliest_start_schedule(inst)?;
    if inst.is_empty() {
        return Ok(Schedule::default());
    }
    let collection = closed_collection(inst, &ess);
    let of = transform_to_outforest(inst, &collection);
    let rho = modified_starts(&of);

    let n = inst.len();
    let mut lo = (0..n).map(|p| rho.start(p) + 1).max().unwrap();
    let ls = list_schedule(inst, &lpt_order(inst)).expect("reachable");
    debug_assert!(ls.makespan().is_integer());
    let mut hi = ls.makespan().numer() as u64;
    if reversed_edf(&of, &rho, hi).is_none() {
        // The list schedule is only an upper bound for the original
        // OR-instance; fall back to a horizon that is always feasible for
        // the outforest: everything after the last chain start, one batch of
        // m per slot.
        hi = (0..n).map(|p| rho.start(p)).max().unwrap() + n as u64;
        if reversed_edf(&of, &rho, hi).is_none() {
            return Err(SolveError::ContractViolation(
                "unit horizon search found no feasible horizon".into(),
            ));
        }
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if reversed_edf(&of, &rho, mid).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let sched = reversed_edf(&of, &rho, lo).expect("feasible at the search minimum");
    Ok(sched)
}

/// Feasibility of horizon `T` for the unit outforest, by scheduling the
/// time-reversed intree: a job is ready once all its children are placed,
/// slots take up to `m` ready jobs by earliest deadline (ties by id), and
/// `T - start(j)` bounds each reversed completion.
fn reversed_edf(of: &OutforestInstance, rho: &ModifiedStarts, horizon: u64) -> Option<Schedule> {
    let inst = &of.instance;
    let n = inst.len();
    let m = inst.machines();
    if (0..n).any(|p| rho.start(p) + 1 > horizon) {
        return None;
    }
    let deadline: Vec<u64> = (0..n).map(|p| horizon - rho.start(p)).collect();
    let mut pending_children: Vec<usize> = (0..n).map(|p| of.children[p].len()).collect();
    let mut ready: BTreeSet<(u64, u32)> = (0..n)
        .filter(|&p| pending_children[p] == 0)
        .map(|p| (deadline[p], inst.id(p).0))
        .collect();
    let mut slot_of = vec![0u64; n];
    let mut machine_of = vec![0usize; n];
    let mut placed = 0usize;
    let mut slot = 0u64;
    while placed < n {
        if slot >= horizon {
            return None;
        }
        for machine in 0..m {
            let Some(&(d, id)) = ready.first() else { break };
            if slot + 1 > d {
                return None;
            }
            ready.remove(&(d, id));
            let pos = inst.position(JobId(id)).unwrap();
            slot_of[pos] = slot;
            machine_of[pos] = machine;
            placed += 1;
            if let Some(par) = of.parent[pos] {
                pending_children[par] -= 1;
                if pending_children[par] == 0 {
                    ready.insert((deadline[par], inst.id(par).0));
                }
            }
        }
        slot += 1;
    }
    // Reverse back to the original time axis.
    let pieces = (0..n)
        .map(|pos| {
            let start = horizon - 1 - slot_of[pos];
            Piece {
                job: inst.id(pos),
                machine: machine_of[pos],
                start: RatTime::from_int(start),
                end: RatTime::from_int(start + 1),
            }
        })
        .collect();
    Some(Schedule::new(pieces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::lower_bounds;
    use crate::instance::RawJob;
    use crate::oracle::count_inversions;
    use crate::schedule::validate_schedule;
    use crate::testutil::fig1;

    fn rt(v: i128) -> RatTime {
        RatTime::from_int(v)
    }

    fn build(m: usize, raw: &[RawJob], edges: &[(u32, u32)]) -> Instance {
        build_instance(m, raw, edges).unwrap()
    }

    #[test]
    fn transform_keeps_only_chain_arcs_on_fig1() {
        let inst = fig1(3);
        let ess = earliest_start_schedule(&inst).unwrap();
        // The collection through j2: parents j6 <- j2, j7 <- j6, k <- j7.
        let mut parent = vec![None; 9];
        parent[3] = Some(0); // j4 <- j1
        parent[4] = Some(2); // j5 <- j3
        parent[5] = Some(1); // j6 <- j2
        parent[6] = Some(5); // j7 <- j6
        parent[7] = Some(4); // j8 <- j5
        parent[8] = Some(6); // k <- j7
        let coll = ClosedCollection::from_parent_choices(&inst, &ess, parent).unwrap();
        let of = transform_to_outforest(&inst, &coll);
        assert_eq!(of.instance().preds(5), &[1]); // only (j2, j6)
        assert_eq!(of.instance().preds(8), &[6]); // only (j7, k)
        let rho = modified_starts(&of);
        assert_eq!(rho.start(8), 7); // k starts at its earliest start
    }

    #[test]
    fn transform_leaves_an_outtree_unchanged() {
        let raw = [
            RawJob { id: 0, p: 1, r: 0 },
            RawJob { id: 1, p: 2, r: 0 },
            RawJob { id: 2, p: 1, r: 3 },
        ];
        let inst = build(2, &raw, &[(0, 1), (0, 2)]);
        let ess = earliest_start_schedule(&inst).unwrap();
        let coll = closed_collection(&inst, &ess);
        let of = transform_to_outforest(&inst, &coll);
        assert!(of.dropped_arcs().is_empty());
        let original: Vec<_> = inst.arcs().collect();
        let kept: Vec<_> = of.instance().arcs().collect();
        assert_eq!(original, kept);
    }

    #[test]
    fn modified_start_examples() {
        let chain = build(
            1,
            &[RawJob { id: 0, p: 2, r: 0 }, RawJob { id: 1, p: 1, r: 0 }],
            &[(0, 1)],
        );
        let ess = earliest_start_schedule(&chain).unwrap();
        let of = transform_to_outforest(&chain, &closed_collection(&chain, &ess));
        let rho = modified_starts(&of);
        assert_eq!((rho.start(0), rho.start(1)), (0, 2));

        let gated = build(
            1,
            &[RawJob { id: 0, p: 1, r: 0 }, RawJob { id: 1, p: 1, r: 10 }],
            &[(0, 1)],
        );
        let ess = earliest_start_schedule(&gated).unwrap();
        let of = transform_to_outforest(&gated, &closed_collection(&gated, &ess));
        assert_eq!(modified_starts(&of).start(1), 10);
    }

    #[test]
    fn modified_starts_equal_ess_starts_on_the_outforest() {
        let inst = fig1(3);
        let ess = earliest_start_schedule(&inst).unwrap();
        let of = transform_to_outforest(&inst, &closed_collection(&inst, &ess));
        let rho = modified_starts(&of);
        let ess_of = earliest_start_schedule(of.instance()).unwrap();
        for pos in 0..inst.len() {
            assert_eq!(rho.start(pos), ess_of.start(pos));
            assert_eq!(rho.start(pos), ess.start(pos));
            assert_eq!(rho.start(pos) + inst.job(pos).p, ess.chain_length(pos));
        }
    }

    #[test]
    fn optimum_value_examples() {
        // Three independent unit jobs on two machines.
        let units = build(
            2,
            &[
                RawJob { id: 0, p: 1, r: 0 },
                RawJob { id: 1, p: 1, r: 0 },
                RawJob { id: 2, p: 1, r: 0 },
            ],
            &[],
        );
        let ess = earliest_start_schedule(&units).unwrap();
        let of = transform_to_outforest(&units, &closed_collection(&units, &ess));
        let rho = modified_starts(&of);
        assert_eq!(pmtn_optimum_value(&of, &rho), RatTime::new(3, 2));

        // a -> b and a -> c: the chain breakpoint binds.
        let tree = build(
            2,
            &[
                RawJob { id: 0, p: 2, r: 0 },
                RawJob { id: 1, p: 1, r: 0 },
                RawJob { id: 2, p: 1, r: 0 },
            ],
            &[(0, 1), (0, 2)],
        );
        let ess = earliest_start_schedule(&tree).unwrap();
        let of = transform_to_outforest(&tree, &closed_collection(&tree, &ess));
        let rho = modified_starts(&of);
        assert_eq!(pmtn_optimum_value(&of, &rho), rt(3));

        // With machines for every job only the chain bound remains.
        let inst = fig1(9);
        let ess = earliest_start_schedule(&inst).unwrap();
        let of = transform_to_outforest(&inst, &closed_collection(&inst, &ess));
        let rho = modified_starts(&of);
        assert_eq!(pmtn_optimum_value(&of, &rho), rt(8));
        let sol = solve_pmtn(&inst).unwrap();
        assert_eq!(sol.schedule.makespan(), rt(8));
    }

    #[test]
    fn mcnaughton_split_three_units_two_machines() {
        let inst = build(
            2,
            &[
                RawJob { id: 0, p: 1, r: 0 },
                RawJob { id: 1, p: 1, r: 0 },
                RawJob { id: 2, p: 1, r: 0 },
            ],
            &[],
        );
        let sol = solve_pmtn(&inst).unwrap();
        assert_eq!(sol.schedule.makespan(), RatTime::new(3, 2));
        assert!(sol.schedule.is_preemptive());
        assert!(validate_schedule(&inst, &sol.schedule, false).is_feasible());
        assert!(validate_schedule(sol.outforest.instance(), &sol.schedule, false).is_feasible());
    }

    #[test]
    fn fig1_preemptive_hits_the_chain_bound() {
        let inst = fig1(3);
        let sol = solve_pmtn(&inst).unwrap();
        assert_eq!(sol.t_star, rt(8));
        assert_eq!(sol.schedule.makespan(), rt(8));
        assert!(validate_schedule(&inst, &sol.schedule, false).is_feasible());
        assert!(validate_schedule(sol.outforest.instance(), &sol.schedule, false).is_feasible());
        let ess = earliest_start_schedule(&inst).unwrap();
        let lb = lower_bounds(&inst, &ess);
        assert!(lb.best() <= sol.schedule.makespan());
        assert_eq!(count_inversions(&inst, &sol.schedule, &sol.collection).count, 0);
    }

    #[test]
    fn unit_solver_examples() {
        let units = build(
            2,
            &[
                RawJob { id: 0, p: 1, r: 0 },
                RawJob { id: 1, p: 1, r: 0 },
                RawJob { id: 2, p: 1, r: 0 },
            ],
            &[],
        );
        let sched = solve_unit_nonpreemptive(&units).unwrap();
        assert_eq!(sched.makespan(), rt(2));
        assert!(validate_schedule(&units, &sched, true).is_feasible());

        let chain = build(
            3,
            &[
                RawJob { id: 0, p: 1, r: 0 },
                RawJob { id: 1, p: 1, r: 0 },
                RawJob { id: 2, p: 1, r: 0 },
            ],
            &[(0, 1), (1, 2)],
        );
        let sched = solve_unit_nonpreemptive(&chain).unwrap();
        assert_eq!(sched.makespan(), rt(3));

        let nonunit = build(1, &[RawJob { id: 0, p: 2, r: 0 }], &[]);
        assert!(matches!(
            solve_unit_nonpreemptive(&nonunit),
            Err(SolveError::NotUnitProcessing { .. })
        ));
    }

    #[test]
    fn release_anchored_subtree_keeps_priority() {
        // a's subtree is anchored by z's late release; a must still run
        // early enough for z to finish by the anchor.
        let inst = build(
            2,
            &[
                RawJob { id: 0, p: 3, r: 0 }, // a
                RawJob { id: 1, p: 1, r: 4 }, // z, child of a
                RawJob { id: 2, p: 3, r: 0 },
                RawJob { id: 3, p: 3, r: 0 },
            ],
            &[(0, 1)],
        );
        let sol = solve_pmtn(&inst).unwrap();
        assert_eq!(sol.schedule.makespan(), rt(5));
        assert!(validate_schedule(&inst, &sol.schedule, false).is_feasible());
    }
}
