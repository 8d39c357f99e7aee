//! Earliest start schedules, minimal chains, closed collections, and the
//! two makespan lower bounds shared by every solver.

use crate::error::Infeasible;
use crate::instance::{check_reachable, Instance, JobId};
use crate::rational::RatTime;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Start and completion times of the earliest start schedule: every job on
/// its own machine, started as early as OR-precedence and release dates
/// allow. Completion here lower-bounds the job's completion in every
/// feasible schedule; `mc(j)` denotes `completion(j)`, the minimal-chain
/// length of `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EssResult {
    start: Vec<u64>,
    completion: Vec<u64>,
}

impl EssResult {
    pub fn start(&self, pos: usize) -> u64 {
        self.start[pos]
    }

    pub fn completion(&self, pos: usize) -> u64 {
        self.completion[pos]
    }

    /// Minimal-chain length of the job: its earliest possible completion.
    pub fn chain_length(&self, pos: usize) -> u64 {
        self.completion[pos]
    }

    pub fn max_chain_length(&self) -> u64 {
        self.completion.iter().copied().max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_empty()
    }
}

/// Computes the earliest start schedule by priority propagation from the
/// source: jobs settle in order of completion time, and the first settled
/// predecessor of a job is the one with minimum completion, which fixes the
/// job's start `max(r_j, min_i C_i)` immediately.
///
/// Fails if some job is unreachable from the source.
pub fn earliest_start_schedule(inst: &Instance) -> Result<EssResult, Infeasible> {
    let n = inst.len();
    let mut start = vec![0u64; n];
    let mut completion = vec![0u64; n];
    let mut settled = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(u64, u32, usize)>> = BinaryHeap::new();

    for pos in 0..n {
        if inst.is_root(pos) {
            let job = inst.job(pos);
            heap.push(Reverse((job.r + job.p, job.id.0, pos)));
        }
    }
    let mut remaining = n;
    while let Some(Reverse((c, _, pos))) = heap.pop() {
        if settled[pos] {
            continue;
        }
        settled[pos] = true;
        remaining -= 1;
        completion[pos] = c;
        start[pos] = c - inst.job(pos).p;
        for &succ in inst.succs(pos) {
            if !settled[succ] {
                let job = inst.job(succ);
                let s = job.r.max(c);
                heap.push(Reverse((s + job.p, job.id.0, succ)));
            }
        }
    }
    if remaining > 0 {
        let unreachable = check_reachable(inst).unreachable;
        debug_assert_eq!(unreachable.len(), remaining);
        return Err(Infeasible { unreachable });
    }
    Ok(EssResult { start, completion })
}

/// A source-to-target path consistent with the earliest start schedule:
/// the first job starts at its release date, every later job starts at
/// `max(r, C_prev)`, and the last job is the target. `length` equals the
/// target's earliest completion. The dominator is the latest job on the
/// path from whose release the tail runs back-to-back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalChain {
    /// Positions along the chain, source side first, target last.
    pub path: Vec<usize>,
    /// Index into `path` of the dominating job.
    pub dominator: usize,
    /// `mc` of the target: its earliest start schedule completion.
    pub length: u64,
}

impl MinimalChain {
    pub fn target(&self) -> usize {
        *self.path.last().expect("chain is never empty")
    }

    pub fn dominator_pos(&self) -> usize {
        self.path[self.dominator]
    }

    pub fn ids(&self, inst: &Instance) -> Vec<JobId> {
        self.path.iter().map(|&p| inst.id(p)).collect()
    }

    /// Builds a chain from an explicit path, checking the chain conditions
    /// against the earliest start schedule and computing the dominator.
    pub fn from_path(inst: &Instance, ess: &EssResult, path: Vec<usize>) -> Result<MinimalChain, ChainError> {
        if path.is_empty() {
            return Err(ChainError::Empty);
        }
        let first = path[0];
        if !inst.is_root(first) {
            return Err(ChainError::HeadHasPredecessors { id: inst.id(first) });
        }
        if ess.start(first) != inst.job(first).r {
            return Err(ChainError::NotEssConsistent { id: inst.id(first) });
        }
        for w in path.windows(2) {
            let (prev, cur) = (w[0], w[1]);
            if !inst.preds(cur).contains(&prev) {
                return Err(ChainError::NotAPath {
                    from: inst.id(prev),
                    to: inst.id(cur),
                });
            }
            if ess.start(cur) != inst.job(cur).r.max(ess.completion(prev)) {
                return Err(ChainError::NotEssConsistent { id: inst.id(cur) });
            }
        }
        let length = ess.completion(*path.last().unwrap());
        let dominator = dominator_index(inst, &path, length);
        Ok(MinimalChain { path, dominator, length })
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("chain is empty")]
    Empty,
    #[error("chain head {id} has predecessors")]
    HeadHasPredecessors { id: JobId },
    #[error("({from}, {to}) is not a precedence arc")]
    NotAPath { from: JobId, to: JobId },
    #[error("job {id} does not start as early as possible along the chain")]
    NotEssConsistent { id: JobId },
}

/// Largest `h` with `length = r_{path[h]} + sum of p over path[h..]`. Such an
/// index always exists for an ESS-consistent chain, and the identity fails
/// for every larger index.
fn dominator_index(inst: &Instance, path: &[usize], length: u64) -> usize {
    let mut suffix = 0u64;
    for h in (0..path.len()).rev() {
        let job = inst.job(path[h]);
        suffix += job.p;
        if job.r + suffix == length {
            return h;
        }
    }
    unreachable!("every ESS-consistent chain has a dominator");
}

/// Picks the chain predecessor of `pos` used by the trace-back: `None` for
/// source-attached jobs. When the job starts strictly after its release, the
/// parent is a predecessor completing exactly at the start (smallest id on
/// ties). When it starts at its release, the parent is a predecessor with
/// completion at most the start, largest completion first, then smallest id.
fn chain_parent(inst: &Instance, ess: &EssResult, pos: usize) -> Option<usize> {
    if inst.is_root(pos) {
        return None;
    }
    let s = ess.start(pos);
    let job = inst.job(pos);
    let pick = if s > job.r {
        inst.preds(pos)
            .iter()
            .copied()
            .filter(|&p| ess.completion(p) == s)
            .min_by_key(|&p| inst.id(p))
    } else {
        inst.preds(pos)
            .iter()
            .copied()
            .filter(|&p| ess.completion(p) <= s)
            .min_by_key(|&p| (Reverse(ess.completion(p)), inst.id(p)))
    };
    Some(pick.expect("earliest start schedule guarantees a qualifying predecessor"))
}

/// Traces one minimal chain of `target` back to the source.
pub fn minimal_chain(inst: &Instance, ess: &EssResult, target: usize) -> MinimalChain {
    let mut path = vec![target];
    let mut cur = target;
    while let Some(parent) = chain_parent(inst, ess, cur) {
        path.push(parent);
        cur = parent;
    }
    path.reverse();
    let length = ess.completion(target);
    let dominator = dominator_index(inst, &path, length);
    MinimalChain { path, dominator, length }
}

/// One minimal chain per job such that whenever `i` lies on the chain of
/// `j`, the chain of `i` is the corresponding prefix. The trace-back choice
/// depends only on the job itself, so recording it once per job yields the
/// prefix property by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedCollection {
    parent: Vec<Option<usize>>,
}

impl ClosedCollection {
    /// Chain predecessor of `pos` within its own chain.
    pub fn parent(&self, pos: usize) -> Option<usize> {
        self.parent[pos]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Materializes the chain of one job.
    pub fn chain(&self, inst: &Instance, ess: &EssResult, pos: usize) -> MinimalChain {
        let mut path = vec![pos];
        let mut cur = pos;
        while let Some(parent) = self.parent[cur] {
            path.push(parent);
            cur = parent;
        }
        path.reverse();
        let length = ess.completion(pos);
        let dominator = dominator_index(inst, &path, length);
        MinimalChain { path, dominator, length }
    }

    /// True iff `anc` lies on the chain of `pos` (including `pos` itself).
    pub fn on_chain(&self, anc: usize, pos: usize) -> bool {
        let mut cur = Some(pos);
        while let Some(c) = cur {
            if c == anc {
                return true;
            }
            cur = self.parent[c];
        }
        false
    }

    /// Builds a collection from explicit per-job parent choices, validating
    /// each chain step against the earliest start schedule. The prefix
    /// property is inherent to the representation.
    pub fn from_parent_choices(
        inst: &Instance,
        ess: &EssResult,
        parent: Vec<Option<usize>>,
    ) -> Result<ClosedCollection, ChainError> {
        assert_eq!(parent.len(), inst.len());
        for pos in 0..inst.len() {
            match parent[pos] {
                None => {
                    if !inst.is_root(pos) {
                        return Err(ChainError::HeadHasPredecessors { id: inst.id(pos) });
                    }
                    if ess.start(pos) != inst.job(pos).r {
                        return Err(ChainError::NotEssConsistent { id: inst.id(pos) });
                    }
                }
                Some(par) => {
                    if !inst.preds(pos).contains(&par) {
                        return Err(ChainError::NotAPath {
                            from: inst.id(par),
                            to: inst.id(pos),
                        });
                    }
                    if ess.start(pos) != inst.job(pos).r.max(ess.completion(par)) {
                        return Err(ChainError::NotEssConsistent { id: inst.id(pos) });
                    }
                }
            }
        }
        Ok(ClosedCollection { parent })
    }
}

/// The canonical closed collection: the deterministic trace-back choice for
/// every job.
pub fn closed_collection(inst: &Instance, ess: &EssResult) -> ClosedCollection {
    let parent = (0..inst.len())
        .map(|pos| chain_parent(inst, ess, pos))
        .collect();
    ClosedCollection { parent }
}

/// The two elementary lower bounds on the optimal makespan: total work
/// split evenly over the machines, and the longest minimal chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBounds {
    pub volume: RatTime,
    pub chain: u64,
}

impl LowerBounds {
    pub fn best(&self) -> RatTime {
        self.volume.max(RatTime::from_int(self.chain))
    }
}

pub fn lower_bounds(inst: &Instance, ess: &EssResult) -> LowerBounds {
    LowerBounds {
        volume: RatTime::from_int(inst.total_processing()) / RatTime::from_int(inst.machines() as u64),
        chain: ess.max_chain_length(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_instance, RawJob};
    use crate::testutil::fig1;

    fn fig1_ess() -> (Instance, EssResult) {
        let inst = fig1(3);
        let ess = earliest_start_schedule(&inst).unwrap();
        (inst, ess)
    }

    #[test]
    fn fig1_completions_match_known_values() {
        let (_, ess) = fig1_ess();
        // j1..j8, k
        let expected = [3u64, 3, 2, 6, 4, 5, 7, 8, 8];
        for (pos, &c) in expected.iter().enumerate() {
            assert_eq!(ess.completion(pos), c, "completion of position {pos}");
        }
        assert_eq!(ess.max_chain_length(), 8);
    }

    #[test]
    fn single_job_starts_at_release() {
        let inst = build_instance(1, &[RawJob { id: 0, p: 4, r: 2 }], &[]).unwrap();
        let ess = earliest_start_schedule(&inst).unwrap();
        assert_eq!(ess.start(0), 2);
        assert_eq!(ess.completion(0), 6);
    }

    #[test]
    fn unreachable_jobs_are_named() {
        let raw = [RawJob { id: 0, p: 1, r: 0 }, RawJob { id: 1, p: 1, r: 0 }];
        let inst = build_instance(1, &raw, &[(0, 1), (1, 0)]).unwrap();
        let err = earliest_start_schedule(&inst).unwrap_err();
        assert_eq!(err.unreachable, vec![JobId(0), JobId(1)]);
    }

    #[test]
    fn fig1_chain_of_k() {
        let (inst, ess) = fig1_ess();
        let chain = minimal_chain(&inst, &ess, 8);
        // Trace-back with the fixed tie-breaks picks j3, j5, j6, j7, k.
        assert_eq!(chain.ids(&inst), vec![JobId(2), JobId(4), JobId(5), JobId(6), JobId(8)]);
        assert_eq!(chain.length, 8);
        assert_eq!(inst.id(chain.dominator_pos()), JobId(5)); // j6
    }

    #[test]
    fn fig1_alternative_chain_dominator() {
        // The other minimal chain of k: j2, j6, j7, k with mc = 4 + 1 + 2 + 1.
        let (inst, ess) = fig1_ess();
        let chain = MinimalChain::from_path(&inst, &ess, vec![1, 5, 6, 8]).unwrap();
        assert_eq!(chain.length, 8);
        assert_eq!(inst.id(chain.dominator_pos()), JobId(5)); // j6
    }

    #[test]
    fn predecessorless_job_is_its_own_chain() {
        let inst = build_instance(2, &[RawJob { id: 3, p: 5, r: 2 }], &[]).unwrap();
        let ess = earliest_start_schedule(&inst).unwrap();
        let chain = minimal_chain(&inst, &ess, 0);
        assert_eq!(chain.path, vec![0]);
        assert_eq!(chain.length, 7);
        assert_eq!(chain.dominator, 0);
    }

    #[test]
    fn dominator_identity_fails_above_dominator() {
        let (inst, ess) = fig1_ess();
        let chain = minimal_chain(&inst, &ess, 8);
        let mut suffix = 0u64;
        for h in (0..chain.path.len()).rev() {
            let job = inst.job(chain.path[h]);
            suffix += job.p;
            let holds = job.r + suffix == chain.length;
            assert_eq!(holds, h == chain.dominator, "index {h}");
            if holds {
                break;
            }
        }
    }

    #[test]
    fn fig1_collection_is_prefix_closed() {
        let (inst, ess) = fig1_ess();
        let coll = closed_collection(&inst, &ess);
        let chain_k = coll.chain(&inst, &ess, 8).path;
        let chain_j7 = coll.chain(&inst, &ess, 6).path;
        let chain_j6 = coll.chain(&inst, &ess, 5).path;
        assert_eq!(&chain_k[..chain_k.len() - 1], &chain_j7[..]);
        assert_eq!(&chain_j7[..chain_j7.len() - 1], &chain_j6[..]);
    }

    #[test]
    fn simple_chain_instance_has_unique_chains() {
        let raw = [
            RawJob { id: 0, p: 1, r: 0 },
            RawJob { id: 1, p: 1, r: 0 },
            RawJob { id: 2, p: 1, r: 0 },
        ];
        let inst = build_instance(1, &raw, &[(0, 1), (1, 2)]).unwrap();
        let ess = earliest_start_schedule(&inst).unwrap();
        let coll = closed_collection(&inst, &ess);
        assert_eq!(coll.chain(&inst, &ess, 2).path, vec![0, 1, 2]);
        assert_eq!(coll.chain(&inst, &ess, 1).path, vec![0, 1]);
        assert_eq!(coll.chain(&inst, &ess, 0).path, vec![0]);
    }

    #[test]
    fn lower_bound_examples() {
        let (inst, ess) = fig1_ess();
        let lb = lower_bounds(&inst, &ess);
        assert_eq!(lb.volume, RatTime::from_int(6));
        assert_eq!(lb.chain, 8);
        assert_eq!(lb.best(), RatTime::from_int(8));

        let one = build_instance(2, &[RawJob { id: 0, p: 5, r: 0 }], &[]).unwrap();
        let ess1 = earliest_start_schedule(&one).unwrap();
        let lb1 = lower_bounds(&one, &ess1);
        assert_eq!(lb1.volume, RatTime::new(5, 2));
        assert_eq!(lb1.chain, 5);
    }

    #[test]
    fn chain_bound_is_max_processing_without_precedence() {
        let raw: Vec<RawJob> = (0..4).map(|i| RawJob { id: i, p: (i + 1) as i64, r: 0 }).collect();
        let inst = build_instance(2, &raw, &[]).unwrap();
        let ess = earliest_start_schedule(&inst).unwrap();
        assert_eq!(lower_bounds(&inst, &ess).chain, 4);
    }
}
