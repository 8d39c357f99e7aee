//! Problem instances: jobs with integer processing times and release dates
//! on `m` identical machines, connected by an OR-precedence digraph.
//!
//! A job with predecessors may start once *at least one* predecessor has
//! completed. Jobs without predecessors implicitly hang off a dummy source
//! that finishes at time 0; the source is never stored or serialized, its
//! arcs are exactly the jobs with an empty predecessor list.

use crate::error::BuildError;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

/// Opaque job identifier, unique within an instance. The dummy source has no
/// `JobId`; it is represented implicitly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct JobId(pub u32);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Job {
    pub id: JobId,
    /// Processing time, strictly positive.
    pub p: u64,
    /// Release date, non-negative.
    pub r: u64,
}

/// Unvalidated job data as it arrives from parsers or callers.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RawJob {
    pub id: u32,
    pub p: i64,
    pub r: i64,
}

/// A validated instance. Immutable after construction; all queries are by
/// dense position (`0..n`), with `JobId` lookups going through an index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    machines: usize,
    jobs: Vec<Job>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    index: HashMap<u32, usize>,
}

/// Outcome of the feasibility-existence check: a feasible schedule exists
/// iff every job is reachable from the dummy source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachabilityReport {
    pub all_reachable: bool,
    /// Jobs not reachable from the source, ascending by id.
    pub unreachable: Vec<JobId>,
}

/// Validates raw data and assembles an [`Instance`].
///
/// Duplicate edges are collapsed; the dummy source is implicit, so feeding an
/// instance's own jobs and edges back in reproduces it exactly. Cycles among
/// jobs are accepted here and only rejected by [`check_reachable`].
pub fn build_instance(
    machines: usize,
    raw_jobs: &[RawJob],
    edges: &[(u32, u32)],
) -> Result<Instance, BuildError> {
    if machines == 0 {
        return Err(BuildError::NoMachines);
    }
    let mut index = HashMap::with_capacity(raw_jobs.len());
    let mut jobs = Vec::with_capacity(raw_jobs.len());
    for (pos, raw) in raw_jobs.iter().enumerate() {
        if raw.p <= 0 {
            return Err(BuildError::NonPositiveProcessing { id: raw.id, p: raw.p });
        }
        if raw.r < 0 {
            return Err(BuildError::NegativeRelease { id: raw.id, r: raw.r });
        }
        if index.insert(raw.id, pos).is_some() {
            return Err(BuildError::DuplicateJob { id: raw.id });
        }
        jobs.push(Job {
            id: JobId(raw.id),
            p: raw.p as u64,
            r: raw.r as u64,
        });
    }
    let mut edge_set = BTreeSet::new();
    for &(from, to) in edges {
        let &fp = index
            .get(&from)
            .ok_or(BuildError::UnknownEdgeEndpoint { id: from, from, to })?;
        let &tp = index
            .get(&to)
            .ok_or(BuildError::UnknownEdgeEndpoint { id: to, from, to })?;
        if fp == tp {
            return Err(BuildError::SelfLoop { id: from });
        }
        edge_set.insert((fp, tp));
    }
    let mut preds = vec![Vec::new(); jobs.len()];
    let mut succs = vec![Vec::new(); jobs.len()];
    for (fp, tp) in edge_set {
        preds[tp].push(fp);
        succs[fp].push(tp);
    }
    Ok(Instance {
        machines,
        jobs,
        preds,
        succs,
        index,
    })
}

/// Breadth-first reachability from the dummy source. True iff every job can
/// be reached, i.e. a feasible schedule exists.
pub fn check_reachable(inst: &Instance) -> ReachabilityReport {
    let n = inst.len();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&j| inst.is_root(j)).collect();
    for &j in &queue {
        seen[j] = true;
    }
    while let Some(j) = queue.pop_front() {
        for &s in inst.succs(j) {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    let mut unreachable: Vec<JobId> = (0..n).filter(|&j| !seen[j]).map(|j| inst.id(j)).collect();
    unreachable.sort();
    ReachabilityReport {
        all_reachable: unreachable.is_empty(),
        unreachable,
    }
}

impl Instance {
    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job(&self, pos: usize) -> &Job {
        &self.jobs[pos]
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn id(&self, pos: usize) -> JobId {
        self.jobs[pos].id
    }

    pub fn position(&self, id: JobId) -> Option<usize> {
        self.index.get(&id.0).copied()
    }

    /// Positions of the real predecessors of `pos` (empty for source-attached
    /// jobs).
    pub fn preds(&self, pos: usize) -> &[usize] {
        &self.preds[pos]
    }

    pub fn succs(&self, pos: usize) -> &[usize] {
        &self.succs[pos]
    }

    /// True iff the job's only predecessor is the dummy source.
    pub fn is_root(&self, pos: usize) -> bool {
        self.preds[pos].is_empty()
    }

    /// All precedence arcs as (predecessor, successor) positions.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.preds
            .iter()
            .enumerate()
            .flat_map(|(to, ps)| ps.iter().map(move |&from| (from, to)))
    }

    pub fn total_processing(&self) -> u64 {
        self.jobs.iter().map(|j| j.p).sum()
    }

    /// Raw data in the shape accepted by [`build_instance`].
    pub fn to_raw(&self) -> (Vec<RawJob>, Vec<(u32, u32)>) {
        let raw = self
            .jobs
            .iter()
            .map(|j| RawJob {
                id: j.id.0,
                p: j.p as i64,
                r: j.r as i64,
            })
            .collect();
        let edges = self
            .arcs()
            .map(|(from, to)| (self.id(from).0, self.id(to).0))
            .collect();
        (raw, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::fig1;

    #[test]
    fn fig1_builds_with_three_roots() {
        let inst = fig1(3);
        assert_eq!(inst.len(), 9);
        let roots: Vec<JobId> = (0..9).filter(|&j| inst.is_root(j)).map(|j| inst.id(j)).collect();
        assert_eq!(roots, vec![JobId(0), JobId(1), JobId(2)]); // j1, j2, j3
    }

    #[test]
    fn single_job_hangs_off_source() {
        let inst = build_instance(1, &[RawJob { id: 7, p: 4, r: 2 }], &[]).unwrap();
        assert!(inst.is_root(0));
    }

    #[test]
    fn rejects_bad_raw_data() {
        let ok = RawJob { id: 0, p: 1, r: 0 };
        assert!(matches!(
            build_instance(1, &[RawJob { id: 1, p: 0, r: 0 }], &[]),
            Err(BuildError::NonPositiveProcessing { id: 1, .. })
        ));
        assert!(matches!(
            build_instance(1, &[RawJob { id: 2, p: 1, r: -3 }], &[]),
            Err(BuildError::NegativeRelease { id: 2, .. })
        ));
        assert!(matches!(
            build_instance(1, &[ok, RawJob { id: 0, p: 2, r: 0 }], &[]),
            Err(BuildError::DuplicateJob { id: 0 })
        ));
        assert!(matches!(
            build_instance(1, &[ok], &[(0, 9)]),
            Err(BuildError::UnknownEdgeEndpoint { id: 9, .. })
        ));
        assert!(matches!(
            build_instance(1, &[ok], &[(0, 0)]),
            Err(BuildError::SelfLoop { id: 0 })
        ));
        assert!(matches!(build_instance(0, &[ok], &[]), Err(BuildError::NoMachines)));
    }

    #[test]
    fn duplicate_edges_collapse_and_rebuild_is_identity() {
        let raw = [RawJob { id: 0, p: 1, r: 0 }, RawJob { id: 1, p: 2, r: 0 }];
        let inst = build_instance(2, &raw, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(inst.preds(1), &[0]);
        let (raw2, edges2) = inst.to_raw();
        let again = build_instance(2, &raw2, &edges2).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn reachability_fig1_and_two_cycle() {
        assert!(check_reachable(&fig1(3)).all_reachable);

        let raw = [RawJob { id: 0, p: 1, r: 0 }, RawJob { id: 1, p: 1, r: 0 }];
        let inst = build_instance(1, &raw, &[(0, 1), (1, 0)]).unwrap();
        let rep = check_reachable(&inst);
        assert!(!rep.all_reachable);
        assert_eq!(rep.unreachable, vec![JobId(0), JobId(1)]);
    }
}
