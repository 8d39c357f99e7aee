//! Fixtures and seeded instance generators shared by the test suites and
//! benchmarks. Not part of the public API surface.

use crate::chains::EssResult;
use crate::instance::{build_instance, Instance, RawJob};
use crate::rational::RatTime;
use crate::schedule::{Piece, Schedule};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// The nine-job example instance used throughout the golden tests.
/// Positions 0..8 are j1..j8, position 8 is k.
///
/// p: j1 = j6 = k = 1, j2 = j3 = j5 = j7 = 2, j4 = 3, j8 = 4;
/// r: j1 = 2, j2 = 1, j6 = 4, otherwise 0;
/// arcs: j1->j4, j2->{j4, j5, j6}, j3->j5, j4->j7, j5->{j6, j8},
/// j6->{j7, j8}, j7->k, j8->k.
pub fn fig1(machines: usize) -> Instance {
    let raw = [
        RawJob { id: 0, p: 1, r: 2 }, // j1
        RawJob { id: 1, p: 2, r: 1 }, // j2
        RawJob { id: 2, p: 2, r: 0 }, // j3
        RawJob { id: 3, p: 3, r: 0 }, // j4
        RawJob { id: 4, p: 2, r: 0 }, // j5
        RawJob { id: 5, p: 1, r: 4 }, // j6
        RawJob { id: 6, p: 2, r: 0 }, // j7
        RawJob { id: 7, p: 4, r: 0 }, // j8
        RawJob { id: 8, p: 1, r: 0 }, // k
    ];
    let edges = [
        (0, 3),
        (1, 3),
        (1, 4),
        (1, 5),
        (2, 4),
        (3, 6),
        (4, 5),
        (4, 7),
        (5, 6),
        (5, 7),
        (6, 8),
        (7, 8),
    ];
    build_instance(machines, &raw, &edges).expect("fixture is valid")
}

/// Interprets an earliest start schedule as pieces, one machine per job.
/// Feasible when the instance has at least `n` machines.
pub fn ess_as_schedule(inst: &Instance, ess: &EssResult) -> Schedule {
    let pieces = (0..inst.len())
        .map(|pos| Piece {
            job: inst.id(pos),
            machine: pos,
            start: RatTime::from_int(ess.start(pos)),
            end: RatTime::from_int(ess.completion(pos)),
        })
        .collect();
    Schedule::new(pieces)
}

/// Parameters for seeded random instances used by the test corpora.
#[derive(Clone, Copy, Debug)]
pub struct RandomSpec {
    pub max_jobs: usize,
    pub machines: usize,
    pub max_processing: u64,
    pub max_release: u64,
    /// Probability of each forward arc in a random topological labeling.
    pub edge_probability: f64,
    /// When false, arbitrary arcs (including cycles) are sampled, so the
    /// instance may be infeasible.
    pub dag_only: bool,
}

impl RandomSpec {
    pub fn desk(max_jobs: usize, machines: usize, max_processing: u64, max_release: u64) -> RandomSpec {
        RandomSpec {
            max_jobs,
            machines,
            max_processing,
            max_release,
            edge_probability: 0.35,
            dag_only: true,
        }
    }
}

/// Deterministic random instance. DAG sampling keeps every job reachable
/// from the source; non-DAG sampling may produce infeasible instances.
pub fn random_instance(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> Instance {
    let n = rng.random_range(1..=spec.max_jobs);
    let raw: Vec<RawJob> = (0..n)
        .map(|i| RawJob {
            id: i as u32,
            p: rng.random_range(1..=spec.max_processing) as i64,
            r: rng.random_range(0..=spec.max_release) as i64,
        })
        .collect();
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            if spec.dag_only && label[a] >= label[b] {
                continue;
            }
            if rng.random_bool(spec.edge_probability) {
                edges.push((a as u32, b as u32));
            }
        }
    }
    build_instance(spec.machines, &raw, &edges).expect("generated data is valid")
}

/// A unit-processing-time variant of [`random_instance`].
pub fn random_unit_instance(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> Instance {
    let mut spec = *spec;
    spec.max_processing = 1;
    random_instance(rng, &spec)
}

/// A sparse random DAG at scale, for the smoke tests and benchmarks.
pub fn large_sparse_instance(seed: u64, n: usize, machines: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<RawJob> = (0..n)
        .map(|i| RawJob {
            id: i as u32,
            p: rng.random_range(1..=10) as i64,
            r: rng.random_range(0..=100) as i64,
        })
        .collect();
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(&mut rng);
    // About two incoming arcs per job on average.
    let mut edges = Vec::new();
    for b in 0..n {
        for _ in 0..2 {
            let a = rng.random_range(0..n);
            if a != b && label[a] < label[b] {
                edges.push((a as u32, b as u32));
            }
        }
    }
    build_instance(machines, &raw, &edges).expect("generated data is valid")
}
