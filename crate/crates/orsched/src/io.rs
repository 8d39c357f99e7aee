//! JSON file formats for instances and schedules.
//!
//! Instances carry string job names; internally jobs get dense integer ids
//! in file order. The dummy source is never serialized. Rationals appear as
//! reduced `[num, den]` pairs, so serialization round-trips byte-exactly.

use crate::instance::{build_instance, Instance, JobId, RawJob};
use crate::rational::RatTime;
use crate::schedule::{Piece, Schedule};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Build(#[from] crate::error::BuildError),
    #[error("duplicate job name {0:?}")]
    DuplicateName(String),
    #[error("unknown job name {0:?}")]
    UnknownName(String),
    #[error("schedule lists makespan {listed} but pieces end at {actual}")]
    MakespanMismatch { listed: RatTime, actual: RatTime },
}

#[derive(Serialize, Deserialize)]
struct JobSpec {
    id: String,
    p: i64,
    r: i64,
    #[serde(default)]
    preds: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    machines: usize,
    jobs: Vec<JobSpec>,
}

/// An instance together with its external job names, index-aligned with the
/// instance's positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedInstance {
    pub instance: Instance,
    pub names: Vec<String>,
}

impl NamedInstance {
    pub fn name(&self, id: JobId) -> &str {
        let pos = self.instance.position(id).expect("id belongs to instance");
        &self.names[pos]
    }

    pub fn name_of_pos(&self, pos: usize) -> &str {
        &self.names[pos]
    }

    pub fn position_of_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

pub fn parse_instance(text: &str) -> Result<NamedInstance, IoError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let mut name_index: HashMap<&str, u32> = HashMap::new();
    for (pos, job) in file.jobs.iter().enumerate() {
        if name_index.insert(&job.id, pos as u32).is_some() {
            return Err(IoError::DuplicateName(job.id.clone()));
        }
    }
    let raw: Vec<RawJob> = file
        .jobs
        .iter()
        .enumerate()
        .map(|(pos, j)| RawJob {
            id: pos as u32,
            p: j.p,
            r: j.r,
        })
        .collect();
    let mut edges = Vec::new();
    for (pos, job) in file.jobs.iter().enumerate() {
        for pred in &job.preds {
            let &from = name_index
                .get(pred.as_str())
                .ok_or_else(|| IoError::UnknownName(pred.clone()))?;
            edges.push((from, pos as u32));
        }
    }
    let instance = build_instance(file.machines, &raw, &edges)?;
    Ok(NamedInstance {
        instance,
        names: file.jobs.into_iter().map(|j| j.id).collect(),
    })
}

pub fn serialize_instance(named: &NamedInstance) -> String {
    let inst = &named.instance;
    let jobs = (0..inst.len())
        .map(|pos| JobSpec {
            id: named.names[pos].clone(),
            p: inst.job(pos).p as i64,
            r: inst.job(pos).r as i64,
            preds: inst
                .preds(pos)
                .iter()
                .map(|&p| named.names[p].clone())
                .collect(),
        })
        .collect();
    let file = InstanceFile {
        machines: inst.machines(),
        jobs,
    };
    let mut out = serde_json::to_string_pretty(&file).expect("serialization cannot fail");
    out.push('\n');
    out
}

#[derive(Serialize, Deserialize)]
struct PieceSpec {
    job: String,
    machine: usize,
    start: RatTime,
    end: RatTime,
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    makespan: RatTime,
    preemptive: bool,
    pieces: Vec<PieceSpec>,
}

pub fn serialize_schedule(named: &NamedInstance, sched: &Schedule) -> String {
    let file = ScheduleFile {
        makespan: sched.makespan(),
        preemptive: sched.is_preemptive(),
        pieces: sched
            .pieces
            .iter()
            .map(|p| PieceSpec {
                job: named.name(p.job).to_owned(),
                machine: p.machine,
                start: p.start,
                end: p.end,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("serialization cannot fail");
    out.push('\n');
    out
}

pub fn parse_schedule(text: &str, named: &NamedInstance) -> Result<Schedule, IoError> {
    let file: ScheduleFile = serde_json::from_str(text)?;
    let mut pieces = Vec::with_capacity(file.pieces.len());
    for p in file.pieces {
        let pos = named
            .position_of_name(&p.job)
            .ok_or_else(|| IoError::UnknownName(p.job.clone()))?;
        pieces.push(Piece {
            job: named.instance.id(pos),
            machine: p.machine,
            start: p.start,
            end: p.end,
        });
    }
    let sched = Schedule::new(pieces);
    if sched.makespan() != file.makespan {
        return Err(IoError::MakespanMismatch {
            listed: file.makespan,
            actual: sched.makespan(),
        });
    }
    Ok(sched)
}
