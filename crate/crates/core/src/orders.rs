//! Job order policies (FCFS and Smith Rule) and the instance families on
//! which a fixed order is provably far from optimal.

use std::collections::HashMap;

use crate::model::{Instance, Job, JobId, Task, TaskKind};

/// A total order over the jobs of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobOrder {
    ids: Vec<JobId>,
    position: HashMap<JobId, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderError {
    /// The id list is not a permutation of the instance's job ids.
    NotAPermutation(String),
}

impl std::fmt::Display for OrderError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrderError::NotAPermutation(msg) => write!(f, "not a permutation: {msg}"),
        }
    }
}

impl std::error::Error for OrderError {}

impl JobOrder {
    /// Builds an order from explicit ids, checking totality against `inst`.
    pub fn new(inst: &Instance, ids: Vec<JobId>) -> Result<Self, OrderError> {
        if ids.len() != inst.jobs.len() {
            return Err(OrderError::NotAPermutation(format!(
                "{} ids for {} jobs",
                ids.len(),
                inst.jobs.len()
            )));
        }
        let mut position = HashMap::new();
        for (pos, &id) in ids.iter().enumerate() {
            if inst.job_by_id(id).is_none() {
                return Err(OrderError::NotAPermutation(format!("unknown job id {id}")));
            }
            if position.insert(id, pos).is_some() {
                return Err(OrderError::NotAPermutation(format!("job id {id} repeats")));
            }
        }
        Ok(JobOrder { ids, position })
    }

    pub fn ids(&self) -> &[JobId] {
        &self.ids
    }

    pub fn position(&self, id: JobId) -> usize {
        self.position[&id]
    }

    /// True when `a` comes strictly before `b`.
    pub fn precedes(&self, a: JobId, b: JobId) -> bool {
        self.position(a) < self.position(b)
    }
}

/// First Come First Serve: ascending release date, ties by job id.
pub fn fcfs_order(inst: &Instance) -> JobOrder {
    let mut ids: Vec<JobId> = inst.jobs.iter().map(|j| j.id).collect();
    ids.sort_by(|&a, &b| {
        let ja = inst.job_by_id(a).unwrap();
        let jb = inst.job_by_id(b).unwrap();
        ja.release.partial_cmp(&jb.release).unwrap().then(a.cmp(&b))
    });
    JobOrder::new(inst, ids).expect("ids drawn from the instance")
}

/// Smith Rule: descending weight over total work volume, ties by job id.
/// A job with zero total volume has infinite ratio and comes first.
pub fn smith_order(inst: &Instance) -> JobOrder {
    let mut ids: Vec<JobId> = inst.jobs.iter().map(|j| j.id).collect();
    ids.sort_by(|&a, &b| {
        let ja = inst.job_by_id(a).unwrap();
        let jb = inst.job_by_id(b).unwrap();
        // w_a / v_a > w_b / v_b compared as w_a * v_b > w_b * v_a, which also
        // orders zero-volume (infinite ratio) jobs first without dividing.
        let lhs = ja.weight * jb.total_volume();
        let rhs = jb.weight * ja.total_volume();
        rhs.partial_cmp(&lhs).unwrap().then(a.cmp(&b))
    });
    JobOrder::new(inst, ids).expect("ids drawn from the instance")
}

/// Family on which the FCFS-ordered optimum is a factor Omega(n) above the
/// unordered optimum: n jobs on m = n processors, job j owning the diagonal
/// unit-volume Map task and tiny Reduce tasks everywhere else, with releases
/// staggered by eps so FCFS serializes the Map tasks.
pub fn gen_fcfs_gap_instance(n: usize, eps: f64) -> Instance {
    assert!(n >= 2, "family needs at least two jobs");
    assert!(eps > 0.0 && eps < 1.0, "eps must be a small positive value");
    let jobs = (1..=n)
        .map(|j| Job {
            id: j as JobId,
            weight: 1.0,
            release: (j - 1) as f64 * eps,
            tasks: (1..=n)
                .map(|i| Task {
                    processor: i,
                    kind: if i == j { TaskKind::Map } else { TaskKind::Reduce },
                    volume: if i == j { 1.0 } else { eps },
                })
                .collect(),
        })
        .collect();
    Instance { beta: 2.0, energy_budget: 1.0, num_processors: n, jobs }
}

/// Family on which the Smith-Rule-ordered optimum is arbitrarily worse than
/// the FCFS one: a single working processor, n-1 unit jobs released at 0 and
/// one slightly smaller job released far in the future. Smith Rule puts the
/// late job first, forcing everyone to wait for it.
///
/// Each job carries its work as one Map task; a zero-volume Reduce on a second
/// processor satisfies the at-least-one-of-each invariant for free.
pub fn gen_sr_gap_instance(n: usize, eps: f64, release: f64) -> Instance {
    assert!(n >= 2, "family needs at least two jobs");
    assert!(eps > 0.0 && eps < 1.0, "eps must be a small positive value");
    let jobs = (1..=n)
        .map(|j| Job {
            id: j as JobId,
            weight: 1.0,
            release: if j == n { release } else { 0.0 },
            tasks: vec![
                Task {
                    processor: 1,
                    kind: TaskKind::Map,
                    volume: if j == n { 1.0 - eps } else { 1.0 },
                },
                Task { processor: 2, kind: TaskKind::Reduce, volume: 0.0 },
            ],
        })
        .collect();
    Instance { beta: 2.0, energy_budget: 1.0, num_processors: 2, jobs }
}
