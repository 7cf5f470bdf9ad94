//! Domain types for instances and schedules, feasibility validation, and
//! objective / energy accounting.
//!
//! An instance is a set of jobs, each made of Map and Reduce tasks preassigned
//! to processors. A schedule assigns every task a start time and a duration
//! (equivalently a speed), and is feasible when processors never run two tasks
//! at once, no task starts before its job's release date, every Reduce task
//! starts after all Map tasks of its job complete, and the total energy
//! `sum v * s^(beta-1)` stays within the budget.

use serde::{Deserialize, Serialize};

/// Absolute tolerance used by the schedule validator; solver output is
/// approximate, exact comparisons would reject valid schedules.
pub const TIME_TOL: f64 = 1e-9;

pub type JobId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Map,
    Reduce,
}

/// A single task, preassigned to a processor (1-based index).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Task {
    pub processor: usize,
    pub kind: TaskKind,
    pub volume: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub weight: f64,
    pub release: f64,
    pub tasks: Vec<Task>,
}

impl Job {
    /// Total work volume over all tasks of the job (used by Smith Rule).
    pub fn total_volume(&self) -> f64 {
        self.tasks.iter().map(|t| t.volume).sum()
    }
}

/// A scheduling instance: speed-scalable processors, an energy budget `E`,
/// and the power exponent `beta` (power = speed^beta).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    pub beta: f64,
    pub energy_budget: f64,
    pub num_processors: usize,
    pub jobs: Vec<Job>,
}

/// Positional reference to a task: indices into `jobs` and `jobs[job].tasks`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaskRef {
    pub job: usize,
    pub task: usize,
}

impl Instance {
    pub fn job_by_id(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn task(&self, r: TaskRef) -> Option<(&Job, &Task)> {
        let job = self.jobs.get(r.job)?;
        let task = job.tasks.get(r.task)?;
        Some((job, task))
    }

    /// All task references in storage order (job order, then task order).
    pub fn task_refs(&self) -> Vec<TaskRef> {
        let mut out = Vec::new();
        for (ji, job) in self.jobs.iter().enumerate() {
            for ti in 0..job.tasks.len() {
                out.push(TaskRef { job: ji, task: ti });
            }
        }
        out
    }

    /// Task references with positive work volume, in storage order.
    pub fn positive_task_refs(&self) -> Vec<TaskRef> {
        self.task_refs()
            .into_iter()
            .filter(|&r| self.task(r).unwrap().1.volume > 0.0)
            .collect()
    }

    pub fn num_tasks(&self) -> usize {
        self.jobs.iter().map(|j| j.tasks.len()).sum()
    }

    /// Smallest positive work volume, `None` when every task has zero volume.
    pub fn v_min(&self) -> Option<f64> {
        self.jobs
            .iter()
            .flat_map(|j| j.tasks.iter())
            .filter(|t| t.volume > 0.0)
            .map(|t| t.volume)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }

    pub fn v_max(&self) -> f64 {
        self.jobs
            .iter()
            .flat_map(|j| j.tasks.iter())
            .map(|t| t.volume)
            .fold(0.0, f64::max)
    }

    pub fn w_min(&self) -> f64 {
        self.jobs.iter().map(|j| j.weight).fold(f64::INFINITY, f64::min)
    }

    pub fn w_max(&self) -> f64 {
        self.jobs.iter().map(|j| j.weight).fold(0.0, f64::max)
    }

    pub fn r_max(&self) -> f64 {
        self.jobs.iter().map(|j| j.release).fold(0.0, f64::max)
    }

    /// True when some job has both a positive-volume Map and a positive-volume
    /// Reduce task, i.e. the precedence constraints actually bind.
    pub fn has_precedence_pairs(&self) -> bool {
        self.jobs.iter().any(|j| {
            let pos_map = j
                .tasks
                .iter()
                .any(|t| t.kind == TaskKind::Map && t.volume > 0.0);
            let pos_red = j
                .tasks
                .iter()
                .any(|t| t.kind == TaskKind::Reduce && t.volume > 0.0);
            pos_map && pos_red
        })
    }

    pub fn all_released_at_zero(&self) -> bool {
        self.jobs.iter().all(|j| j.release == 0.0)
    }
}

/// One placed task. `duration == 0` and `speed == 0` encode a zero-volume
/// task, which occupies no processor time and consumes no energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEntry {
    pub task: TaskRef,
    pub processor: usize,
    pub start: f64,
    pub duration: f64,
    pub speed: f64,
}

impl ScheduleEntry {
    pub fn completion(&self) -> f64 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
}

impl Schedule {
    pub fn makespan(&self) -> f64 {
        self.entries.iter().map(|e| e.completion()).fold(0.0, f64::max)
    }

    /// Completion time of a job: the latest completion among its Reduce tasks.
    pub fn job_completion(&self, inst: &Instance, job_idx: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| {
                e.task.job == job_idx
                    && inst.task(e.task).map(|(_, t)| t.kind) == Some(TaskKind::Reduce)
            })
            .map(|e| e.completion())
            .fold(0.0, f64::max)
    }
}

/// A violated instance or schedule rule. `rule` is a stable identifier,
/// `message` names the offending field and values.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

impl Violation {
    fn new(rule: &'static str, message: String) -> Self {
        Violation { rule, message }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// A schedule entry references a task that does not exist in the instance.
    UnknownTask { job: usize, task: usize },
    /// A positive-volume task was given zero duration; its energy is undefined.
    UndefinedEnergy { job: usize, task: usize },
}

impl std::fmt::Display for ModelError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelError::UnknownTask { job, task } => {
                write!(f, "schedule references unknown task (job index {job}, task index {task})")
            }
            ModelError::UndefinedEnergy { job, task } => {
                write!(
                    f,
                    "positive-volume task (job index {job}, task index {task}) has zero duration"
                )
            }
        }
    }
}

impl std::error::Error for ModelError {}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Allow a job to place several tasks on the same processor. Off by
    /// default: the base model gives each job at most one task per processor.
    pub allow_colocated_tasks: bool,
}

/// Checks every instance invariant with default (strict) options.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    validate_instance_with(inst, ValidateOptions::default())
}

pub fn validate_instance_with(inst: &Instance, opts: ValidateOptions) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(inst.beta > 1.0) || !inst.beta.is_finite() {
        out.push(Violation::new(
            "beta-out-of-range",
            format!("beta must be finite and > 1, got {}", inst.beta),
        ));
    }
    if !(inst.energy_budget > 0.0) || !inst.energy_budget.is_finite() {
        out.push(Violation::new(
            "energy-budget-nonpositive",
            format!("energy budget must be finite and > 0, got {}", inst.energy_budget),
        ));
    }
    if inst.num_processors == 0 {
        out.push(Violation::new(
            "no-processors",
            "num_processors must be at least 1".to_string(),
        ));
    }
    let mut seen_ids = std::collections::HashSet::new();
    for job in &inst.jobs {
        if !seen_ids.insert(job.id) {
            out.push(Violation::new("duplicate-job-id", format!("job id {} repeats", job.id)));
        }
        if !(job.weight > 0.0) || !job.weight.is_finite() {
            out.push(Violation::new(
                "weight-nonpositive",
                format!("job {}: weight must be finite and > 0, got {}", job.id, job.weight),
            ));
        }
        if !(job.release >= 0.0) || !job.release.is_finite() {
            out.push(Violation::new(
                "release-negative",
                format!("job {}: release must be finite and >= 0, got {}", job.id, job.release),
            ));
        }
        if !job.tasks.iter().any(|t| t.kind == TaskKind::Map) {
            out.push(Violation::new("missing-map-task", format!("job {} lacks a Map task", job.id)));
        }
        if !job.tasks.iter().any(|t| t.kind == TaskKind::Reduce) {
            out.push(Violation::new(
                "missing-reduce-task",
                format!("job {} lacks a Reduce task", job.id),
            ));
        }
        let mut procs = std::collections::HashSet::new();
        for task in &job.tasks {
            if task.processor == 0 || task.processor > inst.num_processors {
                out.push(Violation::new(
                    "processor-out-of-range",
                    format!(
                        "job {}: processor {} outside 1..={}",
                        job.id, task.processor, inst.num_processors
                    ),
                ));
            }
            if !(task.volume >= 0.0) || !task.volume.is_finite() {
                out.push(Violation::new(
                    "volume-invalid",
                    format!("job {}: volume must be finite and >= 0, got {}", job.id, task.volume),
                ));
            }
            if !procs.insert(task.processor) && !opts.allow_colocated_tasks {
                out.push(Violation::new(
                    "multiple-tasks-per-processor",
                    format!("job {} has more than one task on processor {}", job.id, task.processor),
                ));
            }
        }
    }
    out
}

/// Checks every schedule invariant against `inst`, with the energy check run
/// against `energy_budget` (callers may pass an inflated budget when
/// evaluating energy-augmented schedules).
///
/// An entry referencing a task not present in the instance is a structural
/// error, not a violation.
pub fn validate_schedule(
    inst: &Instance,
    sched: &Schedule,
    energy_budget: f64,
) -> Result<Vec<Violation>, ModelError> {
    let mut out = Vec::new();

    let mut seen = std::collections::HashSet::new();
    for e in &sched.entries {
        let (job, task) = inst
            .task(e.task)
            .ok_or(ModelError::UnknownTask { job: e.task.job, task: e.task.task })?;
        if !seen.insert(e.task) {
            out.push(Violation::new(
                "duplicate-entry",
                format!("job {}: task on processor {} scheduled twice", job.id, task.processor),
            ));
        }
        if e.processor != task.processor {
            out.push(Violation::new(
                "processor-mismatch",
                format!(
                    "job {}: entry placed on processor {} but task is assigned to {}",
                    job.id, e.processor, task.processor
                ),
            ));
        }
        if e.start < job.release - TIME_TOL {
            out.push(Violation::new(
                "release",
                format!("job {}: start {} before release {}", job.id, e.start, job.release),
            ));
        }
        if task.volume > 0.0 {
            if e.duration <= 0.0 {
                out.push(Violation::new(
                    "duration-nonpositive",
                    format!("job {}: positive volume with duration {}", job.id, e.duration),
                ));
            } else {
                let implied = task.volume / e.duration;
                if (e.speed - implied).abs() > TIME_TOL * implied.max(1.0) {
                    out.push(Violation::new(
                        "speed-mismatch",
                        format!(
                            "job {}: speed {} inconsistent with volume/duration = {}",
                            job.id, e.speed, implied
                        ),
                    ));
                }
            }
        } else if e.duration.abs() > TIME_TOL {
            out.push(Violation::new(
                "duration-nonzero",
                format!("job {}: zero-volume task with duration {}", job.id, e.duration),
            ));
        }
    }

    for (ji, job) in inst.jobs.iter().enumerate() {
        for ti in 0..job.tasks.len() {
            let r = TaskRef { job: ji, task: ti };
            if !sched.entries.iter().any(|e| e.task == r) {
                out.push(Violation::new(
                    "missing-entry",
                    format!("job {}: task on processor {} never scheduled", job.id, job.tasks[ti].processor),
                ));
            }
        }
    }

    // Overlap: only entries that occupy processor time can collide.
    let mut by_proc: std::collections::BTreeMap<usize, Vec<&ScheduleEntry>> =
        std::collections::BTreeMap::new();
    for e in &sched.entries {
        if e.duration > 0.0 {
            by_proc.entry(e.processor).or_default().push(e);
        }
    }
    for (proc, mut entries) in by_proc {
        entries.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap());
        for pair in entries.windows(2) {
            if pair[1].start < pair[0].completion() - TIME_TOL {
                out.push(Violation::new(
                    "overlap",
                    format!(
                        "processor {}: [{}, {}) overlaps [{}, {})",
                        proc,
                        pair[0].start,
                        pair[0].completion(),
                        pair[1].start,
                        pair[1].completion()
                    ),
                ));
            }
        }
    }

    // Precedence: every Reduce of a job starts after all its Maps complete.
    for (ji, job) in inst.jobs.iter().enumerate() {
        let map_done = sched
            .entries
            .iter()
            .filter(|e| {
                e.task.job == ji && inst.task(e.task).map(|(_, t)| t.kind) == Some(TaskKind::Map)
            })
            .map(|e| e.completion())
            .fold(0.0f64, f64::max);
        for e in &sched.entries {
            if e.task.job == ji
                && inst.task(e.task).map(|(_, t)| t.kind) == Some(TaskKind::Reduce)
                && e.start < map_done - TIME_TOL
            {
                out.push(Violation::new(
                    "precedence",
                    format!(
                        "job {}: Reduce starts at {} before Maps complete at {}",
                        job.id, e.start, map_done
                    ),
                ));
            }
        }
    }

    match energy(inst, sched) {
        Ok(total) => {
            if total > energy_budget + TIME_TOL * energy_budget.max(1.0) {
                out.push(Violation::new(
                    "energy-budget",
                    format!("total energy {} exceeds budget {}", total, energy_budget),
                ));
            }
        }
        Err(_) => out.push(Violation::new(
            "energy-undefined",
            "a positive-volume task has zero duration".to_string(),
        )),
    }

    Ok(out)
}

/// Total weighted completion time: `sum_j w_j * max` over job `j`'s Reduce
/// task completions.
pub fn objective(inst: &Instance, sched: &Schedule) -> f64 {
    inst.jobs
        .iter()
        .enumerate()
        .map(|(ji, job)| job.weight * sched.job_completion(inst, ji))
        .sum()
}

/// Total energy `sum v^beta / p^(beta-1)` over the schedule's entries.
/// Zero-volume tasks consume nothing.
pub fn energy(inst: &Instance, sched: &Schedule) -> Result<f64, ModelError> {
    let beta = inst.beta;
    let mut total = 0.0;
    for e in &sched.entries {
        let (_, task) = inst
            .task(e.task)
            .ok_or(ModelError::UnknownTask { job: e.task.job, task: e.task.task })?;
        if task.volume > 0.0 {
            if e.duration <= 0.0 {
                return Err(ModelError::UndefinedEnergy { job: e.task.job, task: e.task.task });
            }
            total += task.volume * (task.volume / e.duration).powf(beta - 1.0);
        }
    }
    Ok(total)
}
