//! File formats: JSON instances, CSV schedules, grid and solution dumps.

use std::io::{BufRead, Write};

use crate::cp::CpSolution;
use crate::experiments::ExperimentResults;
use crate::grids::{SpeedGrid, TimeGrid};
use crate::model::{Instance, Schedule, ScheduleEntry, TaskKind, TaskRef};

#[derive(Debug)]
pub enum IoError {
    Io(std::io::Error),
    Json(serde_json::Error),
    /// A schedule row references a task the instance does not have.
    UnknownTask { line: usize, detail: String },
    Malformed { line: usize, detail: String },
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoError::Io(e) => write!(f, "{e}"),
            IoError::Json(e) => write!(f, "{e}"),
            IoError::UnknownTask { line, detail } => {
                write!(f, "line {line}: unknown task ({detail})")
            }
            IoError::Malformed { line, detail } => write!(f, "line {line}: {detail}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e)
    }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json(e)
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(inst).expect("instances serialize")
}

pub fn instance_from_json(text: &str) -> Result<Instance, IoError> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance, IoError> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: &std::path::Path, inst: &Instance) -> Result<(), IoError> {
    Ok(std::fs::write(path, instance_to_json(inst))?)
}

pub const SCHEDULE_CSV_HEADER: &str =
    "job_id,kind,processor,start,duration,speed,energy,completion";

fn kind_label(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Map => "map",
        TaskKind::Reduce => "reduce",
    }
}

/// Writes the schedule as CSV, rows ordered by start time then processor.
pub fn write_schedule_csv<W: Write>(
    mut w: W,
    inst: &Instance,
    sched: &Schedule,
) -> std::io::Result<()> {
    let mut entries = sched.entries.clone();
    entries.sort_by(|a, b| {
        a.start
            .partial_cmp(&b.start)
            .unwrap()
            .then(a.processor.cmp(&b.processor))
            .then(a.task.cmp(&b.task))
    });
    writeln!(w, "{SCHEDULE_CSV_HEADER}")?;
    for e in &entries {
        let (job, task) = inst.task(e.task).expect("entries reference instance tasks");
        let entry_energy = if task.volume > 0.0 {
            task.volume * e.speed.powf(inst.beta - 1.0)
        } else {
            0.0
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            job.id,
            kind_label(task.kind),
            e.processor,
            e.start,
            e.duration,
            e.speed,
            entry_energy,
            e.completion()
        )?;
    }
    Ok(())
}

/// Reads a schedule CSV back against its instance. Rows are matched to tasks
/// by (job id, processor, kind); under the one-task-per-processor default the
/// match is unique, otherwise rows consume matching tasks in order.
pub fn read_schedule_csv<R: BufRead>(r: R, inst: &Instance) -> Result<Schedule, IoError> {
    let mut entries = Vec::new();
    let mut used: std::collections::HashSet<TaskRef> = std::collections::HashSet::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if idx == 0 {
            if line.trim() != SCHEDULE_CSV_HEADER {
                return Err(IoError::Malformed {
                    line: lineno,
                    detail: format!("expected header {SCHEDULE_CSV_HEADER:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(IoError::Malformed {
                line: lineno,
                detail: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let parse = |i: usize| -> Result<f64, IoError> {
            fields[i].trim().parse().map_err(|_| IoError::Malformed {
                line: lineno,
                detail: format!("field {} is not a number: {:?}", i + 1, fields[i]),
            })
        };
        let job_id: u64 = fields[0].trim().parse().map_err(|_| IoError::Malformed {
            line: lineno,
            detail: format!("bad job id {:?}", fields[0]),
        })?;
        let kind = match fields[1].trim() {
            "map" => TaskKind::Map,
            "reduce" => TaskKind::Reduce,
            other => {
                return Err(IoError::Malformed {
                    line: lineno,
                    detail: format!("bad kind {other:?}"),
                })
            }
        };
        let processor: usize = fields[2].trim().parse().map_err(|_| IoError::Malformed {
            line: lineno,
            detail: format!("bad processor {:?}", fields[2]),
        })?;
        let (start, duration, speed) = (parse(3)?, parse(4)?, parse(5)?);

        let job_idx = inst
            .jobs
            .iter()
            .position(|j| j.id == job_id)
            .ok_or_else(|| IoError::UnknownTask {
                line: lineno,
                detail: format!("job id {job_id}"),
            })?;
        let task_idx = inst.jobs[job_idx]
            .tasks
            .iter()
            .enumerate()
            .position(|(ti, t)| {
                t.processor == processor
                    && t.kind == kind
                    && !used.contains(&TaskRef { job: job_idx, task: ti })
            })
            .ok_or_else(|| IoError::UnknownTask {
                line: lineno,
                detail: format!("job {job_id} has no unmatched {kind:?} task on processor {processor}"),
            })?;
        let task = TaskRef { job: job_idx, task: task_idx };
        used.insert(task);
        entries.push(ScheduleEntry { task, processor, start, duration, speed });
    }
    Ok(Schedule { entries })
}

/// Grid dump as (index, value) CSV, for debugging.
pub fn write_speed_grid_csv<W: Write>(mut w: W, grid: &SpeedGrid) -> std::io::Result<()> {
    writeln!(w, "index,speed")?;
    for (i, s) in grid.speeds.iter().enumerate() {
        writeln!(w, "{i},{s}")?;
    }
    Ok(())
}

pub fn write_time_grid_csv<W: Write>(mut w: W, grid: &TimeGrid) -> std::io::Result<()> {
    writeln!(w, "index,tau")?;
    for (i, t) in grid.tau.iter().enumerate() {
        writeln!(w, "{i},{t}")?;
    }
    Ok(())
}

/// Fixed-order solution dump: one row per task plus a diagnostics block in
/// comment lines.
pub fn write_cp_solution_csv<W: Write>(
    mut w: W,
    inst: &Instance,
    sol: &CpSolution,
) -> std::io::Result<()> {
    writeln!(w, "# objective={}", sol.objective)?;
    writeln!(w, "# energy={}", sol.energy)?;
    writeln!(w, "# energy_slack={}", sol.energy_slack)?;
    writeln!(w, "# iterations={}", sol.iterations)?;
    writeln!(w, "# stationarity={}", sol.stationarity)?;
    writeln!(w, "# converged={}", sol.converged)?;
    writeln!(w, "job_id,kind,processor,processing_time,speed,energy,completion")?;
    for (flat, r) in inst.task_refs().into_iter().enumerate() {
        let (job, task) = inst.task(r).unwrap();
        let p = sol.processing_times[flat];
        let (speed, task_energy) = if task.volume > 0.0 && p > 0.0 {
            let s = task.volume / p;
            (s, task.volume * s.powf(inst.beta - 1.0))
        } else {
            (0.0, 0.0)
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            job.id,
            kind_label(task.kind),
            task.processor,
            p,
            speed,
            task_energy,
            sol.completions.task[flat]
        )?;
    }
    Ok(())
}

/// Experiment results: metadata header in comments, one row per cell, then
/// one mean row per (n, policy).
pub fn write_experiment_csv<W: Write>(
    mut w: W,
    results: &ExperimentResults,
) -> std::io::Result<()> {
    for (key, value) in &results.metadata {
        writeln!(w, "# {key}={value}")?;
    }
    writeln!(w, "n,seed,policy,objective,energy,lower_bound,ratio,cp_failed")?;
    for c in &results.cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            c.num_jobs,
            c.seed,
            c.policy.label(),
            c.objective,
            c.energy,
            c.lower_bound.map(|v| v.to_string()).unwrap_or_default(),
            c.ratio.map(|v| v.to_string()).unwrap_or_default(),
            c.cp_diagnostic_failure
        )?;
    }
    writeln!(w, "n,policy,mean_objective,mean_lower_bound,mean_ratio")?;
    for m in &results.means {
        writeln!(
            w,
            "{},{},{},{},{}",
            m.num_jobs,
            m.policy.label(),
            m.mean_objective,
            m.mean_lower_bound.map(|v| v.to_string()).unwrap_or_default(),
            m.mean_ratio.map(|v| v.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}
