//! Interval-indexed linear programming relaxation.
//!
//! For every positive-volume task, grid speed `s` and time interval `I_t`, the
//! variable `y[task,s,t]` is the fraction of `I_t` during which the task runs
//! at speed `s`. Six row families tie the variables together:
//!
//! * full execution - every task's executed fractions sum to one;
//! * interval capacity - a processor runs at most `|I_t|` time units in `I_t`;
//! * completion bound - a lower bound on each task's completion time from the
//!   placement of its executed fractions;
//! * job completion - a job completes when its last task does;
//! * energy budget - total energy over all placements stays within `E`;
//! * precedence prefix - by the end of every interval, each Map task of a job
//!   is at least as far along as every Reduce task of the same job.
//!
//! Variables in intervals starting before the job's release date are pinned to
//! zero and never created. Zero-volume tasks get a completion variable and the
//! job-completion row only.
//!
//! The solver behind [`solve_lp`] is pluggable in principle; the built-in
//! backend is the Clarabel interior-point solver. Whatever the backend
//! reports, the returned solution is re-checked row by row against the model
//! and demoted to a tolerance failure if any residual or the duality gap
//! exceeds the configured tolerance.

use std::collections::HashMap;
use std::io::Write;

use crate::grids::{SpeedGrid, TimeGrid};
use crate::model::{Instance, TaskKind, TaskRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    FullExecution,
    IntervalCapacity,
    CompletionBound,
    JobCompletion,
    EnergyBudget,
    PrecedencePrefix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, f64)>,
    pub op: RowOp,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpBuildError {
    EmptySpeedGrid,
}

impl std::fmt::Display for LpBuildError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpBuildError::EmptySpeedGrid => write!(f, "speed grid has no speeds"),
        }
    }
}

impl std::error::Error for LpBuildError {}

/// Per-task bookkeeping for the variable layout.
#[derive(Debug, Clone)]
struct TaskVars {
    task: TaskRef,
    volume: f64,
    /// First interval whose start is not before the job's release; variables
    /// for earlier intervals are pinned to zero and not created.
    first_interval: usize,
    /// Base variable index; the block holds one variable per (speed,
    /// interval >= first_interval) pair, interval-minor.
    base: usize,
}

#[derive(Debug, Clone)]
pub struct LpModel {
    pub speed_grid: SpeedGrid,
    pub time_grid: TimeGrid,
    positive: Vec<TaskVars>,
    positive_index: HashMap<TaskRef, usize>,
    /// All tasks in deterministic order, for completion variables.
    all_tasks: Vec<TaskRef>,
    task_completion_base: usize,
    job_completion_base: usize,
    job_ids_sorted: Vec<(u64, usize)>,
    num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Tasks whose every execution variable is pinned to zero (release beyond
    /// the horizon): the full-execution row is unsatisfiable.
    pub unschedulable: Vec<TaskRef>,
}

impl LpModel {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows_of_kind(&self, kind: RowKind) -> usize {
        self.rows.iter().filter(|r| r.kind == kind).count()
    }

    fn span(&self, q: usize) -> usize {
        self.time_grid.num_intervals() - self.positive[q].first_interval
    }

    /// Variable index of `y[q, s, t]`, `None` when pinned to zero.
    fn y_var(&self, q: usize, s: usize, t: usize) -> Option<usize> {
        let tv = &self.positive[q];
        if t < tv.first_interval {
            return None;
        }
        Some(tv.base + s * self.span(q) + (t - tv.first_interval))
    }

    pub fn positive_task_index(&self, task: TaskRef) -> Option<usize> {
        self.positive_index.get(&task).copied()
    }

    pub fn task_completion_var(&self, task: TaskRef) -> Option<usize> {
        let pos = self.all_tasks.iter().position(|&t| t == task)?;
        Some(self.task_completion_base + pos)
    }

    pub fn job_completion_var(&self, job_idx: usize) -> Option<usize> {
        let pos = self.job_ids_sorted.iter().position(|&(_, ji)| ji == job_idx)?;
        Some(self.job_completion_base + pos)
    }

    /// Fraction of the task executed within each interval: `sum_s y |I_t| s / v`.
    pub fn fraction_profile(&self, sol: &FractionalSolution, task: TaskRef) -> Option<Vec<f64>> {
        let q = self.positive_task_index(task)?;
        let v = self.positive[q].volume;
        let mut out = vec![0.0; self.time_grid.num_intervals()];
        for (s, &speed) in self.speed_grid.speeds.iter().enumerate() {
            for t in self.positive[q].first_interval..self.time_grid.num_intervals() {
                let var = self.y_var(q, s, t).unwrap();
                out[t] += sol.values[var] * self.time_grid.length(t) * speed / v;
            }
        }
        Some(out)
    }

    /// Time the task occupies each interval: `sum_s y |I_t|`.
    pub fn time_profile(&self, sol: &FractionalSolution, task: TaskRef) -> Option<Vec<f64>> {
        let q = self.positive_task_index(task)?;
        let mut out = vec![0.0; self.time_grid.num_intervals()];
        for s in 0..self.speed_grid.speeds.len() {
            for t in self.positive[q].first_interval..self.time_grid.num_intervals() {
                let var = self.y_var(q, s, t).unwrap();
                out[t] += sol.values[var] * self.time_grid.length(t);
            }
        }
        Some(out)
    }

    /// Energy the solution spends on the task: `sum_{s,t} y |I_t| s^beta`.
    pub fn task_energy(&self, sol: &FractionalSolution, task: TaskRef, beta: f64) -> Option<f64> {
        let q = self.positive_task_index(task)?;
        let mut total = 0.0;
        for (s, &speed) in self.speed_grid.speeds.iter().enumerate() {
            for t in self.positive[q].first_interval..self.time_grid.num_intervals() {
                let var = self.y_var(q, s, t).unwrap();
                total += sol.values[var] * self.time_grid.length(t) * speed.powf(beta);
            }
        }
        Some(total)
    }

    pub fn task_completion(&self, sol: &FractionalSolution, task: TaskRef) -> Option<f64> {
        Some(sol.values[self.task_completion_var(task)?])
    }

    pub fn job_completion(&self, sol: &FractionalSolution, job_idx: usize) -> Option<f64> {
        Some(sol.values[self.job_completion_var(job_idx)?])
    }

    /// Largest row violation of `values`, scaled by the row's activity
    /// magnitude `max(1, |rhs|, sum |coeff * value|)` so that rows with large
    /// coefficients are judged relative to their own scale.
    pub fn max_residual(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(v, c)| c * values[v]).sum();
            let scale: f64 = row
                .coeffs
                .iter()
                .map(|&(v, c)| (c * values[v]).abs())
                .sum::<f64>()
                .max(row.rhs.abs())
                .max(1.0);
            let viol = match row.op {
                RowOp::Eq => (lhs - row.rhs).abs(),
                RowOp::Le => (lhs - row.rhs).max(0.0),
                RowOp::Ge => (row.rhs - lhs).max(0.0),
            };
            worst = worst.max(viol / scale);
        }
        for &v in values {
            worst = worst.max(-v);
        }
        worst
    }
}

/// Builds the relaxation over the given grids. Variable and row order is
/// deterministic: tasks sorted by (job id, processor, kind), then speed-major,
/// interval-minor.
pub fn build_lp(
    inst: &Instance,
    speed_grid: &SpeedGrid,
    time_grid: &TimeGrid,
) -> Result<LpModel, LpBuildError> {
    if speed_grid.speeds.is_empty() {
        return Err(LpBuildError::EmptySpeedGrid);
    }
    let num_intervals = time_grid.num_intervals();
    let speeds = &speed_grid.speeds;

    let mut all_tasks = inst.task_refs();
    all_tasks.sort_by_key(|&r| {
        let (job, task) = inst.task(r).unwrap();
        (job.id, task.processor, task.kind == TaskKind::Reduce, r.task)
    });

    let mut positive = Vec::new();
    let mut positive_index = HashMap::new();
    let mut unschedulable = Vec::new();
    let mut next_var = 0;
    for &r in &all_tasks {
        let (job, task) = inst.task(r).unwrap();
        if task.volume <= 0.0 {
            continue;
        }
        // Pinned whenever the interval starts before the release date.
        let first_interval = (0..num_intervals)
            .find(|&t| time_grid.tau[t] >= job.release)
            .unwrap_or(num_intervals);
        if first_interval >= num_intervals {
            unschedulable.push(r);
        }
        positive_index.insert(r, positive.len());
        positive.push(TaskVars { task: r, volume: task.volume, first_interval, base: next_var });
        next_var += speeds.len() * (num_intervals - first_interval);
    }

    let task_completion_base = next_var;
    next_var += all_tasks.len();
    let job_completion_base = next_var;
    let mut job_ids_sorted: Vec<(u64, usize)> =
        inst.jobs.iter().enumerate().map(|(ji, j)| (j.id, ji)).collect();
    job_ids_sorted.sort();
    next_var += job_ids_sorted.len();

    let mut objective = vec![0.0; next_var];
    for (pos, &(_, ji)) in job_ids_sorted.iter().enumerate() {
        objective[job_completion_base + pos] = inst.jobs[ji].weight;
    }

    let mut model = LpModel {
        speed_grid: speed_grid.clone(),
        time_grid: time_grid.clone(),
        positive,
        positive_index,
        all_tasks: all_tasks.clone(),
        task_completion_base,
        job_completion_base,
        job_ids_sorted,
        num_vars: next_var,
        objective,
        rows: Vec::new(),
        unschedulable,
    };

    // Full execution: sum of executed fractions equals one.
    for q in 0..model.positive.len() {
        let v = model.positive[q].volume;
        let mut coeffs = Vec::new();
        for (s, &speed) in speeds.iter().enumerate() {
            for t in model.positive[q].first_interval..num_intervals {
                coeffs.push((model.y_var(q, s, t).unwrap(), time_grid.length(t) * speed / v));
            }
        }
        model.rows.push(LpRow { kind: RowKind::FullExecution, coeffs, op: RowOp::Eq, rhs: 1.0 });
    }

    // Interval capacity: per processor and interval, occupied fractions <= 1.
    for proc in 1..=inst.num_processors {
        for t in 0..num_intervals {
            let mut coeffs = Vec::new();
            for q in 0..model.positive.len() {
                let (_, task) = inst.task(model.positive[q].task).unwrap();
                if task.processor != proc || t < model.positive[q].first_interval {
                    continue;
                }
                for s in 0..speeds.len() {
                    coeffs.push((model.y_var(q, s, t).unwrap(), 1.0));
                }
            }
            model.rows.push(LpRow {
                kind: RowKind::IntervalCapacity,
                coeffs,
                op: RowOp::Le,
                rhs: 1.0,
            });
        }
    }

    // Completion bound: adapted mean-busy-time lower bound on C from the
    // placement of the executed fractions; the first interval carries the
    // distinguished half-weighted term.
    for q in 0..model.positive.len() {
        let v = model.positive[q].volume;
        let mut coeffs = vec![(model.task_completion_var(model.positive[q].task).unwrap(), 1.0)];
        for (s, &speed) in speeds.iter().enumerate() {
            for t in model.positive[q].first_interval..num_intervals {
                let len = time_grid.length(t);
                let coef = if t == 0 {
                    0.5 * len * (speed / v + 1.0)
                } else {
                    len * (time_grid.tau[t] * speed / v + 0.5)
                };
                coeffs.push((model.y_var(q, s, t).unwrap(), -coef));
            }
        }
        model.rows.push(LpRow { kind: RowKind::CompletionBound, coeffs, op: RowOp::Ge, rhs: 0.0 });
    }

    // Job completion: C_j >= C_task for every task, zero-volume included.
    for &r in &all_tasks {
        let coeffs = vec![
            (model.job_completion_var(r.job).unwrap(), 1.0),
            (model.task_completion_var(r).unwrap(), -1.0),
        ];
        model.rows.push(LpRow { kind: RowKind::JobCompletion, coeffs, op: RowOp::Ge, rhs: 0.0 });
    }

    // Energy budget over every placement.
    {
        let mut coeffs = Vec::new();
        for q in 0..model.positive.len() {
            for (s, &speed) in speeds.iter().enumerate() {
                for t in model.positive[q].first_interval..num_intervals {
                    coeffs.push((
                        model.y_var(q, s, t).unwrap(),
                        time_grid.length(t) * speed.powf(inst.beta),
                    ));
                }
            }
        }
        model.rows.push(LpRow {
            kind: RowKind::EnergyBudget,
            coeffs,
            op: RowOp::Le,
            rhs: inst.energy_budget,
        });
    }

    // Precedence prefix: executed Map fraction dominates executed Reduce
    // fraction at the end of every interval, per (Map, Reduce) pair of a job.
    for &(_, ji) in &model.job_ids_sorted.clone() {
        let maps: Vec<usize> = model
            .positive
            .iter()
            .enumerate()
            .filter(|(_, tv)| {
                tv.task.job == ji
                    && inst.task(tv.task).map(|(_, t)| t.kind) == Some(TaskKind::Map)
            })
            .map(|(q, _)| q)
            .collect();
        let reduces: Vec<usize> = model
            .positive
            .iter()
            .enumerate()
            .filter(|(_, tv)| {
                tv.task.job == ji
                    && inst.task(tv.task).map(|(_, t)| t.kind) == Some(TaskKind::Reduce)
            })
            .map(|(q, _)| q)
            .collect();
        for &qm in &maps {
            for &qr in &reduces {
                for prefix in 0..num_intervals {
                    let mut coeffs = Vec::new();
                    let vm = model.positive[qm].volume;
                    let vr = model.positive[qr].volume;
                    for (s, &speed) in speeds.iter().enumerate() {
                        for t in model.positive[qm].first_interval..=prefix {
                            coeffs.push((
                                model.y_var(qm, s, t).unwrap(),
                                time_grid.length(t) * speed / vm,
                            ));
                        }
                        for t in model.positive[qr].first_interval..=prefix {
                            coeffs.push((
                                model.y_var(qr, s, t).unwrap(),
                                -(time_grid.length(t) * speed / vr),
                            ));
                        }
                    }
                    model.rows.push(LpRow {
                        kind: RowKind::PrecedencePrefix,
                        coeffs,
                        op: RowOp::Ge,
                        rhs: 0.0,
                    });
                }
            }
        }
    }

    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    /// The backend finished but the solution violates some row beyond the
    /// configured tolerance, or the backend failed internally.
    ToleranceFailure,
}

#[derive(Debug, Clone)]
pub struct FractionalSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub max_residual: f64,
    /// Relative primal-dual gap reported by the backend.
    pub duality_gap: f64,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Largest acceptable relative row violation in a returned solution.
    pub residual_tol: f64,
    /// Largest acceptable relative duality gap.
    pub gap_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { residual_tol: 1e-6, gap_tol: 1e-6 }
    }
}

/// Solves the relaxation and re-checks the solution against the model.
pub fn solve_lp(model: &LpModel, config: SolverConfig) -> FractionalSolution {
    use clarabel::algebra::CscMatrix;
    use clarabel::solver::{
        DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
    };

    let failure = |status: LpStatus, detail: String| FractionalSolution {
        status,
        objective: f64::NAN,
        values: Vec::new(),
        max_residual: f64::NAN,
        duality_gap: f64::NAN,
        detail: Some(detail),
    };

    if !model.unschedulable.is_empty() {
        return failure(
            LpStatus::Infeasible,
            format!(
                "{} task(s) released after the horizon: every execution variable is pinned to zero",
                model.unschedulable.len()
            ),
        );
    }

    // Coefficients span many orders of magnitude (geometric interval lengths
    // times speeds at the beta-th power), so equilibrate rows and columns by
    // damped geometric-mean scaling first; the backend then converges to a
    // feasibility level that also holds for the unscaled rows we re-check.
    let nv = model.num_vars;
    let mut col_scale = vec![1.0f64; nv];
    let mut row_scale = vec![1.0f64; model.rows.len()];
    for _ in 0..8 {
        let mut col_max = vec![0.0f64; nv];
        let mut col_min = vec![f64::INFINITY; nv];
        for (i, row) in model.rows.iter().enumerate() {
            for &(v, c) in &row.coeffs {
                let a = (c * row_scale[i] * col_scale[v]).abs();
                if a > 0.0 {
                    col_max[v] = col_max[v].max(a);
                    col_min[v] = col_min[v].min(a);
                }
            }
        }
        for v in 0..nv {
            if col_max[v] > 0.0 {
                col_scale[v] /= (col_max[v] * col_min[v]).sqrt().sqrt();
            }
        }
        let mut row_max = vec![0.0f64; model.rows.len()];
        let mut row_min = vec![f64::INFINITY; model.rows.len()];
        for (i, row) in model.rows.iter().enumerate() {
            for &(v, c) in &row.coeffs {
                let a = (c * row_scale[i] * col_scale[v]).abs();
                if a > 0.0 {
                    row_max[i] = row_max[i].max(a);
                    row_min[i] = row_min[i].min(a);
                }
            }
        }
        for i in 0..model.rows.len() {
            if row_max[i] > 0.0 {
                row_scale[i] /= (row_max[i] * row_min[i]).sqrt().sqrt();
            }
        }
    }

    // Conic form over the scaled variables x' = x / col_scale: equality rows
    // in the zero cone, then all inequalities as `a.x' <= b` in the
    // nonnegative cone, including variable bounds (x >= 0 for everything;
    // execution variables are interval fractions, so 1 is a valid upper
    // bound and tightens the search).
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut b = Vec::new();
    let mut n_eq = 0;
    for (i, row) in model.rows.iter().enumerate() {
        if row.op != RowOp::Eq {
            continue;
        }
        for &(v, c) in &row.coeffs {
            triplets.push((b.len(), v, c * row_scale[i] * col_scale[v]));
        }
        b.push(row.rhs * row_scale[i]);
        n_eq += 1;
    }
    for (i, row) in model.rows.iter().enumerate() {
        let sign = match row.op {
            RowOp::Eq => continue,
            RowOp::Le => 1.0,
            RowOp::Ge => -1.0,
        };
        if row.coeffs.is_empty() {
            continue;
        }
        for &(v, c) in &row.coeffs {
            triplets.push((b.len(), v, sign * c * row_scale[i] * col_scale[v]));
        }
        b.push(sign * row.rhs * row_scale[i]);
    }
    for v in 0..nv {
        triplets.push((b.len(), v, -1.0));
        b.push(0.0);
    }
    for v in 0..model.task_completion_base {
        triplets.push((b.len(), v, 1.0));
        b.push(1.0 / col_scale[v]);
    }
    let n_ineq = b.len() - n_eq;

    let (rows, cols, vals): (Vec<usize>, Vec<usize>, Vec<f64>) = {
        let mut r = Vec::with_capacity(triplets.len());
        let mut c = Vec::with_capacity(triplets.len());
        let mut x = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            r.push(i);
            c.push(j);
            x.push(v);
        }
        (r, c, x)
    };
    let a_mat = CscMatrix::new_from_triplets(b.len(), nv, rows, cols, vals);
    let p_mat = CscMatrix::zeros((nv, nv));
    let cones = [
        SupportedConeT::ZeroConeT(n_eq),
        SupportedConeT::NonnegativeConeT(n_ineq),
    ];
    let objective_scaled: Vec<f64> =
        model.objective.iter().zip(&col_scale).map(|(&q, &c)| q * c).collect();
    let settings = DefaultSettings {
        verbose: false,
        max_iter: 500,
        tol_feas: 1e-10,
        tol_gap_abs: 1e-10,
        tol_gap_rel: 1e-10,
        ..DefaultSettings::default()
    };
    let mut solver =
        match DefaultSolver::new(&p_mat, &objective_scaled, &a_mat, &b, &cones, settings) {
            Ok(solver) => solver,
            Err(e) => return failure(LpStatus::ToleranceFailure, format!("backend setup: {e}")),
        };
    solver.solve();

    let status = solver.solution.status;
    match status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            // Map back to the unscaled variables; interior-point output can
            // sit a hair below zero, snap that dust to the bound (anything
            // larger is judged by the residual check).
            let values: Vec<f64> = solver
                .solution
                .x
                .iter()
                .zip(&col_scale)
                .map(|(&v, &c)| {
                    let v = v * c;
                    if v < 0.0 && v > -1e-9 {
                        0.0
                    } else {
                        v
                    }
                })
                .collect();
            let objective = solver.solution.obj_val;
            let max_residual = model.max_residual(&values);
            let duality_gap = (solver.solution.obj_val - solver.solution.obj_val_dual).abs()
                / objective.abs().max(1.0);
            if max_residual > config.residual_tol || duality_gap > config.gap_tol {
                FractionalSolution {
                    status: LpStatus::ToleranceFailure,
                    objective,
                    values,
                    max_residual,
                    duality_gap,
                    detail: Some(format!(
                        "residual {max_residual:.3e} (limit {:.3e}), gap {duality_gap:.3e} (limit {:.3e})",
                        config.residual_tol, config.gap_tol
                    )),
                }
            } else {
                FractionalSolution {
                    status: LpStatus::Optimal,
                    objective,
                    values,
                    max_residual,
                    duality_gap,
                    detail: None,
                }
            }
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            failure(LpStatus::Infeasible, "backend reports primal infeasible".to_string())
        }
        other => failure(LpStatus::ToleranceFailure, format!("backend status {other:?}")),
    }
}

/// Writes the model in the fixed-keyword free-format text interchange format
/// for linear programs, for cross-checking against external solvers.
pub fn write_lp_format<W: Write>(model: &LpModel, mut w: W) -> std::io::Result<()> {
    let name = |v: usize| -> String {
        if v < model.task_completion_base {
            // Find the owning block.
            for (q, tv) in model.positive.iter().enumerate() {
                let span = model.span(q);
                let size = model.speed_grid.speeds.len() * span;
                if v >= tv.base && v < tv.base + size {
                    let off = v - tv.base;
                    let s = off / span;
                    let t = off % span + tv.first_interval;
                    return format!("y_q{q}_s{s}_t{t}");
                }
            }
            unreachable!("variable below completion base belongs to a task block")
        } else if v < model.job_completion_base {
            format!("ct{}", v - model.task_completion_base)
        } else {
            format!("cj{}", v - model.job_completion_base)
        }
    };

    writeln!(w, "Minimize")?;
    write!(w, " obj:")?;
    for (v, &c) in model.objective.iter().enumerate() {
        if c != 0.0 {
            write!(w, " + {} {}", c, name(v))?;
        }
    }
    writeln!(w)?;
    writeln!(w, "Subject To")?;
    for (i, row) in model.rows.iter().enumerate() {
        if row.coeffs.is_empty() {
            continue;
        }
        write!(w, " r{i}:")?;
        for &(v, c) in &row.coeffs {
            if c >= 0.0 {
                write!(w, " + {} {}", c, name(v))?;
            } else {
                write!(w, " - {} {}", -c, name(v))?;
            }
        }
        let op = match row.op {
            RowOp::Eq => "=",
            RowOp::Le => "<=",
            RowOp::Ge => ">=",
        };
        writeln!(w, " {op} {}", row.rhs)?;
    }
    writeln!(w, "Bounds")?;
    for v in 0..model.num_vars {
        writeln!(w, " 0 <= {}", name(v))?;
    }
    writeln!(w, "End")
}
