//! Converting a fractional relaxation solution into a feasible non-preemptive
//! schedule by list scheduling in order of alpha-points, and certifying the
//! resulting energy and objective bounds.
//!
//! The alpha-point of a task is the first interval by whose end at least an
//! alpha fraction of the task is executed in the fractional solution. Each
//! task gets processing time `gamma` times the time mass the solution spends
//! on it up to its alpha-point, becomes available one interval later, and the
//! processors run their tasks in alpha-point order. Stretching by `gamma`
//! caps the energy at `1/(gamma^(beta-1) alpha^beta)` times the solution's,
//! and the objective lands within a constant factor of the relaxation.

use crate::grids::{build_speed_grid, build_time_grid, compute_t_max, GridError, SpeedGrid, TimeGrid};
use crate::lp::{build_lp, solve_lp, FractionalSolution, LpBuildError, LpModel, LpStatus, SolverConfig};
use crate::model::{
    energy, objective, validate_instance, validate_schedule, Instance, Schedule, TaskKind,
    TaskRef, Violation,
};
use crate::ratios::{
    energy_augmentation_factor, no_augmentation_gamma, optimal_ratio, ratio_bound, RatioError,
    RatioVariant,
};
use crate::sim;

/// Tolerance on cumulative executed fractions when locating alpha-points, so
/// solver noise right at the threshold resolves deterministically downward.
pub const FRACTION_TOL: f64 = 1e-9;

/// Relative slack allowed when checking certified bounds; absorbs solver
/// residuals up to the default solve tolerance.
const CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum AlphaError {
    OutOfRange(String),
    /// The availability analysis requires `lambda < alpha * v_min / s_max`.
    LambdaTooLarge { lambda: f64, limit: f64 },
    /// A task's cumulative executed fraction never reaches alpha; the
    /// fractional solution is too loose to round.
    MissingMass { task: TaskRef, reached: f64 },
    /// A positive-volume task received no time mass up to its alpha-point.
    ZeroProcessingTime { task: TaskRef },
    /// An alpha-point landed in the first interval, which the lambda
    /// condition rules out.
    AlphaPointInFirstInterval { task: TaskRef },
}

impl std::fmt::Display for AlphaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaError::OutOfRange(msg) => write!(f, "parameter out of range: {msg}"),
            AlphaError::LambdaTooLarge { lambda, limit } => {
                write!(f, "lambda {lambda} must be below alpha*v_min/s_max = {limit}")
            }
            AlphaError::MissingMass { task, reached } => write!(
                f,
                "task (job {}, index {}) accumulates only {reached} executed fraction",
                task.job, task.task
            ),
            AlphaError::ZeroProcessingTime { task } => write!(
                f,
                "task (job {}, index {}) has zero rounded processing time",
                task.job, task.task
            ),
            AlphaError::AlphaPointInFirstInterval { task } => write!(
                f,
                "task (job {}, index {}) has its alpha-point in the first interval",
                task.job, task.task
            ),
        }
    }
}

impl std::error::Error for AlphaError {}

/// Rounding parameters. Construction enforces the availability hypothesis
/// `lambda < alpha * v_min / s_max`.
#[derive(Debug, Clone, Copy)]
pub struct AlphaParams {
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl AlphaParams {
    pub fn new(
        alpha: f64,
        gamma: f64,
        inst: &Instance,
        speed_grid: &SpeedGrid,
        time_grid: &TimeGrid,
    ) -> Result<Self, AlphaError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(AlphaError::OutOfRange(format!("alpha must be in (0,1), got {alpha}")));
        }
        if !(gamma > 0.0) {
            return Err(AlphaError::OutOfRange(format!("gamma must be positive, got {gamma}")));
        }
        let v_min = inst
            .v_min()
            .ok_or_else(|| AlphaError::OutOfRange("no positive-volume task".to_string()))?;
        let limit = alpha * v_min / speed_grid.s_max();
        if !(time_grid.lambda < limit) {
            return Err(AlphaError::LambdaTooLarge { lambda: time_grid.lambda, limit });
        }
        Ok(AlphaParams { alpha, gamma, lambda: time_grid.lambda, delta: time_grid.delta })
    }
}

/// Smallest index `l` with `sum(profile[..=l]) >= alpha - FRACTION_TOL`.
pub fn alpha_index(profile: &[f64], alpha: f64) -> Option<usize> {
    let mut acc = 0.0;
    for (l, &frac) in profile.iter().enumerate() {
        acc += frac;
        if acc >= alpha - FRACTION_TOL {
            return Some(l);
        }
    }
    None
}

/// Alpha-point of a task under the fractional solution.
pub fn alpha_point(
    model: &LpModel,
    solution: &FractionalSolution,
    task: TaskRef,
    alpha: f64,
) -> Result<usize, AlphaError> {
    let profile = model
        .fraction_profile(solution, task)
        .ok_or(AlphaError::ZeroProcessingTime { task })?;
    alpha_index(&profile, alpha).ok_or(AlphaError::MissingMass {
        task,
        reached: profile.iter().sum(),
    })
}

#[derive(Debug, Clone)]
pub struct PlanTask {
    pub task: TaskRef,
    pub processor: usize,
    pub alpha_index: usize,
    pub processing_time: f64,
    pub speed: f64,
    pub available_from: f64,
    pub is_reduce: bool,
    pub job_id: u64,
}

/// The rounded plan: per-task processing times, speeds and availability
/// times, plus the per-processor priority lists.
#[derive(Debug, Clone)]
pub struct AlphaPlan {
    pub tasks: Vec<PlanTask>,
    /// For each processor (1-based), its tasks in priority order: ascending
    /// alpha-point, ties by ascending job id.
    pub priority_lists: Vec<Vec<TaskRef>>,
}

impl AlphaPlan {
    pub fn task(&self, r: TaskRef) -> Option<&PlanTask> {
        self.tasks.iter().find(|t| t.task == r)
    }
}

/// Computes alpha-points, stretched processing times, speeds, availability
/// times and priority lists for every positive-volume task.
pub fn build_plan(
    inst: &Instance,
    model: &LpModel,
    solution: &FractionalSolution,
    params: &AlphaParams,
) -> Result<AlphaPlan, AlphaError> {
    let mut tasks = Vec::new();
    for r in inst.positive_task_refs() {
        let (job, task) = inst.task(r).unwrap();
        let a_idx = alpha_point(model, solution, r, params.alpha)?;
        if a_idx == 0 {
            return Err(AlphaError::AlphaPointInFirstInterval { task: r });
        }
        let time_profile = model.time_profile(solution, r).unwrap();
        let mass: f64 = time_profile[..=a_idx].iter().sum();
        let processing_time = params.gamma * mass;
        if !(processing_time > 0.0) {
            return Err(AlphaError::ZeroProcessingTime { task: r });
        }
        let available_from = model.time_grid.tau[a_idx + 1];
        debug_assert!(available_from > job.release);
        tasks.push(PlanTask {
            task: r,
            processor: task.processor,
            alpha_index: a_idx,
            processing_time,
            speed: task.volume / processing_time,
            available_from,
            is_reduce: task.kind == TaskKind::Reduce,
            job_id: job.id,
        });
    }

    let mut priority_lists = vec![Vec::new(); inst.num_processors + 1];
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by_key(|&i| (tasks[i].alpha_index, tasks[i].job_id));
    for &i in &order {
        priority_lists[tasks[i].processor].push(tasks[i].task);
    }
    Ok(AlphaPlan { tasks, priority_lists })
}

/// Runs the availability-driven list scheduler over the plan.
pub fn list_schedule(inst: &Instance, plan: &AlphaPlan) -> Schedule {
    let sim_tasks: Vec<sim::SimTask> = plan
        .tasks
        .iter()
        .map(|t| sim::SimTask {
            task: t.task,
            processor: t.processor,
            duration: t.processing_time,
            available_from: t.available_from,
            priority: (t.alpha_index as u64, t.job_id),
            is_reduce: t.is_reduce,
        })
        .collect();
    sim::list_schedule(inst, &sim_tasks)
}

/// One certified bound: the claim `lhs <= rhs` up to relative tolerance.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + CHECK_TOL * self.rhs.abs().max(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub variant: RatioVariant,
    pub augmentation_factor: f64,
    pub objective_ratio: f64,
    pub checks: Vec<BoundCheck>,
}

impl Certificate {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(BoundCheck::holds)
    }

    pub fn failing(&self) -> Vec<&BoundCheck> {
        self.checks.iter().filter(|c| !c.holds()).collect()
    }

    pub fn write_report<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "variant: {}", self.variant.label())?;
        writeln!(w, "energy augmentation factor: {}", self.augmentation_factor)?;
        writeln!(w, "objective ratio bound: {}", self.objective_ratio)?;
        writeln!(w, "bound,lhs,rhs,slack,pass")?;
        for c in &self.checks {
            writeln!(w, "{},{},{},{},{}", c.name, c.lhs, c.rhs, c.slack(), c.holds())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum CertifyError {
    /// The energy analysis needs `beta >= 2`; smaller exponents are outside
    /// the certified regime.
    UncertifiedRegime { beta: f64 },
    /// A certified bound failed; this indicates an implementation bug, not a
    /// bad input. The certificate lists the failing checks.
    BoundViolated(Box<Certificate>),
    Ratio(RatioError),
}

impl std::fmt::Display for CertifyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CertifyError::UncertifiedRegime { beta } => {
                write!(f, "certification requires beta >= 2, got {beta}")
            }
            CertifyError::BoundViolated(cert) => {
                let names: Vec<&str> =
                    cert.failing().iter().map(|c| c.name.as_str()).collect();
                write!(f, "certified bound(s) violated: {}", names.join(", "))
            }
            CertifyError::Ratio(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CertifyError {}

/// Variant of the objective bound that applies to this instance.
pub fn instance_variant(inst: &Instance) -> RatioVariant {
    if inst.has_precedence_pairs() {
        RatioVariant::General
    } else if inst.all_released_at_zero() {
        RatioVariant::NoPrecedenceNoRelease
    } else {
        RatioVariant::NoPrecedence
    }
}

/// Checks every certified bound of the rounded schedule: per-task energy
/// against the solution's task energy, total energy against the augmented
/// budget, the objective against the relaxation, the priority-list prefix
/// bound, and the Map completion bound.
pub fn certify_bounds(
    inst: &Instance,
    model: &LpModel,
    solution: &FractionalSolution,
    plan: &AlphaPlan,
    schedule: &Schedule,
    params: &AlphaParams,
) -> Result<Certificate, CertifyError> {
    if inst.beta < 2.0 {
        return Err(CertifyError::UncertifiedRegime { beta: inst.beta });
    }
    let augmentation = energy_augmentation_factor(params.alpha, params.gamma, inst.beta)
        .map_err(CertifyError::Ratio)?;
    let variant = instance_variant(inst);
    let ratio = ratio_bound(params.alpha, params.gamma, params.delta, variant)
        .map_err(CertifyError::Ratio)?;

    let mut checks = Vec::new();

    for t in &plan.tasks {
        let (job, task) = inst.task(t.task).unwrap();
        let task_energy = task.volume * t.speed.powf(inst.beta - 1.0);
        let lp_energy = model.task_energy(solution, t.task, inst.beta).unwrap();
        checks.push(BoundCheck {
            name: format!("task-energy j{} p{}", job.id, task.processor),
            lhs: task_energy,
            rhs: lp_energy * augmentation,
        });
    }

    checks.push(BoundCheck {
        name: "total-energy".to_string(),
        lhs: energy(inst, schedule).expect("plan gives every positive task a duration"),
        rhs: inst.energy_budget * augmentation,
    });

    checks.push(BoundCheck {
        name: "objective".to_string(),
        lhs: objective(inst, schedule),
        rhs: ratio * solution.objective,
    });

    // Prefix bound: the total stretched processing time of tasks with
    // priority at least as high never exceeds gamma times the availability
    // endpoint of the task's alpha-point interval.
    for list in &plan.priority_lists {
        let mut prefix = 0.0;
        for &r in list {
            let t = plan.task(r).unwrap();
            prefix += t.processing_time;
            let (job, task) = inst.task(r).unwrap();
            checks.push(BoundCheck {
                name: format!("priority-prefix j{} p{}", job.id, task.processor),
                lhs: prefix,
                rhs: params.gamma * model.time_grid.tau[t.alpha_index + 1],
            });
        }
    }

    // Map completion bound: C <= (gamma + 1) * tau[alpha_index + 1].
    for e in &schedule.entries {
        let (job, task) = inst.task(e.task).unwrap();
        if task.kind != TaskKind::Map || task.volume <= 0.0 {
            continue;
        }
        let t = plan.task(e.task).unwrap();
        checks.push(BoundCheck {
            name: format!("map-completion j{} p{}", job.id, task.processor),
            lhs: e.completion(),
            rhs: (params.gamma + 1.0) * model.time_grid.tau[t.alpha_index + 1],
        });
    }

    let cert = Certificate {
        variant,
        augmentation_factor: augmentation,
        objective_ratio: ratio,
        checks,
    };
    if cert.all_pass() {
        Ok(cert)
    } else {
        Err(CertifyError::BoundViolated(Box::new(cert)))
    }
}

/// End-to-end configuration: grid resolutions, rounding parameters (each
/// defaulted from the instance when absent), an optional tighter horizon, and
/// the solver tolerance.
#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    /// Tighter horizon than the worst-case bound; any sound upper bound on
    /// the optimal makespan keeps the guarantees and shrinks the model.
    pub t_max_override: Option<f64>,
    pub solver: SolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            epsilon: 0.5,
            delta: 0.5,
            alpha: None,
            gamma: None,
            lambda: None,
            t_max_override: None,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug)]
pub struct PipelineRun {
    pub t_max: f64,
    pub speed_grid: SpeedGrid,
    pub time_grid: TimeGrid,
    pub model: LpModel,
    pub solution: FractionalSolution,
    pub params: AlphaParams,
    pub plan: AlphaPlan,
    pub schedule: Schedule,
    pub certificate: Certificate,
}

#[derive(Debug)]
pub enum PipelineError {
    InvalidInstance(Vec<Violation>),
    Grid(GridError),
    Build(LpBuildError),
    Solve { status: LpStatus, detail: Option<String> },
    Alpha(AlphaError),
    Certify(CertifyError),
    Ratio(RatioError),
    ScheduleInvalid(Vec<Violation>),
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PipelineError::InvalidInstance(v) => {
                write!(f, "instance fails validation ({} violation(s))", v.len())
            }
            PipelineError::Grid(e) => write!(f, "{e}"),
            PipelineError::Build(e) => write!(f, "{e}"),
            PipelineError::Solve { status, detail } => write!(
                f,
                "relaxation not solved to optimality: {status:?}{}",
                detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
            ),
            PipelineError::Alpha(e) => write!(f, "{e}"),
            PipelineError::Certify(e) => write!(f, "{e}"),
            PipelineError::Ratio(e) => write!(f, "{e}"),
            PipelineError::ScheduleInvalid(v) => {
                write!(f, "rounded schedule fails validation ({} violation(s))", v.len())
            }
        }
    }
}

impl std::error::Error for PipelineError {}

/// Solves the relaxation on instance-derived grids, rounds it, schedules it
/// and certifies the bounds.
pub fn run_alpha_pipeline(
    inst: &Instance,
    cfg: &PipelineConfig,
) -> Result<PipelineRun, PipelineError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(PipelineError::InvalidInstance(violations));
    }
    if inst.beta < 2.0 {
        return Err(PipelineError::Certify(CertifyError::UncertifiedRegime { beta: inst.beta }));
    }

    let t_max = match cfg.t_max_override {
        Some(t) => t,
        None => compute_t_max(inst).map_err(PipelineError::Grid)?,
    };
    let v_min = inst.v_min().expect("validated instance has a positive task");
    let s_lower = v_min / t_max;
    let s_upper = (inst.energy_budget / v_min).powf(1.0 / (inst.beta - 1.0));
    let speed_grid =
        build_speed_grid(s_lower, s_upper, cfg.epsilon).map_err(PipelineError::Grid)?;

    let alpha = match cfg.alpha {
        Some(a) => a,
        None => optimal_ratio(inst.beta, RatioVariant::General)
            .map_err(PipelineError::Ratio)?
            .alpha,
    };
    let gamma = cfg.gamma.unwrap_or_else(|| no_augmentation_gamma(alpha, inst.beta));
    let lambda = cfg.lambda.unwrap_or(0.5 * alpha * v_min / speed_grid.s_max());
    let time_grid = build_time_grid(lambda, cfg.delta, t_max).map_err(PipelineError::Grid)?;
    let params = AlphaParams::new(alpha, gamma, inst, &speed_grid, &time_grid)
        .map_err(PipelineError::Alpha)?;

    let model = build_lp(inst, &speed_grid, &time_grid).map_err(PipelineError::Build)?;
    let solution = solve_lp(&model, cfg.solver);
    if solution.status != LpStatus::Optimal {
        return Err(PipelineError::Solve {
            status: solution.status,
            detail: solution.detail.clone(),
        });
    }

    let plan = build_plan(inst, &model, &solution, &params).map_err(PipelineError::Alpha)?;
    let schedule = list_schedule(inst, &plan);
    let augmentation = energy_augmentation_factor(alpha, gamma, inst.beta)
        .map_err(PipelineError::Ratio)?;
    let schedule_violations =
        validate_schedule(inst, &schedule, inst.energy_budget * augmentation)
            .expect("plan tasks reference instance tasks");
    if !schedule_violations.is_empty() {
        return Err(PipelineError::ScheduleInvalid(schedule_violations));
    }
    let certificate = certify_bounds(inst, &model, &solution, &plan, &schedule, &params)
        .map_err(PipelineError::Certify)?;

    Ok(PipelineRun {
        t_max,
        speed_grid,
        time_grid,
        model,
        solution,
        params,
        plan,
        schedule,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Job, Task};
    use proptest::prelude::*;

    #[test]
    fn alpha_index_examples() {
        assert_eq!(alpha_index(&[0.3, 0.4, 0.3], 0.5), Some(1));
        assert_eq!(alpha_index(&[1.0], 0.25), Some(0));
        assert_eq!(alpha_index(&[1.0], 0.99), Some(0));
        assert_eq!(alpha_index(&[0.3, 0.4, 0.3], 0.71), Some(2));
        assert_eq!(alpha_index(&[0.3, 0.4], 0.9), None);
    }

    fn two_task_instance(energy: f64) -> Instance {
        Instance {
            beta: 2.0,
            energy_budget: energy,
            num_processors: 2,
            jobs: vec![Job {
                id: 1,
                weight: 1.0,
                release: 0.0,
                tasks: vec![
                    Task { processor: 1, kind: TaskKind::Map, volume: 1.0 },
                    Task { processor: 2, kind: TaskKind::Reduce, volume: 1.0 },
                ],
            }],
        }
    }

    #[test]
    fn params_reject_oversized_lambda() {
        let inst = two_task_instance(2.0);
        let speed_grid = build_speed_grid(0.5, 2.0, 0.5).unwrap();
        // lambda must stay below alpha * v_min / s_max = 0.5 / s_max.
        let limit = 0.5 * 1.0 / speed_grid.s_max();
        let coarse = build_time_grid(limit * 2.0, 0.5, 8.0).unwrap();
        assert!(matches!(
            AlphaParams::new(0.5, 1.0, &inst, &speed_grid, &coarse),
            Err(AlphaError::LambdaTooLarge { .. })
        ));
        let fine = build_time_grid(limit * 0.5, 0.5, 8.0).unwrap();
        assert!(AlphaParams::new(0.5, 1.0, &inst, &speed_grid, &fine).is_ok());
        assert!(AlphaParams::new(1.5, 1.0, &inst, &speed_grid, &fine).is_err());
        assert!(AlphaParams::new(0.5, 0.0, &inst, &speed_grid, &fine).is_err());
    }

    #[test]
    fn pipeline_produces_certified_schedule() {
        let inst = two_task_instance(2.0);
        let run = run_alpha_pipeline(&inst, &PipelineConfig::default()).unwrap();
        assert!(run.certificate.all_pass());
        assert_eq!(run.schedule.entries.len(), 2);
        // No alpha-point may land in the first interval.
        assert!(run.plan.tasks.iter().all(|t| t.alpha_index >= 1));
        // Availability strictly after the release date.
        assert!(run.plan.tasks.iter().all(|t| t.available_from > 0.0));
    }

    #[test]
    fn doubling_gamma_doubles_processing_times() {
        let inst = two_task_instance(2.0);
        let base = run_alpha_pipeline(
            &inst,
            &PipelineConfig { alpha: Some(0.5), gamma: Some(1.0), ..PipelineConfig::default() },
        )
        .unwrap();
        let stretched = build_plan(
            &inst,
            &base.model,
            &base.solution,
            &AlphaParams { gamma: 2.0, ..base.params },
        )
        .unwrap();
        for (a, b) in base.plan.tasks.iter().zip(&stretched.tasks) {
            assert_eq!(a.task, b.task);
            assert!((b.processing_time - 2.0 * a.processing_time).abs() < 1e-12);
            assert!((b.speed - 0.5 * a.speed).abs() < 1e-12 * a.speed);
            assert_eq!(a.alpha_index, b.alpha_index);
        }
    }

    #[test]
    fn priority_lists_sort_by_alpha_point_then_job_id() {
        // Two jobs with Maps on processor 1; the plan orders them by
        // alpha-point with job id as the tie-break.
        let inst = Instance {
            beta: 2.0,
            energy_budget: 4.0,
            num_processors: 3,
            jobs: vec![
                Job {
                    id: 1,
                    weight: 1.0,
                    release: 0.0,
                    tasks: vec![
                        Task { processor: 1, kind: TaskKind::Map, volume: 1.0 },
                        Task { processor: 2, kind: TaskKind::Reduce, volume: 1.0 },
                    ],
                },
                Job {
                    id: 2,
                    weight: 2.0,
                    release: 0.0,
                    tasks: vec![
                        Task { processor: 1, kind: TaskKind::Map, volume: 1.0 },
                        Task { processor: 3, kind: TaskKind::Reduce, volume: 1.0 },
                    ],
                },
            ],
        };
        let run = run_alpha_pipeline(&inst, &PipelineConfig::default()).unwrap();
        for list in &run.plan.priority_lists {
            let keys: Vec<(usize, u64)> = list
                .iter()
                .map(|&r| {
                    let t = run.plan.task(r).unwrap();
                    (t.alpha_index, t.job_id)
                })
                .collect();
            let mut sorted = keys.clone();
            sorted.sort();
            assert_eq!(keys, sorted);
        }
        assert!(run.certificate.all_pass());
    }

    #[test]
    fn certificate_report_lists_all_bounds() {
        let inst = two_task_instance(2.0);
        let run = run_alpha_pipeline(&inst, &PipelineConfig::default()).unwrap();
        let mut buf = Vec::new();
        run.certificate.write_report(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("total-energy"));
        assert!(text.contains("objective"));
        assert!(text.contains("priority-prefix"));
        assert!(text.contains("map-completion"));
        assert!(text.contains("variant: general"));
    }

    #[test]
    fn certification_refuses_small_beta() {
        let mut inst = two_task_instance(2.0);
        inst.beta = 1.5;
        assert!(matches!(
            run_alpha_pipeline(&inst, &PipelineConfig::default()),
            Err(PipelineError::Certify(CertifyError::UncertifiedRegime { .. }))
        ));
    }

    #[test]
    fn variant_detection() {
        let general = two_task_instance(2.0);
        assert_eq!(instance_variant(&general), RatioVariant::General);

        let mut no_prec = general.clone();
        no_prec.jobs[0].tasks[1].volume = 0.0;
        assert_eq!(instance_variant(&no_prec), RatioVariant::NoPrecedenceNoRelease);

        let mut released = no_prec.clone();
        released.jobs[0].release = 1.0;
        assert_eq!(instance_variant(&released), RatioVariant::NoPrecedence);
    }

    // Power-mean inequality behind the per-task energy bound: for positive
    // weights a and speeds s with beta >= 2,
    // (1 / sum(a_i / s_i))^(beta-1) <= sum(a_i s_i^(beta-1)) / (sum a_i)^beta.
    fn power_mean_holds(a: &[f64], s: &[f64], beta: f64) -> bool {
        let inv: f64 = a.iter().zip(s).map(|(ai, si)| ai / si).sum();
        let lhs = (1.0 / inv).powf(beta - 1.0);
        let num: f64 = a.iter().zip(s).map(|(ai, si)| ai * si.powf(beta - 1.0)).sum();
        let den = a.iter().sum::<f64>().powf(beta);
        lhs <= num / den * (1.0 + 1e-9)
    }

    #[test]
    fn power_mean_spot_value() {
        // a = (1,1), s = (1,2), beta = 3: (2/3)^2 = 0.444... <= 5/8.
        let inv = 1.0f64 / 1.0 + 1.0 / 2.0;
        let lhs = (1.0f64 / inv).powi(2);
        assert!((lhs - 4.0 / 9.0).abs() < 1e-12);
        let rhs = (1.0 + 4.0) / 8.0f64;
        assert!((rhs - 0.625).abs() < 1e-12);
        assert!(lhs <= rhs);
        assert!(power_mean_holds(&[1.0, 1.0], &[1.0, 2.0], 3.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn power_mean_inequality(
            pairs in proptest::collection::vec((1e-3f64..1e3, 1e-3f64..1e3), 1..8),
            beta in 2.0f64..3.0,
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let s: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            prop_assert!(power_mean_holds(&a, &s, beta));
        }
    }
}
