//! Seeded instance generation, the exhaustive oracle for tiny instances, and
//! the order-policy comparison runner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cp::{equal_energy_split_times, solve_cp, CpConfig, CpError};
use crate::grids::SpeedGrid;
use crate::model::{energy, objective, Instance, Job, JobId, Schedule, ScheduleEntry, Task, TaskKind, TaskRef};
use crate::orders::{fcfs_order, smith_order};

/// Name recorded in result metadata so outputs stay reproducible across
/// builds: the generator is pinned, not "whatever the default RNG is".
pub const GENERATOR_ID: &str = "chacha8";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum ReleaseProtocol {
    /// Scan unit intervals `(t, t+1]` from zero, accept each with the given
    /// probability, and hand accepted intervals to jobs in id order; the
    /// release is uniform inside its interval.
    CoinFlipUnitIntervals { accept_probability: f64 },
    AllZero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub num_processors: usize,
    pub num_jobs: usize,
    pub maps_per_job: usize,
    pub reduces_per_job: usize,
    /// Uniform range for Map work volumes.
    pub map_work: (f64, f64),
    /// Uniform range for the Reduce work volume base, before inflation.
    pub reduce_extra_work: (f64, f64),
    /// A Reduce volume is its base plus this multiple of the job's mean Map
    /// work (Reduce tasks have more work to execute than Map tasks).
    pub reduce_inflation: f64,
    pub weight: (f64, f64),
    pub release: ReleaseProtocol,
    pub energy_budget: f64,
    pub beta: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            num_processors: 50,
            num_jobs: 25,
            maps_per_job: 20,
            reduces_per_job: 10,
            map_work: (1.0, 10.0),
            reduce_extra_work: (1.0, 10.0),
            reduce_inflation: 3.0,
            weight: (1.0, 10.0),
            release: ReleaseProtocol::CoinFlipUnitIntervals { accept_probability: 0.5 },
            energy_budget: 1000.0,
            beta: 2.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenError {
    /// Each job needs maps + reduces distinct processors.
    TooManyTasksPerJob { per_job: usize, processors: usize },
    BadRange(String),
}

impl std::fmt::Display for GenError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GenError::TooManyTasksPerJob { per_job, processors } => {
                write!(f, "{per_job} tasks per job need distinct processors, only {processors} exist")
            }
            GenError::BadRange(msg) => write!(f, "bad range: {msg}"),
        }
    }
}

impl std::error::Error for GenError {}

fn uniform(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.gen_range(range.0..range.1)
    }
}

/// Deterministic instance generation; the same config (seed included) yields
/// a byte-identical instance.
pub fn generate_instance(cfg: &GenConfig) -> Result<Instance, GenError> {
    let per_job = cfg.maps_per_job + cfg.reduces_per_job;
    if per_job > cfg.num_processors {
        return Err(GenError::TooManyTasksPerJob {
            per_job,
            processors: cfg.num_processors,
        });
    }
    for (name, range) in [
        ("map_work", cfg.map_work),
        ("reduce_extra_work", cfg.reduce_extra_work),
        ("weight", cfg.weight),
    ] {
        if !(range.0 > 0.0 && range.1 >= range.0) {
            return Err(GenError::BadRange(format!("{name} = ({}, {})", range.0, range.1)));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut jobs = Vec::with_capacity(cfg.num_jobs);
    for j in 1..=cfg.num_jobs {
        // Distinct processors per job by partial shuffle.
        let mut pool: Vec<usize> = (1..=cfg.num_processors).collect();
        for i in 0..per_job {
            let pick = rng.gen_range(i..pool.len());
            pool.swap(i, pick);
        }
        let map_volumes: Vec<f64> =
            (0..cfg.maps_per_job).map(|_| uniform(&mut rng, cfg.map_work)).collect();
        let mean_map = map_volumes.iter().sum::<f64>() / cfg.maps_per_job.max(1) as f64;
        let reduce_volumes: Vec<f64> = (0..cfg.reduces_per_job)
            .map(|_| uniform(&mut rng, cfg.reduce_extra_work) + cfg.reduce_inflation * mean_map)
            .collect();
        let weight = uniform(&mut rng, cfg.weight);

        let mut tasks = Vec::with_capacity(per_job);
        for (i, &v) in map_volumes.iter().enumerate() {
            tasks.push(Task { processor: pool[i], kind: TaskKind::Map, volume: v });
        }
        for (i, &v) in reduce_volumes.iter().enumerate() {
            tasks.push(Task {
                processor: pool[cfg.maps_per_job + i],
                kind: TaskKind::Reduce,
                volume: v,
            });
        }
        jobs.push(Job { id: j as JobId, weight, release: 0.0, tasks });
    }

    match cfg.release {
        ReleaseProtocol::AllZero => {}
        ReleaseProtocol::CoinFlipUnitIntervals { accept_probability } => {
            let mut assigned = 0;
            let mut t = 0u64;
            while assigned < jobs.len() {
                if rng.gen_bool(accept_probability) {
                    // Uniform in (t, t+1].
                    let inside = 1.0 - rng.gen_range(0.0..1.0);
                    jobs[assigned].release = t as f64 + inside;
                    assigned += 1;
                }
                t += 1;
            }
        }
    }

    Ok(Instance {
        beta: cfg.beta,
        energy_budget: cfg.energy_budget,
        num_processors: cfg.num_processors,
        jobs,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_jobs: usize,
    pub max_tasks: usize,
    pub max_speeds: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_jobs: 3, max_tasks: 6, max_speeds: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    LimitsExceeded(String),
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleError::LimitsExceeded(msg) => write!(f, "oracle limits exceeded: {msg}"),
        }
    }
}

impl std::error::Error for OracleError {}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub objective: f64,
    pub schedule: Schedule,
}

/// Exhaustive minimum over per-task grid speeds and per-processor task
/// orders, with earliest-start timing (idle only when forced by releases or
/// precedence). The discrete ground truth for sandwich checks; guarded
/// because the search is exponential.
pub fn brute_force_oracle(
    inst: &Instance,
    speed_grid: &SpeedGrid,
    limits: &OracleLimits,
) -> Result<Option<OracleResult>, OracleError> {
    if inst.jobs.len() > limits.max_jobs {
        return Err(OracleError::LimitsExceeded(format!(
            "{} jobs > {}",
            inst.jobs.len(),
            limits.max_jobs
        )));
    }
    if inst.num_tasks() > limits.max_tasks {
        return Err(OracleError::LimitsExceeded(format!(
            "{} tasks > {}",
            inst.num_tasks(),
            limits.max_tasks
        )));
    }
    if speed_grid.speeds.len() > limits.max_speeds {
        return Err(OracleError::LimitsExceeded(format!(
            "{} speeds > {}",
            speed_grid.speeds.len(),
            limits.max_speeds
        )));
    }

    let positive = inst.positive_task_refs();
    let n = positive.len();
    let speeds = &speed_grid.speeds;
    let energy_cap = inst.energy_budget + 1e-9 * inst.energy_budget.max(1.0);

    // Per-processor positive tasks, for order enumeration.
    let mut proc_tasks: Vec<Vec<usize>> = vec![Vec::new(); inst.num_processors + 1];
    for (i, &r) in positive.iter().enumerate() {
        proc_tasks[inst.task(r).unwrap().1.processor].push(i);
    }
    let groups: Vec<Vec<usize>> =
        proc_tasks.iter().filter(|g| !g.is_empty()).cloned().collect();

    let mut permutations_per_group: Vec<Vec<Vec<usize>>> = Vec::new();
    for g in &groups {
        let mut perms = Vec::new();
        let mut current = g.clone();
        heap_permutations(&mut current, 0, &mut perms);
        permutations_per_group.push(perms);
    }

    let mut best: Option<(f64, Vec<f64>, Vec<Vec<usize>>)> = None;

    let mut speed_choice = vec![0usize; n];
    loop {
        let durations: Vec<f64> = (0..n)
            .map(|i| {
                let v = inst.task(positive[i]).unwrap().1.volume;
                v / speeds[speed_choice[i]]
            })
            .collect();
        let total_energy: f64 = (0..n)
            .map(|i| {
                let v = inst.task(positive[i]).unwrap().1.volume;
                v * speeds[speed_choice[i]].powf(inst.beta - 1.0)
            })
            .sum();
        if total_energy <= energy_cap {
            let mut perm_choice = vec![0usize; groups.len()];
            loop {
                let orders: Vec<Vec<usize>> = perm_choice
                    .iter()
                    .enumerate()
                    .map(|(gi, &pi)| permutations_per_group[gi][pi].clone())
                    .collect();
                if let Some(obj) = earliest_start_objective(inst, &positive, &durations, &orders)
                {
                    if best.as_ref().map_or(true, |(b, _, _)| obj < *b) {
                        best = Some((obj, durations.clone(), orders));
                    }
                }
                if !advance(&mut perm_choice, |gi| permutations_per_group[gi].len()) {
                    break;
                }
            }
        }
        if !advance(&mut speed_choice, |_| speeds.len()) {
            break;
        }
    }

    Ok(best.map(|(obj, durations, orders)| {
        let schedule = build_schedule(inst, &positive, &durations, &orders)
            .expect("winning combination was feasible");
        OracleResult { objective: obj, schedule }
    }))
}

/// Odometer increment over mixed radices; false when wrapped around.
fn advance(choice: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in 0..choice.len() {
        choice[i] += 1;
        if choice[i] < radix(i) {
            return true;
        }
        choice[i] = 0;
    }
    false
}

fn heap_permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        heap_permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Earliest-start completions for fixed per-processor orders, or `None` when
/// the order and the precedence constraints deadlock.
fn earliest_start_schedule(
    inst: &Instance,
    positive: &[TaskRef],
    durations: &[f64],
    orders: &[Vec<usize>],
) -> Option<Vec<(f64, f64)>> {
    let n = positive.len();
    // Zero-volume Maps complete at the release date.
    let mut zero_map_done: Vec<f64> = vec![0.0; inst.jobs.len()];
    for (ji, job) in inst.jobs.iter().enumerate() {
        for t in &job.tasks {
            if t.kind == TaskKind::Map && t.volume <= 0.0 {
                zero_map_done[ji] = zero_map_done[ji].max(job.release);
            }
        }
    }

    let mut start = vec![f64::NAN; n];
    let mut done = vec![false; n];
    let mut remaining = n;
    while remaining > 0 {
        let mut progressed = false;
        for order in orders {
            for (slot, &i) in order.iter().enumerate() {
                if done[i] {
                    continue;
                }
                // Predecessor in the chain must be scheduled first.
                let chain_ready = if slot == 0 {
                    Some(0.0)
                } else {
                    let prev = order[slot - 1];
                    if done[prev] {
                        Some(start[prev] + durations[prev])
                    } else {
                        None
                    }
                };
                let Some(chain_ready) = chain_ready else { continue };
                let (job, task) = inst.task(positive[i]).unwrap();
                let mut ready = chain_ready.max(job.release);
                if task.kind == TaskKind::Reduce {
                    let ji = positive[i].job;
                    let mut maps_ready = zero_map_done[ji];
                    let mut all_done = true;
                    for (k, &r) in positive.iter().enumerate() {
                        if r.job == ji
                            && inst.task(r).unwrap().1.kind == TaskKind::Map
                        {
                            if done[k] {
                                maps_ready = maps_ready.max(start[k] + durations[k]);
                            } else {
                                all_done = false;
                            }
                        }
                    }
                    if !all_done {
                        continue;
                    }
                    ready = ready.max(maps_ready);
                }
                start[i] = ready;
                done[i] = true;
                remaining -= 1;
                progressed = true;
                break;
            }
        }
        if !progressed {
            return None; // ordering deadlocks against precedence
        }
    }
    Some((0..n).map(|i| (start[i], durations[i])).collect())
}

fn earliest_start_objective(
    inst: &Instance,
    positive: &[TaskRef],
    durations: &[f64],
    orders: &[Vec<usize>],
) -> Option<f64> {
    let placed = earliest_start_schedule(inst, positive, durations, orders)?;
    let mut job_map_done = vec![0.0f64; inst.jobs.len()];
    for (ji, job) in inst.jobs.iter().enumerate() {
        for t in &job.tasks {
            if t.kind == TaskKind::Map && t.volume <= 0.0 {
                job_map_done[ji] = job_map_done[ji].max(job.release);
            }
        }
    }
    for (i, &r) in positive.iter().enumerate() {
        if inst.task(r).unwrap().1.kind == TaskKind::Map {
            job_map_done[r.job] = job_map_done[r.job].max(placed[i].0 + placed[i].1);
        }
    }
    let mut job_completion = vec![0.0f64; inst.jobs.len()];
    for (ji, job) in inst.jobs.iter().enumerate() {
        for t in &job.tasks {
            if t.kind == TaskKind::Reduce && t.volume <= 0.0 {
                job_completion[ji] = job_completion[ji].max(job.release.max(job_map_done[ji]));
            }
        }
    }
    for (i, &r) in positive.iter().enumerate() {
        if inst.task(r).unwrap().1.kind == TaskKind::Reduce {
            job_completion[r.job] = job_completion[r.job].max(placed[i].0 + placed[i].1);
        }
    }
    Some(
        inst.jobs
            .iter()
            .enumerate()
            .map(|(ji, job)| job.weight * job_completion[ji])
            .sum(),
    )
}

fn build_schedule(
    inst: &Instance,
    positive: &[TaskRef],
    durations: &[f64],
    orders: &[Vec<usize>],
) -> Option<Schedule> {
    let placed = earliest_start_schedule(inst, positive, durations, orders)?;
    let mut entries = Vec::new();
    let mut job_map_done = vec![0.0f64; inst.jobs.len()];
    for (ji, job) in inst.jobs.iter().enumerate() {
        for t in &job.tasks {
            if t.kind == TaskKind::Map && t.volume <= 0.0 {
                job_map_done[ji] = job_map_done[ji].max(job.release);
            }
        }
    }
    for (i, &r) in positive.iter().enumerate() {
        let task = inst.task(r).unwrap().1;
        entries.push(ScheduleEntry {
            task: r,
            processor: task.processor,
            start: placed[i].0,
            duration: placed[i].1,
            speed: task.volume / placed[i].1,
        });
        if task.kind == TaskKind::Map {
            job_map_done[r.job] = job_map_done[r.job].max(placed[i].0 + placed[i].1);
        }
    }
    for (ji, job) in inst.jobs.iter().enumerate() {
        for (ti, task) in job.tasks.iter().enumerate() {
            if task.volume > 0.0 {
                continue;
            }
            let at = match task.kind {
                TaskKind::Map => job.release,
                TaskKind::Reduce => job.release.max(job_map_done[ji]),
            };
            entries.push(ScheduleEntry {
                task: TaskRef { job: ji, task: ti },
                processor: task.processor,
                start: at,
                duration: 0.0,
                speed: 0.0,
            });
        }
    }
    entries.sort_by(|a, b| {
        a.start
            .partial_cmp(&b.start)
            .unwrap()
            .then(a.processor.cmp(&b.processor))
            .then(a.task.cmp(&b.task))
    });
    Some(Schedule { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    Fcfs,
    Sr,
    CpFcfs,
    CpSr,
}

impl Policy {
    pub fn label(self) -> &'static str {
        match self {
            Policy::Fcfs => "fcfs",
            Policy::Sr => "sr",
            Policy::CpFcfs => "cp_fcfs",
            Policy::CpSr => "cp_sr",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Template generator config; `num_jobs` and `seed` are overridden per
    /// cell.
    pub generator: GenConfig,
    pub job_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    pub policies: Vec<Policy>,
    pub cp_tolerance: f64,
    pub cp_max_iterations: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generator: GenConfig::default(),
            job_counts: vec![5, 10, 15, 20, 25],
            seeds: (0..10).collect(),
            policies: vec![Policy::Fcfs, Policy::Sr, Policy::CpFcfs, Policy::CpSr],
            cp_tolerance: 1e-7,
            cp_max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub num_jobs: usize,
    pub seed: u64,
    pub policy: Policy,
    pub objective: f64,
    pub energy: f64,
    pub lower_bound: Option<f64>,
    pub ratio: Option<f64>,
    pub cp_diagnostic_failure: bool,
}

#[derive(Debug, Clone)]
pub struct MeanRow {
    pub num_jobs: usize,
    pub policy: Policy,
    pub mean_objective: f64,
    pub mean_lower_bound: Option<f64>,
    pub mean_ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub cells: Vec<CellResult>,
    pub means: Vec<MeanRow>,
    pub metadata: Vec<(String, String)>,
}

/// Mixes the per-experiment seed with the cell's job count so different cells
/// draw independent instances under one base seed.
pub fn cell_seed(seed: u64, num_jobs: usize) -> u64 {
    seed ^ (num_jobs as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Every schedule the runner reports must pass validation within the budget.
fn emitted_schedule_is_clean(
    inst: &Instance,
    sched: &Schedule,
    policy: Policy,
    n: usize,
    seed: u64,
) {
    let violations = crate::model::validate_schedule(inst, sched, inst.energy_budget)
        .expect("entries reference instance tasks");
    assert!(
        violations.is_empty(),
        "{} schedule for n={n} seed={seed} is invalid: {violations:?}",
        policy.label()
    );
}

/// Runs every (job count, seed, policy) cell: plain policies list-schedule
/// with equal-energy-split processing times, relaxation-backed policies take
/// their processing times and lower bound from the fixed-order program.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResults, GenError> {
    let mut cells = Vec::new();
    for &n in &cfg.job_counts {
        for &seed in &cfg.seeds {
            let mut gen = cfg.generator.clone();
            gen.num_jobs = n;
            gen.seed = cell_seed(seed, n);
            let inst = generate_instance(&gen)?;
            for &policy in &cfg.policies {
                let order = match policy {
                    Policy::Fcfs | Policy::CpFcfs => fcfs_order(&inst),
                    Policy::Sr | Policy::CpSr => smith_order(&inst),
                };
                let cell = match policy {
                    Policy::Fcfs | Policy::Sr => {
                        let p = equal_energy_split_times(&inst);
                        let sched = crate::cp::schedule_from_order(&inst, &order, &p);
                        emitted_schedule_is_clean(&inst, &sched, policy, n, seed);
                        CellResult {
                            num_jobs: n,
                            seed,
                            policy,
                            objective: objective(&inst, &sched),
                            energy: energy(&inst, &sched).expect("positive durations"),
                            lower_bound: None,
                            ratio: None,
                            cp_diagnostic_failure: false,
                        }
                    }
                    Policy::CpFcfs | Policy::CpSr => {
                        let cp_cfg = CpConfig {
                            tolerance: cfg.cp_tolerance,
                            max_iterations: cfg.cp_max_iterations,
                            ..CpConfig::default()
                        };
                        let (sol, failed) = match solve_cp(&inst, &order, &cp_cfg) {
                            Ok(sol) => (sol, false),
                            Err(CpError::DidNotConverge(best)) => (*best, true),
                            Err(e) => panic!("generated instance must be solvable: {e}"),
                        };
                        let sched =
                            crate::cp::schedule_from_order(&inst, &order, &sol.processing_times);
                        emitted_schedule_is_clean(&inst, &sched, policy, n, seed);
                        let obj = objective(&inst, &sched);
                        CellResult {
                            num_jobs: n,
                            seed,
                            policy,
                            objective: obj,
                            energy: energy(&inst, &sched).expect("positive durations"),
                            lower_bound: Some(sol.objective),
                            ratio: Some(obj / sol.objective),
                            cp_diagnostic_failure: failed,
                        }
                    }
                };
                cells.push(cell);
            }
        }
    }

    let mut means = Vec::new();
    for &n in &cfg.job_counts {
        for &policy in &cfg.policies {
            let group: Vec<&CellResult> = cells
                .iter()
                .filter(|c| c.num_jobs == n && c.policy == policy)
                .collect();
            if group.is_empty() {
                continue;
            }
            let count = group.len() as f64;
            let mean_objective = group.iter().map(|c| c.objective).sum::<f64>() / count;
            let lbs: Vec<f64> = group.iter().filter_map(|c| c.lower_bound).collect();
            let ratios: Vec<f64> = group.iter().filter_map(|c| c.ratio).collect();
            means.push(MeanRow {
                num_jobs: n,
                policy,
                mean_objective,
                mean_lower_bound: (!lbs.is_empty())
                    .then(|| lbs.iter().sum::<f64>() / lbs.len() as f64),
                mean_ratio: (!ratios.is_empty())
                    .then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
            });
        }
    }

    let metadata = vec![
        ("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("generator".to_string(), GENERATOR_ID.to_string()),
        ("cell_seed_rule".to_string(), "seed xor num_jobs * 0x9E3779B97F4A7C15".to_string()),
        ("processors".to_string(), cfg.generator.num_processors.to_string()),
        ("maps_per_job".to_string(), cfg.generator.maps_per_job.to_string()),
        ("reduces_per_job".to_string(), cfg.generator.reduces_per_job.to_string()),
        ("energy_budget".to_string(), cfg.generator.energy_budget.to_string()),
        ("beta".to_string(), cfg.generator.beta.to_string()),
        ("seeds".to_string(), format!("{:?}", cfg.seeds)),
        ("resampling".to_string(), "all volumes, weights and releases drawn fresh per seed".to_string()),
    ];

    Ok(ExperimentResults { cells, means, metadata })
}
