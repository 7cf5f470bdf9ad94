//! Fixed-order relaxation: given a total order over jobs, a convex program
//! over per-task processing times lower-bounds every schedule that respects
//! the order, and its processing times list-schedule into a feasible schedule.
//!
//! The completion of a task is the pointwise-least value satisfying the
//! release-anchored prefix sums along its processor under the order, the
//! completion of its chain predecessor plus its own processing time (on one
//! processor, an order-respecting schedule runs tasks back to back at best),
//! and (for Reduce tasks) the completions of the job's Map tasks plus its own
//! processing time. Those maps are monotone in `p`, so completions evaluate
//! in one topological pass and the objective `sum w_j C_j(p)` is convex in
//! `p`.
//!
//! The solver is a projected subgradient method over per-task energy shares
//! `e = v^beta / p^(beta-1)` rather than over `p` directly: in those
//! coordinates the feasible set is the simplex `{e >= 0, sum e <= E}`, whose
//! Euclidean projection is exact and cheap, while the objective stays convex
//! (`p(e)` is convex decreasing and completions are nondecreasing convex in
//! `p`). A subgradient comes from tracing the argmax paths through the
//! completion recurrence and applying the chain rule through `p(e)`. Steps
//! use an adaptive target margin that halves whenever a window of iterations
//! brings no real improvement; the method converges when the margin falls
//! below the configured tolerance.

use crate::model::{validate_instance, Instance, Schedule, TaskKind, TaskRef, Violation};
use crate::orders::JobOrder;
use crate::sim;

#[derive(Debug, Clone, Copy)]
pub struct CpConfig {
    /// Relative accuracy target for the returned objective.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Window length over which "no improvement" halves the step margin.
    pub stall_window: usize,
}

impl Default for CpConfig {
    fn default() -> Self {
        CpConfig { tolerance: 1e-7, max_iterations: 100_000, stall_window: 500 }
    }
}

#[derive(Debug, Clone)]
pub struct Completions {
    /// Per task, aligned with `Instance::task_refs()`.
    pub task: Vec<f64>,
    /// Per job, aligned with `Instance::jobs`.
    pub job: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CpSolution {
    /// Per-task processing times aligned with `Instance::task_refs()`;
    /// zero-volume tasks are pinned to zero.
    pub processing_times: Vec<f64>,
    pub completions: Completions,
    pub objective: f64,
    pub energy: f64,
    pub energy_slack: f64,
    pub iterations: usize,
    /// Final step margin relative to the objective scale.
    pub stationarity: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub enum CpError {
    InvalidInstance(Vec<Violation>),
    /// The chain closed form is specific to quadratic power.
    UnsupportedExponent { beta: f64 },
    /// Iteration budget exhausted; the best iterate is attached.
    DidNotConverge(Box<CpSolution>),
}

impl std::fmt::Display for CpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CpError::InvalidInstance(v) => {
                write!(f, "instance fails validation ({} violation(s))", v.len())
            }
            CpError::UnsupportedExponent { beta } => {
                write!(f, "closed form holds for beta = 2 only, got {beta}")
            }
            CpError::DidNotConverge(best) => write!(
                f,
                "no convergence within the iteration budget (best objective {})",
                best.objective
            ),
        }
    }
}

impl std::error::Error for CpError {}

/// How a task's completion arose, for subgradient assembly.
#[derive(Debug, Clone, Copy)]
enum Source {
    /// Anchored at a release date: `r + sum of p` over a slot range of the
    /// processor chain.
    Chain { processor: usize, from_slot: usize, to_slot: usize },
    /// The chain predecessor's completion plus this task's processing time.
    ChainPrev { pred: usize },
    /// A Map completion plus this task's own processing time.
    Precedence { pred: usize },
    /// A constant (release date); carries no gradient.
    Constant,
}

/// Preprocessed instance geometry shared across solver iterations.
struct Layout {
    refs: Vec<TaskRef>,
    volume: Vec<f64>,
    job_of: Vec<usize>,
    is_reduce: Vec<bool>,
    release: Vec<f64>,
    /// Per processor (1-based), flat indices of its positive tasks in order
    /// position (ties by task index within the job).
    chains: Vec<Vec<usize>>,
    /// Chain predecessor of each positive task, if any.
    prev_in_chain: Vec<Option<usize>>,
    /// All tasks in dependency order: ascending order position, Maps before
    /// Reduces of the same job. Chain and precedence predecessors always come
    /// earlier, so completions evaluate in one pass.
    topo: Vec<usize>,
    /// Per job, flat indices of its Map tasks (any volume).
    job_maps: Vec<Vec<usize>>,
    weights: Vec<f64>,
    positive: Vec<usize>,
    beta: f64,
    energy_budget: f64,
}

impl Layout {
    fn new(inst: &Instance, order: &JobOrder) -> Self {
        let refs = inst.task_refs();
        let mut volume = Vec::with_capacity(refs.len());
        let mut job_of = Vec::with_capacity(refs.len());
        let mut is_reduce = Vec::with_capacity(refs.len());
        let mut release = Vec::with_capacity(refs.len());
        for &r in &refs {
            let (job, task) = inst.task(r).unwrap();
            volume.push(task.volume);
            job_of.push(r.job);
            is_reduce.push(task.kind == TaskKind::Reduce);
            release.push(job.release);
        }

        let mut chains = vec![Vec::new(); inst.num_processors + 1];
        let mut with_pos: Vec<(usize, usize, usize)> = Vec::new(); // (position, task idx, flat)
        for (flat, &r) in refs.iter().enumerate() {
            let (job, task) = inst.task(r).unwrap();
            if task.volume > 0.0 {
                with_pos.push((order.position(job.id), r.task, flat));
            }
        }
        with_pos.sort();
        let mut prev_in_chain = vec![None; refs.len()];
        for &(_, _, flat) in &with_pos {
            let (_, task) = inst.task(refs[flat]).unwrap();
            let chain = &mut chains[task.processor];
            prev_in_chain[flat] = chain.last().copied();
            chain.push(flat);
        }

        let mut topo: Vec<usize> = (0..refs.len()).collect();
        topo.sort_by_key(|&flat| {
            let (job, _) = inst.task(refs[flat]).unwrap();
            (order.position(job.id), is_reduce[flat], refs[flat].task)
        });

        let mut job_maps = vec![Vec::new(); inst.jobs.len()];
        for (flat, &r) in refs.iter().enumerate() {
            if !is_reduce[flat] {
                job_maps[r.job].push(flat);
            }
        }

        Layout {
            positive: refs
                .iter()
                .enumerate()
                .filter(|&(_, &r)| inst.task(r).unwrap().1.volume > 0.0)
                .map(|(flat, _)| flat)
                .collect(),
            refs,
            volume,
            job_of,
            is_reduce,
            release,
            chains,
            prev_in_chain,
            topo,
            job_maps,
            weights: inst.jobs.iter().map(|j| j.weight).collect(),
            beta: inst.beta,
            energy_budget: inst.energy_budget,
        }
    }

    fn energy(&self, p: &[f64]) -> f64 {
        self.positive
            .iter()
            .map(|&i| self.volume[i].powf(self.beta) / p[i].powf(self.beta - 1.0))
            .sum()
    }

    /// Latest Map completion of the task's job, `usize::MAX` when it has no
    /// Map tasks.
    fn latest_map(&self, c_task: &[f64], flat: usize) -> (f64, usize) {
        let mut best = f64::NEG_INFINITY;
        let mut best_flat = usize::MAX;
        for &m in &self.job_maps[self.job_of[flat]] {
            if c_task[m] > best {
                best = c_task[m];
                best_flat = m;
            }
        }
        (best, best_flat)
    }

    /// Evaluates completions and (optionally) an objective subgradient.
    fn evaluate(&self, p: &[f64], grad: Option<&mut [f64]>) -> (f64, Completions) {
        let n_tasks = self.refs.len();
        let mut c_task = vec![0.0; n_tasks];
        let mut source = vec![Source::Constant; n_tasks];

        // Release-anchored prefix maxima along each processor chain. These
        // depend on p only, so they can be computed up front.
        let mut chain_bound = vec![f64::NEG_INFINITY; n_tasks];
        let mut chain_anchor = vec![(0usize, 0usize, 0usize); n_tasks];
        for (proc, chain) in self.chains.iter().enumerate() {
            let mut prefix = 0.0;
            let mut anchor_val = f64::NEG_INFINITY;
            let mut anchor_slot = 0;
            for (slot, &flat) in chain.iter().enumerate() {
                // Candidate anchor at this job's release, before its own p.
                let candidate = self.release[flat] - prefix;
                if candidate > anchor_val {
                    anchor_val = candidate;
                    anchor_slot = slot;
                }
                prefix += p[flat];
                chain_bound[flat] = prefix + anchor_val;
                chain_anchor[flat] = (proc, anchor_slot, slot);
            }
        }

        // Dependency-ordered pass: chain predecessors and the job's Map tasks
        // are always evaluated before the tasks they bound.
        for &flat in &self.topo {
            if self.volume[flat] > 0.0 {
                let (proc, from_slot, to_slot) = chain_anchor[flat];
                let mut best = chain_bound[flat];
                let mut src = Source::Chain { processor: proc, from_slot, to_slot };
                // Back-to-back execution behind the chain predecessor.
                if let Some(prev) = self.prev_in_chain[flat] {
                    let bound = c_task[prev] + p[flat];
                    if bound > best {
                        best = bound;
                        src = Source::ChainPrev { pred: prev };
                    }
                }
                if self.is_reduce[flat] {
                    let (best_map, map_flat) = self.latest_map(&c_task, flat);
                    if map_flat != usize::MAX && best_map + p[flat] > best {
                        best = best_map + p[flat];
                        src = Source::Precedence { pred: map_flat };
                    }
                }
                c_task[flat] = best;
                source[flat] = src;
            } else if !self.is_reduce[flat] {
                // Zero-volume Maps complete at their release date.
                c_task[flat] = self.release[flat];
                source[flat] = Source::Constant;
            } else {
                let (best_map, map_flat) = self.latest_map(&c_task, flat);
                if map_flat != usize::MAX && best_map >= self.release[flat] {
                    c_task[flat] = best_map;
                    source[flat] = Source::Precedence { pred: map_flat };
                } else {
                    c_task[flat] = self.release[flat];
                    source[flat] = Source::Constant;
                }
            }
        }

        let n_jobs = self.weights.len();
        let mut c_job = vec![0.0; n_jobs];
        let mut job_arg = vec![usize::MAX; n_jobs];
        for flat in 0..n_tasks {
            let j = self.job_of[flat];
            if c_task[flat] > c_job[j] {
                c_job[j] = c_task[flat];
                job_arg[j] = flat;
            }
        }
        let objective: f64 =
            (0..n_jobs).map(|j| self.weights[j] * c_job[j]).sum();

        if let Some(grad) = grad {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut stack: Vec<(usize, f64)> = (0..n_jobs)
                .filter(|&j| job_arg[j] != usize::MAX)
                .map(|j| (job_arg[j], self.weights[j]))
                .collect();
            while let Some((flat, wt)) = stack.pop() {
                match source[flat] {
                    Source::Constant => {}
                    Source::Precedence { pred } => {
                        if self.volume[flat] > 0.0 {
                            grad[flat] += wt;
                        }
                        stack.push((pred, wt));
                    }
                    Source::ChainPrev { pred } => {
                        grad[flat] += wt;
                        stack.push((pred, wt));
                    }
                    Source::Chain { processor, from_slot, to_slot } => {
                        for slot in from_slot..=to_slot {
                            grad[self.chains[processor][slot]] += wt;
                        }
                    }
                }
            }
        }

        (objective, Completions { task: c_task, job: c_job })
    }
}

/// Pointwise-least completions consistent with the order, the release dates
/// and the precedence constraints, for the given processing times `p`
/// (aligned with `Instance::task_refs()`).
pub fn evaluate_completions(inst: &Instance, order: &JobOrder, p: &[f64]) -> Completions {
    let layout = Layout::new(inst, order);
    layout.evaluate(p, None).1
}

/// Equal-energy-split processing times: every positive-volume task gets the
/// same energy share `E / N`, hence `p = v * (v / share)^(1/(beta-1))`.
/// Feasible by construction and used both as the solver start point and as
/// the speed assignment of the plain order heuristics.
pub fn equal_energy_split_times(inst: &Instance) -> Vec<f64> {
    let refs = inst.task_refs();
    let positives = refs
        .iter()
        .filter(|&&r| inst.task(r).unwrap().1.volume > 0.0)
        .count()
        .max(1);
    let share = inst.energy_budget / positives as f64;
    refs.iter()
        .map(|&r| {
            let v = inst.task(r).unwrap().1.volume;
            if v > 0.0 {
                v * (v / share).powf(1.0 / (inst.beta - 1.0))
            } else {
                0.0
            }
        })
        .collect()
}

/// Minimizes `sum w_j C_j(p)` over the energy-feasible processing times by
/// projected subgradient descent.
pub fn solve_cp(inst: &Instance, order: &JobOrder, cfg: &CpConfig) -> Result<CpSolution, CpError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(CpError::InvalidInstance(violations));
    }
    let layout = Layout::new(inst, order);
    let n = layout.refs.len();

    let p_init = equal_energy_split_times(inst);
    if layout.positive.is_empty() {
        let (objective, completions) = layout.evaluate(&p_init, None);
        return Ok(CpSolution {
            processing_times: p_init,
            completions,
            objective,
            energy: 0.0,
            energy_slack: inst.energy_budget,
            iterations: 0,
            stationarity: 0.0,
            converged: true,
        });
    }

    // Work in energy-share coordinates: share -> processing time.
    let budget = layout.energy_budget;
    let share_floor = 1e-12 * budget / layout.positive.len() as f64;
    let p_of = |e: &[f64], p: &mut [f64]| {
        for &i in &layout.positive {
            p[i] = layout.volume[i]
                * (layout.volume[i] / e[i]).powf(1.0 / (layout.beta - 1.0));
        }
    };

    let mut e = vec![0.0; n];
    for &i in &layout.positive {
        e[i] = budget / layout.positive.len() as f64;
    }
    let mut p = p_init.clone();
    let mut grad_p = vec![0.0; n];
    let mut grad_e = vec![0.0; n];
    let (f_init, _) = layout.evaluate(&p, None);
    let scale = f_init.abs().max(1.0);

    let mut best_e = e.clone();
    let mut best_f = f_init;
    let mut margin = 0.1 * scale;
    let mut window_start_best = best_f;
    let mut window_count = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    for iter in 1..=cfg.max_iterations {
        iterations = iter;
        p_of(&e, &mut p);
        let (f, _) = layout.evaluate(&p, Some(&mut grad_p));
        if f < best_f {
            best_f = f;
            best_e.copy_from_slice(&e);
        }

        window_count += 1;
        if window_count >= cfg.stall_window {
            let improvement = window_start_best - best_f;
            if improvement < 0.25 * margin {
                margin *= 0.5;
                e.copy_from_slice(&best_e);
                if margin <= cfg.tolerance * scale {
                    converged = true;
                    break;
                }
            }
            window_start_best = best_f;
            window_count = 0;
            continue;
        }

        // Chain rule: d p_i / d e_i = -p_i / ((beta-1) e_i).
        let mut gnorm2 = 0.0;
        for &i in &layout.positive {
            grad_e[i] = -grad_p[i] * p[i] / ((layout.beta - 1.0) * e[i]);
            gnorm2 += grad_e[i] * grad_e[i];
        }
        if gnorm2 <= 0.0 {
            converged = true;
            break;
        }
        let target = best_f - margin;
        let step = (f - target) / gnorm2;
        for &i in &layout.positive {
            e[i] -= step * grad_e[i];
        }
        project_to_budget(&mut e, &layout.positive, budget, share_floor);
    }

    let mut best_p = p_init;
    p_of(&best_e, &mut best_p);
    let used = layout.energy(&best_p);
    let (objective, completions) = layout.evaluate(&best_p, None);
    let solution = CpSolution {
        processing_times: best_p,
        completions,
        objective,
        energy: used,
        energy_slack: inst.energy_budget - used,
        iterations,
        stationarity: margin / scale,
        converged,
    };
    if converged {
        Ok(solution)
    } else {
        Err(CpError::DidNotConverge(Box::new(solution)))
    }
}

/// Euclidean projection onto `{e_i >= floor, sum over positive of e_i <= budget}`:
/// clip at the floor, and when the budget is exceeded subtract a uniform
/// threshold (found by bisection) from every coordinate above it.
fn project_to_budget(e: &mut [f64], positive: &[usize], budget: f64, floor: f64) {
    for &i in positive {
        if e[i] < floor {
            e[i] = floor;
        }
    }
    let total: f64 = positive.iter().map(|&i| e[i]).sum();
    if total <= budget {
        return;
    }
    let mut lo = 0.0;
    let mut hi = positive.iter().map(|&i| e[i]).fold(0.0, f64::max);
    for _ in 0..128 {
        let tau = 0.5 * (lo + hi);
        let sum: f64 = positive.iter().map(|&i| (e[i] - tau).max(floor)).sum();
        if sum > budget {
            lo = tau;
        } else {
            hi = tau;
        }
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    let tau = 0.5 * (lo + hi);
    for &i in positive {
        e[i] = (e[i] - tau).max(floor);
    }
}

/// Exact solution of the single-processor unit-work chain at quadratic power:
/// position `j` of `n` carries objective coefficient `n - j + 1`, the optimal
/// speeds are proportional to the square roots of those coefficients, and the
/// optimum is `(sum_{i=1..n} sqrt(i))^2 / E`.
pub fn closed_form_chain(n: usize, energy_budget: f64, beta: f64) -> Result<(Vec<f64>, f64), CpError> {
    if (beta - 2.0).abs() > 1e-12 {
        return Err(CpError::UnsupportedExponent { beta });
    }
    let root_sum: f64 = (1..=n).map(|i| (i as f64).sqrt()).sum();
    let speeds = (1..=n)
        .map(|j| energy_budget * ((n - j + 1) as f64).sqrt() / root_sum)
        .collect();
    Ok((speeds, root_sum * root_sum / energy_budget))
}

/// List-schedules the tasks in the order's priority with the given processing
/// times: every processor runs the released, precedence-cleared task of
/// highest order priority.
pub fn schedule_from_order(inst: &Instance, order: &JobOrder, p: &[f64]) -> Schedule {
    let refs = inst.task_refs();
    let sim_tasks: Vec<sim::SimTask> = refs
        .iter()
        .enumerate()
        .filter(|&(_, &r)| inst.task(r).unwrap().1.volume > 0.0)
        .map(|(flat, &r)| {
            let (job, task) = inst.task(r).unwrap();
            sim::SimTask {
                task: r,
                processor: task.processor,
                duration: p[flat],
                available_from: job.release,
                priority: (order.position(job.id) as u64, job.id),
                is_reduce: task.kind == TaskKind::Reduce,
            }
        })
        .collect();
    sim::list_schedule(inst, &sim_tasks)
}
