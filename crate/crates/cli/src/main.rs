//! Command-line driver: instance generation, validation, the relaxation
//! solvers, the schedulers, the ratio tables and the policy experiment.
//!
//! Every command writes numeric output as CSV to `--out` (stdout by default)
//! and exits nonzero when validation or certification fails.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mrsched::alpha::{run_alpha_pipeline, PipelineConfig};
use mrsched::cp::{equal_energy_split_times, solve_cp, CpConfig, CpError};
use mrsched::experiments::{
    brute_force_oracle, generate_instance, run_experiment, ExperimentConfig, GenConfig,
    OracleLimits,
};
use mrsched::grids::{build_speed_grid, compute_t_max, SpeedGrid};
use mrsched::io;
use mrsched::lp::{build_lp, solve_lp, write_lp_format, LpStatus, SolverConfig};
use mrsched::model::{objective, validate_instance, Instance};
use mrsched::orders::{fcfs_order, smith_order, JobOrder};
use mrsched::ratios::{optimal_ratio, tradeoff_curve, RatioVariant};

#[derive(Parser)]
#[command(name = "mrsched", about = "Energy-budgeted MapReduce job scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArg {
    fn write(&self, contents: &[u8]) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, contents)
                .with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(contents)?,
        }
        Ok(())
    }
}

#[derive(Args)]
struct OrderArg {
    /// Job order policy: "fcfs", "sr", or a path to a JSON array of job ids.
    #[arg(long, default_value = "fcfs")]
    order: String,
}

impl OrderArg {
    fn build(&self, inst: &Instance) -> Result<JobOrder> {
        match self.order.as_str() {
            "fcfs" => Ok(fcfs_order(inst)),
            "sr" => Ok(smith_order(inst)),
            path => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading order file {path}"))?;
                let ids: Vec<u64> = serde_json::from_str(&text)
                    .with_context(|| format!("parsing order file {path}"))?;
                JobOrder::new(inst, ids).map_err(|e| anyhow!("{e}"))
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance.
    Generate {
        /// Generator config as JSON; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        processors: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Validate an instance file, and optionally a schedule against it.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Budget for the schedule energy check; the instance budget when
        /// absent (pass an inflated budget for augmented schedules).
        #[arg(long)]
        energy_budget: Option<f64>,
    },
    /// Solve the interval-indexed relaxation and dump per-task values.
    SolveLp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Tighter horizon override (the worst-case bound when absent).
        #[arg(long)]
        t_max: Option<f64>,
        /// Also export the model in LP interchange format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Round the relaxation into a feasible schedule and certify its bounds.
    ScheduleAlpha {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        /// Write the bound certificate report here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Solve the fixed-order relaxation for a job order.
    SolveCp {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        order: OrderArg,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iterations: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// List-schedule an instance under a job order.
    ScheduleOrder {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        order: OrderArg,
        /// Processing times: "cp" solves the fixed-order relaxation,
        /// "equal-split" gives every task the same energy share.
        #[arg(long, default_value = "cp")]
        times: String,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Emit the best no-augmentation ratios per variant (one row per beta).
    Ratios {
        /// Power exponents; the six standard table values when absent.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        beta: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Emit the energy-augmentation versus ratio tradeoff curve.
    Tradeoff {
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        /// Augmentation levels in percent.
        #[arg(long, num_args = 1.., value_delimiter = ',',
              default_value = "0,10,20,30,40,50,60,70,80,90,100")]
        levels: Vec<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the order-policy comparison over seeded instances.
    Experiment {
        /// Experiment config as JSON; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Exhaustive optimum of a tiny instance over a speed grid.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        /// Explicit comma-separated grid speeds; derived from the instance
        /// bounds with --epsilon when absent.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        speeds: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Limits as jobs,tasks,speeds.
        #[arg(long, num_args = 3, value_delimiter = ',', default_value = "3,6,4")]
        limits: Vec<usize>,
        #[command(flatten)]
        out: OutArg,
    },
}

fn load_instance(path: &PathBuf) -> Result<Instance> {
    let inst = io::read_instance(path)
        .map_err(|e| anyhow!("{e}"))
        .with_context(|| format!("reading instance {}", path.display()))?;
    Ok(inst)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { config, seed, jobs, processors, out } => {
            let mut cfg: GenConfig = match config {
                Some(path) => serde_json::from_str(
                    &std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?,
                )?,
                None => GenConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(jobs) = jobs {
                cfg.num_jobs = jobs;
            }
            if let Some(m) = processors {
                cfg.num_processors = m;
            }
            let inst = generate_instance(&cfg).map_err(|e| anyhow!("{e}"))?;
            out.write(io::instance_to_json(&inst).as_bytes())?;
            Ok(0)
        }
        Command::Validate { instance, schedule, energy_budget } => {
            let inst = load_instance(&instance)?;
            let mut violations = validate_instance(&inst);
            if let Some(sched_path) = schedule {
                let file = std::fs::File::open(&sched_path)
                    .with_context(|| format!("opening {}", sched_path.display()))?;
                let sched = io::read_schedule_csv(std::io::BufReader::new(file), &inst)
                    .map_err(|e| anyhow!("{e}"))?;
                let budget = energy_budget.unwrap_or(inst.energy_budget);
                violations.extend(
                    mrsched::model::validate_schedule(&inst, &sched, budget)
                        .map_err(|e| anyhow!("{e}"))?,
                );
            }
            if violations.is_empty() {
                println!("ok");
                Ok(0)
            } else {
                for v in &violations {
                    println!("{v}");
                }
                Ok(1)
            }
        }
        Command::SolveLp { instance, epsilon, delta, t_max, export_lp, out } => {
            let inst = load_instance(&instance)?;
            let t_max = match t_max {
                Some(t) => t,
                None => compute_t_max(&inst).map_err(|e| anyhow!("{e}"))?,
            };
            let v_min = inst.v_min().ok_or_else(|| anyhow!("no positive-volume task"))?;
            let speed_grid = build_speed_grid(
                v_min / t_max,
                (inst.energy_budget / v_min).powf(1.0 / (inst.beta - 1.0)),
                epsilon,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let lambda = 0.25 * v_min / speed_grid.s_max();
            let time_grid = mrsched::grids::build_time_grid(lambda, delta, t_max)
                .map_err(|e| anyhow!("{e}"))?;
            let model = build_lp(&inst, &speed_grid, &time_grid).map_err(|e| anyhow!("{e}"))?;
            if let Some(path) = export_lp {
                let mut file = std::fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                write_lp_format(&model, &mut file)?;
            }
            let solution = solve_lp(&model, SolverConfig::default());
            let mut buf = Vec::new();
            writeln!(buf, "# status={:?}", solution.status)?;
            writeln!(buf, "# objective={}", solution.objective)?;
            writeln!(buf, "# max_residual={}", solution.max_residual)?;
            writeln!(buf, "# variables={}", model.num_vars())?;
            writeln!(buf, "job_id,kind,processor,lp_completion,lp_time,lp_energy")?;
            if solution.status == LpStatus::Optimal {
                for r in inst.task_refs() {
                    let (job, task) = inst.task(r).unwrap();
                    let kind = match task.kind {
                        mrsched::TaskKind::Map => "map",
                        mrsched::TaskKind::Reduce => "reduce",
                    };
                    let completion = model.task_completion(&solution, r).unwrap_or(0.0);
                    let (time, energy) = if task.volume > 0.0 {
                        (
                            model.time_profile(&solution, r).unwrap().iter().sum::<f64>(),
                            model.task_energy(&solution, r, inst.beta).unwrap(),
                        )
                    } else {
                        (0.0, 0.0)
                    };
                    writeln!(
                        buf,
                        "{},{},{},{},{},{}",
                        job.id, kind, task.processor, completion, time, energy
                    )?;
                }
            }
            out.write(&buf)?;
            Ok(if solution.status == LpStatus::Optimal { 0 } else { 1 })
        }
        Command::ScheduleAlpha {
            instance,
            alpha,
            gamma,
            epsilon,
            delta,
            lambda,
            t_max,
            certificate,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let cfg = PipelineConfig {
                epsilon,
                delta,
                alpha,
                gamma,
                lambda,
                t_max_override: t_max,
                solver: SolverConfig::default(),
            };
            let run = run_alpha_pipeline(&inst, &cfg).map_err(|e| anyhow!("{e}"))?;
            let mut buf = Vec::new();
            io::write_schedule_csv(&mut buf, &inst, &run.schedule)?;
            out.write(&buf)?;
            if let Some(path) = certificate {
                let mut file = std::fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                run.certificate.write_report(&mut file)?;
            }
            eprintln!(
                "objective={} lp_objective={} energy_factor={}",
                objective(&inst, &run.schedule),
                run.solution.objective,
                run.certificate.augmentation_factor
            );
            Ok(if run.certificate.all_pass() { 0 } else { 1 })
        }
        Command::SolveCp { instance, order, tol, max_iterations, out } => {
            let inst = load_instance(&instance)?;
            let order = order.build(&inst)?;
            let cfg = CpConfig { tolerance: tol, max_iterations, ..CpConfig::default() };
            let (sol, code) = match solve_cp(&inst, &order, &cfg) {
                Ok(sol) => (sol, 0),
                Err(CpError::DidNotConverge(best)) => (*best, 1),
                Err(e) => bail!("{e}"),
            };
            let mut buf = Vec::new();
            io::write_cp_solution_csv(&mut buf, &inst, &sol)?;
            out.write(&buf)?;
            Ok(code)
        }
        Command::ScheduleOrder { instance, order, times, tol, out } => {
            let inst = load_instance(&instance)?;
            let order = order.build(&inst)?;
            let p = match times.as_str() {
                "equal-split" => equal_energy_split_times(&inst),
                "cp" => {
                    let cfg = CpConfig { tolerance: tol, ..CpConfig::default() };
                    match solve_cp(&inst, &order, &cfg) {
                        Ok(sol) => sol.processing_times,
                        Err(CpError::DidNotConverge(best)) => best.processing_times,
                        Err(e) => bail!("{e}"),
                    }
                }
                other => bail!("unknown --times {other:?} (expected \"cp\" or \"equal-split\")"),
            };
            let sched = mrsched::cp::schedule_from_order(&inst, &order, &p);
            let violations =
                mrsched::model::validate_schedule(&inst, &sched, inst.energy_budget)
                    .map_err(|e| anyhow!("{e}"))?;
            let mut buf = Vec::new();
            io::write_schedule_csv(&mut buf, &inst, &sched)?;
            out.write(&buf)?;
            eprintln!("objective={}", objective(&inst, &sched));
            Ok(if violations.is_empty() { 0 } else { 1 })
        }
        Command::Ratios { beta, out } => {
            let betas = beta.unwrap_or_else(|| vec![2.0, 2.2, 2.4, 2.6, 2.8, 3.0]);
            let mut buf = Vec::new();
            writeln!(buf, "beta,variant,alpha_star,ratio")?;
            for &b in &betas {
                for variant in [
                    RatioVariant::General,
                    RatioVariant::NoPrecedence,
                    RatioVariant::NoPrecedenceNoRelease,
                ] {
                    let best = optimal_ratio(b, variant).map_err(|e| anyhow!("{e}"))?;
                    writeln!(buf, "{},{},{},{}", b, variant.label(), best.alpha, best.ratio)?;
                }
            }
            out.write(&buf)?;
            Ok(0)
        }
        Command::Tradeoff { beta, levels, out } => {
            let fractions: Vec<f64> = levels.iter().map(|p| p / 100.0).collect();
            let curve = tradeoff_curve(beta, &fractions).map_err(|e| anyhow!("{e}"))?;
            let mut buf = Vec::new();
            writeln!(buf, "beta,augmentation_percent,alpha_star,ratio")?;
            for point in curve {
                writeln!(
                    buf,
                    "{},{},{},{}",
                    beta,
                    point.augmentation * 100.0,
                    point.alpha,
                    point.ratio
                )?;
            }
            out.write(&buf)?;
            Ok(0)
        }
        Command::Experiment { config, out } => {
            let cfg: ExperimentConfig = match config {
                Some(path) => serde_json::from_str(
                    &std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?,
                )?,
                None => ExperimentConfig::default(),
            };
            let results = run_experiment(&cfg).map_err(|e| anyhow!("{e}"))?;
            let mut buf = Vec::new();
            io::write_experiment_csv(&mut buf, &results)?;
            out.write(&buf)?;
            Ok(0)
        }
        Command::Oracle { instance, speeds, epsilon, limits, out } => {
            let inst = load_instance(&instance)?;
            let grid = match speeds {
                Some(list) => {
                    let mut speeds = list;
                    speeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    SpeedGrid {
                        s_lower: speeds[0],
                        s_upper: *speeds.last().unwrap(),
                        epsilon: 0.0,
                        speeds,
                    }
                }
                None => {
                    let t_max = compute_t_max(&inst).map_err(|e| anyhow!("{e}"))?;
                    let v_min =
                        inst.v_min().ok_or_else(|| anyhow!("no positive-volume task"))?;
                    build_speed_grid(
                        v_min / t_max,
                        (inst.energy_budget / v_min).powf(1.0 / (inst.beta - 1.0)),
                        epsilon,
                    )
                    .map_err(|e| anyhow!("{e}"))?
                }
            };
            let limits =
                OracleLimits { max_jobs: limits[0], max_tasks: limits[1], max_speeds: limits[2] };
            match brute_force_oracle(&inst, &grid, &limits).map_err(|e| anyhow!("{e}"))? {
                Some(result) => {
                    let mut buf = Vec::new();
                    writeln!(buf, "# objective={}", result.objective)?;
                    io::write_schedule_csv(&mut buf, &inst, &result.schedule)?;
                    out.write(&buf)?;
                    Ok(0)
                }
                None => {
                    eprintln!("no energy-feasible schedule on this speed grid");
                    Ok(1)
                }
            }
        }
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}
