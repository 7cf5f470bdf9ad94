//! Scheduling of MapReduce jobs on speed-scalable processors under a global
//! energy budget, minimizing total weighted completion time.
//!
//! Tasks are preassigned to processors; the scheduler picks start times and
//! speeds. Every Reduce task of a job starts only after all Map tasks of the
//! job complete, and the total energy `sum v * s^(beta-1)` must stay within
//! the budget.
//!
//! The crate provides:
//!
//! * [`model`] - instances, schedules, validation, objective and energy;
//! * [`grids`] - geometric speed and time discretization;
//! * [`lp`] - the interval-indexed relaxation and its solver;
//! * [`alpha`] - alpha-point rounding into feasible schedules, with certified
//!   energy and objective bounds;
//! * [`cp`] - the fixed-order convex relaxation, its subgradient solver and
//!   the order-driven list scheduler;
//! * [`orders`] - FCFS and Smith Rule policies plus worst-case families;
//! * [`ratios`] - approximation-ratio closed forms, optimal parameter choices
//!   and the energy/quality tradeoff curve;
//! * [`experiments`] - seeded instance generation, an exhaustive oracle for
//!   tiny instances, and the policy comparison runner;
//! * [`io`] - JSON instances and CSV schedules, grids, solutions, results.

pub mod alpha;
pub mod cp;
pub mod experiments;
pub mod grids;
pub mod io;
pub mod lp;
pub mod model;
pub mod orders;
pub mod ratios;
mod sim;

pub use model::{Instance, Job, Schedule, Task, TaskKind, TaskRef};
