//! Geometric discretization of speeds and of the time horizon.
//!
//! Restricting each task to speeds from a geometric grid loses at most a
//! `(1+epsilon)` factor in the objective, and every task's speed in an optimal
//! schedule lies between `v / t_max` and `(E / v)^(1/(beta-1))`, so a grid
//! spanning those bounds suffices. The horizon `(0, t_max]` is likewise cut
//! into geometrically growing intervals so the number of time-indexed
//! variables stays polynomial.

use crate::model::Instance;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// A grid parameter was zero, negative, or non-finite.
    BadParameter(String),
    /// The instance has no positive-volume task, so speed bounds are undefined.
    NoPositiveVolume,
}

impl std::fmt::Display for GridError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridError::BadParameter(msg) => write!(f, "bad grid parameter: {msg}"),
            GridError::NoPositiveVolume => {
                write!(f, "instance has no positive-volume task")
            }
        }
    }
}

impl std::error::Error for GridError {}

/// Speeds `s_lower * (1+epsilon)^l` for `l = 0..=k`, where `k` is the smallest
/// integer such that the top speed reaches `s_upper`.
#[derive(Debug, Clone)]
pub struct SpeedGrid {
    pub s_lower: f64,
    pub s_upper: f64,
    pub epsilon: f64,
    pub speeds: Vec<f64>,
}

impl SpeedGrid {
    /// The exponent `k` of the top grid speed.
    pub fn k(&self) -> usize {
        self.speeds.len() - 1
    }

    pub fn s_max(&self) -> f64 {
        *self.speeds.last().unwrap()
    }

    /// Largest grid speed `<= s`, if any. For `s` in `[s_lower, s_upper]` the
    /// result is at least `s / (1+epsilon)`.
    pub fn round_down(&self, s: f64) -> Option<f64> {
        match self.speeds.partition_point(|&g| g <= s) {
            0 => None,
            n => Some(self.speeds[n - 1]),
        }
    }
}

/// Interval endpoints `tau_0 = 0`, `tau_t = lambda * (1+delta)^(t-1)` for
/// `t = 1..=u+1`; interval `I_t = (tau_t, tau_{t+1}]` for `t = 0..=u`.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    pub lambda: f64,
    pub delta: f64,
    pub tau: Vec<f64>,
}

impl TimeGrid {
    /// Index of the last interval.
    pub fn u(&self) -> usize {
        self.tau.len() - 2
    }

    /// Number of intervals `u + 1`.
    pub fn num_intervals(&self) -> usize {
        self.tau.len() - 1
    }

    /// Length of interval `I_t`, computed as `tau_{t+1} - tau_t` so that
    /// interval lengths telescope back to the endpoints. For `delta <= 1` the
    /// subtraction is exact (Sterbenz: `tau_{t+1} <= 2 tau_t`), hence so is
    /// every prefix sum.
    pub fn length(&self, t: usize) -> f64 {
        self.tau[t + 1] - self.tau[t]
    }
}

/// Horizon bound: no optimal schedule finishes after
/// `(w_max/w_min) * (n*r_max + n(n+1) * (|T| * v_max^beta / E)^(1/(beta-1)))`.
pub fn compute_t_max(inst: &Instance) -> Result<f64, GridError> {
    if !(inst.energy_budget > 0.0) {
        return Err(GridError::BadParameter(format!(
            "energy budget must be positive, got {}",
            inst.energy_budget
        )));
    }
    if inst.v_min().is_none() {
        return Err(GridError::NoPositiveVolume);
    }
    let n = inst.jobs.len() as f64;
    let num_tasks = inst.num_tasks() as f64;
    let slot = (num_tasks * inst.v_max().powf(inst.beta) / inst.energy_budget)
        .powf(1.0 / (inst.beta - 1.0));
    Ok(inst.w_max() / inst.w_min() * (n * inst.r_max() + n * (n + 1.0) * slot))
}

/// Per-task speed bounds in any optimal schedule: the task must fit in the
/// horizon and cannot alone exceed the energy budget.
pub fn speed_bounds(volume: f64, t_max: f64, energy_budget: f64, beta: f64) -> (f64, f64) {
    debug_assert!(volume > 0.0, "zero-volume tasks never get a speed");
    (volume / t_max, (energy_budget / volume).powf(1.0 / (beta - 1.0)))
}

/// Smallest integer `>= 0` such that `base * growth^result >= target`,
/// searched upward from the floating-point log estimate so that rounding in
/// the estimate cannot produce a value one too large or too small.
fn smallest_exponent(base: f64, growth: f64, target: f64) -> usize {
    let estimate = (target / base).ln() / growth.ln();
    let mut k = estimate.floor().max(0.0) as usize;
    k = k.saturating_sub(1);
    while base * growth.powi(k as i32) < target {
        k += 1;
    }
    k
}

pub fn build_speed_grid(s_lower: f64, s_upper: f64, epsilon: f64) -> Result<SpeedGrid, GridError> {
    if !(s_lower > 0.0 && s_lower.is_finite()) || !(s_upper >= s_lower && s_upper.is_finite()) {
        return Err(GridError::BadParameter(format!(
            "need 0 < s_lower <= s_upper, got [{s_lower}, {s_upper}]"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(GridError::BadParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let k = smallest_exponent(s_lower, 1.0 + epsilon, s_upper);
    let speeds = (0..=k).map(|l| s_lower * (1.0 + epsilon).powi(l as i32)).collect();
    Ok(SpeedGrid { s_lower, s_upper, epsilon, speeds })
}

pub fn build_time_grid(lambda: f64, delta: f64, t_max: f64) -> Result<TimeGrid, GridError> {
    if !(lambda > 0.0 && lambda.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
        return Err(GridError::BadParameter(format!(
            "lambda and delta must be positive, got lambda={lambda} delta={delta}"
        )));
    }
    if !(t_max >= lambda && t_max.is_finite()) {
        return Err(GridError::BadParameter(format!(
            "t_max must be finite and >= lambda, got t_max={t_max} lambda={lambda}"
        )));
    }
    // u is the smallest integer with lambda * (1+delta)^(u-1) >= t_max.
    let u = 1 + smallest_exponent(lambda, 1.0 + delta, t_max);
    let mut tau = Vec::with_capacity(u + 2);
    tau.push(0.0);
    for t in 1..=u + 1 {
        tau.push(lambda * (1.0 + delta).powi(t as i32 - 1));
    }
    Ok(TimeGrid { lambda, delta, tau })
}
