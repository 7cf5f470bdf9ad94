//! Closed forms and numerical optimization of the energy-augmentation and
//! approximation-ratio expressions of the alpha-point scheduler.
//!
//! The scheduler stretches processing times by `gamma` and starts tasks after
//! their alpha-point, which costs a `1/(gamma^(beta-1) alpha^beta)` factor in
//! energy and a variant-dependent factor in the objective. Choosing
//! `gamma = 1/(alpha * alpha^(1/(beta-1)))` makes the energy factor exactly
//! one; allowing a larger energy factor buys a smaller objective ratio.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioVariant {
    /// Precedence constraints and release dates both present.
    General,
    /// No Map-to-Reduce precedence pairs.
    NoPrecedence,
    /// No precedence pairs and all jobs released at time zero.
    NoPrecedenceNoRelease,
}

impl RatioVariant {
    pub fn label(self) -> &'static str {
        match self {
            RatioVariant::General => "general",
            RatioVariant::NoPrecedence => "no_prec",
            RatioVariant::NoPrecedenceNoRelease => "no_prec_no_release",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RatioError {
    OutOfRange(String),
    /// Grid probing and golden-section refinement disagree; the objective is
    /// not unimodal over (0,1) as assumed.
    NotUnimodal { grid_min: f64, refined_min: f64 },
}

impl std::fmt::Display for RatioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RatioError::OutOfRange(msg) => write!(f, "parameter out of range: {msg}"),
            RatioError::NotUnimodal { grid_min, refined_min } => write!(
                f,
                "grid minimum {grid_min} and refined minimum {refined_min} disagree"
            ),
        }
    }
}

impl std::error::Error for RatioError {}

/// Factor by which the scheduler may exceed the energy budget:
/// `1 / (gamma^(beta-1) * alpha^beta)`.
pub fn energy_augmentation_factor(alpha: f64, gamma: f64, beta: f64) -> Result<f64, RatioError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RatioError::OutOfRange(format!("alpha must be in (0,1), got {alpha}")));
    }
    if !(gamma > 0.0) {
        return Err(RatioError::OutOfRange(format!("gamma must be positive, got {gamma}")));
    }
    if !(beta > 1.0) {
        return Err(RatioError::OutOfRange(format!("beta must exceed 1, got {beta}")));
    }
    Ok(1.0 / (gamma.powf(beta - 1.0) * alpha.powf(beta)))
}

/// Objective ratio of the alpha-point scheduler against the relaxation.
pub fn ratio_bound(
    alpha: f64,
    gamma: f64,
    delta: f64,
    variant: RatioVariant,
) -> Result<f64, RatioError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RatioError::OutOfRange(format!("alpha must be in (0,1), got {alpha}")));
    }
    if !(gamma > 0.0) {
        return Err(RatioError::OutOfRange(format!("gamma must be positive, got {gamma}")));
    }
    if !(delta >= 0.0) {
        return Err(RatioError::OutOfRange(format!("delta must be nonnegative, got {delta}")));
    }
    let base = match variant {
        RatioVariant::General => (gamma * gamma + 3.0 * gamma + 1.0) / (1.0 - alpha),
        RatioVariant::NoPrecedence => (gamma + 1.0) / (1.0 - alpha),
        RatioVariant::NoPrecedenceNoRelease => gamma / (1.0 - alpha),
    };
    Ok(base * (1.0 + delta))
}

/// The gamma that makes the energy augmentation factor exactly one:
/// `1 / (alpha * alpha^(1/(beta-1)))`.
pub fn no_augmentation_gamma(alpha: f64, beta: f64) -> f64 {
    1.0 / (alpha * alpha.powf(1.0 / (beta - 1.0)))
}

#[derive(Debug, Clone, Copy)]
pub struct OptimalRatio {
    pub alpha: f64,
    pub ratio: f64,
}

const ALPHA_PROBES: usize = 64;
const GOLDEN_TOL: f64 = 1e-6;

/// Minimizes `f` over alpha in (0,1): 64 grid probes guard against
/// non-unimodality, golden-section refines the winning bracket to 1e-6.
fn minimize_over_alpha(f: impl Fn(f64) -> f64) -> Result<OptimalRatio, RatioError> {
    let probe = |i: usize| i as f64 / (ALPHA_PROBES + 1) as f64;
    let mut best_i = 1;
    let mut best_v = f64::INFINITY;
    for i in 1..=ALPHA_PROBES {
        let v = f(probe(i));
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut lo = if best_i == 1 { 1e-9 } else { probe(best_i - 1) };
    let mut hi = if best_i == ALPHA_PROBES { 1.0 - 1e-9 } else { probe(best_i + 1) };

    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let alpha = 0.5 * (lo + hi);
    let ratio = f(alpha);
    if best_v < ratio - 1e-3 {
        return Err(RatioError::NotUnimodal { grid_min: best_v, refined_min: ratio });
    }
    Ok(OptimalRatio { alpha, ratio })
}

/// Best achievable no-augmentation ratio for the given power exponent: picks
/// the gamma with energy factor one and minimizes the variant bound over
/// alpha. The certified analysis needs `beta >= 2`.
pub fn optimal_ratio(beta: f64, variant: RatioVariant) -> Result<OptimalRatio, RatioError> {
    if !(beta >= 2.0) {
        return Err(RatioError::OutOfRange(format!(
            "ratio analysis certified for beta >= 2 only, got {beta}"
        )));
    }
    minimize_over_alpha(|alpha| {
        ratio_bound(alpha, no_augmentation_gamma(alpha, beta), 0.0, variant).unwrap()
    })
}

#[derive(Debug, Clone, Copy)]
pub struct TradeoffPoint {
    /// Allowed extra energy as a fraction of the budget (0.5 = 50%).
    pub augmentation: f64,
    pub alpha: f64,
    pub ratio: f64,
}

/// General-variant ratio as a function of allowed energy augmentation. At
/// each level `a` the gamma is chosen so the energy factor equals exactly
/// `1 + a` (the ratio grows with gamma, so the binding choice is optimal),
/// then the bound is minimized over alpha.
pub fn tradeoff_curve(beta: f64, levels: &[f64]) -> Result<Vec<TradeoffPoint>, RatioError> {
    if !(beta >= 2.0) {
        return Err(RatioError::OutOfRange(format!(
            "ratio analysis certified for beta >= 2 only, got {beta}"
        )));
    }
    let mut out = Vec::with_capacity(levels.len());
    for &a in levels {
        if !(a >= 0.0) {
            return Err(RatioError::OutOfRange(format!("augmentation must be >= 0, got {a}")));
        }
        let allowance = 1.0 + a;
        let gamma_for = move |alpha: f64| (allowance * alpha.powf(beta)).powf(-1.0 / (beta - 1.0));
        let best = minimize_over_alpha(|alpha| {
            ratio_bound(alpha, gamma_for(alpha), 0.0, RatioVariant::General).unwrap()
        })?;
        out.push(TradeoffPoint { augmentation: a, alpha: best.alpha, ratio: best.ratio });
    }
    Ok(out)
}
