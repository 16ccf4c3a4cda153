//! Sub/supersolution machinery around the stationary profiles.
//!
//! A candidate has the self-similar form `(t+T)^{±δ}·base((t+T)^{±γ}x)`:
//! the `+` signs give a slowly growing subsolution, the `-` signs a slowly
//! decaying supersolution. The exponents δ, γ and the time shift T are pinned
//! by the data ratio κ (`T^{±δ} = κ`, so the candidate starts at κ·base of a
//! rescaled argument), and the admissible ranges guarantee that the residual
//! `N[W] = W_t - W_xx + W^q - W^p` keeps one sign, which is verified here
//! analytically rather than assumed. On top of the candidates sit an
//! initial-data classifier with decay/blow-up rate fits and a bisection
//! harness for the threshold value of κ.

use std::fmt;

use crate::exact::{StationaryProfile, StationaryRegime};
use crate::model::{ModelParams, Profile, TimeSeries};
use crate::pde::{
    estimate_blowup_time, evolve, BlowupFit, EvolutionRecord, Outcome, PdeError, SolverConfig,
};

/// Errors from candidate construction, residual checks, and bisection.
#[derive(Debug, Clone, PartialEq)]
pub enum SeparatrixError {
    /// κ must exceed 1 for a subsolution and lie in (0, 1) for a
    /// supersolution.
    KappaOnWrongSide { kappa: f64, direction: Direction },
    /// The admissible exponent range degenerated: δ fell below
    /// [`MIN_DELTA`], no admissible δ keeps the time shift κ^{±1/δ} within
    /// [`MAX_TIME_SHIFT`], or the base profile's domain does not reach its
    /// tail regime.
    BoundCollapse { reason: String },
    /// A residual sample needs the base profile at ζ beyond its grid.
    SampleOutsideProfile { zeta: f64, half_width: f64 },
    /// A bisection endpoint did not classify as the bracket requires.
    BadBracket { kappa: f64, expected: &'static str, got: String },
    /// A fit window holds fewer usable samples than required.
    InsufficientWindow { needed: usize, got: usize },
    /// An evolution run inside classification or bisection failed.
    Evolution(PdeError),
}

impl fmt::Display for SeparatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeparatrixError::KappaOnWrongSide { kappa, direction } => {
                write!(f, "kappa={kappa} is on the wrong side of 1 for a {direction}")
            }
            SeparatrixError::BoundCollapse { reason } => {
                write!(f, "candidate construction degenerated: {reason}")
            }
            SeparatrixError::SampleOutsideProfile { zeta, half_width } => {
                write!(f, "sample at zeta={zeta} outside the profile half-width {half_width}")
            }
            SeparatrixError::BadBracket { kappa, expected, got } => {
                write!(f, "bracket endpoint kappa={kappa} should {expected}, got {got}")
            }
            SeparatrixError::InsufficientWindow { needed, got } => {
                write!(f, "fit window needs {needed} usable samples, got {got}")
            }
            SeparatrixError::Evolution(e) => write!(f, "evolution failed: {e}"),
        }
    }
}

impl std::error::Error for SeparatrixError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SeparatrixError::Evolution(e) => Some(e),
            _ => None,
        }
    }
}

impl From<PdeError> for SeparatrixError {
    fn from(e: PdeError) -> Self {
        SeparatrixError::Evolution(e)
    }
}

/// Which side of the comparison a candidate sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Grows like `(t+T)^{+δ}`; built with κ > 1.
    Subsolution,
    /// Decays like `(t+T)^{-δ}`; built with 0 < κ < 1.
    Supersolution,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Subsolution => write!(f, "subsolution"),
            Direction::Supersolution => write!(f, "supersolution"),
        }
    }
}

/// A self-similar comparison candidate `(t+T)^{±δ}·base((t+T)^{±γ}x)`.
///
/// The exponents satisfy, by construction:
/// * q = 1 subsolution: `0 < δ < κ^{(p-1)/2} - 1`, `γ = δ(p-1)/4`;
/// * q = 1 supersolution: `0 < δ < 1 - κ^{p-1}`, `γ = δ(p-1)/2`;
/// * q > 1 (either direction): `δ/γ = 1/(p-1) + 1/(q-1)`, which places γ
///   strictly inside `(δ(q-1)/2, δ(p-1)/2)`, with δ bounded through the
///   interior floor `L₀^{p-1}` (see [`build_candidate`]);
///
/// and in every case `T = κ^{±1/δ} > 1` so that the candidate at t = 0 is
/// exactly κ times the (argument-rescaled) base profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatrixCandidate {
    pub direction: Direction,
    /// Data-scaling constant; the candidate at t = 0 has amplitude κ·base.
    pub kappa: f64,
    /// Amplitude exponent δ > 0, chosen as half its admissible upper bound.
    pub delta: f64,
    /// Spatial rescaling exponent γ > 0.
    pub gamma: f64,
    /// Time shift T = κ^{±1/δ} > 1.
    pub t_shift: f64,
    /// q > 1 only: first radius where the base's log-slope `-ζψ₀'/ψ₀`
    /// exceeds δ/γ (the drift term is self-negative beyond it).
    pub r0: Option<f64>,
    /// q > 1 only: interior floor `ψ₀(R₀) = inf over [-R₀, R₀] of ψ₀`.
    pub l0: Option<f64>,
    pub base: StationaryProfile,
}

impl SeparatrixCandidate {
    /// The stationary family the candidate was built on.
    pub fn regime(&self) -> StationaryRegime {
        self.base.regime
    }
}

/// Cap on the time shift T = κ^{±1/δ}. The builder enforces it by raising δ
/// (shrinking 1/δ) when the default choice would overflow; when no admissible
/// δ respects the cap the construction degenerates and is reported instead.
pub const MAX_TIME_SHIFT: f64 = 1e12;

/// Amplitude exponents below this are treated as a collapsed construction.
pub const MIN_DELTA: f64 = 1e-6;

/// Builds the self-similar candidate for the given direction and data ratio
/// on top of a stationary base profile (which fixes p, q, and the regime).
///
/// δ defaults to half its admissible upper bound: the bounds in the
/// candidate invariants are open, and the midpoint keeps the construction
/// safely interior. When the resulting time shift T = κ^{±1/δ} would exceed
/// [`MAX_TIME_SHIFT`], δ is raised to the smallest value that respects the
/// cap (1/δ = ln(MAX_TIME_SHIFT)/|ln κ|), still strictly below the bound or
/// the construction collapses. For q > 1 the bound involves the interior
/// floor L₀ = ψ₀(R₀), where R₀ is found by an outward scan for the first
/// crossing of the log-slope `-ζψ₀'/ψ₀` above δ/γ (linearly interpolated
/// between nodes). Since δ/γ is pinned to ρ = 1/(p-1) + 1/(q-1)
/// independently of δ, R₀ and L₀ do not move when δ changes, and the bound
/// is computed in a single pass; the scan's limit 2/(q-1) exceeds ρ, so the
/// crossing exists whenever the profile's domain reaches its tail regime.
pub fn build_candidate(
    direction: Direction,
    kappa: f64,
    base: &StationaryProfile,
) -> Result<SeparatrixCandidate, SeparatrixError> {
    let wrong_side = match direction {
        Direction::Subsolution => !(kappa > 1.0),
        Direction::Supersolution => !(kappa > 0.0 && kappa < 1.0),
    };
    if !kappa.is_finite() || wrong_side {
        return Err(SeparatrixError::KappaOnWrongSide { kappa, direction });
    }
    let (p, q) = (base.p, base.q);
    let (bound, gamma_per_delta, r0, l0) = match base.regime {
        StationaryRegime::QEqualsOne { .. } => {
            // The δ bound keeps the residual's g₀-coefficient one-signed from
            // t = 0 on, using T^{2γ} = κ^{(p-1)/2} (sub) resp. T^{-2γ} =
            // κ^{p-1} (super); γ is then a fixed multiple of δ.
            match direction {
                Direction::Subsolution => {
                    (kappa.powf(0.5 * (p - 1.0)) - 1.0, 0.25 * (p - 1.0), None, None)
                }
                Direction::Supersolution => {
                    (1.0 - kappa.powf(p - 1.0), 0.5 * (p - 1.0), None, None)
                }
            }
        }
        StationaryRegime::QGreaterThanOne => {
            let rho = (p - 1.0).recip() + (q - 1.0).recip();
            let (r0, l0) = tail_radius(base, rho)?;
            // Inside |ζ| < R₀ the drift term is adverse and must be absorbed
            // by the p-power term, whose floor over that window carries
            // L₀^{p-1}; the exponent below is (p-1) - 2/ρ.
            let e = (p - 1.0) * (p - q) / (p + q - 2.0);
            let floor_gain = l0.powf(p - 1.0);
            let bound = match direction {
                Direction::Subsolution => (kappa.powf(e) - 1.0) * floor_gain,
                Direction::Supersolution => ((1.0 - kappa.powf(e)) * floor_gain).min(0.5 * rho),
            };
            (bound, rho.recip(), Some(r0), Some(l0))
        }
    };
    // Smallest δ whose time shift κ^{±1/δ} stays within the cap; the default
    // half-bound is raised to it when needed (κ far from 1 shrinks the shift,
    // κ near 1 inflates it).
    let delta_cap = kappa.ln().abs() / MAX_TIME_SHIFT.ln();
    let delta = (0.5 * bound).max(delta_cap);
    if !(delta < bound) {
        return Err(SeparatrixError::BoundCollapse {
            reason: format!(
                "time shift cap {MAX_TIME_SHIFT:.0e} needs amplitude exponent {delta:.3e}, \
                 outside the admissible bound {bound:.3e} for kappa={kappa} \
                 ({direction}, p={p}, q={q})"
            ),
        });
    }
    if !(delta >= MIN_DELTA) {
        return Err(SeparatrixError::BoundCollapse {
            reason: format!(
                "amplitude exponent {delta:.3e} below {MIN_DELTA:.0e} for kappa={kappa} \
                 ({direction}, p={p}, q={q})"
            ),
        });
    }
    let gamma = delta * gamma_per_delta;
    let t_shift = match direction {
        Direction::Subsolution => kappa.powf(delta.recip()),
        Direction::Supersolution => kappa.powf(-delta.recip()),
    };
    // δ ≥ delta_cap makes the exact-arithmetic shift ≤ the cap; powf rounding
    // can overshoot by an ulp when δ sits exactly at the cap, so clamp.
    let t_shift = t_shift.min(MAX_TIME_SHIFT);
    Ok(SeparatrixCandidate {
        direction,
        kappa,
        delta,
        gamma,
        t_shift,
        r0,
        l0,
        base: base.clone(),
    })
}

/// First radius where the base profile's log-slope `-x·ψ'/ψ` exceeds `rho`,
/// located by outward node scan with linear interpolation, and the profile
/// value there (the interior floor, since ψ decreases in |x|).
fn tail_radius(base: &StationaryProfile, rho: f64) -> Result<(f64, f64), SeparatrixError> {
    let grid = base.grid();
    let values = base.profile.values();
    let derivs = base.derivative.values();
    let slope = |i: usize| -grid.x(i) * derivs[i] / values[i];
    let mut prev = slope(grid.center());
    for i in grid.center() + 1..grid.len() {
        let cur = slope(i);
        if cur > rho {
            let r0 = grid.x(i - 1) + (rho - prev) / (cur - prev) * grid.dx();
            let l0 = base.value_at(r0).expect("crossing radius lies inside the grid");
            return Ok((r0, l0));
        }
        prev = cur;
    }
    Err(SeparatrixError::BoundCollapse {
        reason: format!(
            "log-slope stays below {rho} up to half-width {}; enlarge the profile domain",
            grid.half_width()
        ),
    })
}

/// The candidate value `(t+T)^{±δ}·base((t+T)^{±γ}x)`.
///
/// The q = 1 base is closed-form at any argument; the q > 1 base is
/// interpolated on its grid and continued beyond it by its algebraic tail law
/// `ψ ∝ |ζ|^{-2/(q-1)}`, so evaluation is total.
pub fn evaluate_candidate(c: &SeparatrixCandidate, x: f64, t: f64) -> f64 {
    let s = t + c.t_shift;
    let (amp, squeeze) = match c.direction {
        Direction::Subsolution => (s.powf(c.delta), s.powf(c.gamma)),
        Direction::Supersolution => (s.powf(-c.delta), s.powf(-c.gamma)),
    };
    amp * base_value(&c.base, squeeze * x)
}

fn base_value(base: &StationaryProfile, zeta: f64) -> f64 {
    if let Some(v) = base.value_at(zeta) {
        return v;
    }
    let half = base.grid().half_width();
    let edge = base.value_at(half.copysign(zeta)).expect("grid endpoints are sampled");
    edge * (half / zeta.abs()).powf(2.0 / (base.q - 1.0))
}

/// One analytic residual sample, split into its three signed terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    /// Total residual `N[W] = W_t - W_xx + W^q - W^p`.
    pub residual: f64,
    /// q = 1: [base-value term, base-slope term, p-power term];
    /// q > 1: [drift term, q-power term, p-power term].
    pub terms: [f64; 3],
    /// Magnitude of the largest term: the local scale for sign tolerance.
    pub scale: f64,
    /// Profile coordinate ζ = (t+T)^{±γ}x the base was read at.
    pub zeta: f64,
}

/// Evaluates the residual of a candidate at one `(x, t)` sample using the
/// chain rule through the self-similar form and the base ODE identities
/// (`g₀'' = g₀ - g₀^p` for q = 1, `ψ₀'' = ψ₀^q - ψ₀^p` plus the first-order
/// relation for ψ₀' for q > 1) — no finite differences.
///
/// The q = 1 supersolution's p-power term carries the exponent
/// `δ(p-1) - 2γ`, which the builder's choice γ = δ(p-1)/2 cancels *exactly*
/// (including in floating point, since γ is formed by halving δ(p-1)), so
/// that term evaluates to exactly zero. For q > 1 the power-term signs reduce
/// to comparisons of exponents of the same power function, which floating
/// point preserves.
pub fn residual_at(
    c: &SeparatrixCandidate,
    x: f64,
    t: f64,
) -> Result<ResidualSample, SeparatrixError> {
    let s = t + c.t_shift;
    let (p, q) = (c.base.p, c.base.q);
    let (delta, gamma) = (c.delta, c.gamma);
    let sub = c.direction == Direction::Subsolution;
    let zeta = if sub { s.powf(gamma) * x } else { s.powf(-gamma) * x };
    let (v, d) = match (c.base.value_at(zeta), c.base.derivative_at(zeta)) {
        (Some(v), Some(d)) => (v, d),
        _ => {
            return Err(SeparatrixError::SampleOutsideProfile {
                zeta,
                half_width: c.base.grid().half_width(),
            })
        }
    };
    let terms = match c.base.regime {
        StationaryRegime::QEqualsOne { .. } => {
            let e = delta * (p - 1.0) - 2.0 * gamma;
            if sub {
                [
                    s.powf(delta - 1.0) * (delta + s - s.powf(2.0 * gamma + 1.0)) * v,
                    gamma * s.powf(delta - 1.0) * zeta * d,
                    s.powf(delta + 2.0 * gamma) * (1.0 - s.powf(e)) * v.powf(p),
                ]
            } else {
                [
                    s.powf(-delta - 1.0) * (s - s.powf(1.0 - 2.0 * gamma) - delta) * v,
                    -gamma * s.powf(-delta - 1.0) * zeta * d,
                    s.powf(-delta - 2.0 * gamma) * (1.0 - s.powf(-e)) * v.powf(p),
                ]
            }
        }
        StationaryRegime::QGreaterThanOne => {
            if sub {
                [
                    s.powf(delta - 1.0) * (delta * v + gamma * zeta * d),
                    v.powf(q) * (s.powf(delta * q) - s.powf(delta + 2.0 * gamma)),
                    v.powf(p) * (s.powf(delta + 2.0 * gamma) - s.powf(delta * p)),
                ]
            } else {
                [
                    -s.powf(-delta - 1.0) * (delta * v + gamma * zeta * d),
                    v.powf(q) * (s.powf(-delta * q) - s.powf(-delta - 2.0 * gamma)),
                    v.powf(p) * (s.powf(-delta - 2.0 * gamma) - s.powf(-delta * p)),
                ]
            }
        }
    };
    let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    Ok(ResidualSample { residual: terms[0] + terms[1] + terms[2], terms, scale, zeta })
}

/// Sign tolerance of [`residual_sign_check`], relative to the local scale.
pub const RESIDUAL_SIGN_TOL: f64 = 1e-10;

/// Outcome of a residual sign sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// True when every sample kept its sign within the relative tolerance
    /// (an empty lattice verifies nothing and does not pass).
    pub passed: bool,
    pub samples_checked: usize,
    /// Largest adverse-direction residual relative to the local scale:
    /// `max N/scale` for a subsolution (must stay ≤ [`RESIDUAL_SIGN_TOL`]),
    /// `max -N/scale` for a supersolution.
    pub worst_relative: f64,
    /// Largest |N| over the lattice.
    pub max_abs_residual: f64,
    /// Samples whose drift term alone has the adverse sign. For q > 1 these
    /// are the interior-window points |ζ| < R₀, where the p-power term must
    /// compensate; for q = 1 every term is individually signed, so 0.
    pub adverse_drift_samples: usize,
}

/// Checks that `N[W] ≤ 0` (subsolution) or `N[W] ≥ 0` (supersolution) holds
/// at every lattice sample, up to [`RESIDUAL_SIGN_TOL`] times the local
/// magnitude of the largest term.
pub fn residual_sign_check(
    c: &SeparatrixCandidate,
    lattice: &[(f64, f64)],
) -> Result<ResidualReport, SeparatrixError> {
    let sign = match c.direction {
        Direction::Subsolution => 1.0,
        Direction::Supersolution => -1.0,
    };
    let mut worst = f64::NEG_INFINITY;
    let mut max_abs = 0.0_f64;
    let mut adverse_drift = 0;
    for &(x, t) in lattice {
        let sample = residual_at(c, x, t)?;
        let scale = sample.scale.max(f64::MIN_POSITIVE);
        worst = worst.max(sign * sample.residual / scale);
        max_abs = max_abs.max(sample.residual.abs());
        if sign * sample.terms[0] > 0.0 {
            adverse_drift += 1;
        }
    }
    Ok(ResidualReport {
        passed: !lattice.is_empty() && worst <= RESIDUAL_SIGN_TOL,
        samples_checked: lattice.len(),
        worst_relative: worst,
        max_abs_residual: max_abs,
        adverse_drift_samples: adverse_drift,
    })
}

/// Functional form fitted by [`fit_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `v ≈ amplitude·e^{exponent·t}`.
    Exponential,
    /// `v ≈ amplitude·t^{exponent}`.
    Power,
}

/// Least-squares rate fit of a time series in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub model: FitModel,
    /// Slope of log v against t (exponential) or log t (power).
    pub exponent: f64,
    /// `e^{intercept}`: the prefactor of the fitted law.
    pub amplitude: f64,
    /// Time span (first, last) of the samples actually used.
    pub window: (f64, f64),
    /// RMS of the log-space fit residuals.
    pub residual: f64,
}

/// Fits `log v` against `t` (exponential) or `log t` (power) over the given
/// time window. Samples with nonpositive values — and, for the power model,
/// nonpositive times — cannot enter the log fit and are dropped; at least 10
/// usable samples with some spread are required.
pub fn fit_rate(
    series: &TimeSeries,
    model: FitModel,
    window: (f64, f64),
) -> Result<RateFit, SeparatrixError> {
    let pts: Vec<(f64, f64)> = series
        .window(window.0, window.1)
        .into_iter()
        .filter(|&(t, v)| v > 0.0 && (model == FitModel::Exponential || t > 0.0))
        .map(|(t, v)| {
            let abscissa = match model {
                FitModel::Exponential => t,
                FitModel::Power => t.ln(),
            };
            (abscissa, v.ln())
        })
        .collect();
    let span = series.window(window.0, window.1);
    if pts.len() < 10 {
        return Err(SeparatrixError::InsufficientWindow { needed: 10, got: pts.len() });
    }
    let (slope, intercept) = crate::pde::least_squares(pts.iter().copied())
        .ok_or(SeparatrixError::InsufficientWindow { needed: 10, got: pts.len() })?;
    let rms = (pts.iter().map(|&(x, y)| (intercept + slope * x - y).powi(2)).sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    // Window span of the *used* samples, in time units.
    let used: Vec<f64> = span
        .iter()
        .filter(|&&(t, v)| v > 0.0 && (model == FitModel::Exponential || t > 0.0))
        .map(|&(t, _)| t)
        .collect();
    Ok(RateFit {
        model,
        exponent: slope,
        amplitude: intercept.exp(),
        window: (used[0], *used.last().unwrap()),
        residual: rms,
    })
}

/// An evolution outcome enriched with the applicable rate fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub record: EvolutionRecord,
    /// Sup-norm fit over the trailing half of a decay run: exponential for
    /// q = 1, power for q ≠ 1. None when the run did not decay or the window
    /// is too thin.
    pub decay_fit: Option<RateFit>,
    /// Blow-up time/rate fit of a blow-up run (None when the diagnostic
    /// window above sup-norm 10 is too thin).
    pub blowup_fit: Option<BlowupFit>,
}

impl Classification {
    pub fn outcome(&self) -> Outcome {
        self.record.outcome
    }
}

/// Evolves the initial data and enriches the outcome with a rate fit (see
/// [`Classification`]). Evolution errors propagate; fits that lack samples
/// are omitted rather than failing the classification.
pub fn classify(
    u0: &Profile,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<Classification, SeparatrixError> {
    let record = evolve(u0, params, cfg)?;
    let mut decay_fit = None;
    let mut blowup_fit = None;
    match record.outcome {
        Outcome::Decay { .. } => {
            let t_end = *record.times.last().expect("records hold the initial sample");
            let model =
                if params.q == 1.0 { FitModel::Exponential } else { FitModel::Power };
            decay_fit = fit_rate(&record.sup_series(), model, (0.5 * t_end, t_end)).ok();
        }
        Outcome::BlowUp { .. } => blowup_fit = estimate_blowup_time(&record).ok(),
        Outcome::Extinct { .. } | Outcome::Undetermined => {}
    }
    Ok(Classification { record, decay_fit, blowup_fit })
}

/// One bisection iteration: the classified midpoint and the bracket after
/// applying its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct BisectionStep {
    pub iter: usize,
    /// Midpoint classified in this iteration.
    pub kappa: f64,
    /// "decay", "blowup", or "undetermined-as-blowup".
    pub verdict: &'static str,
    /// Bracket after this iteration.
    pub kappa_lo: f64,
    pub kappa_hi: f64,
}

/// Final bracket of a κ bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct BisectionResult {
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    /// Final bracket midpoint: the threshold estimate κ*.
    pub kappa_star: f64,
    /// Final bracket width.
    pub width: f64,
    pub steps: Vec<BisectionStep>,
}

#[derive(Clone, Copy)]
enum Side {
    Decay,
    BlowUp,
    UndeterminedAsBlowUp,
}

impl Side {
    fn label(self) -> &'static str {
        match self {
            Side::Decay => "decay",
            Side::BlowUp => "blowup",
            Side::UndeterminedAsBlowUp => "undetermined-as-blowup",
        }
    }
}

/// Core bisection loop over an abstract verdict function `(κ, horizon
/// multiplier) -> Outcome`, so the retry rule is testable without evolution
/// runs. An `Undetermined` verdict is retried once with a doubled horizon;
/// if still undetermined, the midpoint counts as blow-up side — near the
/// threshold escape times diverge, and a fixed rule keeps runs reproducible.
fn bisect_with<F>(
    mut verdict: F,
    kappa_lo: f64,
    kappa_hi: f64,
    iters: usize,
) -> Result<BisectionResult, SeparatrixError>
where
    F: FnMut(f64, f64) -> Result<Outcome, SeparatrixError>,
{
    if !(kappa_lo > 0.0 && kappa_lo < kappa_hi) || !kappa_hi.is_finite() {
        return Err(SeparatrixError::BadBracket {
            kappa: kappa_lo,
            expected: "satisfy 0 < kappa_lo < kappa_hi",
            got: format!("bracket [{kappa_lo}, {kappa_hi}]"),
        });
    }
    let mut settle = |kappa: f64| -> Result<Side, SeparatrixError> {
        let outcome = match verdict(kappa, 1.0)? {
            Outcome::Undetermined => verdict(kappa, 2.0)?,
            decided => decided,
        };
        Ok(match outcome {
            Outcome::BlowUp { .. } => Side::BlowUp,
            Outcome::Decay { .. } | Outcome::Extinct { .. } => Side::Decay,
            Outcome::Undetermined => Side::UndeterminedAsBlowUp,
        })
    };
    match settle(kappa_lo)? {
        Side::Decay => {}
        other => {
            return Err(SeparatrixError::BadBracket {
                kappa: kappa_lo,
                expected: "decay",
                got: other.label().to_string(),
            })
        }
    }
    match settle(kappa_hi)? {
        Side::BlowUp => {}
        other => {
            return Err(SeparatrixError::BadBracket {
                kappa: kappa_hi,
                expected: "blow up",
                got: other.label().to_string(),
            })
        }
    }
    let (mut lo, mut hi) = (kappa_lo, kappa_hi);
    let mut steps = Vec::with_capacity(iters);
    for iter in 0..iters {
        let mid = 0.5 * (lo + hi);
        let side = settle(mid)?;
        match side {
            Side::Decay => lo = mid,
            Side::BlowUp | Side::UndeterminedAsBlowUp => hi = mid,
        }
        steps.push(BisectionStep {
            iter,
            kappa: mid,
            verdict: side.label(),
            kappa_lo: lo,
            kappa_hi: hi,
        });
    }
    Ok(BisectionResult {
        kappa_lo: lo,
        kappa_hi: hi,
        kappa_star: 0.5 * (lo + hi),
        width: hi - lo,
        steps,
    })
}

/// Bisects the data scaling κ between a decaying and a blowing-up multiple
/// of the stationary base profile; the continuum threshold is the
/// separatrix κ = 1, and the returned midpoint measures its numerical
/// counterpart. The bracket endpoints must classify as decay (lo) and
/// blow-up (hi); each iteration halves the bracket.
pub fn kappa_bisection(
    base: &StationaryProfile,
    params: &ModelParams,
    cfg: &SolverConfig,
    kappa_lo: f64,
    kappa_hi: f64,
    iters: usize,
) -> Result<BisectionResult, SeparatrixError> {
    bisect_with(
        |kappa, horizon| {
            let u0 = base.profile.scaled_values(kappa);
            let run_cfg = SolverConfig { t_max: cfg.t_max * horizon, ..*cfg };
            Ok(evolve(&u0, params, &run_cfg)?.outcome)
        },
        kappa_lo,
        kappa_hi,
        iters,
    )
}
