//! Finite-difference evolution of the normalized Cauchy problem
//! `u_t = u_xx - u^q + u^p` on a truncated interval `[-L, L]` with
//! homogeneous Dirichlet boundaries.
//!
//! Diffusion is treated θ-implicitly (θ = 1 by default) and the reaction
//! explicitly, so each step costs one tridiagonal solve:
//! `u^{n+1} = (I - θ·dt·D)^{-1}[u^n + (1-θ)·dt·D u^n + dt·((u^n)^p - (u^n)^q)]`.
//! The step is capped at `σ/(1 + p·M^{p-1})` with `M` the current sup-norm,
//! which resolves the reaction timescale all the way into blow-up.

mod tridiag;

use crate::model::{trapezoid, Grid1D, ModelParams, Profile, TimeSeries};
use std::fmt;
use tridiag::solve_constant_tridiagonal;

/// Errors from the PDE layer.
#[derive(Debug, Clone, PartialEq)]
pub enum PdeError {
    /// Solver configuration violates its invariants.
    BadConfig { reason: String },
    /// evolve requires normalized parameters (A = B = K = 1).
    NotNormalized,
    /// Initial data must be nonnegative.
    NegativeInput { index: usize, value: f64 },
    /// The scheme produced NaN/Inf below the blow-up threshold
    /// (dt0 or sigma too large for the grid).
    NonFiniteState { t: f64 },
    /// With q < 1 the state reached 0 at an interior node; sublinear
    /// absorption past extinction is outside the solver's scope.
    InteriorExtinction { t: f64 },
    /// A fit window holds fewer samples than required.
    InsufficientWindow { needed: usize, got: usize },
    /// Operation applies to a different parameter/outcome regime.
    WrongRegime { reason: String },
    /// comparison_check needs pointwise-ordered initial data.
    NotOrdered { index: usize },
    /// Profiles live on different grids.
    GridMismatch,
}

impl fmt::Display for PdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PdeError::BadConfig { reason } => write!(f, "bad solver config: {reason}"),
            PdeError::NotNormalized => {
                write!(f, "evolve requires normalized parameters (A = B = K = 1)")
            }
            PdeError::NegativeInput { index, value } => {
                write!(f, "initial data negative at node {index}: {value}")
            }
            PdeError::NonFiniteState { t } => {
                write!(f, "non-finite state at t={t}; reduce dt0/sigma")
            }
            PdeError::InteriorExtinction { t } => {
                write!(f, "state hit zero in the interior at t={t} with q < 1")
            }
            PdeError::InsufficientWindow { needed, got } => {
                write!(f, "fit window needs {needed} samples, got {got}")
            }
            PdeError::WrongRegime { reason } => write!(f, "wrong regime: {reason}"),
            PdeError::NotOrdered { index } => {
                write!(f, "initial data not ordered at node {index}")
            }
            PdeError::GridMismatch => write!(f, "profiles live on different grids"),
        }
    }
}

impl std::error::Error for PdeError {}

/// Configuration of the evolution scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Implicitness weight for diffusion, in [0.5, 1].
    pub theta: f64,
    /// Initial/maximum time step.
    pub dt0: f64,
    /// Reaction-CFL safety factor in (0, 1].
    pub sigma: f64,
    /// Sup-norm level that declares blow-up.
    pub blowup_threshold: f64,
    /// Sup-norm level that declares decay (with a nonincreasing trend).
    pub decay_threshold: f64,
    /// Time horizon; reaching it yields Outcome::Undetermined.
    pub t_max: f64,
    /// Spacing of stored full snapshots (initial and final states are always
    /// kept); None stores only those two.
    pub snapshot_interval: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta: 1.0,
            dt0: 0.05,
            sigma: 0.5,
            blowup_threshold: 1e6,
            decay_threshold: 1e-4,
            t_max: 40.0,
            snapshot_interval: None,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), PdeError> {
        let bad = |reason: String| Err(PdeError::BadConfig { reason });
        if !(0.5..=1.0).contains(&self.theta) {
            return bad(format!("theta must lie in [0.5, 1], got {}", self.theta));
        }
        if !(self.dt0 > 0.0) || !self.dt0.is_finite() {
            return bad(format!("dt0 must be positive, got {}", self.dt0));
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return bad(format!("sigma must lie in (0, 1], got {}", self.sigma));
        }
        if !(self.decay_threshold > 0.0 && self.decay_threshold < 1.0) {
            return bad(format!("decay threshold must lie in (0, 1), got {}", self.decay_threshold));
        }
        if !(self.blowup_threshold > 1.0) || !self.blowup_threshold.is_finite() {
            return bad(format!("blow-up threshold must exceed 1, got {}", self.blowup_threshold));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if let Some(s) = self.snapshot_interval {
            if !(s > 0.0) || !s.is_finite() {
                return bad(format!("snapshot interval must be positive, got {s}"));
            }
        }
        Ok(())
    }
}

/// How an evolution run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Sup-norm crossed the blow-up threshold; `t_est` is the extrapolated
    /// blow-up time (the crossing time when the fit window is too short).
    BlowUp { t_est: f64 },
    /// Sup-norm fell below the decay threshold with a nonincreasing trend.
    Decay { final_sup: f64 },
    /// Reserved for sublinear-absorption extinction; `evolve` never produces
    /// it (q < 1 interior zeros are refused instead).
    Extinct { t_e: f64 },
    /// Horizon reached without a verdict.
    Undetermined,
}

/// A stored full state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub profile: Profile,
}

/// Diagnostics and snapshots of one evolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub params: ModelParams,
    pub grid: Grid1D,
    /// Diagnostic sample times (every accepted step, starting at 0).
    pub times: Vec<f64>,
    pub sup_norm: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub outcome: Outcome,
}

impl EvolutionRecord {
    pub fn sup_series(&self) -> TimeSeries {
        TimeSeries::new(self.times.clone(), self.sup_norm.clone())
            .expect("diagnostics form a valid series")
    }

    pub fn mass_series(&self) -> TimeSeries {
        TimeSeries::new(self.times.clone(), self.mass.clone())
            .expect("diagnostics form a valid series")
    }

    pub fn energy_series(&self) -> TimeSeries {
        TimeSeries::new(self.times.clone(), self.energy.clone())
            .expect("diagnostics form a valid series")
    }

    /// The last stored state (always present after a successful run).
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("runs store at least the initial and final state")
    }
}

/// `x^e` with fast paths for the exponents this crate actually uses in inner
/// loops; `x` is assumed nonnegative.
#[inline]
fn pow_fast(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else if e == 3.0 {
        x * x * x
    } else if e == 4.0 {
        let s = x * x;
        s * s
    } else if e == 0.5 {
        x.sqrt()
    } else {
        x.powf(e)
    }
}

struct Stepper {
    p: f64,
    q: f64,
    theta: f64,
    dx2: f64,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    fn new(p: f64, q: f64, theta: f64, dx: f64, n: usize) -> Self {
        Stepper { p, q, theta, dx2: dx * dx, rhs: vec![0.0; n], scratch: Vec::with_capacity(n) }
    }

    /// One θ-scheme step of size dt, in place. Boundary nodes are pinned to
    /// zero; negative round-off values are clamped to zero.
    fn advance(&mut self, u: &mut [f64], dt: f64) {
        let n = u.len();
        let r = self.theta * dt / self.dx2;
        let explicit = (1.0 - self.theta) * dt / self.dx2;
        for i in 1..n - 1 {
            let lap = u[i - 1] - 2.0 * u[i] + u[i + 1];
            self.rhs[i] =
                u[i] + explicit * lap + dt * (pow_fast(u[i], self.p) - pow_fast(u[i], self.q));
        }
        solve_constant_tridiagonal(-r, 1.0 + 2.0 * r, &mut self.rhs[1..n - 1], &mut self.scratch);
        u[0] = 0.0;
        u[n - 1] = 0.0;
        for i in 1..n - 1 {
            u[i] = self.rhs[i].max(0.0);
        }
    }
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |a: f64, &v| a.max(v.abs()))
}

fn reaction_limited_dt(cfg: &SolverConfig, p: f64, m: f64) -> f64 {
    cfg.dt0.min(cfg.sigma / (1.0 + p * pow_fast(m, p - 1.0)))
}

/// True when the sup-norm trend over the trailing 20% of the elapsed run is
/// nonincreasing (within round-off slack). Needs at least 3 samples there.
fn decay_trend_nonincreasing(times: &[f64], sups: &[f64]) -> bool {
    let t_end = *times.last().unwrap();
    let t_from = 0.8 * t_end;
    let start = times.partition_point(|&t| t < t_from);
    if sups.len() - start < 3 {
        return false;
    }
    sups[start..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10))
}

/// Energy `½∫u_x² + ∫u^{q+1}/(q+1) - ∫u^{p+1}/(p+1)` by trapezoid quadrature,
/// with centered differences for `u_x` (one-sided at the boundaries). For
/// q = 1 this is the usual `½∫(u_x² + u²) - ∫u^{p+1}/(p+1)`.
pub fn energy(u: &Profile, p: f64, q: f64) -> f64 {
    let v = u.values();
    let n = v.len();
    let dx = u.grid().dx();
    let density: Vec<f64> = (0..n)
        .map(|i| {
            let ux = if i == 0 {
                (v[1] - v[0]) / dx
            } else if i == n - 1 {
                (v[n - 1] - v[n - 2]) / dx
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * dx)
            };
            let w = v[i].max(0.0);
            0.5 * ux * ux + pow_fast(w, q + 1.0) / (q + 1.0) - pow_fast(w, p + 1.0) / (p + 1.0)
        })
        .collect();
    trapezoid(&density, dx)
}

/// Evolves nonnegative initial data under the normalized equation until
/// blow-up, decay, or the horizon. Diagnostics (sup-norm, L¹ mass, energy)
/// are recorded at every step; full snapshots at `snapshot_interval`.
pub fn evolve(
    u0: &Profile,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<EvolutionRecord, PdeError> {
    cfg.validate()?;
    if !params.is_normalized() {
        return Err(PdeError::NotNormalized);
    }
    if let Some((i, &v)) = u0.values().iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(PdeError::NegativeInput { index: i, value: v });
    }
    let (p, q) = (params.p, params.q);
    let grid = *u0.grid();
    let n = grid.len();
    let mut u = u0.values().to_vec();
    check_interior_positive(&u, q, 0.0)?;

    let mut times = vec![0.0];
    let mut sups = vec![sup(&u)];
    let mut masses = vec![u0.l1_norm()];
    let mut energies = vec![energy(u0, p, q)];
    let mut snapshots = vec![Snapshot { t: 0.0, profile: u0.clone() }];
    let mut next_snapshot = cfg.snapshot_interval.unwrap_or(f64::INFINITY);

    let mut stepper = Stepper::new(p, q, cfg.theta, grid.dx(), n);
    let mut t = 0.0;
    let outcome;
    loop {
        let m = *sups.last().unwrap();
        if m >= cfg.blowup_threshold {
            let t_est = match fit_blowup_time(&times, &sups, p) {
                Some(fit) => fit.t_est,
                None => t,
            };
            outcome = Outcome::BlowUp { t_est };
            break;
        }
        if m <= cfg.decay_threshold && decay_trend_nonincreasing(&times, &sups) {
            outcome = Outcome::Decay { final_sup: m };
            break;
        }
        if t >= cfg.t_max {
            outcome = Outcome::Undetermined;
            break;
        }

        let dt = reaction_limited_dt(cfg, p, m).min(cfg.t_max - t);
        stepper.advance(&mut u, dt);
        t += dt;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(PdeError::NonFiniteState { t });
        }
        check_interior_positive(&u, q, t)?;

        times.push(t);
        sups.push(sup(&u));
        masses.push(crate::model::trapezoid_abs(&u, grid.dx()));
        energies.push(energy_of_values(&u, grid.dx(), p, q));
        if t + 1e-12 >= next_snapshot {
            snapshots.push(Snapshot {
                t,
                profile: Profile::new(grid, u.clone()).expect("finite state"),
            });
            let interval = cfg.snapshot_interval.unwrap();
            while next_snapshot <= t + 1e-12 {
                next_snapshot += interval;
            }
        }
    }

    if snapshots.last().map(|s| s.t) != Some(t) {
        snapshots
            .push(Snapshot { t, profile: Profile::new(grid, u).expect("finite state") });
    }
    Ok(EvolutionRecord {
        params: *params,
        grid,
        times,
        sup_norm: sups,
        mass: masses,
        energy: energies,
        snapshots,
        outcome,
    })
}

fn check_interior_positive(u: &[f64], q: f64, t: f64) -> Result<(), PdeError> {
    if q < 1.0 && u[1..u.len() - 1].iter().any(|&v| v <= 0.0) {
        return Err(PdeError::InteriorExtinction { t });
    }
    Ok(())
}

fn energy_of_values(values: &[f64], dx: f64, p: f64, q: f64) -> f64 {
    let n = values.len();
    let mut density = Vec::with_capacity(n);
    for i in 0..n {
        let ux = if i == 0 {
            (values[1] - values[0]) / dx
        } else if i == n - 1 {
            (values[n - 1] - values[n - 2]) / dx
        } else {
            (values[i + 1] - values[i - 1]) / (2.0 * dx)
        };
        let w = values[i].max(0.0);
        density
            .push(0.5 * ux * ux + pow_fast(w, q + 1.0) / (q + 1.0) - pow_fast(w, p + 1.0) / (p + 1.0));
    }
    trapezoid(&density, dx)
}

/// Result of fitting the blow-up time from diagnostic sup-norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupFit {
    /// Root of the least-squares line through (t, ‖u‖_∞^{-(p-1)}).
    pub t_est: f64,
    /// Slope of log‖u‖ against log(t_est - t) over the same window
    /// (theoretical value -1/(p-1)).
    pub rate_exponent: f64,
    pub samples_used: usize,
}

fn fit_blowup_time(times: &[f64], sups: &[f64], p: f64) -> Option<BlowupFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(sups)
        .filter(|&(_, &m)| m >= 10.0)
        .map(|(&t, &m)| (t, m.powf(1.0 - p)))
        .collect();
    if pts.len() < 10 {
        return None;
    }
    let (slope, intercept) = least_squares(pts.iter().map(|&(t, z)| (t, z)))?;
    if !(slope < 0.0) {
        return None;
    }
    let t_est = -intercept / slope;

    // The exponent comes from log‖u‖ vs log(t_est - t). Samples with
    // t_est - t below the uncertainty of t_est itself only contribute noise
    // there, so cut the window by the fit's residual level.
    let rms = (pts.iter().map(|&(t, z)| (intercept + slope * t - z).powi(2)).sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    let t_unc = rms / slope.abs() + 64.0 * f64::EPSILON * t_est.abs();
    let mut logs: Vec<(f64, f64)> = times
        .iter()
        .zip(sups)
        .filter(|&(&t, &m)| m >= 10.0 && t_est - t > 100.0 * t_unc)
        .map(|(&t, &m)| ((t_est - t).ln(), m.ln()))
        .collect();
    if logs.len() < 5 {
        // Degenerate cutoff: fall back to the earliest window samples, which
        // sit farthest from t_est.
        logs = times
            .iter()
            .zip(sups)
            .filter(|&(&t, &m)| m >= 10.0 && t_est - t > 0.0)
            .take(10)
            .map(|(&t, &m)| ((t_est - t).ln(), m.ln()))
            .collect();
    }
    let (rate_exponent, _) = least_squares(logs.iter().copied())?;
    Some(BlowupFit { t_est, rate_exponent, samples_used: pts.len() })
}

pub(crate) fn least_squares(pts: impl Iterator<Item = (f64, f64)> + Clone) -> Option<(f64, f64)> {
    let n = pts.clone().count();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let xbar = pts.clone().map(|(x, _)| x).sum::<f64>() / nf;
    let ybar = pts.clone().map(|(_, y)| y).sum::<f64>() / nf;
    let sxy: f64 = pts.clone().map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = pts.map(|(x, _)| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, ybar - slope * xbar))
}

/// Refines the blow-up time of a `BlowUp` record by the `h^{1-p}`-is-linear
/// extrapolation over diagnostic samples with sup-norm ≥ 10, and fits the
/// blow-up rate exponent. Needs at least 10 samples in that window.
pub fn estimate_blowup_time(record: &EvolutionRecord) -> Result<BlowupFit, PdeError> {
    if !matches!(record.outcome, Outcome::BlowUp { .. }) {
        return Err(PdeError::InsufficientWindow { needed: 10, got: 0 });
    }
    let pts_in_window =
        record.sup_norm.iter().filter(|&&m| m >= 10.0).count();
    fit_blowup_time(&record.times, &record.sup_norm, record.params.p)
        .ok_or(PdeError::InsufficientWindow { needed: 10, got: pts_in_window })
}

/// The heat kernel `e^{-x²/4t}/√(4πt)`.
pub fn heat_kernel(x: f64, t: f64) -> f64 {
    (-x * x / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt()
}

/// For each snapshot time t > 0 of a q = 1 decay run, the renormalized
/// heat-kernel gap `√t·sup_x|eᵗu(x,t) - M·e^{-x²/4t}/√(4πt)|` for a given
/// Gaussian mass M.
pub fn heat_kernel_gap(record: &EvolutionRecord, m: f64) -> Result<TimeSeries, PdeError> {
    if record.params.q != 1.0 {
        return Err(PdeError::WrongRegime {
            reason: format!("heat-kernel stabilization needs q = 1, got q = {}", record.params.q),
        });
    }
    if !matches!(record.outcome, Outcome::Decay { .. }) {
        return Err(PdeError::WrongRegime {
            reason: "heat-kernel stabilization needs a decay run".into(),
        });
    }
    let mut times = Vec::new();
    let mut gaps = Vec::new();
    for snap in record.snapshots.iter().filter(|s| s.t > 0.0) {
        let t = snap.t;
        let et = t.exp();
        let gap = snap
            .profile
            .values()
            .iter()
            .zip(snap.profile.grid().coords())
            .map(|(&v, x)| (et * v - m * heat_kernel(x, t)).abs())
            .fold(0.0, f64::max);
        times.push(t);
        gaps.push(t.sqrt() * gap);
    }
    TimeSeries::new(times, gaps)
        .map_err(|e| PdeError::WrongRegime { reason: e.to_string() })
}

/// Result of a discrete comparison-principle check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// max over time of sup_x (u - v)⁺ for initially ordered u0 ≤ v0.
    pub max_violation: f64,
    pub passed: bool,
    pub t_end: f64,
    pub steps: usize,
}

/// Violation level accepted as round-off by `comparison_check`.
pub const COMPARISON_TOLERANCE: f64 = 1e-8;

/// Evolves ordered initial data u0 ≤ v0 with identical step sequences and
/// reports the worst ordering violation over the run. Stops when either
/// solution crosses the blow-up threshold or at the horizon.
pub fn comparison_check(
    u0: &Profile,
    v0: &Profile,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<ComparisonReport, PdeError> {
    cfg.validate()?;
    if !params.is_normalized() {
        return Err(PdeError::NotNormalized);
    }
    if u0.grid() != v0.grid() {
        return Err(PdeError::GridMismatch);
    }
    if let Some((i, _)) =
        u0.values().iter().zip(v0.values()).enumerate().find(|(_, (a, b))| a > b)
    {
        return Err(PdeError::NotOrdered { index: i });
    }
    for (i, &w) in u0.values().iter().enumerate() {
        if w < 0.0 {
            return Err(PdeError::NegativeInput { index: i, value: w });
        }
    }

    let (p, q) = (params.p, params.q);
    let grid = u0.grid();
    let n = grid.len();
    let mut u = u0.values().to_vec();
    let mut v = v0.values().to_vec();
    check_interior_positive(&u, q, 0.0)?;
    check_interior_positive(&v, q, 0.0)?;
    let mut stepper_u = Stepper::new(p, q, cfg.theta, grid.dx(), n);
    let mut stepper_v = Stepper::new(p, q, cfg.theta, grid.dx(), n);

    let mut t = 0.0;
    let mut steps = 0usize;
    let mut max_violation = 0.0_f64;
    while t < cfg.t_max {
        let m = sup(&u).max(sup(&v));
        if m >= cfg.blowup_threshold {
            break;
        }
        // Identical dt for both solutions: the stricter reaction limit.
        let dt = reaction_limited_dt(cfg, p, m).min(cfg.t_max - t);
        stepper_u.advance(&mut u, dt);
        stepper_v.advance(&mut v, dt);
        t += dt;
        steps += 1;
        if u.iter().chain(v.iter()).any(|w| !w.is_finite()) {
            return Err(PdeError::NonFiniteState { t });
        }
        check_interior_positive(&u, q, t)?;
        check_interior_positive(&v, q, t)?;
        let worst = u.iter().zip(&v).map(|(a, b)| a - b).fold(0.0, f64::max);
        max_violation = max_violation.max(worst);
    }
    Ok(ComparisonReport {
        max_violation,
        passed: max_violation <= COMPARISON_TOLERANCE,
        t_end: t,
        steps,
    })
}
