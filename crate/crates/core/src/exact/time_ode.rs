//! Time-only solutions: the reaction ODE `h'(t) = h^p - h^q`.
//!
//! For q = 1 the solution is closed-form. For general exponents the ODE is
//! integrated adaptively with blow-up / extinction event detection, and the
//! trajectory can be checked pointwise against the analytic rate brackets:
//!
//! * h(0) > 1: `((p-1)(T-t))^{-1/(p-1)} < h < ((p-1)(1-h0^{q-p})(T-t))^{-1/(p-1)}`
//! * h(0) < 1, q > 1: `((q-1)t + h0^{1-q})^{-1/(q-1)} < h < ((q-1)(1-h0^{p-q})t + h0^{1-q})^{-1/(q-1)}`
//! * h(0) < 1, q < 1: `((1-q)(1-h0^{p-q}))^{1/(1-q)}(Te-t)^{1/(1-q)} < h < (1-q)^{1/(1-q)}(Te-t)^{1/(1-q)}`

use super::ExactError;
use crate::model::TimeSeries;

/// Event detected while integrating the time ODE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeEvent {
    /// h reached the blow-up threshold; `t_blowup` extrapolates h^{1-p} to 0.
    BlowUp { t_blowup: f64 },
    /// h reached 0 (q < 1 only); `t_extinct` interpolates h^{1-q} to 0.
    Extinct { t_extinct: f64 },
}

/// Adaptive samples of `h' = h^p - h^q` plus any terminal event.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrajectory {
    pub p: f64,
    pub q: f64,
    pub h0: f64,
    times: Vec<f64>,
    values: Vec<f64>,
    pub event: Option<TimeEvent>,
    /// Estimated absolute uncertainty of the event time (0 without event).
    pub event_time_uncertainty: f64,
}

impl TimeTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// The event time, if any.
    pub fn event_time(&self) -> Option<f64> {
        match self.event {
            Some(TimeEvent::BlowUp { t_blowup }) => Some(t_blowup),
            Some(TimeEvent::Extinct { t_extinct }) => Some(t_extinct),
            None => None,
        }
    }

    /// The samples as a diagnostic series.
    pub fn series(&self) -> TimeSeries {
        TimeSeries::new(self.times.clone(), self.values.clone())
            .expect("trajectory samples form a valid series")
    }
}

/// The q = 1 closed form `[1 + C e^{(p-1)t}]^{-1/(p-1)}`.
pub fn time_solution_q1(c: f64, p: f64, t: f64) -> Result<f64, ExactError> {
    let base = 1.0 + c * ((p - 1.0) * t).exp();
    if base <= 0.0 {
        return Err(ExactError::EvaluatedAtOrPastBlowup { c, p, t });
    }
    Ok(base.powf(-1.0 / (p - 1.0)))
}

/// Blow-up time of the q = 1 closed form: `T = ln(-1/C)/(p-1)` for C < 0.
pub fn blowup_time_q1(c: f64, p: f64) -> Result<f64, ExactError> {
    if c >= 0.0 {
        return Err(ExactError::NoBlowup { c });
    }
    Ok((-1.0 / c).ln() / (p - 1.0))
}

const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-10;
/// h level that triggers the blow-up event.
const BLOWUP_EVENT_LEVEL: f64 = 1e8;
/// Window of h values used for the linear fit of h^{1-p} against t. The top
/// stays well below the event level: past ~1e6 the remaining time to blow-up
/// drops below the floating-point resolution of t itself.
const BLOWUP_FIT_WINDOW: (f64, f64) = (1e4, 1e6);
const MAX_STEPS: usize = 5_000_000;

fn rk4_step(f: impl Fn(f64) -> f64, y: f64, dt: f64) -> f64 {
    let k1 = f(y);
    let k2 = f(y + 0.5 * dt * k1);
    let k3 = f(y + 0.5 * dt * k2);
    let k4 = f(y + dt * k3);
    y + dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
}

/// Integrates `h' = h^p - h^q` from h(0) = h0 with classical 4th-order steps
/// and step-halving error control (tolerances 1e-10 absolute/relative).
///
/// Events: blow-up once h exceeds 1e8, with the blow-up time obtained by
/// extrapolating `h^{1-p}` (asymptotically linear in t) to zero; extinction
/// (q < 1 with h0 < 1) once h reaches 0, found by integrating `w = h^{1-q}`
/// as the working variable — the vector field for w stays Lipschitz at the
/// endpoint — and interpolating its zero crossing. Without an event the
/// trajectory runs to `t_max` and `event` is `None`.
pub fn integrate_time_ode(h0: f64, p: f64, q: f64, t_max: f64) -> Result<TimeTrajectory, ExactError> {
    if !(h0 > 0.0) || h0 == 1.0 {
        return Err(ExactError::InvalidInitial { h0 });
    }
    if !(p > 1.0) || !(q > 0.0) || !(p > q) {
        return Err(ExactError::RegimeViolation {
            reason: format!("need p > max(q, 1) and q > 0, got p={p}, q={q}"),
        });
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(ExactError::RegimeViolation { reason: format!("bad horizon t_max={t_max}") });
    }

    // In the extinction regime integrate w = h^{1-q}; otherwise h itself.
    let extinction_variable = q < 1.0 && h0 < 1.0;
    let rhs: Box<dyn Fn(f64) -> f64> = if extinction_variable {
        let growth = (p - q) / (1.0 - q);
        Box::new(move |w: f64| {
            let hpq = if w > 0.0 { w.powf(growth) } else { 0.0 };
            (1.0 - q) * (hpq - 1.0)
        })
    } else {
        Box::new(move |h: f64| h.powf(p) - h.powf(q))
    };
    let to_height = |y: f64| if extinction_variable { y.powf(1.0 / (1.0 - q)) } else { y };

    let increasing = h0 > 1.0;
    let mut t = 0.0_f64;
    let mut y = if extinction_variable { h0.powf(1.0 - q) } else { h0 };
    let mut dt = 1e-3_f64.min(t_max);
    let mut times = vec![0.0];
    let mut values = vec![h0];
    let mut event = None;
    let mut uncertainty = 0.0;

    let mut steps = 0usize;
    while t < t_max {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(ExactError::StepLimitExceeded);
        }
        dt = dt.min(t_max - t).max(f64::MIN_POSITIVE);

        let full = rk4_step(&rhs, y, dt);
        let mid = rk4_step(&rhs, y, 0.5 * dt);
        let halved = rk4_step(&rhs, mid, 0.5 * dt);
        let err = (full - halved).abs() / 15.0;
        let tol = ATOL + RTOL * y.abs().max(halved.abs());
        if !(err <= tol) {
            // Rejected (also catches NaN from overshooting stages).
            dt *= if err.is_finite() { (0.9 * (tol / err).powf(0.2)).max(0.2) } else { 0.2 };
            continue;
        }

        let y_new = halved + (halved - full) / 15.0;
        let t_new = t + dt;

        if extinction_variable && y_new <= 0.0 {
            // w crossed zero inside this step: h reached 0.
            let t_extinct = t + dt * y / (y - y_new);
            uncertainty = 1e-8 * (1.0 + t_extinct);
            event = Some(TimeEvent::Extinct { t_extinct });
            break;
        }

        let h_new = to_height(y_new);
        // Record only strictly advancing, strictly monotone samples; near
        // blow-up dt can fall below the time's floating-point resolution
        // while h keeps growing.
        if t_new > *times.last().unwrap() {
            let last = *values.last().unwrap();
            if (increasing && h_new > last) || (!increasing && h_new < last) {
                times.push(t_new);
                values.push(h_new);
            }
        }
        y = y_new;
        t = t_new;

        if increasing && h_new >= BLOWUP_EVENT_LEVEL {
            let (t_blowup, unc) = extrapolate_blowup_time(&times, &values, p);
            uncertainty = unc;
            event = Some(TimeEvent::BlowUp { t_blowup });
            break;
        }

        dt *= if err > 0.0 { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) } else { 5.0 };
    }

    Ok(TimeTrajectory { p, q, h0, times, values, event, event_time_uncertainty: uncertainty })
}

/// Least-squares line through (t, h^{1-p}) over the fit window, extrapolated
/// to zero. Falls back to the asymptotic slope -(p-1) from the last sample
/// when the window holds fewer than two points.
fn extrapolate_blowup_time(times: &[f64], values: &[f64], p: f64) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|&(_, &h)| (BLOWUP_FIT_WINDOW.0..=BLOWUP_FIT_WINDOW.1).contains(&h))
        .map(|(&t, &h)| (t, h.powf(1.0 - p)))
        .collect();
    if pts.len() < 2 {
        let (t_last, h_last) = (*times.last().unwrap(), *values.last().unwrap());
        let t_est = t_last + h_last.powf(1.0 - p) / (p - 1.0);
        return (t_est, 1e-6 * (1.0 + t_est));
    }
    let n = pts.len() as f64;
    let tbar = pts.iter().map(|&(t, _)| t).sum::<f64>() / n;
    let zbar = pts.iter().map(|&(_, z)| z).sum::<f64>() / n;
    let stz: f64 = pts.iter().map(|&(t, z)| (t - tbar) * (z - zbar)).sum();
    let stt: f64 = pts.iter().map(|&(t, _)| (t - tbar) * (t - tbar)).sum();
    let slope = stz / stt;
    let t_est = tbar - zbar / slope;
    let rms = (pts.iter().map(|&(t, z)| (zbar + slope * (t - tbar) - z).powi(2)).sum::<f64>() / n)
        .sqrt();
    let unc = rms / slope.abs() + 64.0 * f64::EPSILON * t_est.abs() + 1e-14;
    (t_est, unc)
}

/// Which analytic rate bracket applies to a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketRegime {
    BlowUp,
    Decay,
    Extinction,
}

/// Pointwise bracket verification result.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketReport {
    pub regime: BracketRegime,
    pub passed: bool,
    /// min over samples of h/lower - 1 (should stay positive).
    pub worst_lower_margin: f64,
    /// min over samples of upper/h - 1 (should stay positive).
    pub worst_upper_margin: f64,
    pub samples_checked: usize,
    /// Samples too close to the event time to resolve in f64, skipped.
    pub samples_skipped: usize,
}

/// Checks the regime's two-sided rate bracket at every recorded sample with
/// t > 0 (the decay/extinction bounds are equalities at t = 0).
///
/// Near an event time the bounds diverge and their evaluation is limited by
/// the uncertainty of the extrapolated event time; samples within that
/// resolution are given a proportional slack (and skipped entirely once the
/// remaining time is smaller than a few times the uncertainty).
pub fn bracket_check(traj: &TimeTrajectory) -> Result<BracketReport, ExactError> {
    let (p, q, h0) = (traj.p, traj.q, traj.h0);
    if h0 > 1.0 {
        let t_event = match traj.event {
            Some(TimeEvent::BlowUp { t_blowup }) => t_blowup,
            _ => return Err(ExactError::MissingEvent { needed: "blow-up" }),
        };
        let inv = -1.0 / (p - 1.0);
        let upper_coeff = (p - 1.0) * (1.0 - h0.powf(q - p));
        check_event_bracket(
            traj,
            BracketRegime::BlowUp,
            t_event,
            1.0 / (p - 1.0),
            |dt_ev| ((p - 1.0) * dt_ev).powf(inv),
            |dt_ev| (upper_coeff * dt_ev).powf(inv),
        )
    } else if q > 1.0 {
        let wl = h0.powf(1.0 - q);
        let inv = -1.0 / (q - 1.0);
        let upper_coeff = (q - 1.0) * (1.0 - h0.powf(p - q));
        let mut worst_lower = f64::INFINITY;
        let mut worst_upper = f64::INFINITY;
        let mut checked = 0;
        for (t, h) in traj.iter().filter(|&(t, _)| t > 0.0) {
            let lower = ((q - 1.0) * t + wl).powf(inv);
            let upper = (upper_coeff * t + wl).powf(inv);
            worst_lower = worst_lower.min(h / lower - 1.0);
            worst_upper = worst_upper.min(upper / h - 1.0);
            checked += 1;
        }
        let slack = 1e-12;
        Ok(BracketReport {
            regime: BracketRegime::Decay,
            passed: worst_lower > -slack && worst_upper > -slack,
            worst_lower_margin: worst_lower,
            worst_upper_margin: worst_upper,
            samples_checked: checked,
            samples_skipped: 0,
        })
    } else if q < 1.0 {
        let t_event = match traj.event {
            Some(TimeEvent::Extinct { t_extinct }) => t_extinct,
            _ => return Err(ExactError::MissingEvent { needed: "extinction" }),
        };
        let inv = 1.0 / (1.0 - q);
        let lower_coeff = ((1.0 - q) * (1.0 - h0.powf(p - q))).powf(inv);
        let upper_coeff = (1.0 - q).powf(inv);
        check_event_bracket(
            traj,
            BracketRegime::Extinction,
            t_event,
            inv,
            move |dt_ev| lower_coeff * dt_ev.powf(inv),
            move |dt_ev| upper_coeff * dt_ev.powf(inv),
        )
    } else {
        Err(ExactError::RegimeViolation {
            reason: "the decay bracket is stated for q > 1; q = 1 has the closed form".into(),
        })
    }
}

fn check_event_bracket(
    traj: &TimeTrajectory,
    regime: BracketRegime,
    t_event: f64,
    bound_sensitivity: f64,
    lower: impl Fn(f64) -> f64,
    upper: impl Fn(f64) -> f64,
) -> Result<BracketReport, ExactError> {
    let unc = traj.event_time_uncertainty.max(64.0 * f64::EPSILON * t_event.abs());
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    let mut checked = 0;
    let mut skipped = 0;
    let mut passed = true;
    for (t, h) in traj.iter().filter(|&(t, _)| t > 0.0) {
        let dt_ev = t_event - t;
        if dt_ev <= 4.0 * unc {
            skipped += 1;
            continue;
        }
        let ml = h / lower(dt_ev) - 1.0;
        let mu = upper(dt_ev) / h - 1.0;
        // Bound error induced by the event-time uncertainty.
        let slack = 2.0 * bound_sensitivity * unc / dt_ev + 1e-12;
        if ml <= -slack || mu <= -slack {
            passed = false;
        }
        worst_lower = worst_lower.min(ml);
        worst_upper = worst_upper.min(mu);
        checked += 1;
    }
    Ok(BracketReport {
        regime,
        passed,
        worst_lower_margin: worst_lower,
        worst_upper_margin: worst_upper,
        samples_checked: checked,
        samples_skipped: skipped,
    })
}
