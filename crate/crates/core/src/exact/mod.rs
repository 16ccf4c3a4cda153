//! Special solutions of the normalized equation `u_t = u_xx - u^q + u^p`:
//! time-only solutions of the reaction ODE `h' = h^p - h^q` with
//! blow-up/decay/extinction rate brackets, and stationary profiles (closed
//! form for q = 1, degenerate first-order ODE integration for q > 1) with
//! verified tail asymptotics.

mod stationary;
mod time_ode;

pub use stationary::{
    asymptotic_constants, compute_stationary_qgt1, stationary_peak_qgt1, stationary_q1,
    verify_profile_asymptotics, AsymptoticConstants, AsymptoticsReport, StationaryProfile,
    StationaryRegime,
};
pub use time_ode::{
    blowup_time_q1, bracket_check, integrate_time_ode, time_solution_q1, BracketRegime,
    BracketReport, TimeEvent, TimeTrajectory,
};

use std::fmt;

/// Errors from the special-solution layer.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactError {
    /// The q=1 time solution was evaluated at or past its blow-up time.
    EvaluatedAtOrPastBlowup { c: f64, p: f64, t: f64 },
    /// blowup_time_q1 called with C >= 0 (the solution is global).
    NoBlowup { c: f64 },
    /// Time-ODE initial value h0 <= 0 or h0 = 1 (equilibrium).
    InvalidInitial { h0: f64 },
    /// A rate bracket needs an event time (T or T_e) the trajectory lacks.
    MissingEvent { needed: &'static str },
    /// Operation called outside its (p, q) regime.
    RegimeViolation { reason: String },
    /// The stationary first integral went negative beyond round-off.
    NegativeRadicand { x: f64, value: f64 },
    /// The grid does not reach the profile's tail regime.
    DomainTooSmall { tail_ratio: f64, required: f64 },
    /// Adaptive integration exceeded its step budget (defensive).
    StepLimitExceeded,
}

impl fmt::Display for ExactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactError::EvaluatedAtOrPastBlowup { c, p, t } => {
                write!(f, "time solution with C={c}, p={p} evaluated at t={t}, at or past blow-up")
            }
            ExactError::NoBlowup { c } => write!(f, "no finite blow-up time for C={c} >= 0"),
            ExactError::InvalidInitial { h0 } => {
                write!(f, "initial value must be positive and != 1, got {h0}")
            }
            ExactError::MissingEvent { needed } => {
                write!(f, "bracket requires a {needed} event on the trajectory")
            }
            ExactError::RegimeViolation { reason } => write!(f, "regime violation: {reason}"),
            ExactError::NegativeRadicand { x, value } => {
                write!(f, "first integral went negative ({value}) at x={x}")
            }
            ExactError::DomainTooSmall { tail_ratio, required } => {
                write!(
                    f,
                    "tail/peak ratio {tail_ratio:.3e} at the boundary exceeds {required:.1e}; \
                     enlarge the domain"
                )
            }
            ExactError::StepLimitExceeded => write!(f, "adaptive integrator exceeded step budget"),
        }
    }
}

impl std::error::Error for ExactError {}
