//! Numerical kernels for the generalized Fisher-KPP equation
//! `u_t = K u_xx - B u^q + A u^p` with exponents `p > max(q, 1)`, `q > 0`.
//!
//! After the rescaling provided by [`model::rescale`] the equation takes the
//! normalized form `u_t = u_xx - u^q + u^p`, which the rest of the crate
//! assumes:
//!
//! * [`model`] — parameters, the normalizing change of variables, grids,
//!   sampled profiles, and time series.
//! * [`exact`] — closed-form and ODE-level special solutions: time-only
//!   solutions with blow-up/decay/extinction rate brackets, and stationary
//!   profiles with verified tail asymptotics.
//! * [`pde`] — an implicit-explicit finite-difference solver for the Cauchy
//!   problem on a truncated interval, with event detection, energy and mass
//!   diagnostics, and heat-kernel comparison.
//! * [`separatrix`] — sub/supersolution candidates built from the stationary
//!   profiles, residual sign verification, initial-data classification, and
//!   bisection for the decay/blow-up threshold.

pub mod exact;
pub mod model;
pub mod pde;
pub mod separatrix;

pub use exact::ExactError;
pub use model::{Grid1D, ModelError, ModelParams, Profile, ScalingCoefficients, TimeSeries};
