//! Model parameters, normalized-frame rescaling, grids, and sampled profiles.
//!
//! The model is the reaction-diffusion equation
//!
//! ```text
//! u_t = K u_xx - B u^q + A u^p,    p > q > 0,  p > 1,  A, B, K > 0,
//! ```
//!
//! posed on the line. The substitution `u = c v`, `x = a y`, `t = b s` with
//! the coefficients of [`rescale`] turns it into the normalized equation
//! `v_s = v_yy - v^q + v^p`; everything downstream works in that frame.

use std::fmt;

/// Errors from parameter validation and profile algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// A, B or K is not strictly positive and finite.
    NonPositiveCoefficient { name: &'static str, value: f64 },
    /// The exponents violate p > q > 0, p > 1 (or are not finite).
    ExponentOrderViolation { p: f64, q: f64 },
    /// Invalid grid construction parameters.
    BadGrid { reason: String },
    /// Two grids that must be scale-images of each other are not.
    GridMismatch { reason: String },
    /// A profile value is NaN or infinite.
    NonFiniteValue { index: usize, value: f64 },
    /// Value array length does not match the grid.
    LengthMismatch { expected: usize, got: usize },
    /// Invalid time series (length mismatch or non-increasing times).
    BadSeries { reason: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonPositiveCoefficient { name, value } => {
                write!(f, "coefficient {name} must be positive and finite, got {value}")
            }
            ModelError::ExponentOrderViolation { p, q } => {
                write!(f, "exponents must satisfy p > q > 0 and p > 1, got p={p}, q={q}")
            }
            ModelError::BadGrid { reason } => write!(f, "bad grid: {reason}"),
            ModelError::GridMismatch { reason } => write!(f, "grid mismatch: {reason}"),
            ModelError::NonFiniteValue { index, value } => {
                write!(f, "non-finite value {value} at index {index}")
            }
            ModelError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} values, got {got}")
            }
            ModelError::BadSeries { reason } => write!(f, "bad time series: {reason}"),
        }
    }
}

impl std::error::Error for ModelError {}

/// Exponents and coefficients of `u_t = K u_xx - B u^q + A u^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Reaction exponent p.
    pub p: f64,
    /// Absorption exponent q.
    pub q: f64,
    /// Reaction coefficient A > 0.
    pub a: f64,
    /// Absorption coefficient B > 0.
    pub b: f64,
    /// Diffusivity K > 0.
    pub k: f64,
}

impl ModelParams {
    /// Validates `p > q > 0`, `p > 1` and positive finite coefficients.
    ///
    /// `q < 1` is accepted (the time-ODE layer covers extinction) but the PDE
    /// solver restricts what it will run; see [`crate::pde::evolve`].
    pub fn new(p: f64, q: f64, a: f64, b: f64, k: f64) -> Result<Self, ModelError> {
        if !p.is_finite() || !q.is_finite() || p <= 1.0 || p <= q || q <= 0.0 {
            return Err(ModelError::ExponentOrderViolation { p, q });
        }
        for (name, value) in [("A", a), ("B", b), ("K", k)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(ModelError::NonPositiveCoefficient { name, value });
            }
        }
        Ok(ModelParams { p, q, a, b, k })
    }

    /// The normalized equation's parameters: A = B = K = 1.
    pub fn normalized(p: f64, q: f64) -> Result<Self, ModelError> {
        ModelParams::new(p, q, 1.0, 1.0, 1.0)
    }

    /// True when A = B = K = 1 exactly.
    pub fn is_normalized(&self) -> bool {
        self.a == 1.0 && self.b == 1.0 && self.k == 1.0
    }

    /// True for the sublinear absorption range q < 1 (extinction regime;
    /// only the ODE-level operations support it).
    pub fn sublinear_absorption(&self) -> bool {
        self.q < 1.0
    }
}

/// Scales mapping the general equation onto the normalized one:
/// `u(x, t) = amplitude * v(x / space, t / time)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCoefficients {
    /// Space scale a.
    pub space: f64,
    /// Time scale b.
    pub time: f64,
    /// Amplitude scale c.
    pub amplitude: f64,
}

/// Computes the scales `c = (B/A)^{1/(p-q)}`, `b = c^{1-p}/A`, `a = sqrt(K b)`.
pub fn rescale(params: &ModelParams) -> ScalingCoefficients {
    let c = (params.b / params.a).powf(1.0 / (params.p - params.q));
    let b = c.powf(1.0 - params.p) / params.a;
    let a = (params.k * b).sqrt();
    ScalingCoefficients { space: a, time: b, amplitude: c }
}

/// Which way a profile is mapped between the original and normalized frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameMap {
    /// Original variables -> normalized variables (divide by the scales).
    ToNormalized,
    /// Normalized variables -> original variables (multiply by the scales).
    FromNormalized,
}

/// Uniform symmetric grid on `[-L, L]` with an odd number of nodes, so that
/// x = 0 (the stationary peak) is always a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    half_width: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(half_width: f64, n: usize) -> Result<Self, ModelError> {
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(ModelError::BadGrid { reason: format!("half width must be positive, got {half_width}") });
        }
        if n < 3 || n % 2 == 0 {
            return Err(ModelError::BadGrid { reason: format!("need an odd node count >= 3, got {n}") });
        }
        Ok(Grid1D { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    /// Index of the x = 0 node.
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Node coordinate; computed as (i - center) * dx so that mirrored
    /// indices give exactly negated coordinates.
    pub fn x(&self, i: usize) -> f64 {
        (i as isize - self.center() as isize) as f64 * self.dx()
    }

    /// Index of the node at -x(i).
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Grid with the same node count on `[-factor*L, factor*L]`.
    pub fn scaled(&self, factor: f64) -> Result<Grid1D, ModelError> {
        Grid1D::new(self.half_width * factor, self.n)
    }
}

/// A function of x sampled at the nodes of a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self, ModelError> {
        if values.len() != grid.len() {
            return Err(ModelError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(ModelError::NonFiniteValue { index, value });
            }
        }
        Ok(Profile { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self, ModelError> {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Profile::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Trapezoid-rule L1 norm over the grid.
    pub fn l1_norm(&self) -> f64 {
        trapezoid_abs(&self.values, self.grid.dx())
    }

    /// Linear interpolation inside `[-L, L]`; `None` outside.
    pub fn sample(&self, x: f64) -> Option<f64> {
        let l = self.grid.half_width();
        if !x.is_finite() || x < -l || x > l {
            return None;
        }
        let dx = self.grid.dx();
        let s = (x + l) / dx;
        let i = (s.floor() as usize).min(self.grid.len() - 2);
        let w = s - i as f64;
        Some(self.values[i] * (1.0 - w) + self.values[i + 1] * w)
    }

    /// Pointwise multiple `factor * self` on the same grid.
    pub fn scaled_values(&self, factor: f64) -> Profile {
        Profile {
            grid: self.grid,
            values: self.values.iter().map(|v| factor * v).collect(),
        }
    }

    /// Maps the profile between the original and normalized frames.
    ///
    /// `target` must be the image of the source grid under x -> x/a
    /// (`ToNormalized`) or x -> a*x (`FromNormalized`); values are divided
    /// (multiplied) by the amplitude scale. Round trips are identity to
    /// round-off.
    pub fn map_between_frames(
        &self,
        coeffs: &ScalingCoefficients,
        direction: FrameMap,
        target: &Grid1D,
    ) -> Result<Profile, ModelError> {
        let (space_factor, amp_factor) = match direction {
            FrameMap::ToNormalized => (1.0 / coeffs.space, 1.0 / coeffs.amplitude),
            FrameMap::FromNormalized => (coeffs.space, coeffs.amplitude),
        };
        let expected = self.grid.half_width() * space_factor;
        if target.len() != self.grid.len()
            || (target.half_width() - expected).abs() > 1e-9 * expected.abs()
        {
            return Err(ModelError::GridMismatch {
                reason: format!(
                    "target grid (L={}, n={}) is not the scale image (L={}, n={}) of the source",
                    target.half_width(),
                    target.len(),
                    expected,
                    self.grid.len()
                ),
            });
        }
        Ok(Profile {
            grid: *target,
            values: self.values.iter().map(|v| amp_factor * v).collect(),
        })
    }
}

/// Trapezoid rule for `integral of |v|` with uniform spacing.
pub(crate) fn trapezoid_abs(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|v| v.abs()).sum();
    let ends = 0.5 * (values[0].abs() + values[values.len() - 1].abs());
    dx * (sum - ends)
}

/// Trapezoid rule for `integral of v` with uniform spacing (signed).
pub(crate) fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let sum: f64 = values.iter().sum();
    let ends = 0.5 * (values[0] + values[values.len() - 1]);
    dx * (sum - ends)
}

/// Scalar diagnostic sampled at strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, ModelError> {
        if times.len() != values.len() {
            return Err(ModelError::BadSeries {
                reason: format!("{} times vs {} values", times.len(), values.len()),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ModelError::BadSeries { reason: "times not strictly increasing".into() });
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(ModelError::BadSeries { reason: "non-finite entry".into() });
        }
        Ok(TimeSeries { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Samples with `t0 <= t <= t1`.
    pub fn window(&self, t0: f64, t1: f64) -> Vec<(f64, f64)> {
        self.iter().filter(|&(t, _)| t >= t0 && t <= t1).collect()
    }
}
