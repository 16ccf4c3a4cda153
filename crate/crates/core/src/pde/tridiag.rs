//! Direct solution of the constant-coefficient tridiagonal systems arising
//! from the implicit diffusion step.

/// Solves `A x = rhs` in place, where `A` is tridiagonal with constant
/// diagonal `diag` and constant sub/super-diagonal `off`. `rhs` holds the
/// solution on return; `scratch` is resized as needed. Requires the usual
/// diagonal dominance `|diag| > 2|off|`, which `1 + 2θ·dt/dx²` vs `-θ·dt/dx²`
/// always satisfies.
pub(crate) fn solve_constant_tridiagonal(
    off: f64,
    diag: f64,
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    let n = rhs.len();
    if n == 0 {
        return;
    }
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut denom = diag;
    rhs[0] /= denom;
    for i in 1..n {
        scratch[i] = off / denom;
        denom = diag - off * scratch[i];
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}
