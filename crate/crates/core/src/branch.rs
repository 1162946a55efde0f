//! Closed-form parametrization of the steady-state branch by the shooting
//! coordinate `s = b / a`, and reconstruction of membrane profiles from it.
//!
//! Every steady state `w = 1 - u` is symmetric, convex, and determined by its
//! midpoint value `a = w(0)` and edge value `b = w(±1)`. Writing
//! `D(s) = 2s - 1 + sqrt((s-1)/s) A(s)` with `A(s) = ln(sqrt(s) + sqrt(s-1))`:
//!
//! ```text
//! a = 1/D,   b = s/D,   σ = [sqrt(s(s-1)) + A]² / (2 D³)
//! λ = [sqrt(s(s-1)) + A + 4α D A]² / (2 D³)
//! ```
//!
//! and on `[0, 1]` the profile solves `phi(a, w(x)) = sqrt(2σ) x`.

use serde::Serialize;

use crate::root::bisect;
use crate::{Error, Exec, Result};

/// Smallest accepted shooting coordinate.
pub const S_MIN: f64 = 1.0 + 1e-14;
/// Largest accepted shooting coordinate.
pub const S_MAX: f64 = 1e12;

/// Relative tolerance on `phi(a, b) = sqrt(2σ)` before a triple is treated as
/// a branch point.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Residual bound for [`invert_phi`], relative to `sqrt(2σ)`.
pub const INVERT_TOL: f64 = 1e-13;

/// The ratio `b / a`; always finite and strictly greater than one.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ShootingCoord(f64);

impl ShootingCoord {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s > 1.0 {
            Ok(ShootingCoord(s))
        } else {
            Err(Error::domain("shooting coordinate s", s))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// One point of the solution branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchPoint {
    pub s: f64,
    pub alpha: f64,
    /// Midpoint value `w(0)`.
    pub a: f64,
    /// Edge value `w(±1)`.
    pub b: f64,
    /// Voltage with the nonlocal factor divided out.
    pub sigma: f64,
    pub lambda: f64,
}

impl BranchPoint {
    /// Maximum membrane deflection, attained at `x = 0`.
    pub fn max_deflection(&self) -> f64 {
        1.0 - self.a
    }

    /// `sqrt(2σ)`, the value of `phi(a, b)`.
    pub fn phi_edge(&self) -> f64 {
        (2.0 * self.sigma).sqrt()
    }
}

/// `A(s) = ln(sqrt(s) + sqrt(s - 1))`.
///
/// Evaluated as `asinh(sqrt(s - 1))`, which keeps full relative accuracy as
/// `s → 1⁺`. Accepts `s = 1` (returns 0).
pub fn big_a(s: f64) -> Result<f64> {
    if !s.is_finite() || s < 1.0 {
        return Err(Error::domain("s for A(s)", s));
    }
    Ok(big_a_unchecked(s))
}

pub(crate) fn big_a_unchecked(s: f64) -> f64 {
    (s - 1.0).sqrt().asinh()
}

/// `D(s) = 2s - 1 + sqrt((s-1)/s) A(s)`.
fn denominator(s: f64, big_a: f64) -> f64 {
    2.0 * s - 1.0 + ((s - 1.0) / s).sqrt() * big_a
}

/// Evaluates the branch formulas. Carries an optional additive bias on
/// `A(s)`, used only to check that the verification battery catches a
/// corrupted transcription.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BranchModel {
    big_a_bias: f64,
}

impl BranchModel {
    pub const EXACT: BranchModel = BranchModel { big_a_bias: 0.0 };

    #[doc(hidden)]
    pub fn with_big_a_bias(bias: f64) -> Self {
        BranchModel { big_a_bias: bias }
    }

    pub fn is_exact(&self) -> bool {
        self.big_a_bias == 0.0
    }

    pub fn point(&self, s: f64, alpha: f64) -> Result<BranchPoint> {
        if !(S_MIN..=S_MAX).contains(&s) {
            return Err(Error::domain("shooting coordinate s", s));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain("alpha", alpha));
        }
        let big_a = big_a_unchecked(s) + self.big_a_bias;
        let root = (s * (s - 1.0)).sqrt();
        let d = denominator(s, big_a);
        let d3 = d * d * d;
        let a = 1.0 / d;
        let b = s / d;
        // Same operation order for both so that λ == σ bit-for-bit at α = 0.
        let sigma = 0.5 * (root + big_a).powi(2) / d3;
        let lambda = 0.5 * (root + big_a + 4.0 * alpha * d * big_a).powi(2) / d3;
        Ok(BranchPoint {
            s,
            alpha,
            a,
            b,
            sigma,
            lambda,
        })
    }
}

/// The branch point at shooting coordinate `s` for capacitance ratio `alpha`.
pub fn branch_point(s: f64, alpha: f64) -> Result<BranchPoint> {
    BranchModel::EXACT.point(s, alpha)
}

/// `ln((sqrt(w) + sqrt(w - a)) / sqrt(a))`, written as `asinh(sqrt((w-a)/a))`.
fn log_ratio(a: f64, w: f64) -> f64 {
    ((w - a) / a).sqrt().asinh()
}

/// Closed form of `∫₋₁¹ dy / w(y)` for the profile with `w(0) = a`, `w(1) = b`.
pub fn nonlocal_integral(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a < b && b < 1.0) {
        return Err(Error::domain("(a, b) ordering 0 < a < b < 1; a", a));
    }
    let l = log_ratio(a, b);
    Ok(4.0 * l / ((b * (b - a)).sqrt() + a * l))
}

/// `phi(a, w) = sqrt(a) [sqrt(w(w-a)) + a ln((sqrt(w) + sqrt(w-a)) / sqrt(a))]`.
///
/// Along a steady profile `phi(a, w(x)) = sqrt(2σ) |x|`. Strictly increasing
/// in `w ≥ a`, with `phi(a, a) = 0`.
pub fn phi(a: f64, w: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain("a for phi", a));
    }
    if !(w.is_finite() && w >= a) {
        return Err(Error::domain("w for phi (needs w >= a)", w));
    }
    Ok(phi_unchecked(a, w))
}

fn phi_unchecked(a: f64, w: f64) -> f64 {
    a.sqrt() * ((w * (w - a)).sqrt() + a * log_ratio(a, w))
}

/// Solves `phi(a, w) = sqrt(2σ) x` for `w ∈ [a, b]` by bisection.
pub fn invert_phi(a: f64, b: f64, sigma: f64, x: f64) -> Result<f64> {
    let edge = check_consistent(a, b, sigma)?;
    invert_checked(a, b, edge, x)
}

fn check_consistent(a: f64, b: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain("sigma", sigma));
    }
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::domain("(a, b) ordering; a", a));
    }
    let expected = (2.0 * sigma).sqrt();
    let phi_ab = phi(a, b)?;
    if (phi_ab - expected).abs() > CONSISTENCY_TOL * expected {
        return Err(Error::Inconsistent { phi_ab, expected });
    }
    Ok(expected)
}

fn invert_checked(a: f64, b: f64, edge: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("x for phi inversion", x));
    }
    if x == 0.0 {
        return Ok(a);
    }
    let target = edge * x;
    let f = |w: f64| phi_unchecked(a, w) - target;

    // phi(a, b) may fall short of sqrt(2σ) by round-off; widen past b.
    let mut hi = b;
    let mut bump = f64::EPSILON * b;
    while f(hi) <= 0.0 {
        hi = b + bump;
        bump *= 4.0;
        if bump > b - a {
            return Err(Error::Bracket("phi inversion"));
        }
    }
    // Bisect until the bracket is two adjacent floats: the residual then meets
    // INVERT_TOL unless the slope of phi makes one ulp of w exceed it (w → a
    // as s → 1⁺), in which case no representable w does better.
    let br = bisect("phi inversion", a, hi, f, |_, _| false)?;
    Ok(if f(br.lo).abs() <= f(br.hi).abs() {
        br.lo
    } else {
        br.hi
    })
}

/// A reconstructed steady state on a symmetric uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteadyProfile {
    pub s: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub xs: Vec<f64>,
    pub ws: Vec<f64>,
    pub us: Vec<f64>,
}

impl SteadyProfile {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 / (self.len() - 1) as f64
    }

    pub fn mid_index(&self) -> usize {
        self.len() / 2
    }

    /// Largest `|w'(±1) ∓ (1 - w(±1))|`, with the edge slopes from the
    /// second-order one-sided difference.
    pub fn robin_residual(&self) -> f64 {
        let n = self.len();
        let h = self.spacing();
        let w = &self.ws;
        let right = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * h);
        let left = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
        let r = (right - (1.0 - w[n - 1])).abs();
        let l = (-left - (1.0 - w[0])).abs();
        r.max(l)
    }

    /// Builds a profile from raw grid data with the given parameters; used for
    /// synthetic checks.
    pub fn from_values(pt: &BranchPoint, ws: Vec<f64>) -> Result<Self> {
        let n = ws.len();
        let xs = symmetric_grid(n)?;
        let us = ws.iter().map(|w| 1.0 - w).collect();
        Ok(SteadyProfile {
            s: pt.s,
            alpha: pt.alpha,
            lambda: pt.lambda,
            a: pt.a,
            b: pt.b,
            sigma: pt.sigma,
            xs,
            ws,
            us,
        })
    }
}

/// `n` nodes on `[-1, 1]`, `n` odd, symmetric bit-for-bit about `x = 0`.
pub fn symmetric_grid(n: usize) -> Result<Vec<f64>> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::domain("grid size (odd, >= 3)", n as f64));
    }
    let mid = n / 2;
    let m = mid as f64;
    let mut xs = vec![0.0; n];
    for i in 1..=mid {
        let x = i as f64 / m;
        xs[mid + i] = x;
        xs[mid - i] = -x;
    }
    Ok(xs)
}

/// Rebuilds the steady state at `pt` on `n` (odd) uniform nodes.
pub fn reconstruct_profile(pt: &BranchPoint, n: usize) -> Result<SteadyProfile> {
    reconstruct_profile_with(Exec::default(), pt, n)
}

pub fn reconstruct_profile_with(exec: Exec, pt: &BranchPoint, n: usize) -> Result<SteadyProfile> {
    let xs = symmetric_grid(n)?;
    let edge = check_consistent(pt.a, pt.b, pt.sigma)?;
    let mid = n / 2;
    let half = exec.try_map_range(mid + 1, |i| match i {
        0 => Ok(pt.a),
        i if i == mid => Ok(pt.b),
        i => invert_checked(pt.a, pt.b, edge, xs[mid + i]),
    })?;
    let mut ws = vec![0.0; n];
    for (i, &w) in half.iter().enumerate() {
        ws[mid + i] = w;
        ws[mid - i] = w;
    }
    let us = ws.iter().map(|w| 1.0 - w).collect();
    Ok(SteadyProfile {
        s: pt.s,
        alpha: pt.alpha,
        lambda: pt.lambda,
        a: pt.a,
        b: pt.b,
        sigma: pt.sigma,
        xs,
        ws,
        us,
    })
}
