//! Independent checks of the closed-form branch: direct integration of the
//! steady ODE from the midpoint, finite-difference residuals, and trapezoid
//! quadrature of the nonlocal term.
//!
//! Nothing here evaluates the implicit `x`–`w` relation; only the numbers
//! `a`, `σ`, `λ` cross over from [`crate::branch`].

use serde::Serialize;

use crate::branch::{reconstruct_profile, BranchPoint, SteadyProfile};
use crate::{Error, Result};

pub const MIN_SHOOT_STEPS: usize = 16;

/// Solution of `w'' = σ / w²`, `w(0) = a`, `w'(0) = 0` on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShootTrajectory {
    pub a: f64,
    pub sigma: f64,
    pub xs: Vec<f64>,
    pub ws: Vec<f64>,
    pub wps: Vec<f64>,
}

impl ShootTrajectory {
    pub fn end_value(&self) -> f64 {
        *self.ws.last().unwrap()
    }

    pub fn end_slope(&self) -> f64 {
        *self.wps.last().unwrap()
    }
}

/// Integrates from the midpoint with fixed-step classical RK4.
pub fn shoot(a: f64, sigma: f64, n_steps: usize) -> Result<ShootTrajectory> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain("midpoint value a", a));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain("sigma", sigma));
    }
    if n_steps < MIN_SHOOT_STEPS {
        return Err(Error::domain("shooting steps", n_steps as f64));
    }
    let h = 1.0 / n_steps as f64;
    let accel = |w: f64| sigma / (w * w);

    let mut xs = Vec::with_capacity(n_steps + 1);
    let mut ws = Vec::with_capacity(n_steps + 1);
    let mut wps = Vec::with_capacity(n_steps + 1);
    let (mut w, mut p) = (a, 0.0);
    xs.push(0.0);
    ws.push(w);
    wps.push(p);
    for k in 1..=n_steps {
        let (k1w, k1p) = (p, accel(w));
        let (k2w, k2p) = (p + 0.5 * h * k1p, accel(w + 0.5 * h * k1w));
        let (k3w, k3p) = (p + 0.5 * h * k2p, accel(w + 0.5 * h * k2w));
        let (k4w, k4p) = (p + h * k3p, accel(w + h * k3w));
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let x = k as f64 * h;
        if !(w > 0.0 && w < 10.0) {
            return Err(Error::domain("shooting trajectory w (left (0, 10)) at x", x));
        }
        xs.push(x);
        ws.push(w);
        wps.push(p);
    }
    Ok(ShootTrajectory {
        a,
        sigma,
        xs,
        ws,
        wps,
    })
}

/// `|w'(1) - (1 - w(1))|` at the end of the trajectory.
pub fn robin_residual(traj: &ShootTrajectory) -> f64 {
    (traj.end_slope() - (1.0 - traj.end_value())).abs()
}

/// Trapezoid rule for `∫₋₁¹ dy / w(y)` on the profile's own grid.
pub fn quad_nonlocal(profile: &SteadyProfile) -> f64 {
    trapezoid_reciprocal(&profile.ws, profile.spacing())
}

pub(crate) fn trapezoid_reciprocal(ws: &[f64], h: f64) -> f64 {
    let n = ws.len();
    let interior: f64 = ws[1..n - 1].iter().map(|w| 1.0 / w).sum();
    h * (interior + 0.5 * (1.0 / ws[0] + 1.0 / ws[n - 1]))
}

/// Largest interior `|D₂w - λ / (w² [1 + α Q]²)|`, with `Q` the trapezoid
/// value of the nonlocal integral on the same grid.
pub fn ode_residual(profile: &SteadyProfile) -> f64 {
    let h = profile.spacing();
    let q = quad_nonlocal(profile);
    let scale = profile.lambda / (1.0 + profile.alpha * q).powi(2);
    let w = &profile.ws;
    (1..w.len() - 1)
        .map(|i| {
            let d2 = (w[i - 1] - 2.0 * w[i] + w[i + 1]) / (h * h);
            (d2 - scale / (w[i] * w[i])).abs()
        })
        .fold(0.0, f64::max)
}

/// Relative mismatch between `pt.lambda` and `σ [1 + α Q]²` with `Q` from
/// quadrature over the reconstructed profile.
pub fn lambda_roundtrip(pt: &BranchPoint, n: usize) -> Result<f64> {
    if pt.alpha == 0.0 {
        return Ok((pt.sigma - pt.lambda).abs() / pt.lambda);
    }
    let profile = reconstruct_profile(pt, n)?;
    let q = quad_nonlocal(&profile);
    let lambda = pt.sigma * (1.0 + pt.alpha * q).powi(2);
    Ok((lambda - pt.lambda).abs() / pt.lambda)
}

/// Sup-norm gap between the trajectory reflected about `x = 0` and the
/// profile, over nodes the two grids share.
pub fn reflection_gap(traj: &ShootTrajectory, profile: &SteadyProfile) -> Result<f64> {
    let steps = traj.xs.len() - 1;
    let mid = profile.mid_index();
    if !steps.is_multiple_of(mid) {
        return Err(Error::domain("grid ratio (steps / half-width)", steps as f64 / mid as f64));
    }
    let stride = steps / mid;
    let mut gap: f64 = 0.0;
    for i in 0..=mid {
        let w = traj.ws[i * stride];
        gap = gap
            .max((w - profile.ws[mid + i]).abs())
            .max((w - profile.ws[mid - i]).abs());
    }
    Ok(gap)
}
