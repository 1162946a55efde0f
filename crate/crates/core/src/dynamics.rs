//! Explicit time stepping of the nonlocal parabolic problem
//!
//! ```text
//! u_t = u_xx + λ / ((1-u)² [1 + α ∫₋₁¹ (1-u)⁻¹ dx]²),   ±u_x(±1) + u(±1) = 0
//! ```
//!
//! on a uniform grid with ghost-node Robin conditions and classical RK4 in
//! time. Runs end when the membrane touches down, settles, or the horizon is
//! reached.

use serde::Serialize;

use crate::branch::{branch_point, reconstruct_profile, symmetric_grid};
use crate::oracle::trapezoid_reciprocal;
use crate::pull_in::{solve_for_lambda, DEFAULT_TOL};
use crate::{Error, Exec, Result};

/// `dt = DT_FACTOR h²`.
pub const DT_FACTOR: f64 = 0.4;
/// Touchdown is declared once `max u ≥ 1 - QUENCH_DELTA`.
pub const QUENCH_DELTA: f64 = 1e-2;
/// `rhs` refuses states with `1 - u` at or below this.
pub const SINGULARITY_GUARD: f64 = 1e-6;
/// Sup-norm of `u_t` below which a run counts as steady.
pub const STEADY_TOL: f64 = 1e-8;
pub const MIN_NODES: usize = 51;

const MIN_RETRY_DT: f64 = 1e-14;

// Below this many nodes rayon dispatch per RK stage costs more than the work.
const PAR_NODES: usize = 2049;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimState {
    pub time: f64,
    pub xs: Vec<f64>,
    pub us: Vec<f64>,
    pub lambda: f64,
    pub alpha: f64,
}

impl SimState {
    /// Zero deflection on `nx` nodes.
    pub fn at_rest(lambda: f64, alpha: f64, nx: usize) -> Result<Self> {
        Self::new(lambda, alpha, vec![0.0; nx])
    }

    pub fn new(lambda: f64, alpha: f64, us: Vec<f64>) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::domain("lambda", lambda));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain("alpha", alpha));
        }
        if let Some(&u) = us.iter().find(|&&u| !(0.0..1.0).contains(&u)) {
            return Err(Error::domain("initial deflection (needs 0 <= u < 1)", u));
        }
        let xs = symmetric_grid(us.len())?;
        Ok(SimState {
            time: 0.0,
            xs,
            us,
            lambda,
            alpha,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 / (self.us.len() - 1) as f64
    }

    pub fn max_u(&self) -> f64 {
        self.us.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn u_mid(&self) -> f64 {
        self.us[self.us.len() / 2]
    }

    /// Trapezoid value of `∫ (1-u)⁻¹`.
    pub fn nonlocal_integral(&self) -> f64 {
        let gaps: Vec<f64> = self.us.iter().map(|u| 1.0 - u).collect();
        trapezoid_reciprocal(&gaps, self.spacing())
    }

    /// Largest interior `|w'' - λ / (w² [1 + α Q]²)|` for `w = 1 - u`, with
    /// the same trapezoid `Q`.
    pub fn steady_residual(&self) -> f64 {
        let h = self.spacing();
        let q = self.nonlocal_integral();
        let scale = self.lambda / (1.0 + self.alpha * q).powi(2);
        let w: Vec<f64> = self.us.iter().map(|u| 1.0 - u).collect();
        (1..w.len() - 1)
            .map(|i| {
                let d2 = ((w[i - 1] + w[i + 1]) - 2.0 * w[i]) / (h * h);
                (d2 - scale / (w[i] * w[i])).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Semi-discrete right-hand side `u_t` at every node.
pub fn rhs(state: &SimState) -> Result<Vec<f64>> {
    let mut out = vec![0.0; state.us.len()];
    let mut inv_gap = Vec::new();
    rhs_into(&state.us, state.lambda, state.alpha, state.time, &mut inv_gap, &mut out)?;
    Ok(out)
}

fn rhs_into(
    us: &[f64],
    lambda: f64,
    alpha: f64,
    time: f64,
    inv_gap: &mut Vec<f64>,
    out: &mut [f64],
) -> Result<()> {
    let n = us.len();
    let h = 2.0 / (n - 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let min_gap = us.iter().fold(f64::INFINITY, |m, u| m.min(1.0 - u));
    if !(min_gap > SINGULARITY_GUARD) {
        return Err(Error::Singularity {
            time,
            guard: SINGULARITY_GUARD,
        });
    }
    inv_gap.clear();
    inv_gap.extend(us.iter().map(|u| 1.0 / (1.0 - u)));
    // Fixed left-to-right reduction, independent of the execution strategy.
    let interior: f64 = inv_gap[1..n - 1].iter().sum();
    let q = h * (interior + 0.5 * (inv_gap[0] + inv_gap[n - 1]));
    let scale = lambda / (1.0 + alpha * q).powi(2);
    let g = &inv_gap[..];

    // Robin ghost values: u[-1] = u[1] - 2h u[0], u[n] = u[n-2] - 2h u[n-1].
    let left = 2.0 * (us[1] - us[0] - h * us[0]) * inv_h2 + scale * g[0] * g[0];
    let right = 2.0 * (us[n - 2] - us[n - 1] - h * us[n - 1]) * inv_h2 + scale * g[n - 1] * g[n - 1];
    let node = |i: usize| ((us[i - 1] + us[i + 1]) - 2.0 * us[i]) * inv_h2 + scale * g[i] * g[i];
    let inner = &mut out[1..n - 1];
    if n >= PAR_NODES {
        Exec::Parallel.fill(inner, |j| node(j + 1));
    } else {
        for (j, o) in inner.iter_mut().enumerate() {
            *o = node(j + 1);
        }
    }
    out[0] = left;
    out[n - 1] = right;
    Ok(())
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest stable explicit step for `nx` nodes.
pub fn stable_dt(nx: usize) -> f64 {
    let h = 2.0 / (nx - 1) as f64;
    DT_FACTOR * h * h
}

/// One RK4 step of size `dt`.
pub fn step(state: &SimState, dt: f64) -> Result<SimState> {
    let mut rk = Rk4::new(state.us.len());
    rk.eval_first(state)?;
    let mut next = state.clone();
    rk.advance(&mut next, dt)?;
    Ok(next)
}

/// Stage buffers for repeated RK4 steps on one grid.
struct Rk4 {
    inv_gap: Vec<f64>,
    stage: Vec<f64>,
    k: [Vec<f64>; 4],
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Rk4 {
            inv_gap: Vec::with_capacity(n),
            stage: vec![0.0; n],
            k: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    /// `u_t` at the current state; kept for the next [`Rk4::advance`].
    fn eval_first(&mut self, state: &SimState) -> Result<&[f64]> {
        rhs_into(&state.us, state.lambda, state.alpha, state.time, &mut self.inv_gap, &mut self.k[0])?;
        Ok(&self.k[0])
    }

    /// Advances `state` in place by `dt`. On error `state` is untouched.
    fn advance(&mut self, state: &mut SimState, dt: f64) -> Result<()> {
        let h = state.spacing();
        if !(dt > 0.0 && dt <= DT_FACTOR * h * h * (1.0 + 1e-12)) {
            return Err(Error::domain("time step (needs 0 < dt <= 0.4 h^2)", dt));
        }
        let (lambda, alpha, t) = (state.lambda, state.alpha, state.time);
        let u = &state.us;
        for (stage, c) in [(1, 0.5 * dt), (2, 0.5 * dt), (3, dt)] {
            let (done, rest) = self.k.split_at_mut(stage);
            let prev = &done[stage - 1];
            for ((s, u), k) in self.stage.iter_mut().zip(u).zip(prev) {
                *s = u + c * k;
            }
            rhs_into(&self.stage, lambda, alpha, t, &mut self.inv_gap, &mut rest[0])?;
        }
        let [k1, k2, k3, k4] = &self.k;
        for i in 0..u.len() {
            self.stage[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        let before = sup_norm(u);
        let after = sup_norm(&self.stage);
        if !after.is_finite() || (before > 0.0 && after > 10.0 * before) {
            return Err(Error::Unstable {
                time: t,
                before,
                after,
            });
        }
        std::mem::swap(&mut state.us, &mut self.stage);
        state.time = t + dt;
        Ok(())
    }
}

/// Steps until `state.time` reaches `t` exactly (the last step is shortened).
pub fn advance_to(mut state: SimState, t: f64) -> Result<SimState> {
    let dt = stable_dt(state.us.len());
    while state.time < t {
        let dt = dt.min(t - state.time);
        state = step(&state, dt)?;
        if t - state.time < 1e-12 * t.max(1.0) {
            state.time = t;
        }
    }
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStatus {
    Converged,
    Quenched,
    TimedOut,
}

impl SimStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SimStatus::Converged => "converged",
            SimStatus::Quenched => "quenched",
            SimStatus::TimedOut => "timed_out",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub max_u: f64,
    pub u_mid: f64,
    pub nonlocal_integral: f64,
}

impl Snapshot {
    fn of(state: &SimState) -> Self {
        Snapshot {
            t: state.time,
            max_u: state.max_u(),
            u_mid: state.u_mid(),
            nonlocal_integral: state.nonlocal_integral(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimOutcome {
    pub status: SimStatus,
    #[serde(rename = "final")]
    pub final_state: SimState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quench_time: Option<f64>,
    /// Sup-norm distance to the small-deflection analytic steady state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_gap: Option<f64>,
    pub steps: u64,
    #[serde(skip)]
    pub history: Vec<Snapshot>,
}

/// A single run of the parabolic problem.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub lambda: f64,
    pub alpha: f64,
    pub nx: usize,
    pub t_end: f64,
    /// Initial deflection; zero when absent.
    pub u0: Option<Vec<f64>>,
    /// Time between recorded snapshots.
    pub record_every: f64,
}

impl Simulation {
    pub fn new(lambda: f64, alpha: f64, nx: usize, t_end: f64) -> Self {
        Simulation {
            lambda,
            alpha,
            nx,
            t_end,
            u0: None,
            record_every: 0.1,
        }
    }

    pub fn with_initial(mut self, u0: Vec<f64>) -> Self {
        self.u0 = Some(u0);
        self
    }

    pub fn record_every(mut self, dt: f64) -> Self {
        self.record_every = dt;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::domain("lambda", self.lambda));
        }
        if self.nx < MIN_NODES || self.nx.is_multiple_of(2) {
            return Err(Error::domain("nx (odd, >= 51)", self.nx as f64));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::domain("t_end", self.t_end));
        }
        if !(self.record_every > 0.0) {
            return Err(Error::domain("record interval", self.record_every));
        }
        if let Some(u0) = &self.u0 {
            if u0.len() != self.nx {
                return Err(Error::domain("initial profile length", u0.len() as f64));
            }
        }
        Ok(())
    }

    pub fn run(&self) -> Result<SimOutcome> {
        self.validate()?;
        let u0 = self.u0.clone().unwrap_or_else(|| vec![0.0; self.nx]);
        let mut state = SimState::new(self.lambda, self.alpha, u0)?;
        let dt = stable_dt(self.nx);
        let mut history = vec![Snapshot::of(&state)];
        let mut next_record = self.record_every;
        let mut steps = 0u64;

        let finish = |state: SimState, status, quench_time, steady_gap, steps, mut history: Vec<Snapshot>| {
            if history.last().map(|s: &Snapshot| s.t) != Some(state.time) {
                history.push(Snapshot::of(&state));
            }
            SimOutcome {
                status,
                final_state: state,
                quench_time,
                steady_gap,
                steps,
                history,
            }
        };

        let mut rk = Rk4::new(self.nx);
        loop {
            if state.max_u() >= 1.0 - QUENCH_DELTA {
                let t = state.time;
                return Ok(finish(state, SimStatus::Quenched, Some(t), None, steps, history));
            }
            if sup_norm(rk.eval_first(&state)?) < STEADY_TOL {
                let gap = self.gap_to_lower_branch(&state)?;
                return Ok(finish(state, SimStatus::Converged, None, gap, steps, history));
            }
            if state.time >= self.t_end {
                return Ok(finish(state, SimStatus::TimedOut, None, None, steps, history));
            }
            // A stage that crosses the singularity guard is retried with a
            // smaller step so touchdown is only declared past 1 - QUENCH_DELTA.
            let mut dt = dt.min(self.t_end - state.time);
            loop {
                match rk.advance(&mut state, dt) {
                    Ok(()) => break,
                    Err(Error::Singularity { .. }) if dt > MIN_RETRY_DT => dt *= 0.5,
                    Err(Error::Singularity { .. }) => {
                        let t = state.time;
                        return Ok(finish(state, SimStatus::Quenched, Some(t), None, steps, history));
                    }
                    Err(e) => return Err(e),
                }
            }
            if self.t_end - state.time < 1e-12 * self.t_end {
                state.time = self.t_end;
            }
            steps += 1;
            if state.time >= next_record {
                history.push(Snapshot::of(&state));
                next_record += self.record_every;
            }
        }
    }

    fn gap_to_lower_branch(&self, state: &SimState) -> Result<Option<f64>> {
        let solved = solve_for_lambda(self.lambda, self.alpha, DEFAULT_TOL)?;
        let Some(s1) = solved.roots.first() else {
            return Ok(None);
        };
        let pt = branch_point(s1.get(), self.alpha)?;
        let profile = reconstruct_profile(&pt, self.nx)?;
        let gap = state
            .us
            .iter()
            .zip(&profile.us)
            .fold(0.0, |m: f64, (u, v)| m.max((u - v).abs()));
        Ok(Some(gap))
    }
}

/// Runs several independent simulations, in parallel when enabled.
pub fn simulate_many(exec: Exec, sims: &[Simulation]) -> Vec<Result<SimOutcome>> {
    exec.map(sims, Simulation::run)
}
