//! The verification battery behind `mems-pullin verify`: every closed-form
//! claim cross-checked against direct integration, quadrature, and sampled
//! monotonicity.

use std::time::Instant;

use serde::Serialize;

use crate::branch::{nonlocal_integral, phi, reconstruct_profile_with, BranchModel};
use crate::dynamics::{SimStatus, Simulation};
use crate::oracle::{ode_residual, quad_nonlocal, robin_residual, shoot};
use crate::pull_in::{
    find_fold, find_folds, solve_for_lambda, stationarity, stationarity_local,
    stationarity_nonlocal, DEFAULT_TOL,
};
use crate::{Exec, Result};

/// `n` points spaced evenly in `ln x` over `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Shooting coordinates spaced evenly in `ln(s - 1)`, for grids that need to
/// resolve `s → 1⁺`.
pub fn log_space_above_one(eps_lo: f64, s_hi: f64, n: usize) -> Vec<f64> {
    log_space(eps_lo, s_hi - 1.0, n)
        .into_iter()
        .map(|e| 1.0 + e)
        .collect()
}

pub fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// RK4 steps for the shooting comparison. 4096 steps leave truncation error
/// above 1e-7 once s exceeds about 800, where the midpoint layer of the
/// profile is only a few steps wide.
pub const ORACLE_STEPS: usize = 16_384;

/// Branch points used for profile and quadrature checks.
pub const PROFILE_SAMPLES: [f64; 10] = [1.05, 1.1, 1.2, 1.4, 1.7, 2.0, 2.5, 3.0, 4.0, 5.0];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<4}  {:<width$}  {:>7.3}s  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.seconds,
                c.detail
            ));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {} failed\n", self.checks.len(), failed));
        out
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    pub model: BranchModel,
    pub exec: Exec,
    /// Also run the two PDE simulations (tens of seconds).
    pub dynamics: bool,
}

type Outcome = Result<(bool, String)>;

fn run_check(name: &'static str, f: impl FnOnce() -> Outcome) -> Check {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run(opts: Options) -> Report {
    let Options { model, exec, .. } = opts;
    let mut checks = vec![
        run_check("pull-in alpha=0", || fold_value(0.0, 0.10871)),
        run_check("pull-in alpha=1", || fold_value(1.0, 2.38709)),
        run_check("solution count trichotomy", trichotomy),
        run_check("oracle equivalence (shooting)", || oracle_equivalence(model, exec)),
        run_check("a-b-sigma compatibility", || branch_identities(model, exec)),
        run_check("branch shape", || branch_shape(model, exec)),
        run_check("stationarity terms increasing", || stationarity_monotone(exec)),
        run_check("stationarity sign change", stationarity_signs),
        run_check("pull-in increasing in alpha", || fold_monotone(exec)),
        run_check("profile validity", || profile_validity(model, exec)),
        run_check("nonlocal consistency", || nonlocal_consistency(model, exec)),
    ];
    if opts.dynamics {
        checks.push(run_check("dynamics: quench above fold", || {
            let out = Simulation::new(0.2, 0.0, 401, 100.0).run()?;
            Ok((
                out.status == SimStatus::Quenched,
                format!("status {}, t_q {:?}", out.status.as_str(), out.quench_time),
            ))
        }));
        checks.push(run_check("dynamics: settle below fold", || {
            let out = Simulation::new(0.05, 0.0, 401, 200.0).run()?;
            let gap = out.steady_gap.unwrap_or(f64::INFINITY);
            Ok((
                out.status == SimStatus::Converged && gap < 1e-3,
                format!("status {}, gap {gap:.3e}", out.status.as_str()),
            ))
        }));
    }
    Report {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn fold_value(alpha: f64, reported: f64) -> Outcome {
    let f = find_fold(alpha, DEFAULT_TOL)?;
    let err = (f.lambda_star - reported).abs();
    Ok((err < 1e-4, format!("lambda* = {:.8}, |diff| = {err:.2e}", f.lambda_star)))
}

fn trichotomy() -> Outcome {
    let mut counts = Vec::new();
    for alpha in [0.0, 1.0] {
        let star = find_fold(alpha, DEFAULT_TOL)?.lambda_star;
        for (ratio, want) in [(0.5, 2), (1.0, 1), (1.5, 0)] {
            counts.push((solve_for_lambda(ratio * star, alpha, DEFAULT_TOL)?.roots.len(), want));
        }
    }
    let ok = counts.iter().all(|(got, want)| got == want);
    let got: Vec<usize> = counts.iter().map(|c| c.0).collect();
    Ok((ok, format!("root counts {got:?}")))
}

fn oracle_equivalence(model: BranchModel, exec: Exec) -> Outcome {
    let ss = log_space(1.01, 1000.0, 50);
    let mut cases = Vec::new();
    for alpha in [0.0, 1.0] {
        cases.extend(ss.iter().map(|&s| (s, alpha)));
    }
    let errs = exec.try_map_range(cases.len(), |i| -> Result<(f64, f64)> {
        let (s, alpha) = cases[i];
        let p = model.point(s, alpha)?;
        let t = shoot(p.a, p.sigma, ORACLE_STEPS)?;
        Ok(((t.end_value() - p.b).abs(), robin_residual(&t)))
    })?;
    let max_b = errs.iter().map(|e| e.0).fold(0.0, f64::max);
    let max_r = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok((
        max_b < 1e-7 && max_r < 1e-7,
        format!("max |w(1)-b| {max_b:.2e}, max Robin residual {max_r:.2e}"),
    ))
}

fn branch_identities(model: BranchModel, exec: Exec) -> Outcome {
    let ss = log_space_above_one(1e-3, 1e6, 400);
    let worst = exec.try_map_range(ss.len() * 4, |i| -> Result<[f64; 3]> {
        let alpha = [0.0, 0.5, 1.0, 5.0][i % 4];
        let p = model.point(ss[i / 4], alpha)?;
        let lhs = (1.0 - p.b).powi(2);
        let rhs = 2.0 * p.sigma * (p.b - p.a) / (p.a * p.b);
        let compat = (lhs - rhs).abs() / lhs;
        let edge = p.phi_edge();
        let phi_err = (phi(p.a, p.b)? - edge).abs() / edge;
        let lam = p.sigma * (1.0 + alpha * nonlocal_integral(p.a, p.b)?).powi(2);
        let lam_err = (lam - p.lambda).abs() / p.lambda;
        Ok([compat, phi_err, lam_err])
    })?;
    let m = |k: usize| worst.iter().map(|w| w[k]).fold(0.0, f64::max);
    let (c, p, l) = (m(0), m(1), m(2));
    Ok((
        c < 1e-10 && p < 1e-10 && l < 1e-10,
        format!("compatibility {c:.1e}, phi(a,b) {p:.1e}, lambda {l:.1e} (relative)"),
    ))
}

fn branch_shape(model: BranchModel, exec: Exec) -> Outcome {
    let ss = log_space_above_one(1e-9, 1e6, 2000);
    let mut notes = Vec::new();
    let mut ok = true;
    for alpha in [0.0, 0.5, 1.0, 5.0] {
        let pts = exec.try_map_range(ss.len(), |i| model.point(ss[i], alpha))?;
        let a: Vec<f64> = pts.iter().map(|p| -p.a).collect();
        let lam: Vec<f64> = pts.iter().map(|p| p.lambda).collect();
        let peak = lam.iter().copied().fold(0.0, f64::max);
        let a_dec = strictly_increasing(&a);
        let positive = lam.iter().all(|&l| l > 0.0);
        let ends = lam[0] < 1e-6 * peak && *lam.last().unwrap() < 1e-2 * peak;
        ok &= a_dec && positive && ends;
        if alpha == 0.0 {
            // b falls from 1 to an interior minimum, then climbs back to 1/2.
            let b: Vec<f64> = pts.iter().map(|p| p.b).collect();
            let k = (0..b.len()).min_by(|&i, &j| b[i].total_cmp(&b[j])).unwrap();
            let interior = k > 0 && k < b.len() - 1;
            ok &= interior && !strictly_increasing(&b) && b.windows(2).any(|w| w[1] > w[0]);
            notes.push(format!("b not monotone, minimum {:.5} at s={:.4}", b[k], ss[k]));
        }
        if !(a_dec && positive && ends) {
            notes.push(format!("alpha={alpha}: a decreasing {a_dec}, lambda>0 {positive}, ends->0 {ends}"));
        }
    }
    Ok((ok, notes.join("; ")))
}

fn stationarity_monotone(exec: Exec) -> Outcome {
    let ss = log_space(1.0 + 1e-6, 1e6, 10_000);
    let ef = exec.try_map_range(ss.len(), |i| -> Result<(f64, f64)> {
        Ok((stationarity_local(ss[i])?, stationarity_nonlocal(ss[i])?))
    })?;
    let e: Vec<f64> = ef.iter().map(|p| p.0).collect();
    let f: Vec<f64> = ef.iter().map(|p| p.1).collect();
    let (ei, fi) = (strictly_increasing(&e), strictly_increasing(&f));
    Ok((ei && fi, format!("E increasing {ei}, F increasing {fi} on 10^4 points")))
}

fn stationarity_signs() -> Outcome {
    let mut ok = true;
    for alpha in [0.0, 0.1, 1.0, 10.0] {
        ok &= stationarity(1.0 + 1e-6, alpha)? < 0.0 && stationarity(1e6, alpha)? > 0.0;
    }
    Ok((ok, "P(1+1e-6) < 0 < P(1e6) for alpha in {0, 0.1, 1, 10}".into()))
}

fn fold_monotone(exec: Exec) -> Outcome {
    let folds = find_folds(exec, &[0.0, 0.25, 0.5, 1.0, 2.0], DEFAULT_TOL)?;
    let l: Vec<f64> = folds.iter().map(|f| f.lambda_star).collect();
    Ok((strictly_increasing(&l), format!("lambda* = {l:.5?}")))
}

fn profile_validity(model: BranchModel, exec: Exec) -> Outcome {
    let mut worst_res: f64 = 0.0;
    let mut ratios = Vec::new();
    let mut ok = true;
    for (k, &s) in PROFILE_SAMPLES.iter().enumerate() {
        let alpha = if k % 2 == 0 { 0.0 } else { 1.0 };
        let p = model.point(s, alpha)?;
        let coarse = reconstruct_profile_with(exec, &p, 1001)?;
        let fine = reconstruct_profile_with(exec, &p, 2001)?;
        let (rc, rf) = (ode_residual(&coarse), ode_residual(&fine));
        let ratio = rc / rf;
        let n = coarse.len();
        let symmetric = (0..n).all(|i| (coarse.ws[i] - coarse.ws[n - 1 - i]).abs() <= 1e-12);
        let convex = (1..n - 1).all(|i| coarse.ws[i - 1] - 2.0 * coarse.ws[i] + coarse.ws[i + 1] > 0.0);
        ok &= rc < 1e-4 && (3.5..=4.5).contains(&ratio) && symmetric && convex;
        worst_res = worst_res.max(rc);
        ratios.push(ratio);
    }
    let (rmin, rmax) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    Ok((
        ok,
        format!("max residual {worst_res:.2e} (n=1001), refinement ratio in [{rmin:.3}, {rmax:.3}]"),
    ))
}

fn nonlocal_consistency(model: BranchModel, exec: Exec) -> Outcome {
    let mut worst_q: f64 = 0.0;
    let mut worst_l: f64 = 0.0;
    for &s in &PROFILE_SAMPLES {
        let p = model.point(s, 1.0)?;
        let prof = reconstruct_profile_with(exec, &p, 2001)?;
        let exact = nonlocal_integral(p.a, p.b)?;
        let q = quad_nonlocal(&prof);
        worst_q = worst_q.max((q - exact).abs() / exact);
        let lam = p.sigma * (1.0 + q).powi(2);
        worst_l = worst_l.max((lam - p.lambda).abs() / p.lambda);
    }
    Ok((
        worst_q < 1e-6 && worst_l < 1e-5,
        format!("quadrature vs closed form {worst_q:.2e}, lambda round trip {worst_l:.2e}"),
    ))
}
