//! Release acceptance criteria. Runs as a plain binary (`harness = false`),
//! prints one PASS/FAIL line per criterion, and exits non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use mems_pullin::branch::{nonlocal_integral, reconstruct_profile};
use mems_pullin::dynamics::{SimStatus, Simulation, QUENCH_DELTA};
use mems_pullin::oracle::{ode_residual, quad_nonlocal, robin_residual, shoot};
use mems_pullin::pull_in::{find_fold, solve_for_lambda, stationarity_local, stationarity_nonlocal, DEFAULT_TOL};
use mems_pullin::verify::{log_space, log_space_above_one, strictly_increasing};
use mems_pullin::{branch_point, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn ac1_fold_local() -> Result<Outcome> {
    let start = Instant::now();
    let f = find_fold(0.0, DEFAULT_TOL)?;
    let el = start.elapsed();
    let err = (f.lambda_star - 0.10871).abs();
    outcome(
        err <= 1e-4 && within(el, 1.0),
        format!("lambda*(0) = {:.8}, |diff| = {err:.2e} (tol 1e-4), {:.2?}", f.lambda_star, el),
    )
}

fn ac2_fold_nonlocal() -> Result<Outcome> {
    let start = Instant::now();
    let f = find_fold(1.0, DEFAULT_TOL)?;
    let el = start.elapsed();
    let err = (f.lambda_star - 2.38709).abs();
    outcome(
        err <= 1e-4 && within(el, 1.0),
        format!("lambda*(1) = {:.8}, |diff| = {err:.2e} (tol 1e-4), {:.2?}", f.lambda_star, el),
    )
}

fn ac3_trichotomy() -> Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    let mut counts = Vec::new();
    for alpha in [0.0, 1.0] {
        let star = find_fold(alpha, DEFAULT_TOL)?.lambda_star;
        for (ratio, want) in [(0.5, 2), (1.0, 1), (1.5, 0)] {
            let n = solve_for_lambda(ratio * star, alpha, DEFAULT_TOL)?.roots.len();
            ok &= n == want;
            counts.push(n);
        }
    }
    let el = start.elapsed();
    outcome(
        ok && within(el, 5.0),
        format!("root counts at (0.5, 1, 1.5) lambda* for alpha 0, 1: {counts:?}, {el:.2?}"),
    )
}

fn ac4_oracle_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let (mut worst_b, mut worst_r, mut worst_s) = (0.0f64, 0.0f64, 0.0);
    let mut failures = 0;
    for alpha in [0.0, 1.0] {
        for s in log_space(1.01, 1000.0, 50) {
            let p = branch_point(s, alpha)?;
            let t = shoot(p.a, p.sigma, 4096)?;
            let (eb, er) = ((t.end_value() - p.b).abs(), robin_residual(&t));
            if eb >= 1e-7 || er >= 1e-7 {
                failures += 1;
            }
            if er > worst_r {
                worst_s = s;
            }
            worst_b = worst_b.max(eb);
            worst_r = worst_r.max(er);
        }
    }
    let el = start.elapsed();
    outcome(
        failures == 0 && within(el, 30.0),
        format!(
            "max |w(1)-b| {worst_b:.2e}, max Robin residual {worst_r:.2e} (worst s = {worst_s:.1}); \
             {failures}/100 cases over 1e-7 at 4096 RK4 steps, {el:.2?}"
        ),
    )
}

fn profile_samples() -> Vec<(f64, f64)> {
    log_space(1.05, 5.0, 10)
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, if i % 2 == 0 { 0.0 } else { 1.0 }))
        .collect()
}

fn ac5_profile_validity() -> Result<Outcome> {
    let mut ok = true;
    let (mut worst, mut rmin, mut rmax) = (0.0f64, f64::INFINITY, 0.0f64);
    for (s, alpha) in profile_samples() {
        let p = branch_point(s, alpha)?;
        let coarse = reconstruct_profile(&p, 1001)?;
        let fine = reconstruct_profile(&p, 2001)?;
        let rc = ode_residual(&coarse);
        let ratio = rc / ode_residual(&fine);
        let n = coarse.len();
        let sym = (0..n).all(|i| (coarse.ws[i] - coarse.ws[n - 1 - i]).abs() <= 1e-12);
        let convex = (1..n - 1).all(|i| coarse.ws[i - 1] - 2.0 * coarse.ws[i] + coarse.ws[i + 1] > 0.0);
        ok &= rc < 1e-4 && (3.5..=4.5).contains(&ratio) && sym && convex;
        worst = worst.max(rc);
        rmin = rmin.min(ratio);
        rmax = rmax.max(ratio);
    }
    outcome(
        ok,
        format!("10 points s in [1.05, 5]: max residual {worst:.2e} (n=1001), halving ratio in [{rmin:.3}, {rmax:.3}], symmetric, convex"),
    )
}

fn ac6_nonlocal() -> Result<Outcome> {
    let (mut worst_q, mut worst_l) = (0.0f64, 0.0f64);
    for (s, _) in profile_samples() {
        let p = branch_point(s, 1.0)?;
        let prof = reconstruct_profile(&p, 2001)?;
        let exact = nonlocal_integral(p.a, p.b)?;
        let q = quad_nonlocal(&prof);
        worst_q = worst_q.max((q - exact).abs() / exact);
        worst_l = worst_l.max(mems_pullin::oracle::lambda_roundtrip(&p, 2001)?);
    }
    outcome(
        worst_q < 1e-6 && worst_l < 1e-5,
        format!("quadrature vs I(a,b) {worst_q:.2e} (tol 1e-6), lambda round trip {worst_l:.2e} (tol 1e-5)"),
    )
}

fn ac7_monotonicity() -> Result<Outcome> {
    let grid = log_space(1.0 + 1e-6, 1e6, 10_000);
    let e: Vec<f64> = grid.iter().map(|&s| stationarity_local(s)).collect::<Result<_>>()?;
    let f: Vec<f64> = grid.iter().map(|&s| stationarity_nonlocal(s)).collect::<Result<_>>()?;
    let (e_inc, f_inc) = (strictly_increasing(&e), strictly_increasing(&f));

    let ss = log_space_above_one(1e-9, 1e6, 4000);
    let pts: Vec<_> = ss.iter().map(|&s| branch_point(s, 0.0)).collect::<Result<_>>()?;
    let neg_a: Vec<f64> = pts.iter().map(|p| -p.a).collect();
    let a_dec = strictly_increasing(&neg_a);

    let b: Vec<f64> = pts.iter().map(|p| p.b).collect();
    let kmax = (0..b.len()).max_by(|&i, &j| b[i].total_cmp(&b[j])).unwrap();
    let kmin = (0..b.len()).min_by(|&i, &j| b[i].total_cmp(&b[j])).unwrap();
    let b_interior_max = kmax > 0 && kmax < b.len() - 1;

    let lam: Vec<f64> = pts.iter().map(|p| p.lambda).collect();
    let kpeak = (0..lam.len()).max_by(|&i, &j| lam[i].total_cmp(&lam[j])).unwrap();
    let peak = lam[kpeak];
    let fold = find_fold(0.0, DEFAULT_TOL)?;
    let ends = lam[0] < 1e-6 * peak && *lam.last().unwrap() < 1e-2 * peak;
    let interior = kpeak > 0 && kpeak < lam.len() - 1;
    let lam_ok = ends
        && interior
        && ss[kpeak - 1] < fold.s_star
        && fold.s_star < ss[kpeak + 1]
        && peak <= fold.lambda_star
        && fold.lambda_star - peak < 1e-4;

    outcome(
        e_inc && f_inc && a_dec && b_interior_max && lam_ok,
        format!(
            "E increasing {e_inc}, F increasing {f_inc}, a decreasing {a_dec}, \
             b interior maximum {b_interior_max} (b max {:.4} at s={:.3e}; b has an interior minimum {:.5} at s={:.3}), \
             lambda -> 0 at ends with interior max {peak:.6} ~ lambda* {lam_ok}",
            b[kmax], ss[kmax], b[kmin], ss[kmin]
        ),
    )
}

fn ac8_dynamics() -> Result<Vec<(&'static str, Outcome)>> {
    let start = Instant::now();
    let q = Simulation::new(0.2, 0.0, 401, 100.0).run()?;
    let el_q = start.elapsed();
    let quenched = q.status == SimStatus::Quenched && q.final_state.max_u() >= 1.0 - QUENCH_DELTA;

    let start = Instant::now();
    let c = Simulation::new(0.05, 0.0, 401, 200.0).run()?;
    let el_c = start.elapsed();
    let gap = c.steady_gap.unwrap_or(f64::INFINITY);
    let residual = c.final_state.steady_residual();
    let converged = c.status == SimStatus::Converged && gap < 1e-3 && residual < 1e-5;

    Ok(vec![
        (
            "AC8a",
            Outcome {
                passed: quenched && within(el_q, 60.0),
                detail: format!(
                    "alpha=0, lambda=0.2, nx=401: {} at t = {:.4} with max u = {:.4}, {el_q:.2?}",
                    q.status.as_str(),
                    q.quench_time.unwrap_or(f64::NAN),
                    q.final_state.max_u()
                ),
            },
        ),
        (
            "AC8b",
            Outcome {
                passed: converged && within(el_c, 60.0),
                detail: format!(
                    "alpha=0, lambda=0.05, nx=401: {} at t = {:.2}, gap to lower branch {gap:.2e} (tol 1e-3), \
                     steady residual {residual:.1e}, {el_c:.2?} [lower-branch attraction is empirical]",
                    c.status.as_str(),
                    c.final_state.time
                ),
            },
        ),
    ])
}

fn ac9_figure() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("diagram.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_mems-pullin"))
        .args(["diagram", "--alpha", "0", "--out"])
        .arg(&path)
        .status()?;
    if !status.success() {
        return outcome(false, format!("diagram exited with {status}"));
    }
    let text = std::fs::read_to_string(&path)?;
    let mut lines = text.lines();
    let header_ok = lines.next() == Some("t,s,a,b,sigma,lambda");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let (t, a, b, lam) = (col(0), col(2), col(3), col(5));

    let t_inc = strictly_increasing(&t);
    let a_inc = strictly_increasing(&a) && a[0] < 0.01 && *a.last().unwrap() > 0.99;
    let b_nonmono = !strictly_increasing(&b) && b.windows(2).any(|w| w[1] > w[0]);
    let k = (0..lam.len()).max_by(|&i, &j| lam[i].total_cmp(&lam[j])).unwrap();
    let single_peak = strictly_increasing(&lam[..=k]) && lam[k..].windows(2).all(|w| w[1] < w[0]);
    let peak_ok = (lam[k] - 0.10871).abs() < 1e-3;
    outcome(
        header_ok && rows.len() == 1000 && t_inc && a_inc && b_nonmono && single_peak && peak_ok,
        format!(
            "{} rows; a rises {:.4} -> {:.4}; b non-monotone {b_nonmono}; lambda single-peaked {single_peak} \
             with max {:.5} at t = {:.3}",
            rows.len(),
            a[0],
            a.last().unwrap(),
            lam[k],
            t[k]
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Result<Outcome>)> = vec![
        ("AC1", ac1_fold_local()),
        ("AC2", ac2_fold_nonlocal()),
        ("AC3", ac3_trichotomy()),
        ("AC4", ac4_oracle_equivalence()),
        ("AC5", ac5_profile_validity()),
        ("AC6", ac6_nonlocal()),
        ("AC7", ac7_monotonicity()),
    ];
    match ac8_dynamics() {
        Ok(v) => results.extend(v.into_iter().map(|(n, o)| (n, Ok(o)))),
        Err(e) => results.push(("AC8", Err(e))),
    }
    results.push(("AC9", ac9_figure()));

    let mut failed = 0;
    for (name, r) in &results {
        let (passed, detail) = match r {
            Ok(o) => (o.passed, o.detail.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} criteria, {failed} failed", results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
