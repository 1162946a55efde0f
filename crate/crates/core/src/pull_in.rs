//! The fold of the branch: locating `s*`, evaluating `λ*(α)`, counting the
//! steady states at a given voltage, and tabulating the diagram.
//!
//! `λ(s) = C(s)² / (2 D(s)³)` is stationary exactly where
//! `P_α(s) = E(s) + α F(s)` vanishes. Both `E` and `F` are strictly
//! increasing with `P_α(1⁺) = -∞` and `P_α(∞) = +∞`, so the fold is the unique
//! sign change of `P_α` and `λ` is strictly monotone on either side of it.

use serde::Serialize;

use crate::branch::{big_a_unchecked, branch_point, ShootingCoord, S_MAX, S_MIN};
use crate::root::bisect;
use crate::{Error, Exec, Result};

/// Relative band around `λ*` classified as the fold itself.
pub const FOLD_TOL: f64 = 1e-9;

/// Default relative bracket width for the root finders.
pub const DEFAULT_TOL: f64 = 1e-12;

fn check_s(s: f64) -> Result<()> {
    if s.is_finite() && s >= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("s", s))
    }
}

// Near s = 1 the divergent negative terms dominate; at s = 1 itself the
// formulas are 0/0, reported as -inf since callers only read the sign.
fn negative_limit(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// The `α`-independent part `E(s)` of the stationarity condition.
pub fn stationarity_local(s: f64) -> Result<f64> {
    check_s(s)?;
    let a = big_a_unchecked(s);
    let r = (s * (s - 1.0)).sqrt();
    let v = 3.0 / (2.0 * s * r) * a * a
        + (4.0 + 3.0 / s) * a
        + (4.0 * s * s - 5.0 * s - 3.0) / (2.0 * r);
    Ok(negative_limit(v))
}

/// The coefficient `F(s)` of `α` in the stationarity condition.
pub fn stationarity_nonlocal(s: f64) -> Result<f64> {
    check_s(s)?;
    let a = big_a_unchecked(s);
    let r = (s * (s - 1.0)).sqrt();
    let q = 2.0 * s - 1.0;
    let v = 2.0 / (s * s) * a * a * a
        + 2.0 * (4.0 * s - 3.0) / r * a * a
        + 2.0 * q * (4.0 * s - 3.0) / s * a
        - 4.0 * q * q / r;
    Ok(negative_limit(v))
}

/// `P_α(s) = E(s) + α F(s)`; `dλ/ds = 0` exactly where this vanishes.
pub fn stationarity(s: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let e = stationarity_local(s)?;
    if alpha == 0.0 {
        return Ok(e);
    }
    Ok(e + alpha * stationarity_nonlocal(s)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain("alpha", alpha))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("tolerance", tol))
    }
}

/// The located fold of the branch for one `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PullInSolution {
    pub alpha: f64,
    pub s_star: f64,
    pub lambda_star: f64,
    /// `|P_α(s*)|`.
    pub p_residual: f64,
    pub iterations: usize,
    /// Final bracket with `P_α(lo) < 0 < P_α(hi)`.
    pub bracket: (f64, f64),
}

/// Finds `s*` and `λ* = λ(s*)`. `tol` is the relative width of the final
/// bracket.
pub fn find_fold(alpha: f64, tol: f64) -> Result<PullInSolution> {
    check_alpha(alpha)?;
    check_tol(tol)?;
    let p = |s: f64| stationarity(s, alpha).unwrap_or(f64::NAN);

    let mut eps = 1e-6;
    while p(1.0 + eps) >= 0.0 {
        eps /= 10.0;
        if 1.0 + eps < S_MIN {
            return Err(Error::Bracket("fold (lower end)"));
        }
    }
    let lo = 1.0 + eps;
    let mut hi = 2.0;
    while p(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 2f64.powi(60) {
            return Err(Error::Bracket("fold (upper end)"));
        }
    }

    let br = bisect("fold", lo, hi, p, |lo, hi| hi - lo <= tol * hi)?;
    let s_star = br.mid();
    let lambda_star = branch_point(s_star, alpha)?.lambda;
    Ok(PullInSolution {
        alpha,
        s_star,
        lambda_star,
        p_residual: p(s_star).abs(),
        iterations: br.iterations,
        bracket: (br.lo, br.hi),
    })
}

/// Folds for several `α` values, in input order.
pub fn find_folds(exec: Exec, alphas: &[f64], tol: f64) -> Result<Vec<PullInSolution>> {
    exec.try_map_range(alphas.len(), |i| find_fold(alphas[i], tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NoSolution,
    Fold,
    TwoSolutions,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::NoSolution => "no_solution",
            Classification::Fold => "fold",
            Classification::TwoSolutions => "two_solutions",
        }
    }
}

/// Every steady state at a prescribed voltage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    pub lambda: f64,
    pub alpha: f64,
    /// Ascending; the first root (if two) is the small-deflection state.
    pub roots: Vec<ShootingCoord>,
    pub classification: Classification,
    pub fold: PullInSolution,
}

/// Solves `λ(s) = lambda` for all `s > 1`.
///
/// `tol` bounds the bracket width relative to `s - 1`, since `λ` vanishes
/// linearly at `s = 1` and a width relative to `s` would lose digits of `λ`
/// on weak voltages.
pub fn solve_for_lambda(lambda: f64, alpha: f64, tol: f64) -> Result<SolveResult> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain("lambda", lambda));
    }
    let fold = find_fold(alpha, tol)?;
    let star = fold.lambda_star;
    let done = |x: f64, y: f64| (x - y).abs() <= tol * (x.min(y) - 1.0);
    let result = |roots: Vec<f64>, classification| -> Result<SolveResult> {
        Ok(SolveResult {
            lambda,
            alpha,
            roots: roots.into_iter().map(ShootingCoord::new).collect::<Result<_>>()?,
            classification,
            fold,
        })
    };

    if lambda > star * (1.0 + FOLD_TOL) {
        return result(vec![], Classification::NoSolution);
    }
    if (lambda - star).abs() <= FOLD_TOL * star {
        return result(vec![fold.s_star], Classification::Fold);
    }

    let g = |s: f64| {
        branch_point(s, alpha)
            .map(|p| p.lambda - lambda)
            .unwrap_or(f64::NAN)
    };

    let mut eps = 1e-6;
    while !(g(1.0 + eps) < 0.0) {
        eps /= 10.0;
        if 1.0 + eps < S_MIN {
            return Err(Error::Bracket("lower branch"));
        }
    }
    let lower = bisect("lower branch", 1.0 + eps, fold.s_star, g, done)?;

    let mut far = 2.0 * fold.s_star;
    while !(g(far) < 0.0) {
        far *= 2.0;
        if far > S_MAX {
            return Err(Error::Bracket("upper branch"));
        }
    }
    let upper = bisect("upper branch", far, fold.s_star, g, done)?;

    result(vec![lower.mid(), upper.mid()], Classification::TwoSolutions)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagramRow {
    /// `1 / s`, in `(0, 1)`.
    pub t: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub lambda: f64,
}

/// The branch sampled uniformly in `t = 1/s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramTable {
    pub alpha: f64,
    pub rows: Vec<DiagramRow>,
}

impl DiagramTable {
    /// Row with the largest `λ`.
    pub fn peak(&self) -> Option<&DiagramRow> {
        self.rows
            .iter()
            .max_by(|x, y| x.lambda.total_cmp(&y.lambda))
    }
}

pub fn diagram_sweep(alpha: f64, t_min: f64, t_max: f64, n: usize) -> Result<DiagramTable> {
    diagram_sweep_with(Exec::default(), alpha, t_min, t_max, n)
}

pub fn diagram_sweep_with(
    exec: Exec,
    alpha: f64,
    t_min: f64,
    t_max: f64,
    n: usize,
) -> Result<DiagramTable> {
    check_alpha(alpha)?;
    if !(t_min > 0.0 && t_min < t_max && t_max < 1.0) {
        return Err(Error::domain("t range (needs 0 < t_min < t_max < 1); t_min", t_min));
    }
    if n < 2 {
        return Err(Error::domain("row count", n as f64));
    }
    let step = (t_max - t_min) / (n - 1) as f64;
    let rows = exec.try_map_range(n, |i| -> Result<DiagramRow> {
        let t = if i == n - 1 { t_max } else { t_min + step * i as f64 };
        let s = 1.0 / t;
        let p = branch_point(s, alpha)?;
        Ok(DiagramRow {
            t,
            s,
            a: p.a,
            b: p.b,
            sigma: p.sigma,
            lambda: p.lambda,
        })
    })?;
    Ok(DiagramTable { alpha, rows })
}
