//! CSV and JSON serialization for the command-line front end.
//!
//! CSV floats use 17 significant digits in scientific notation, which
//! round-trips every `f64` and makes output byte-stable across runs.

use std::io::Write;

use serde::Serialize;

use crate::branch::SteadyProfile;
use crate::dynamics::{SimOutcome, Snapshot};
use crate::pull_in::{DiagramTable, PullInSolution, SolveResult};
use crate::Result;

pub const DIAGRAM_HEADER: &str = "t,s,a,b,sigma,lambda";
pub const PULLIN_HEADER: &str = "alpha,s_star,lambda_star,p_residual,iterations";
pub const SERIES_HEADER: &str = "t,max_u,u_mid,nonlocal_integral";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn row<W: Write + ?Sized>(w: &mut W, fields: &[f64]) -> Result<()> {
    let line: Vec<String> = fields.iter().map(|&x| fmt_f64(x)).collect();
    writeln!(w, "{}", line.join(","))?;
    Ok(())
}

pub fn write_diagram_csv<W: Write + ?Sized>(w: &mut W, table: &DiagramTable) -> Result<()> {
    writeln!(w, "{DIAGRAM_HEADER}")?;
    for r in &table.rows {
        row(w, &[r.t, r.s, r.a, r.b, r.sigma, r.lambda])?;
    }
    Ok(())
}

pub fn write_pullin_csv<W: Write + ?Sized>(w: &mut W, sols: &[PullInSolution]) -> Result<()> {
    writeln!(w, "{PULLIN_HEADER}")?;
    for s in sols {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(s.alpha),
            fmt_f64(s.s_star),
            fmt_f64(s.lambda_star),
            fmt_f64(s.p_residual),
            s.iterations
        )?;
    }
    Ok(())
}

pub fn write_series_csv<W: Write + ?Sized>(w: &mut W, history: &[Snapshot]) -> Result<()> {
    writeln!(w, "{SERIES_HEADER}")?;
    for s in history {
        row(w, &[s.t, s.max_u, s.u_mid, s.nonlocal_integral])?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PullInRecord {
    alpha: f64,
    s_star: f64,
    lambda_star: f64,
    p_residual: f64,
    iterations: usize,
}

impl From<&PullInSolution> for PullInRecord {
    fn from(s: &PullInSolution) -> Self {
        PullInRecord {
            alpha: s.alpha,
            s_star: s.s_star,
            lambda_star: s.lambda_star,
            p_residual: s.p_residual,
            iterations: s.iterations,
        }
    }
}

/// A single object for one `α`, an array for a sweep.
pub fn pullin_json(sols: &[PullInSolution]) -> serde_json::Value {
    let records: Vec<PullInRecord> = sols.iter().map(PullInRecord::from).collect();
    if records.len() == 1 {
        serde_json::to_value(&records[0]).unwrap()
    } else {
        serde_json::to_value(&records).unwrap()
    }
}

#[derive(Serialize)]
struct RootRecord {
    s: f64,
    a: f64,
    b: f64,
    sigma: f64,
}

#[derive(Serialize)]
struct ProfileRecord<'a> {
    xs: &'a [f64],
    ws: &'a [f64],
    us: &'a [f64],
}

#[derive(Serialize)]
struct SolveRecord<'a> {
    alpha: f64,
    lambda: f64,
    lambda_star: f64,
    classification: &'static str,
    roots: Vec<RootRecord>,
    profiles: Vec<ProfileRecord<'a>>,
}

pub fn solve_json(result: &SolveResult, profiles: &[SteadyProfile]) -> serde_json::Value {
    let rec = SolveRecord {
        alpha: result.alpha,
        lambda: result.lambda,
        lambda_star: result.fold.lambda_star,
        classification: result.classification.as_str(),
        roots: profiles
            .iter()
            .map(|p| RootRecord {
                s: p.s,
                a: p.a,
                b: p.b,
                sigma: p.sigma,
            })
            .collect(),
        profiles: profiles
            .iter()
            .map(|p| ProfileRecord {
                xs: &p.xs,
                ws: &p.ws,
                us: &p.us,
            })
            .collect(),
    };
    serde_json::to_value(&rec).unwrap()
}

#[derive(Serialize)]
struct SimSummary {
    status: &'static str,
    lambda: f64,
    alpha: f64,
    nx: usize,
    t_final: f64,
    steps: u64,
    max_u: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    quench_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steady_gap: Option<f64>,
}

pub fn simulation_summary_json(out: &SimOutcome) -> serde_json::Value {
    let f = &out.final_state;
    serde_json::to_value(SimSummary {
        status: out.status.as_str(),
        lambda: f.lambda,
        alpha: f.alpha,
        nx: f.us.len(),
        t_final: f.time,
        steps: out.steps,
        max_u: f.max_u(),
        quench_time: out.quench_time,
        steady_gap: out.steady_gap,
    })
    .unwrap()
}
