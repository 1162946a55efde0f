//! `mems-pullin` subcommands.
//!
//! Exit status: 0 on success, 1 on solver or I/O failure, 2 on usage errors
//! (reported by clap before any computation).

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::branch::{branch_point, reconstruct_profile_with, BranchModel};
use crate::dynamics::Simulation;
use crate::io::{
    pullin_json, simulation_summary_json, solve_json, write_diagram_csv, write_pullin_csv,
    write_series_csv,
};
use crate::pull_in::{diagram_sweep_with, find_folds, solve_for_lambda, DEFAULT_TOL};
use crate::{verify, Exec, Result};

#[derive(Debug, Parser)]
#[command(name = "mems-pullin", version, about = "Pull-in voltage and bifurcation diagram of the Robin MEMS problem")]
pub struct Cli {
    /// Disable worker threads for sweeps.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate the fold and report the pull-in voltage lambda*(alpha).
    Pullin(PullinArgs),
    /// Tabulate the branch against t = 1/s.
    Diagram(DiagramArgs),
    /// Find every steady state at a given lambda.
    Solve(SolveArgs),
    /// Time-step the parabolic problem from rest.
    Simulate(SimulateArgs),
    /// Run the verification battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct PullinArgs {
    /// Capacitance ratio.
    #[arg(long, default_value_t = 0.0, value_parser = nonneg)]
    pub alpha: f64,
    /// Comma-separated alpha values; overrides --alpha.
    #[arg(long, value_delimiter = ',', value_parser = nonneg)]
    pub alpha_list: Vec<f64>,
    /// Relative bracket width for the fold search.
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = positive)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[arg(long, default_value_t = 0.0, value_parser = nonneg)]
    pub alpha: f64,
    /// Comma-separated alpha values; writes one file per value into --out.
    #[arg(long, value_delimiter = ',', value_parser = nonneg)]
    pub alpha_list: Vec<f64>,
    #[arg(long, default_value_t = 0.001, value_parser = open_unit)]
    pub t_min: f64,
    #[arg(long, default_value_t = 0.999, value_parser = open_unit)]
    pub t_max: f64,
    /// Number of rows.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file, or directory when --alpha-list is given.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_parser = positive)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0, value_parser = nonneg)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = positive)]
    pub tol: f64,
    /// Nodes per reconstructed profile (odd).
    #[arg(long, default_value_t = 201, value_parser = odd_at_least_3)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = positive)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0, value_parser = nonneg)]
    pub alpha: f64,
    /// Grid nodes (odd, at least 51).
    #[arg(long, default_value_t = 401, value_parser = odd_at_least_51)]
    pub nx: usize,
    #[arg(long, default_value_t = 100.0, value_parser = positive)]
    pub t_end: f64,
    /// Time between rows of the series.
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    pub record_every: f64,
    /// CSV time series (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary (standard output if --out is given, standard error otherwise).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Emit the results as JSON.
    #[arg(long)]
    pub json: bool,
    /// Include the PDE runs.
    #[arg(long)]
    pub dynamics: bool,
    /// Bias A(s) by this amount in the closed-form branch (fault injection).
    #[arg(long, hide = true, value_parser = finite)]
    pub inject_fault: Option<f64>,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| format!("`{s}` is not a number: {e}"))
}

fn finite(s: &str) -> std::result::Result<f64, String> {
    let x = parse_f64(s)?;
    x.is_finite().then_some(x).ok_or_else(|| format!("`{s}` must be finite"))
}

fn nonneg(s: &str) -> std::result::Result<f64, String> {
    let x = finite(s)?;
    (x >= 0.0).then_some(x).ok_or_else(|| format!("`{s}` must be >= 0"))
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let x = finite(s)?;
    (x > 0.0).then_some(x).ok_or_else(|| format!("`{s}` must be > 0"))
}

fn open_unit(s: &str) -> std::result::Result<f64, String> {
    let x = finite(s)?;
    (x > 0.0 && x < 1.0)
        .then_some(x)
        .ok_or_else(|| format!("`{s}` must lie in (0, 1)"))
}

fn odd_at_least(s: &str, min: usize) -> std::result::Result<usize, String> {
    let n: usize = s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    (n >= min && n % 2 == 1)
        .then_some(n)
        .ok_or_else(|| format!("`{s}` must be odd and >= {min}"))
}

fn odd_at_least_3(s: &str) -> std::result::Result<usize, String> {
    odd_at_least(s, 3)
}

fn odd_at_least_51(s: &str) -> std::result::Result<usize, String> {
    odd_at_least(s, 51)
}

fn usage_error(kind: ErrorKind, msg: &str) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(w: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Parses the process arguments and runs; returns the exit status.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mems-pullin: {e}");
            1
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    match &cli.command {
        Command::Pullin(a) => run_pullin(a, exec),
        Command::Diagram(a) => run_diagram(a, exec),
        Command::Solve(a) => run_solve(a, exec),
        Command::Simulate(a) => run_simulate(a),
        Command::Verify(a) => run_verify(a, exec),
    }
}

pub fn run_pullin(args: &PullinArgs, exec: Exec) -> Result<i32> {
    let alphas = if args.alpha_list.is_empty() {
        vec![args.alpha]
    } else {
        args.alpha_list.clone()
    };
    let sols = find_folds(exec, &alphas, args.tol)?;
    let mut w = sink(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_pullin_csv(&mut w, &sols)?,
        Format::Json => write_json(&mut w, &pullin_json(&sols))?,
    }
    w.flush()?;
    Ok(0)
}

pub fn run_diagram(args: &DiagramArgs, exec: Exec) -> Result<i32> {
    if args.t_min >= args.t_max {
        usage_error(ErrorKind::ValueValidation, "--t-min must be smaller than --t-max");
    }
    let n = args.n as usize;
    let write = |w: &mut dyn Write, alpha: f64| -> Result<()> {
        let table = diagram_sweep_with(exec, alpha, args.t_min, args.t_max, n)?;
        match args.format {
            Format::Csv => write_diagram_csv(w, &table)?,
            Format::Json => write_json(w, &serde_json::to_value(&table)?)?,
        }
        w.flush()?;
        Ok(())
    };
    if args.alpha_list.is_empty() {
        let mut w = sink(args.out.as_deref())?;
        write(&mut w, args.alpha)?;
        return Ok(0);
    }
    let Some(dir) = &args.out else {
        usage_error(
            ErrorKind::MissingRequiredArgument,
            "--alpha-list writes one file per alpha and needs --out <DIR>",
        );
    };
    fs::create_dir_all(dir)?;
    let ext = match args.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    for &alpha in &args.alpha_list {
        let mut w = sink(Some(&dir.join(format!("diagram_alpha_{alpha}.{ext}"))))?;
        write(&mut w, alpha)?;
    }
    Ok(0)
}

pub fn run_solve(args: &SolveArgs, exec: Exec) -> Result<i32> {
    let result = solve_for_lambda(args.lambda, args.alpha, args.tol)?;
    let profiles = result
        .roots
        .iter()
        .map(|s| reconstruct_profile_with(exec, &branch_point(s.get(), args.alpha)?, args.n))
        .collect::<Result<Vec<_>>>()?;
    let mut w = sink(args.out.as_deref())?;
    write_json(&mut w, &solve_json(&result, &profiles))?;
    w.flush()?;
    Ok(0)
}

pub fn run_simulate(args: &SimulateArgs) -> Result<i32> {
    let out = Simulation::new(args.lambda, args.alpha, args.nx, args.t_end)
        .record_every(args.record_every)
        .run()?;
    let mut w = sink(args.out.as_deref())?;
    write_series_csv(&mut w, &out.history)?;
    w.flush()?;
    drop(w);

    let summary = simulation_summary_json(&out);
    match (&args.summary, &args.out) {
        (Some(p), _) => {
            let mut f = sink(Some(p))?;
            write_json(&mut f, &summary)?;
            f.flush()?;
        }
        (None, Some(_)) => write_json(&mut io::stdout().lock(), &summary)?,
        (None, None) => write_json(&mut io::stderr().lock(), &summary)?,
    }
    Ok(0)
}

pub fn run_verify(args: &VerifyArgs, exec: Exec) -> Result<i32> {
    let model = match args.inject_fault {
        Some(bias) => BranchModel::with_big_a_bias(bias),
        None => BranchModel::EXACT,
    };
    let report = verify::run(verify::Options {
        model,
        exec,
        dynamics: args.dynamics,
    });
    let mut w = io::stdout().lock();
    if args.json {
        write_json(&mut w, &serde_json::to_value(&report)?)?;
    } else {
        write!(w, "{}", report.table())?;
    }
    w.flush()?;
    Ok(if report.passed { 0 } else { 1 })
}
