//! Exact bifurcation diagram and pull-in voltage for the one-dimensional
//! nonlocal MEMS problem with a Robin (flexible support) boundary condition.
//!
//! The steady state `w = 1 - u` of
//!
//! ```text
//! w'' = λ / (w² [1 + α ∫ w⁻¹]²)  on (-1, 1),   ±w'(±1) = 1 - w(±1)
//! ```
//!
//! is globally parametrized by the shooting coordinate `s = w(1) / w(0) > 1`.
//! [`branch`] evaluates that parametrization and rebuilds the membrane
//! profiles, [`pull_in`] locates the fold `λ*(α)` and solves for all steady
//! states at a given voltage, [`oracle`] re-derives the same quantities by
//! direct ODE integration and quadrature, and [`dynamics`] time-steps the
//! parabolic problem to show touchdown above the fold.
//!
//! Data-parallel sweeps go through [`Exec`]; with the `parallel` feature
//! disabled every sweep runs sequentially.

pub mod branch;
pub mod cli;
pub mod dynamics;
mod error;
mod exec;
pub mod io;
pub mod oracle;
pub mod pull_in;
mod root;
pub mod verify;

pub use branch::{
    big_a, branch_point, invert_phi, nonlocal_integral, phi, reconstruct_profile, BranchModel,
    BranchPoint, ShootingCoord, SteadyProfile,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use pull_in::{
    diagram_sweep, find_fold, solve_for_lambda, stationarity, stationarity_local,
    stationarity_nonlocal, Classification, DiagramRow, DiagramTable, PullInSolution, SolveResult,
};
