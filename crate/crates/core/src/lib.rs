//! Stochastic mirror descent on exact beta-norm penalty functions.
//!
//! The solver minimizes `f(x)` subject to `h_i(x) = 0`, `g_j(x) <= 0` and
//! `x in X` for a simple set `X`, by running mirror descent on
//! `P_p(x) = f(x) + p ||(g_+(x), h(x))||_beta` and growing `p` whenever a
//! descent test shows the current penalty is too weak to reach feasibility.
//!
//! Modules:
//! - [`problem`]: constraint systems, violation measures, projections
//! - [`penalty`]: penalty values, gradients and directional derivatives
//! - [`mirror`]: mirror maps and the Fenchel coupling
//! - [`solver`]: step sizes, the penalty update and the run loop
//! - [`benchmarks`]: test functions and the packaged experiments

pub mod benchmarks;
pub mod error;
pub mod mirror;
pub mod objective;
pub mod penalty;
pub mod problem;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
pub use mirror::Regularizer;
pub use objective::{FnObjective, GradientSample, Noisy, Objective, SampleMeta};
pub use penalty::{PenaltyConfig, PenaltyGradient, PenaltyNorm};
pub use problem::{Constraint, ConstraintSystem, FeasibleDomain, Point, ViolationSnapshot};
pub use report::{RunReport, TraceRow};
pub use solver::{run, Problem, SolverConfig, SolverState, StepSchedule, Variant};
