//! Fixtures shared by the criterion benches.

use smdpen_core::benchmarks::experiments::{
    penalty_demo_case, regression_case, REGRESSION_SEED, REGRESSION_SIZES,
};
use smdpen_core::benchmarks::regression::binary_constraints;
use smdpen_core::benchmarks::BenchmarkCase;
use smdpen_core::ConstraintSystem;

/// Binary-weight constraints in dimension `n` with an infeasible point and an
/// objective gradient of matching length.
pub fn penalty_fixture(n: usize) -> (ConstraintSystem, Vec<f64>, Vec<f64>) {
    let cs = binary_constraints(n);
    let x: Vec<f64> = (0..n).map(|i| 0.1 + 0.8 * (i as f64 / n as f64)).collect();
    let grad_f: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    (cs, x, grad_f)
}

/// The 1-D demo with its shipped budget.
pub fn demo_case() -> BenchmarkCase {
    penalty_demo_case()
}

/// The smallest regression row with a reduced budget.
pub fn small_regression_case(iterations: usize) -> BenchmarkCase {
    let (mut case, _) =
        regression_case(REGRESSION_SIZES[0], REGRESSION_SEED).expect("shipped size is valid");
    case.config.iterations = iterations;
    case
}
