//! Benchmark problems and the experiment harness.

pub mod experiments;
pub mod functions;
pub mod regression;
pub mod rosenbrock;

pub use experiments::{
    run_experiment, BenchmarkCase, ExperimentKind, ExperimentOutput, Overrides, RegressionReport,
};
pub use functions::TestFunction;
pub use regression::{make_regression, LossScale, RegressionDataset, RegressionObjective};
pub use rosenbrock::{rosenbrock, sphere_constraint, StochasticRosenbrock};
