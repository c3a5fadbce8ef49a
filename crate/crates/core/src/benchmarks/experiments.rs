//! Named experiments with their shipped configurations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::functions::TestFunction;
use super::regression::{
    binary_constraints, make_regression, support_recovery, test_mse, LossScale, RegressionObjective,
};
use super::rosenbrock::{sphere_constraint, StochasticRosenbrock};
use crate::error::{Error, Result};
use crate::mirror::Regularizer;
use crate::objective::{FnObjective, Noisy};
use crate::penalty::{penalty_value, PenaltyConfig, PenaltyNorm};
use crate::problem::{Constraint, ConstraintSystem, FeasibleDomain};
use crate::report::{fmt_float, RunReport};
use crate::solver::{
    run, AveragingScaling, AveragingWeights, Problem, RunFailure, SolverConfig, StepSchedule,
    Variant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Trajectories,
    Rosenbrock,
    PenaltyDemo1d,
    BetaVsL1,
    Regression,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Trajectories,
        ExperimentKind::Rosenbrock,
        ExperimentKind::PenaltyDemo1d,
        ExperimentKind::BetaVsL1,
        ExperimentKind::Regression,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Trajectories => "trajectories",
            ExperimentKind::Rosenbrock => "rosenbrock",
            ExperimentKind::PenaltyDemo1d => "penalty-demo-1d",
            ExperimentKind::BetaVsL1 => "beta-vs-l1",
            ExperimentKind::Regression => "regression",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Optional replacements for the shipped configuration of an experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub beta: Option<f64>,
    pub p0: Option<f64>,
    pub kappa: Option<f64>,
    pub p_max: Option<f64>,
    /// Replaces the leading constant of the step schedule.
    pub gamma0: Option<f64>,
    /// Oracle noise for the trajectory studies.
    pub sigma: Option<f64>,
    pub record_every: Option<usize>,
    /// `Some(true)` forces dual averaging, `Some(false)` forces plain steps.
    pub dual_averaging: Option<bool>,
    /// Also run the long regression and Rosenbrock cases.
    pub include_large: bool,
}

/// One solver run: the problem bundle plus its configuration.
#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub problem: Problem,
    pub config: SolverConfig,
    /// Known unconstrained minimizer and value, where one exists.
    pub reference: Option<(Vec<f64>, f64)>,
}

/// Dual-averaging variant used when one is requested without further detail.
pub const DEFAULT_DUAL_AVERAGING: Variant = Variant::DualAveraging {
    weights: AveragingWeights::StepSize,
    scaling: AveragingScaling::One,
};

impl BenchmarkCase {
    /// Applies the solver-level overrides; `sigma` and `include_large` are
    /// handled by the case builders.
    pub fn apply(&mut self, ov: &Overrides) {
        let c = &mut self.config;
        if let Some(v) = ov.iterations {
            c.iterations = v;
        }
        if let Some(v) = ov.seed {
            c.seed = v;
        }
        if let Some(v) = ov.beta {
            c.penalty.beta = v;
            if let PenaltyNorm::Beta { .. } = c.norm {
                c.norm = PenaltyNorm::Beta { beta: v };
            }
        }
        if let Some(v) = ov.p0 {
            c.penalty.p = v;
        }
        if let Some(v) = ov.kappa {
            c.penalty.kappa = v;
        }
        if let Some(v) = ov.p_max {
            c.penalty.p_max = v;
        }
        if let Some(v) = ov.gamma0 {
            c.schedule = c.schedule.with_scale(v);
        }
        if let Some(v) = ov.record_every {
            c.record_every = v;
        }
        match ov.dual_averaging {
            Some(true) if c.variant == Variant::Plain => c.variant = DEFAULT_DUAL_AVERAGING,
            Some(false) => c.variant = Variant::Plain,
            _ => {}
        }
    }

    pub fn run(&self) -> std::result::Result<RunReport, RunFailure> {
        run(&self.problem, &self.config)
    }
}

/// Oracle noise of the trajectory studies.
pub const TRAJECTORY_SIGMA: f64 = 0.5;

/// Box, start point, step constant, initial penalty, seed and budget of one
/// trajectory study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySetup {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub start: [f64; 2],
    pub alpha0: f64,
    pub p0: f64,
    pub seed: u64,
    pub iterations: usize,
}

pub fn trajectory_setup(t: TestFunction) -> TrajectorySetup {
    match t {
        TestFunction::QuadraticProduct => TrajectorySetup {
            lower: [-2.0, -2.0],
            upper: [2.0, 2.0],
            start: [1.5, -1.0],
            alpha0: 1.0,
            p0: 1.0,
            seed: 1,
            iterations: 5000,
        },
        TestFunction::GoldsteinPrice => TrajectorySetup {
            lower: [-2.0, -2.0],
            upper: [2.0, 2.0],
            start: [-1.0, 1.0],
            alpha0: 1.0,
            p0: 1.0,
            seed: 2,
            iterations: 5000,
        },
        TestFunction::Bukin => TrajectorySetup {
            lower: [-4.0, -1.0],
            upper: [2.0, 3.0],
            start: [-3.0, 2.5],
            alpha0: 1.0,
            p0: 300.0,
            seed: 3,
            iterations: 5000,
        },
        TestFunction::Beale => TrajectorySetup {
            lower: [-3.0, -3.0],
            upper: [3.0, 3.0],
            start: [0.5, 0.5],
            alpha0: 1.0,
            p0: 1.0,
            seed: 4,
            iterations: 5000,
        },
    }
}

pub fn trajectory_case(t: TestFunction, sigma: f64) -> Result<BenchmarkCase> {
    let s = trajectory_setup(t);
    let domain = FeasibleDomain::boxed(s.lower.to_vec(), s.upper.to_vec())?;
    let objective = Noisy {
        inner: t.objective(),
        sigma,
    };
    let penalty = PenaltyConfig {
        p: s.p0,
        ..PenaltyConfig::default()
    };
    let mut config = SolverConfig::new(s.iterations, StepSchedule::normalized(s.alpha0), penalty);
    config.seed = s.seed;
    let (xr, vr) = t.reference_minimum();
    Ok(BenchmarkCase {
        problem: Problem {
            name: t.slug().to_string(),
            objective: Arc::new(objective),
            constraints: t.constraints(),
            domain,
            start: s.start.to_vec(),
            regularizer: Regularizer::Euclidean,
        },
        config,
        reference: Some((xr.to_vec(), vr)),
    })
}

/// Problem dimensions run by default; larger ones are opt-in.
pub const ROSENBROCK_DIMS: [usize; 3] = [4, 8, 16];
pub const ROSENBROCK_LARGE_DIMS: [usize; 1] = [32];

/// Every coordinate of the starting point.
pub const ROSENBROCK_START: f64 = 1.5;

pub fn rosenbrock_case(n: usize) -> BenchmarkCase {
    let domain = FeasibleDomain::Ball {
        center: vec![0.0; n],
        radius: 2.0 * (n as f64).sqrt(),
    };
    let penalty = PenaltyConfig {
        p: 300.0,
        ..PenaltyConfig::default()
    };
    let mut config = SolverConfig::new(200_000, StepSchedule::InverseK { gamma0: 2e-4 }, penalty);
    config.seed = 7;
    config.variant = Variant::DualAveraging {
        weights: AveragingWeights::StepSize,
        scaling: AveragingScaling::One,
    };
    config.record_every = 100;
    BenchmarkCase {
        problem: Problem {
            name: format!("rosenbrock_n{n}"),
            objective: Arc::new(StochasticRosenbrock::new(n)),
            constraints: sphere_constraint(n),
            domain,
            start: vec![ROSENBROCK_START; n],
            regularizer: Regularizer::Euclidean,
        },
        config,
        reference: Some((vec![1.0; n], 0.0)),
    }
}

fn demo_constraints() -> ConstraintSystem {
    ConstraintSystem::new(1, vec![], vec![Constraint::affine(vec![-1.0], 1.0)])
}

/// `min x^2` subject to `1 - x <= 0`, started infeasible with a small penalty.
pub fn penalty_demo_case() -> BenchmarkCase {
    let objective = FnObjective::new(1, |x| x[0] * x[0], |x, g| g[0] = 2.0 * x[0]);
    let penalty = PenaltyConfig {
        beta: 2.0,
        p: 0.1,
        kappa: 2.0,
        ..PenaltyConfig::default()
    };
    let config = SolverConfig::new(5000, StepSchedule::InverseK { gamma0: 0.5 }, penalty);
    BenchmarkCase {
        problem: Problem {
            name: "penalty_demo_1d".into(),
            objective: Arc::new(objective),
            constraints: demo_constraints(),
            domain: FeasibleDomain::AllSpace,
            start: vec![0.2],
            regularizer: Regularizer::Euclidean,
        },
        config,
        reference: Some((vec![1.0], 1.0)),
    }
}

/// `P_p(x)` of the 1-D demo sampled on a grid, one column per penalty value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyCurves {
    pub grid: Vec<f64>,
    pub penalties: Vec<f64>,
    /// `values[j][i]` is `P_{penalties[j]}(grid[i])`.
    pub values: Vec<Vec<f64>>,
}

impl PenaltyCurves {
    pub fn csv(&self) -> String {
        let mut out = String::from("x");
        for p in &self.penalties {
            out.push_str(",p=");
            out.push_str(&fmt_float(*p));
        }
        out.push('\n');
        for (i, x) in self.grid.iter().enumerate() {
            out.push_str(&fmt_float(*x));
            for col in &self.values {
                out.push(',');
                out.push_str(&fmt_float(col[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Samples the demo penalty on `[-0.5, 2]` at the initial penalty and after
/// every change.
pub fn penalty_curves(report: &RunReport) -> Result<PenaltyCurves> {
    let case = penalty_demo_case();
    let beta = report.config.penalty.beta;
    let mut penalties = vec![report.config.penalty.p];
    for e in &report.events {
        if e.p_after > *penalties.last().unwrap() {
            penalties.push(e.p_after);
        }
    }
    let grid: Vec<f64> = (0..=250).map(|i| -0.5 + 0.01 * i as f64).collect();
    let values = penalties
        .iter()
        .map(|&p| {
            grid.iter()
                .map(|&x| {
                    let snap = case.problem.constraints.residuals(&[x], beta)?;
                    Ok(penalty_value(case.problem.objective.value(&[x]), &snap, p))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PenaltyCurves {
        grid,
        penalties,
        values,
    })
}

/// Oracle noise of the norm comparison.
pub const COMPARISON_SIGMA: f64 = 0.1;

/// Center of the quadratic objective in the norm comparison.
pub const COMPARISON_TARGET: [f64; 2] = [-1.0, 2.5];

/// `min 0.5 ||x - c||^2` subject to `x1 <= 0` and `x2 - x1 <= 0`, solved once
/// with the beta-norm penalty and once with the l1 penalty.
pub fn beta_vs_l1_cases(sigma: f64) -> (BenchmarkCase, BenchmarkCase) {
    let [c1, c2] = COMPARISON_TARGET;
    let objective = FnObjective::new(
        2,
        move |x| 0.5 * ((x[0] - c1).powi(2) + (x[1] - c2).powi(2)),
        move |x, g| {
            g[0] = x[0] - c1;
            g[1] = x[1] - c2;
        },
    );
    let constraints = ConstraintSystem::new(
        2,
        vec![],
        vec![
            Constraint::affine(vec![1.0, 0.0], 0.0),
            Constraint::affine(vec![-1.0, 1.0], 0.0),
        ],
    );
    let problem = |name: &str| Problem {
        name: name.into(),
        objective: Arc::new(Noisy {
            inner: objective.clone(),
            sigma,
        }),
        constraints: constraints.clone(),
        domain: FeasibleDomain::AllSpace,
        start: vec![-0.5, -1.0],
        regularizer: Regularizer::Euclidean,
    };
    let penalty = PenaltyConfig {
        beta: 2.0,
        p: 2.0,
        kappa: 2.0,
        ..PenaltyConfig::default()
    };
    let mut config = SolverConfig::new(5000, StepSchedule::InverseK { gamma0: 0.5 }, penalty);
    config.seed = 11;
    let beta = BenchmarkCase {
        problem: problem("beta_norm"),
        config: config.clone(),
        reference: None,
    };
    config.norm = PenaltyNorm::L1;
    let l1 = BenchmarkCase {
        problem: problem("l1"),
        config,
        reference: None,
    };
    (beta, l1)
}

/// Sample and feature counts of the regression study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegressionSize {
    pub tier: &'static str,
    pub n_samples: usize,
    pub p_features: usize,
}

pub const REGRESSION_SIZES: [RegressionSize; 9] = [
    RegressionSize {
        tier: "small",
        n_samples: 80,
        p_features: 20,
    },
    RegressionSize {
        tier: "small",
        n_samples: 80,
        p_features: 50,
    },
    RegressionSize {
        tier: "small",
        n_samples: 160,
        p_features: 20,
    },
    RegressionSize {
        tier: "medium",
        n_samples: 400,
        p_features: 50,
    },
    RegressionSize {
        tier: "medium",
        n_samples: 400,
        p_features: 100,
    },
    RegressionSize {
        tier: "medium",
        n_samples: 640,
        p_features: 50,
    },
    RegressionSize {
        tier: "large",
        n_samples: 800,
        p_features: 200,
    },
    RegressionSize {
        tier: "large",
        n_samples: 800,
        p_features: 500,
    },
    RegressionSize {
        tier: "large",
        n_samples: 1200,
        p_features: 200,
    },
];

/// Leading step constant for the mean-scaled loss.
pub const REGRESSION_GAMMA0: f64 = 0.5;

/// Seed of the data generator for the regression study.
pub const REGRESSION_SEED: u64 = 2024;

pub fn regression_case(
    size: RegressionSize,
    seed: u64,
) -> Result<(BenchmarkCase, super::RegressionDataset)> {
    let data = make_regression(seed, size.n_samples, size.p_features)?;
    let objective = RegressionObjective::new(&data, LossScale::Mean);
    let penalty = PenaltyConfig {
        beta: 2.0,
        p: 1e-3,
        kappa: 1.1,
        ..PenaltyConfig::default()
    };
    let mut config = SolverConfig::new(
        5000,
        StepSchedule::InverseK {
            gamma0: REGRESSION_GAMMA0,
        },
        penalty,
    );
    config.seed = seed;
    config.record_every = 10;
    let case = BenchmarkCase {
        problem: Problem {
            name: format!("regression_{}x{}", size.n_samples, size.p_features),
            objective: Arc::new(objective),
            constraints: binary_constraints(size.p_features),
            domain: FeasibleDomain::AllSpace,
            start: vec![0.0; size.p_features],
            regularizer: Regularizer::Euclidean,
        },
        config,
        reference: None,
    };
    Ok((case, data))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    pub tier: String,
    pub n_samples: usize,
    pub p_features: usize,
    pub seed: u64,
    pub iterations: usize,
    pub final_objective: f64,
    pub test_mse: f64,
    pub support_recovery: f64,
    pub final_p: f64,
    pub wall_clock_secs: f64,
}

/// Everything produced by one experiment.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub runs: Vec<RunReport>,
    pub curves: Option<PenaltyCurves>,
    pub regression: Vec<RegressionReport>,
    /// Scalar results keyed by `<run>.<metric>`.
    pub metrics: BTreeMap<String, f64>,
    /// Set when a run stopped early; its partial report is the last entry of `runs`.
    pub failure: Option<Error>,
    pub wall_clock_secs: f64,
}

impl ExperimentOutput {
    /// Runs one case, storing either the report or the partial report and the
    /// error. Returns `false` once a run has failed.
    fn push(&mut self, case: &BenchmarkCase) -> bool {
        match case.run() {
            Ok(r) => {
                self.runs.push(r);
                true
            }
            Err(f) => {
                self.runs.push(*f.partial);
                self.failure = Some(f.error);
                false
            }
        }
    }

    fn metric(&mut self, run: &str, key: &str, value: f64) {
        self.metrics.insert(format!("{run}.{key}"), value);
    }
}

/// Runs a named experiment with overrides applied to every case.
pub fn run_experiment(kind: ExperimentKind, ov: &Overrides) -> Result<ExperimentOutput> {
    let started = Instant::now();
    let mut out = ExperimentOutput::default();
    match kind {
        ExperimentKind::Trajectories => {
            let sigma = ov.sigma.unwrap_or(TRAJECTORY_SIGMA);
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "sigma must be finite and non-negative, got {sigma}"
                )));
            }
            for t in TestFunction::ALL {
                let mut case = trajectory_case(t, sigma)?;
                case.apply(ov);
                case.config.validate()?;
                if !out.push(&case) {
                    break;
                }
                let r = out.runs.last().unwrap();
                let name = r.name.clone();
                let last = r.summary.final_x.clone();
                let inside = r
                    .rows
                    .iter()
                    .all(|row| case.problem.domain.contains(&row.x, 0.0));
                out.metric(&name, "final_penalty_function", t.penalty_function(&last));
                out.metric(&name, "final_f", t.value(&last));
                out.metric(&name, "inside_box", if inside { 1.0 } else { 0.0 });
            }
        }
        ExperimentKind::Rosenbrock => {
            let dims = ROSENBROCK_DIMS.iter().chain(
                ov.include_large
                    .then_some(&ROSENBROCK_LARGE_DIMS[..])
                    .into_iter()
                    .flatten(),
            );
            for &n in dims {
                let mut case = rosenbrock_case(n);
                case.apply(ov);
                case.config.validate()?;
                if !out.push(&case) {
                    break;
                }
                let r = out.runs.last().unwrap();
                let name = r.name.clone();
                let f0 = r.rows[0].f;
                let best = r.running_min().last().copied().unwrap_or(f0);
                let x = &r.summary.final_x;
                let sphere = x.iter().map(|v| v * v).sum::<f64>() - n as f64;
                out.metric(&name, "f0", f0);
                out.metric(&name, "running_min", best);
                out.metric(&name, "sphere_residual", sphere.abs());
            }
        }
        ExperimentKind::PenaltyDemo1d => {
            let mut case = penalty_demo_case();
            case.apply(ov);
            case.config.validate()?;
            if out.push(&case) {
                let r = out.runs.last().unwrap();
                out.curves = Some(penalty_curves(r)?);
                let name = r.name.clone();
                let x = r.summary.final_x[0];
                let m = r.summary.final_m;
                let p = r.summary.final_p;
                let updates = r.summary.penalty_updates as f64;
                out.metric(&name, "final_x", x);
                out.metric(&name, "final_m", m);
                out.metric(&name, "final_p", p);
                out.metric(&name, "penalty_updates", updates);
            }
        }
        ExperimentKind::BetaVsL1 => {
            let (mut beta, mut l1) = beta_vs_l1_cases(ov.sigma.unwrap_or(COMPARISON_SIGMA));
            beta.apply(ov);
            l1.apply(ov);
            l1.config.norm = PenaltyNorm::L1;
            for case in [&beta, &l1] {
                case.config.validate()?;
                if !out.push(case) {
                    break;
                }
                let r = out.runs.last().unwrap();
                let name = r.name.clone();
                let (m, p, updates) = (
                    r.summary.final_m,
                    r.summary.final_p,
                    r.summary.penalty_updates as f64,
                );
                out.metric(&name, "final_m", m);
                out.metric(&name, "final_p", p);
                out.metric(&name, "penalty_updates", updates);
            }
        }
        ExperimentKind::Regression => {
            let seed = ov.seed.unwrap_or(REGRESSION_SEED);
            for size in REGRESSION_SIZES {
                if size.tier == "large" && !ov.include_large {
                    continue;
                }
                let (mut case, data) = regression_case(size, seed)?;
                case.apply(ov);
                case.config.validate()?;
                if !out.push(&case) {
                    break;
                }
                let r = out.runs.last().unwrap();
                let w = &r.summary.final_x;
                let report = RegressionReport {
                    tier: size.tier.to_string(),
                    n_samples: size.n_samples,
                    p_features: size.p_features,
                    seed,
                    iterations: r.summary.iterations,
                    final_objective: r.summary.final_f,
                    test_mse: test_mse(w, &data),
                    support_recovery: support_recovery(w, &data.w_star),
                    final_p: r.summary.final_p,
                    wall_clock_secs: r.summary.wall_clock_secs,
                };
                let name = r.name.clone();
                out.metric(&name, "test_mse", report.test_mse);
                out.metric(&name, "support_recovery", report.support_recovery);
                out.metric(&name, "final_objective", report.final_objective);
                out.regression.push(report);
            }
        }
    }
    out.wall_clock_secs = started.elapsed().as_secs_f64();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert_eq!(
            "nope".parse::<ExperimentKind>().unwrap_err(),
            Error::UnknownExperiment("nope".into())
        );
    }

    #[test]
    fn overrides_reach_the_config() {
        let mut case = penalty_demo_case();
        case.apply(&Overrides {
            iterations: Some(7),
            beta: Some(3.0),
            kappa: Some(1.1),
            gamma0: Some(0.2),
            dual_averaging: Some(true),
            ..Default::default()
        });
        let c = &case.config;
        assert_eq!(c.iterations, 7);
        assert_eq!(c.norm, PenaltyNorm::Beta { beta: 3.0 });
        assert_eq!(c.penalty.kappa, 1.1);
        assert_eq!(c.schedule, StepSchedule::InverseK { gamma0: 0.2 });
        assert_eq!(c.variant, DEFAULT_DUAL_AVERAGING);
        c.validate().unwrap();
    }
}
