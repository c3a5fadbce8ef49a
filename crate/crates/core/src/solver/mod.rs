//! Stochastic mirror descent on the exact penalty function with the
//! adaptive penalty update.
//!
//! One iteration of [`run`]:
//!
//! 1. `X_k = mirror(Y_k)`,
//! 2. evaluate the objective gradient and the constraint subgradient at `X_k`,
//! 3. grow `p` with [`update_penalty`] until the descent test fails,
//! 4. take the dual step `Y_{k+1} = Y_k - gamma_k (G_f + p_{k+1} g)`.

mod schedule;
mod update;

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mirror::Regularizer;
use crate::objective::{GradientSample, Objective};
use crate::penalty::{PenaltyConfig, PenaltyNorm};
use crate::problem::{norm2, ConstraintSystem, FeasibleDomain};
use crate::report::{PenaltyEvent, RunReport, RunSummary, TestGradient, TraceRow};

pub use schedule::StepSchedule;
pub use update::{penalty_update, test_value, update_penalty, CapReason, PenaltyUpdate};

/// Abort threshold on `|Y|`.
pub const DIVERGENCE_LIMIT: f64 = 1e100;

/// Iterate of the method: dual point `Y`, primal point `X = mirror(Y)`, penalty `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub k: usize,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub p: f64,
}

impl SolverState {
    pub fn new(y: Vec<f64>, p: f64, reg: Regularizer, domain: &FeasibleDomain) -> Self {
        let x = reg.mirror(&y, domain);
        SolverState { k: 1, y, x, p }
    }
}

fn check_dual(y: &[f64], k: usize, grad_norm: f64) -> Result<()> {
    let n = norm2(y);
    if !n.is_finite() || n > DIVERGENCE_LIMIT {
        return Err(Error::Diverged { k, grad_norm });
    }
    Ok(())
}

/// `Y' = Y - gamma_k G`, `X' = mirror(Y')`.
pub fn smd_step(
    state: &SolverState,
    sample: &GradientSample,
    schedule: &StepSchedule,
    reg: Regularizer,
    domain: &FeasibleDomain,
) -> Result<SolverState> {
    let grad_norm = norm2(&sample.vector);
    let gamma = schedule.step_size(state.k, grad_norm);
    let y: Vec<f64> = state
        .y
        .iter()
        .zip(&sample.vector)
        .map(|(y, g)| y - gamma * g)
        .collect();
    check_dual(&y, state.k, grad_norm)?;
    let x = reg.mirror(&y, domain);
    Ok(SolverState {
        k: state.k + 1,
        y,
        x,
        p: state.p,
    })
}

/// Weight `w_k` given to the k-th gradient in the dual average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingWeights {
    /// `w_k = gamma_k`.
    StepSize,
    /// `w_k = 1`.
    Uniform,
}

/// Scaling `s_k` applied to the accumulated dual sum before mirroring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AveragingScaling {
    One,
    /// `s_k = c / sqrt(k)`.
    InvSqrt {
        c: f64,
    },
}

impl AveragingScaling {
    fn at(&self, k: usize) -> f64 {
        match *self {
            AveragingScaling::One => 1.0,
            AveragingScaling::InvSqrt { c } => c / (k as f64).sqrt(),
        }
    }
}

/// Dual-averaging accumulator: `Y_k = Y_1 + s_k * sum_{l <= k} w_l (-G_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualAverager {
    pub weights: AveragingWeights,
    pub scaling: AveragingScaling,
    anchor: Vec<f64>,
    sum: Vec<f64>,
}

impl DualAverager {
    pub fn new(anchor: Vec<f64>, weights: AveragingWeights, scaling: AveragingScaling) -> Self {
        let sum = vec![0.0; anchor.len()];
        DualAverager {
            weights,
            scaling,
            anchor,
            sum,
        }
    }

    pub fn sum(&self) -> &[f64] {
        &self.sum
    }
}

/// Dual-averaging counterpart of [`smd_step`].
pub fn dual_averaging_step(
    state: &SolverState,
    sample: &GradientSample,
    schedule: &StepSchedule,
    reg: Regularizer,
    domain: &FeasibleDomain,
    avg: &mut DualAverager,
) -> Result<SolverState> {
    let grad_norm = norm2(&sample.vector);
    let w = match avg.weights {
        AveragingWeights::StepSize => schedule.step_size(state.k, grad_norm),
        AveragingWeights::Uniform => 1.0,
    };
    for (s, g) in avg.sum.iter_mut().zip(&sample.vector) {
        *s -= w * g;
    }
    let scale = avg.scaling.at(state.k);
    let y: Vec<f64> = avg
        .anchor
        .iter()
        .zip(&avg.sum)
        .map(|(a, s)| a + scale * s)
        .collect();
    check_dual(&y, state.k, grad_norm)?;
    let x = reg.mirror(&y, domain);
    Ok(SolverState {
        k: state.k + 1,
        y,
        x,
        p: state.p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    Plain,
    DualAveraging {
        weights: AveragingWeights,
        scaling: AveragingScaling,
    },
}

/// Everything that controls one solver run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub iterations: usize,
    pub schedule: StepSchedule,
    pub penalty: PenaltyConfig,
    pub norm: PenaltyNorm,
    pub seed: u64,
    pub variant: Variant,
    pub record_every: usize,
    /// When false the penalty parameter stays at `penalty.p`.
    pub adaptive: bool,
}

impl SolverConfig {
    pub fn new(iterations: usize, schedule: StepSchedule, penalty: PenaltyConfig) -> Self {
        SolverConfig {
            iterations,
            schedule,
            penalty,
            norm: PenaltyNorm::Beta { beta: penalty.beta },
            seed: 0,
            variant: Variant::Plain,
            record_every: 1,
            adaptive: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.penalty.validate()?;
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be positive".into()));
        }
        if let PenaltyNorm::Beta { beta } = self.norm {
            if beta != self.penalty.beta {
                return Err(Error::InvalidConfig(
                    "penalty norm and config beta disagree".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Objective, constraints, simple set and starting dual point.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub objective: Arc<dyn Objective>,
    pub constraints: ConstraintSystem,
    pub domain: FeasibleDomain,
    pub start: Vec<f64>,
    pub regularizer: Regularizer,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.objective.dim())
            .field("domain", &self.domain)
            .field("start", &self.start)
            .finish()
    }
}

/// A run that stopped early; carries everything recorded so far.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Box<RunReport>,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (after {} recorded rows)",
            self.error,
            self.partial.rows.len()
        )
    }
}

impl std::error::Error for RunFailure {}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        RunFailure {
            error,
            partial: Box::new(RunReport {
                name: String::new(),
                config: SolverConfig::new(
                    0,
                    StepSchedule::Constant { gamma: 1.0 },
                    PenaltyConfig::default(),
                ),
                rows: vec![],
                events: vec![],
                summary: RunSummary {
                    iterations: 0,
                    final_x: vec![],
                    final_f: f64::NAN,
                    final_m: f64::NAN,
                    final_p: f64::NAN,
                    penalty_updates: 0,
                    capped_updates: 0,
                    wall_clock_secs: 0.0,
                    seed: 0,
                    test_gradient: TestGradient::Exact,
                    diverged: false,
                },
            }),
        }
    }
}

/// Random stream for iteration `k`, independent of every other iteration.
pub fn iteration_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

struct Recorder<'a> {
    problem: &'a Problem,
    norm: PenaltyNorm,
    rows: Vec<TraceRow>,
}

impl Recorder<'_> {
    fn row(&self, k: usize, x: &[f64], p: f64, gamma: f64, grad_norm: f64) -> Result<TraceRow> {
        let f = self.problem.objective.value(x);
        let m = self.problem.constraints.violation(x, self.norm.beta())?;
        Ok(TraceRow {
            k,
            x: x.to_vec(),
            f,
            m,
            penalty: f + p * m,
            p,
            gamma,
            grad_norm,
        })
    }
}

/// Runs the full adaptive method for `config.iterations` iterations.
pub fn run(problem: &Problem, config: &SolverConfig) -> std::result::Result<RunReport, RunFailure> {
    config.validate()?;
    let n = problem.objective.dim();
    problem.constraints.check_dim(&problem.start)?;
    if problem.start.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: problem.start.len(),
        }
        .into());
    }
    if let Some(d) = problem.domain.dim() {
        if d != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: d,
            }
            .into());
        }
    }

    let started = Instant::now();
    let reg = problem.regularizer;
    let domain = &problem.domain;
    let cs = &problem.constraints;
    let test_gradient = if problem.objective.has_exact_gradient() {
        TestGradient::Exact
    } else {
        TestGradient::Sampled
    };

    let mut state = SolverState::new(problem.start.clone(), config.penalty.p, reg, domain);
    let mut averager = match config.variant {
        Variant::Plain => None,
        Variant::DualAveraging { weights, scaling } => {
            Some(DualAverager::new(problem.start.clone(), weights, scaling))
        }
    };
    let mut rec = Recorder {
        problem,
        norm: config.norm,
        rows: Vec::with_capacity(config.iterations / config.record_every + 2),
    };
    let mut events = Vec::new();

    let finish = |rec: Recorder, events: Vec<PenaltyEvent>, state: &SolverState, diverged: bool| {
        let last = rec.rows.last().cloned();
        let summary = RunSummary {
            iterations: state.k - 1,
            final_x: state.x.clone(),
            final_f: last.as_ref().map_or(f64::NAN, |r| r.f),
            final_m: last.as_ref().map_or(f64::NAN, |r| r.m),
            final_p: state.p,
            penalty_updates: events
                .iter()
                .filter(|e: &&PenaltyEvent| e.p_after > e.p_before)
                .count(),
            capped_updates: events.iter().filter(|e| e.capped.is_some()).count(),
            wall_clock_secs: started.elapsed().as_secs_f64(),
            seed: config.seed,
            test_gradient,
            diverged,
        };
        RunReport {
            name: problem.name.clone(),
            config: config.clone(),
            rows: rec.rows,
            events,
            summary,
        }
    };

    match rec.row(0, &state.x, state.p, 0.0, 0.0) {
        Ok(row) => rec.rows.push(row),
        Err(error) => {
            return Err(RunFailure {
                error,
                partial: Box::new(finish(rec, events, &state, false)),
            })
        }
    }

    let mut grad_f = vec![0.0; n];
    let mut sample_f = vec![0.0; n];
    for k in 1..=config.iterations {
        let step = (|| -> Result<(SolverState, f64, f64)> {
            let x = &state.x;
            let mut rng = iteration_rng(config.seed, k);
            let meta = problem
                .objective
                .sample_gradient(x, &mut rng, &mut sample_f);
            let test_grad: &[f64] = match test_gradient {
                TestGradient::Exact => {
                    problem.objective.gradient(x, &mut grad_f);
                    &grad_f
                }
                TestGradient::Sampled => &sample_f,
            };
            let p_next = if config.adaptive {
                let up = update_penalty(x, state.p, test_grad, &config.penalty, cs, config.norm)?;
                if up.multiplications > 0 || up.capped.is_some() {
                    events.push(PenaltyEvent {
                        k,
                        p_before: state.p,
                        p_after: up.p,
                        multiplications: up.multiplications,
                        capped: up.capped,
                    });
                }
                up.p
            } else {
                state.p
            };
            let g_pen = config.norm.constraint_subgradient(cs, x)?;
            let vector: Vec<f64> = sample_f
                .iter()
                .zip(&g_pen)
                .map(|(a, b)| a + p_next * b)
                .collect();
            let sample = GradientSample { vector, meta };
            let grad_norm = norm2(&sample.vector);
            let gamma = config.schedule.step_size(k, grad_norm);
            let current = SolverState {
                p: p_next,
                ..state.clone()
            };
            let next = match averager.as_mut() {
                None => smd_step(&current, &sample, &config.schedule, reg, domain)?,
                Some(avg) => {
                    dual_averaging_step(&current, &sample, &config.schedule, reg, domain, avg)?
                }
            };
            debug_assert_eq!(next.x, reg.mirror(&next.y, domain));
            Ok((next, gamma, grad_norm))
        })();
        match step {
            Ok((next, gamma, grad_norm)) => {
                state = next;
                if k % config.record_every == 0 || k == config.iterations {
                    match rec.row(k, &state.x, state.p, gamma, grad_norm) {
                        Ok(row) => rec.rows.push(row),
                        Err(error) => {
                            return Err(RunFailure {
                                error,
                                partial: Box::new(finish(rec, events, &state, true)),
                            })
                        }
                    }
                }
            }
            Err(error) => {
                let diverged = matches!(error, Error::Diverged { .. });
                return Err(RunFailure {
                    error,
                    partial: Box::new(finish(rec, events, &state, diverged)),
                });
            }
        }
    }
    Ok(finish(rec, events, &state, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{FnObjective, SampleMeta};
    use crate::problem::Constraint;

    fn sample(v: Vec<f64>) -> GradientSample {
        GradientSample {
            vector: v,
            meta: SampleMeta::Exact,
        }
    }

    #[test]
    fn smd_step_examples() {
        let reg = Regularizer::Euclidean;
        let all = FeasibleDomain::AllSpace;
        let s = SolverState::new(vec![1.0, 1.0], 1.0, reg, &all);
        let c = StepSchedule::Constant { gamma: 0.5 };
        let next = smd_step(&s, &sample(vec![1.0, 0.0]), &c, reg, &all).unwrap();
        assert_eq!(next.y, vec![0.5, 1.0]);
        assert_eq!(next.x, vec![0.5, 1.0]);
        assert_eq!(next.k, 2);

        let same = smd_step(&s, &sample(vec![0.0, 0.0]), &c, reg, &all).unwrap();
        assert_eq!(
            (same.y.clone(), same.x.clone(), same.p),
            (s.y.clone(), s.x.clone(), s.p)
        );

        let bx = FeasibleDomain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let s = SolverState::new(vec![1.0, 1.0], 1.0, reg, &bx);
        let next = smd_step(&s, &sample(vec![-4.0, 0.0]), &c, reg, &bx).unwrap();
        assert_eq!(next.y, vec![3.0, 1.0]);
        assert_eq!(next.x, vec![1.0, 1.0]);
    }

    #[test]
    fn smd_step_divergence() {
        let reg = Regularizer::Euclidean;
        let all = FeasibleDomain::AllSpace;
        let s = SolverState::new(vec![0.0], 1.0, reg, &all);
        let c = StepSchedule::Constant { gamma: 1.0 };
        let err = smd_step(&s, &sample(vec![1e101]), &c, reg, &all).unwrap_err();
        assert!(matches!(err, Error::Diverged { k: 1, .. }));
        let err = smd_step(&s, &sample(vec![f64::NAN]), &c, reg, &all).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn dual_averaging_examples() {
        let reg = Regularizer::Euclidean;
        let all = FeasibleDomain::AllSpace;
        let sched = StepSchedule::InverseK { gamma0: 0.3 };
        let s = SolverState::new(vec![0.0, 0.0], 1.0, reg, &all);
        let g = sample(vec![0.7, -0.2]);
        let mut avg = DualAverager::new(
            vec![0.0, 0.0],
            AveragingWeights::StepSize,
            AveragingScaling::One,
        );
        let da = dual_averaging_step(&s, &g, &sched, reg, &all, &mut avg).unwrap();
        let plain = smd_step(&s, &g, &sched, reg, &all).unwrap();
        assert_eq!(da, plain);

        let mut avg = DualAverager::new(
            vec![0.0, 0.0],
            AveragingWeights::Uniform,
            AveragingScaling::One,
        );
        let s1 =
            dual_averaging_step(&s, &sample(vec![1.0, 0.0]), &sched, reg, &all, &mut avg).unwrap();
        let s2 =
            dual_averaging_step(&s1, &sample(vec![0.0, 1.0]), &sched, reg, &all, &mut avg).unwrap();
        assert_eq!(s2.x, vec![-1.0, -1.0]);

        let bx = FeasibleDomain::boxed(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let mut avg = DualAverager::new(
            vec![0.0, 0.0],
            AveragingWeights::Uniform,
            AveragingScaling::One,
        );
        let mut st = SolverState::new(vec![0.0, 0.0], 1.0, reg, &bx);
        for _ in 0..5 {
            st = dual_averaging_step(&st, &sample(vec![0.0, 0.0]), &sched, reg, &bx, &mut avg)
                .unwrap();
        }
        assert_eq!(st.x, reg.mirror(&[0.0, 0.0], &bx));
    }

    fn demo_problem() -> Problem {
        Problem {
            name: "demo".into(),
            objective: Arc::new(FnObjective::new(
                1,
                |x| x[0] * x[0],
                |x, g| g[0] = 2.0 * x[0],
            )),
            constraints: ConstraintSystem::new(
                1,
                vec![],
                vec![Constraint::affine(vec![-1.0], 1.0)],
            ),
            domain: FeasibleDomain::AllSpace,
            start: vec![0.2],
            regularizer: Regularizer::Euclidean,
        }
    }

    fn demo_config(iterations: usize) -> SolverConfig {
        SolverConfig::new(
            iterations,
            StepSchedule::InverseK { gamma0: 0.5 },
            PenaltyConfig {
                beta: 2.0,
                p: 0.1,
                kappa: 2.0,
                ..Default::default()
            },
        )
    }

    #[test]
    fn zero_iterations_keep_initial_row() {
        let report = run(&demo_problem(), &demo_config(0)).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].k, 0);
        assert_eq!(report.rows[0].x, vec![0.2]);
        assert_eq!(report.summary.iterations, 0);
    }

    #[test]
    fn first_iteration_matches_hand_trace() {
        let report = run(&demo_problem(), &demo_config(1)).unwrap();
        assert_eq!(report.events.len(), 1);
        assert_eq!(report.events[0].multiplications, 4);
        assert!((report.events[0].p_after - 1.6).abs() < 1e-15);
        // Y_2 = 0.2 - 0.5 * (0.4 - 1.6)
        assert!((report.rows[1].x[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn record_every_keeps_final_row() {
        let mut cfg = demo_config(25);
        cfg.record_every = 10;
        let report = run(&demo_problem(), &cfg).unwrap();
        let ks: Vec<usize> = report.rows.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 10, 20, 25]);
    }

    #[test]
    fn non_adaptive_keeps_p() {
        let mut cfg = demo_config(50);
        cfg.adaptive = false;
        let report = run(&demo_problem(), &cfg).unwrap();
        assert!(report.penalty_column().all(|p| p == 0.1));
        assert!(report.events.is_empty());
    }

    #[test]
    fn divergence_returns_partial_report() {
        let mut problem = demo_problem();
        problem.objective = Arc::new(FnObjective::new(
            1,
            |x| -x[0].exp(),
            |x, g| g[0] = -x[0].exp(),
        ));
        problem.constraints = ConstraintSystem::new(1, vec![], vec![]);
        let mut cfg = demo_config(10_000);
        cfg.schedule = StepSchedule::Constant { gamma: 1.0 };
        let err = run(&problem, &cfg).unwrap_err();
        assert!(matches!(err.error, Error::Diverged { .. }));
        assert!(err.partial.summary.diverged);
        assert!(!err.partial.rows.is_empty());
    }

    #[test]
    fn rng_streams_are_reproducible() {
        use rand::RngCore;
        let a = iteration_rng(7, 3).next_u64();
        assert_eq!(a, iteration_rng(7, 3).next_u64());
        assert_ne!(a, iteration_rng(7, 4).next_u64());
        assert_ne!(a, iteration_rng(8, 3).next_u64());
    }
}
