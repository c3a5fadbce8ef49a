//! Objective oracles: exact value/gradient plus an optional stochastic sample.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

/// What produced a gradient sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleMeta {
    Exact,
    /// Exact gradient plus additive Gaussian noise.
    Noisy {
        sigma: f64,
    },
    /// A single summand drawn from a finite sum (zero-based index).
    Term {
        index: usize,
    },
}

/// `G_k`: one stochastic subgradient sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSample {
    pub vector: Vec<f64>,
    pub meta: SampleMeta,
}

pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Full (deterministic) gradient or Clarke selection, written into `out`.
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// One draw of the stochastic oracle. Defaults to the exact gradient.
    fn sample_gradient(&self, x: &[f64], rng: &mut dyn RngCore, out: &mut [f64]) -> SampleMeta {
        let _ = rng;
        self.gradient(x, out);
        SampleMeta::Exact
    }

    /// Whether [`Objective::gradient`] is cheap enough to use alongside sampling.
    /// Purely stochastic oracles return `false` and the penalty test uses samples.
    fn has_exact_gradient(&self) -> bool {
        true
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Deterministic objective built from a value closure and a gradient closure.
#[derive(Clone)]
pub struct FnObjective {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
}

impl FnObjective {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        FnObjective {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }
}

impl fmt::Debug for FnObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnObjective")
            .field("dim", &self.dim)
            .finish()
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        (self.gradient)(x, out)
    }
}

/// Adds `N(0, sigma^2 I)` noise to every gradient sample of the inner objective.
#[derive(Debug, Clone)]
pub struct Noisy<O> {
    pub inner: O,
    pub sigma: f64,
}

impl<O: Objective> Objective for Noisy<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.inner.gradient(x, out)
    }

    fn sample_gradient(&self, x: &[f64], rng: &mut dyn RngCore, out: &mut [f64]) -> SampleMeta {
        self.inner.gradient(x, out);
        if self.sigma > 0.0 {
            let normal = Normal::new(0.0, self.sigma).expect("sigma is finite and positive");
            for v in out.iter_mut() {
                *v += normal.sample(rng);
            }
        }
        SampleMeta::Noisy { sigma: self.sigma }
    }
}
