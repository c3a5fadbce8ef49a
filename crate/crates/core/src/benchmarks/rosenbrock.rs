//! Rosenbrock function with a single-term stochastic oracle.

use rand::{Rng, RngCore};

use crate::objective::{Objective, SampleMeta};
use crate::problem::{Constraint, ConstraintSystem};

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = 1.0 - w[0];
            100.0 * a * a + b * b
        })
        .sum()
}

/// Gradient of summand `i` (zero-based, `i < n - 1`), which only touches
/// coordinates `i` and `i + 1`. Returns the two partials.
pub fn rosenbrock_term_grad(x: &[f64], i: usize) -> [f64; 2] {
    let (xi, xn) = (x[i], x[i + 1]);
    let a = xn - xi * xi;
    [-400.0 * xi * a - 2.0 * (1.0 - xi), 200.0 * a]
}

pub fn rosenbrock_gradient(x: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for i in 0..x.len() - 1 {
        let [gi, gn] = rosenbrock_term_grad(x, i);
        out[i] += gi;
        out[i + 1] += gn;
    }
}

/// Oracle drawing one summand uniformly and scaling it by `n - 1`, which
/// makes the sample an unbiased estimate of the full gradient.
#[derive(Debug, Clone, Copy)]
pub struct StochasticRosenbrock {
    pub n: usize,
}

impl StochasticRosenbrock {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Rosenbrock needs n >= 2");
        StochasticRosenbrock { n }
    }

    pub fn term_sample(&self, x: &[f64], i: usize, out: &mut [f64]) {
        out.fill(0.0);
        let [gi, gn] = rosenbrock_term_grad(x, i);
        let scale = (self.n - 1) as f64;
        out[i] = scale * gi;
        out[i + 1] = scale * gn;
    }
}

impl Objective for StochasticRosenbrock {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        rosenbrock(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        rosenbrock_gradient(x, out)
    }

    fn sample_gradient(&self, x: &[f64], rng: &mut dyn RngCore, out: &mut [f64]) -> SampleMeta {
        let i = rng.random_range(0..self.n - 1);
        self.term_sample(x, i, out);
        SampleMeta::Term { index: i }
    }

    fn has_exact_gradient(&self) -> bool {
        false
    }
}

/// `h(x) = x^T x - n`, whose zero set contains the all-ones minimizer.
pub fn sphere_constraint(n: usize) -> ConstraintSystem {
    ConstraintSystem::new(
        n,
        vec![Constraint::new(
            move |x| x.iter().map(|v| v * v).sum::<f64>() - n as f64,
            |x, g| {
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi = 2.0 * xi;
                }
            },
        )],
        vec![],
    )
}
