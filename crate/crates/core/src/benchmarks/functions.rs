//! Two-dimensional test objectives and their constraint sets.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;
use crate::objective::FnObjective;
use crate::problem::{Constraint, ConstraintSystem};

/// Quadratic product, Goldstein-Price, Bukin N.6 and Beale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    QuadraticProduct,
    GoldsteinPrice,
    Bukin,
    Beale,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] = [
        TestFunction::QuadraticProduct,
        TestFunction::GoldsteinPrice,
        TestFunction::Bukin,
        TestFunction::Beale,
    ];

    /// Single-letter case label.
    pub fn label(&self) -> char {
        match self {
            TestFunction::QuadraticProduct => 'a',
            TestFunction::GoldsteinPrice => 'b',
            TestFunction::Bukin => 'c',
            TestFunction::Beale => 'd',
        }
    }

    pub fn slug(&self) -> &'static str {
        match self {
            TestFunction::QuadraticProduct => "a_quadratic_product",
            TestFunction::GoldsteinPrice => "b_goldstein_price",
            TestFunction::Bukin => "c_bukin",
            TestFunction::Beale => "d_beale",
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        match self {
            TestFunction::QuadraticProduct => x1 * x1 * x2 * x2,
            TestFunction::GoldsteinPrice => {
                let (a, _, _) = gp_first(x1, x2);
                let (c, _, _) = gp_second(x1, x2);
                a * c
            }
            TestFunction::Bukin => {
                100.0 * (x2 - 0.01 * x1 * x1).abs().sqrt() + 0.01 * (x1 + 10.0).abs()
            }
            TestFunction::Beale => {
                let (r1, r2, r3) = beale_residuals(x1, x2);
                r1 * r1 + r2 * r2 + r3 * r3
            }
        }
    }

    /// Analytic gradient; Bukin uses the selection 0 on its kinks.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let (x1, x2) = (x[0], x[1]);
        match self {
            TestFunction::QuadraticProduct => {
                out[0] = 2.0 * x1 * x2 * x2;
                out[1] = 2.0 * x1 * x1 * x2;
            }
            TestFunction::GoldsteinPrice => {
                let (a, a1, a2) = gp_first(x1, x2);
                let (c, c1, c2) = gp_second(x1, x2);
                out[0] = a1 * c + a * c1;
                out[1] = a2 * c + a * c2;
            }
            TestFunction::Bukin => {
                let u = x2 - 0.01 * x1 * x1;
                let (d1, d2) = if u == 0.0 {
                    (0.0, 0.0)
                } else {
                    let s = 50.0 * u.signum() / u.abs().sqrt();
                    (s * (-0.02 * x1), s)
                };
                let t = x1 + 10.0;
                let kink = if t == 0.0 { 0.0 } else { 0.01 * t.signum() };
                out[0] = d1 + kink;
                out[1] = d2;
            }
            TestFunction::Beale => {
                let (r1, r2, r3) = beale_residuals(x1, x2);
                out[0] = 2.0 * (r1 * (x2 - 1.0) + r2 * (x2 * x2 - 1.0) + r3 * (x2 * x2 * x2 - 1.0));
                out[1] = 2.0 * (r1 * x1 + r2 * 2.0 * x1 * x2 + r3 * 3.0 * x1 * x2 * x2);
            }
        }
    }

    pub fn objective(self) -> FnObjective {
        FnObjective::new(2, move |x| self.value(x), move |x, g| self.gradient(x, g))
    }

    /// Constraints whose zero set is the target line (or region for Bukin).
    pub fn constraints(&self) -> ConstraintSystem {
        match self {
            TestFunction::QuadraticProduct => {
                ConstraintSystem::new(2, vec![Constraint::affine(vec![1.0, -1.0], 0.0)], vec![])
            }
            TestFunction::GoldsteinPrice => {
                ConstraintSystem::new(2, vec![Constraint::affine(vec![0.0, 1.0], 0.5)], vec![])
            }
            TestFunction::Bukin => ConstraintSystem::new(
                2,
                vec![],
                vec![
                    Constraint::affine(vec![0.0, -1.0], 0.3),
                    Constraint::affine(vec![-1.0, -1.0], -1.0),
                    Constraint::affine(vec![1.0, -1.0], -1.0),
                ],
            ),
            TestFunction::Beale => ConstraintSystem::new(
                2,
                vec![Constraint::new(
                    |x| x[0] * x[0] + x[1] * x[1] - 4.0,
                    |x, g| {
                        g[0] = 2.0 * x[0];
                        g[1] = 2.0 * x[1];
                    },
                )],
                vec![],
            ),
        }
    }

    /// The sum of absolute residuals and positive parts, which vanishes
    /// exactly on the feasible set.
    pub fn penalty_function(&self, x: &[f64]) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        match self {
            TestFunction::QuadraticProduct => (x1 - x2).abs(),
            TestFunction::GoldsteinPrice => (x2 + 0.5).abs(),
            TestFunction::Bukin => {
                (-x2 + 0.3).max(0.0) + (-(x1 + x2 + 1.0)).max(0.0) + (x1 - x2 - 1.0).max(0.0)
            }
            TestFunction::Beale => (x1 * x1 + x2 * x2 - 4.0).abs(),
        }
    }

    /// Known unconstrained minimizer and value.
    pub fn reference_minimum(&self) -> ([f64; 2], f64) {
        match self {
            TestFunction::QuadraticProduct => ([0.0, 0.0], 0.0),
            TestFunction::GoldsteinPrice => ([0.0, -1.0], 3.0),
            TestFunction::Bukin => ([-10.0, 1.0], 0.0),
            TestFunction::Beale => ([3.0, 0.5], 0.0),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        TestFunction::ALL
            .into_iter()
            .find(|t| s.len() == 1 && s.starts_with(t.label()) || s == t.slug())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown test function `{s}`")))
    }
}

/// First Goldstein-Price factor and its partials.
fn gp_first(x1: f64, x2: f64) -> (f64, f64, f64) {
    let s = x1 + x2 + 1.0;
    let b = 19.0 - 14.0 * x1 + 3.0 * x1 * x1 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2 * x2;
    let db1 = -14.0 + 6.0 * x1 + 6.0 * x2;
    let db2 = -14.0 + 6.0 * x1 + 6.0 * x2;
    let a = 1.0 + s * s * b;
    (a, 2.0 * s * b + s * s * db1, 2.0 * s * b + s * s * db2)
}

/// Second Goldstein-Price factor and its partials.
fn gp_second(x1: f64, x2: f64) -> (f64, f64, f64) {
    let t = 2.0 * x1 - 3.0 * x2;
    let d = 18.0 - 32.0 * x1 + 12.0 * x1 * x1 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2 * x2;
    let dd1 = -32.0 + 24.0 * x1 - 36.0 * x2;
    let dd2 = 48.0 - 36.0 * x1 + 54.0 * x2;
    let c = 30.0 + t * t * d;
    (c, 4.0 * t * d + t * t * dd1, -6.0 * t * d + t * t * dd2)
}

fn beale_residuals(x1: f64, x2: f64) -> (f64, f64, f64) {
    (
        1.5 - x1 + x1 * x2,
        2.25 - x1 + x1 * x2 * x2,
        2.625 - x1 + x1 * x2 * x2 * x2,
    )
}
