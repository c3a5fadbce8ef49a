//! Constrained problem description: constraint systems, the simple set the
//! iterates live in, and violation measures.

use std::fmt;
use std::sync::Arc;

use crate::error::{ConstraintKind, Error, Result};

/// A point is treated as feasible when its violation is at most this value.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Default tolerance for "attains the maximum" and "equals zero" tests.
pub const ACTIVE_TOL: f64 = 1e-9;

/// Residual magnitudes at or below this floor do not count as violation.
pub const RESIDUAL_FLOOR: f64 = 1e-15;

/// A finite point in R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinitePoint { index });
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A scalar constraint function together with its analytic gradient.
///
/// The gradient closure writes into a zeroed buffer of the problem dimension.
#[derive(Clone)]
pub struct Constraint {
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
}

impl Constraint {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Constraint {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    /// `a . x + b` with constant gradient `a`.
    pub fn affine(a: Vec<f64>, b: f64) -> Self {
        let a = Arc::new(a);
        let ga = Arc::clone(&a);
        Constraint::new(
            move |x| dot(&a, x) + b,
            move |_, out| out.copy_from_slice(&ga),
        )
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        (self.gradient)(x, &mut out);
        out
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        (self.gradient)(x, out);
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Constraint { .. }")
    }
}

/// Equality constraints `h_i(x) = 0` and inequality constraints `g_j(x) <= 0`.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    dim: usize,
    equalities: Vec<Constraint>,
    inequalities: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new(dim: usize, equalities: Vec<Constraint>, inequalities: Vec<Constraint>) -> Self {
        ConstraintSystem {
            dim,
            equalities,
            inequalities,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn equalities(&self) -> &[Constraint] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Constraint] {
        &self.inequalities
    }

    pub fn is_empty(&self) -> bool {
        self.equalities.is_empty() && self.inequalities.is_empty()
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Evaluates every constraint and the violation norms at `x`.
    pub fn residuals(&self, x: &[f64], beta: f64) -> Result<ViolationSnapshot> {
        self.check_dim(x)?;
        let h_values = eval_all(&self.equalities, x, ConstraintKind::Equality)?;
        let g_values = eval_all(&self.inequalities, x, ConstraintKind::Inequality)?;
        let g_plus: Vec<f64> = g_values.iter().map(|g| g.max(0.0)).collect();
        let residual = || g_plus.iter().chain(h_values.iter()).copied();
        let m_beta = violation_norm(residual(), beta);
        let m_inf = violation_norm(residual(), f64::INFINITY);
        Ok(ViolationSnapshot {
            beta,
            h_values,
            g_values,
            g_plus,
            m_beta,
            m_inf,
        })
    }

    /// `M(x)`: the beta-norm of `(g_+(x), h(x))`; `beta = inf` gives the max-norm.
    pub fn violation(&self, x: &[f64], beta: f64) -> Result<f64> {
        Ok(self.residuals(x, beta)?.m_beta)
    }

    /// Active maximum index sets and the strictly violated inequality set.
    pub fn active_index_sets(&self, x: &[f64], tol: f64) -> Result<ActiveSets> {
        let snap = self.residuals(x, f64::INFINITY)?;
        Ok(snap.active_sets(tol))
    }
}

fn eval_all(cs: &[Constraint], x: &[f64], kind: ConstraintKind) -> Result<Vec<f64>> {
    cs.iter()
        .enumerate()
        .map(|(index, c)| {
            let v = c.value(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteConstraint { kind, index })
            }
        })
        .collect()
}

/// Everything the penalty calculus needs about the constraints at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationSnapshot {
    pub beta: f64,
    pub h_values: Vec<f64>,
    pub g_values: Vec<f64>,
    pub g_plus: Vec<f64>,
    pub m_beta: f64,
    pub m_inf: f64,
}

impl ViolationSnapshot {
    pub fn is_feasible(&self) -> bool {
        self.m_beta <= FEASIBILITY_TOL
    }

    pub fn active_sets(&self, tol: f64) -> ActiveSets {
        let mut sets = ActiveSets::default();
        sets.inequality_positive = self
            .g_values
            .iter()
            .enumerate()
            .filter(|(_, g)| **g > tol)
            .map(|(j, _)| j)
            .collect();
        if self.m_inf == 0.0 {
            return sets;
        }
        let level = self.m_inf - tol;
        sets.equality_active = self
            .h_values
            .iter()
            .enumerate()
            .filter(|(_, h)| h.abs() >= level)
            .map(|(i, _)| i)
            .collect();
        sets.inequality_active = self
            .g_plus
            .iter()
            .enumerate()
            .filter(|(_, g)| **g >= level)
            .map(|(j, _)| j)
            .collect();
        sets
    }
}

/// Zero-based index sets `E(x)`, `I(x)` and `I_+(x)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActiveSets {
    pub equality_active: Vec<usize>,
    pub inequality_active: Vec<usize>,
    pub inequality_positive: Vec<usize>,
}

/// beta-norm of a residual vector, ignoring entries below [`RESIDUAL_FLOOR`].
pub fn violation_norm(values: impl Iterator<Item = f64> + Clone, beta: f64) -> f64 {
    let significant = values.map(f64::abs).filter(|v| *v > RESIDUAL_FLOOR);
    let scale = significant.clone().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    if beta.is_infinite() {
        return scale;
    }
    if beta == 1.0 {
        return significant.sum();
    }
    let sum: f64 = significant.map(|v| (v / scale).powf(beta)).sum();
    scale * sum.powf(1.0 / beta)
}

/// Plain beta-norm, with `beta = inf` meaning the max-norm.
pub fn lp_norm(values: &[f64], beta: f64) -> f64 {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || beta.is_infinite() {
        return scale;
    }
    let sum: f64 = values.iter().map(|v| (v.abs() / scale).powf(beta)).sum();
    scale * sum.powf(1.0 / beta)
}

/// The simple convex set `X` onto which iterates are mapped.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleDomain {
    AllSpace,
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl FeasibleDomain {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidDomain("box requires lower <= upper".into()));
        }
        Ok(FeasibleDomain::Box { lower, upper })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(FeasibleDomain::Ball { center, radius })
    }

    /// Euclidean projection onto the domain.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FeasibleDomain::AllSpace => x.to_vec(),
            FeasibleDomain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect(),
            FeasibleDomain::Ball { center, radius } => {
                let dist = x
                    .iter()
                    .zip(center)
                    .map(|(v, c)| (v - c) * (v - c))
                    .sum::<f64>()
                    .sqrt();
                if dist <= *radius {
                    x.to_vec()
                } else {
                    let mut s = radius / dist;
                    loop {
                        let p: Vec<f64> =
                            x.iter().zip(center).map(|(v, c)| c + s * (v - c)).collect();
                        // rounding can leave the scaled point a hair outside
                        if norm2_diff(&p, center) <= *radius {
                            return p;
                        }
                        s *= 1.0 - f64::EPSILON;
                    }
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            FeasibleDomain::AllSpace => true,
            FeasibleDomain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            FeasibleDomain::Ball { center, radius } => norm2_diff(x, center) <= radius + tol,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            FeasibleDomain::AllSpace => None,
            FeasibleDomain::Box { lower, .. } => Some(lower.len()),
            FeasibleDomain::Ball { center, .. } => Some(center.len()),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
