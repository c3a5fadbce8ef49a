//! Exact penalty calculus for `P(x) = f(x) + p * ||(g_+(x), h(x))||_beta`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{dot, ConstraintSystem, ViolationSnapshot, ACTIVE_TOL, FEASIBILITY_TOL};

/// Penalty parameters used by the adaptive update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyConfig {
    pub beta: f64,
    pub p: f64,
    pub kappa: f64,
    pub p_max: f64,
    pub max_multiplications_per_step: u32,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            beta: 2.0,
            p: 1.0,
            kappa: 2.0,
            p_max: 1e12,
            max_multiplications_per_step: 60,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return Err(Error::UnsupportedBeta { beta: self.beta });
        }
        if !(self.p > 0.0) || !self.p.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "penalty p must be positive, got {}",
                self.p
            )));
        }
        if !(self.kappa > 1.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "kappa must exceed 1, got {}",
                self.kappa
            )));
        }
        if !(self.p_max >= self.p) {
            return Err(Error::InvalidConfig(format!(
                "p_max ({}) must be at least p ({})",
                self.p_max, self.p
            )));
        }
        if self.max_multiplications_per_step == 0 {
            return Err(Error::InvalidConfig(
                "max_multiplications_per_step must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `P_p(x) = f(x) + p * M(x)`.
pub fn penalty_value(f_value: f64, snapshot: &ViolationSnapshot, p: f64) -> f64 {
    f_value + p * snapshot.m_beta
}

/// Gradient of the beta-norm penalty function, split into its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyGradient {
    pub objective_part: Vec<f64>,
    pub constraint_part: Vec<f64>,
    pub sigma: Vec<f64>,
    pub eta: Vec<f64>,
}

impl PenaltyGradient {
    pub fn total(&self, p: f64) -> Vec<f64> {
        self.objective_part
            .iter()
            .zip(&self.constraint_part)
            .map(|(a, b)| a + p * b)
            .collect()
    }
}

/// `(v / m)^(beta - 1)` for `0 < v <= m`; evaluated in log space for tiny `v`.
fn ratio_power(v: f64, m: f64, beta: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if v < 1e-100 {
        ((beta - 1.0) * (v.ln() - m.ln())).exp()
    } else {
        (v / m).powf(beta - 1.0)
    }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `grad f(x) + p * g_beta(x)` decomposition, `1 < beta < inf`.
///
/// At points with `M(x) <= FEASIBILITY_TOL` the constraint part is zero.
pub fn penalty_gradient(
    cs: &ConstraintSystem,
    grad_f: &[f64],
    x: &[f64],
    beta: f64,
) -> Result<PenaltyGradient> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::UnsupportedBeta { beta });
    }
    cs.check_dim(grad_f)?;
    let snap = cs.residuals(x, beta)?;
    let n = x.len();
    let mut constraint_part = vec![0.0; n];
    let mut sigma = vec![0.0; snap.h_values.len()];
    let mut eta = vec![0.0; snap.g_values.len()];
    if !snap.is_feasible() {
        let m = snap.m_beta;
        let mut buf = vec![0.0; n];
        for (i, (c, &h)) in cs.equalities().iter().zip(&snap.h_values).enumerate() {
            let s = sgn(h) * ratio_power(h.abs(), m, beta);
            sigma[i] = s;
            if s != 0.0 {
                c.gradient_into(x, &mut buf);
                axpy(s, &buf, &mut constraint_part);
            }
        }
        for (j, (c, &g)) in cs.inequalities().iter().zip(&snap.g_plus).enumerate() {
            let e = ratio_power(g, m, beta);
            eta[j] = e;
            if e != 0.0 {
                c.gradient_into(x, &mut buf);
                axpy(e, &buf, &mut constraint_part);
            }
        }
    }
    Ok(PenaltyGradient {
        objective_part: grad_f.to_vec(),
        constraint_part,
        sigma,
        eta,
    })
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn xi_from(h: f64, slope: f64, tol: f64) -> f64 {
    if h.abs() <= tol {
        slope.abs()
    } else if h > 0.0 {
        slope
    } else {
        -slope
    }
}

fn zeta_from(g: f64, slope: f64, tol: f64) -> f64 {
    if g.abs() <= tol {
        slope.max(0.0)
    } else if g > 0.0 {
        slope
    } else {
        0.0
    }
}

/// Directional operator of equality constraint `i` along `d`.
pub fn xi(cs: &ConstraintSystem, i: usize, x: &[f64], d: &[f64]) -> Result<f64> {
    cs.check_dim(x)?;
    cs.check_dim(d)?;
    let c = &cs.equalities()[i];
    Ok(xi_from(c.value(x), dot(&c.gradient(x), d), ACTIVE_TOL))
}

/// Directional operator of inequality constraint `j` along `d`.
pub fn zeta(cs: &ConstraintSystem, j: usize, x: &[f64], d: &[f64]) -> Result<f64> {
    cs.check_dim(x)?;
    cs.check_dim(d)?;
    let c = &cs.inequalities()[j];
    Ok(zeta_from(c.value(x), dot(&c.gradient(x), d), ACTIVE_TOL))
}

/// Directional derivative of `M = ||(g_+, h)||_beta` at an infeasible point,
/// for `beta` in `[1, inf]`.
pub fn delta(cs: &ConstraintSystem, x: &[f64], d: &[f64], beta: f64) -> Result<f64> {
    if !(beta >= 1.0) {
        return Err(Error::UnsupportedBeta { beta });
    }
    cs.check_dim(d)?;
    let snap = cs.residuals(x, beta)?;
    if snap.m_inf <= FEASIBILITY_TOL {
        return Err(Error::FeasiblePoint);
    }
    let mut buf = vec![0.0; x.len()];
    let mut slope = |c: &crate::problem::Constraint| {
        c.gradient_into(x, &mut buf);
        dot(&buf, d)
    };
    let eq = cs.equalities();
    let ineq = cs.inequalities();

    if beta == 1.0 {
        let mut total = 0.0;
        for (c, &h) in eq.iter().zip(&snap.h_values) {
            total += xi_from(h, slope(c), ACTIVE_TOL);
        }
        for (c, &g) in ineq.iter().zip(&snap.g_values) {
            if g >= -ACTIVE_TOL {
                total += zeta_from(g, slope(c), ACTIVE_TOL);
            }
        }
        Ok(total)
    } else if beta.is_infinite() {
        let sets = snap.active_sets(ACTIVE_TOL);
        let mut best = f64::NEG_INFINITY;
        for &i in &sets.equality_active {
            best = best.max(xi_from(snap.h_values[i], slope(&eq[i]), ACTIVE_TOL));
        }
        for &j in &sets.inequality_active {
            best = best.max(zeta_from(snap.g_values[j], slope(&ineq[j]), ACTIVE_TOL));
        }
        Ok(best)
    } else {
        // Terms on the boundary carry zero weight, so every weighted term uses
        // the exact sign of its residual rather than the active tolerance.
        let m = snap.m_beta;
        let mut total = 0.0;
        for (c, &h) in eq.iter().zip(&snap.h_values) {
            let w = ratio_power(h.abs(), m, beta);
            if w != 0.0 {
                total += w * h.signum() * slope(c);
            }
        }
        for (c, &g) in ineq.iter().zip(&snap.g_values) {
            if g > 0.0 {
                let w = ratio_power(g, m, beta);
                if w != 0.0 {
                    total += w * slope(c);
                }
            }
        }
        Ok(total)
    }
}

/// `DP_p(x; d) = <grad f(x), d> + p * delta(x, d)`.
pub fn dir_derivative(
    grad_f: &[f64],
    cs: &ConstraintSystem,
    x: &[f64],
    d: &[f64],
    p: f64,
    beta: f64,
) -> Result<f64> {
    cs.check_dim(grad_f)?;
    Ok(dot(grad_f, d) + p * delta(cs, x, d, beta)?)
}

/// Fixed subgradient selection of the l1 penalty `sum |h_i| + sum (g_j)_+`.
///
/// Uses `sgn(0) = 0` and drops inequalities sitting exactly on their boundary.
pub fn l1_subgradient(cs: &ConstraintSystem, x: &[f64]) -> Result<Vec<f64>> {
    let snap = cs.residuals(x, 1.0)?;
    let mut out = vec![0.0; x.len()];
    let mut buf = vec![0.0; x.len()];
    for (c, &h) in cs.equalities().iter().zip(&snap.h_values) {
        let s = sgn(h);
        if s != 0.0 {
            c.gradient_into(x, &mut buf);
            axpy(s, &buf, &mut out);
        }
    }
    for (c, &g) in cs.inequalities().iter().zip(&snap.g_values) {
        if g > 0.0 {
            c.gradient_into(x, &mut buf);
            axpy(1.0, &buf, &mut out);
        }
    }
    Ok(out)
}

/// Which penalty the solver descends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltyNorm {
    /// Smooth-outside-feasibility beta-norm penalty, `1 < beta < inf`.
    Beta { beta: f64 },
    /// l1 penalty with the [`l1_subgradient`] selection.
    L1,
}

impl PenaltyNorm {
    pub fn beta(&self) -> f64 {
        match self {
            PenaltyNorm::Beta { beta } => *beta,
            PenaltyNorm::L1 => 1.0,
        }
    }

    /// Constraint contribution to the subgradient (the `g_beta` term).
    pub fn constraint_subgradient(&self, cs: &ConstraintSystem, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            PenaltyNorm::Beta { beta } => {
                let zeros = vec![0.0; x.len()];
                Ok(penalty_gradient(cs, &zeros, x, *beta)?.constraint_part)
            }
            PenaltyNorm::L1 => l1_subgradient(cs, x),
        }
    }
}
