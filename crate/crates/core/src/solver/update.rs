//! Adaptive penalty-parameter rule.
//!
//! While `DP_p(x; -grad f - p g) + M(x)/p > 0` the penalty is multiplied by
//! `kappa`. The test direction is rebuilt for every candidate `p`.

use serde::Serialize;

use crate::error::Result;
use crate::penalty::{delta, PenaltyConfig, PenaltyNorm};
use crate::problem::{dot, ConstraintSystem, FEASIBILITY_TOL};

/// Why the multiplication loop stopped while the test was still positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapReason {
    PenaltyMax,
    MultiplicationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyUpdate {
    pub p: f64,
    pub multiplications: u32,
    pub capped: Option<CapReason>,
}

/// Value of the descent test for one candidate penalty.
pub fn test_value(
    cs: &ConstraintSystem,
    x: &[f64],
    grad_f: &[f64],
    constraint_grad: &[f64],
    violation: f64,
    p: f64,
    norm: PenaltyNorm,
) -> Result<f64> {
    let d: Vec<f64> = grad_f
        .iter()
        .zip(constraint_grad)
        .map(|(gf, gc)| -gf - p * gc)
        .collect();
    let dp = dot(grad_f, &d) + p * delta(cs, x, &d, norm.beta())?;
    Ok(dp + violation / p)
}

/// The beta-norm update with `config.beta`.
pub fn penalty_update(
    x: &[f64],
    p_in: f64,
    grad_f: &[f64],
    config: &PenaltyConfig,
    cs: &ConstraintSystem,
) -> Result<PenaltyUpdate> {
    update_penalty(
        x,
        p_in,
        grad_f,
        config,
        cs,
        PenaltyNorm::Beta { beta: config.beta },
    )
}

/// The update rule for either penalty formulation.
pub fn update_penalty(
    x: &[f64],
    p_in: f64,
    grad_f: &[f64],
    config: &PenaltyConfig,
    cs: &ConstraintSystem,
    norm: PenaltyNorm,
) -> Result<PenaltyUpdate> {
    let unchanged = PenaltyUpdate {
        p: p_in,
        multiplications: 0,
        capped: None,
    };
    let snap = cs.residuals(x, norm.beta())?;
    if snap.m_beta <= FEASIBILITY_TOL || snap.m_inf <= FEASIBILITY_TOL {
        return Ok(unchanged);
    }
    let constraint_grad = norm.constraint_subgradient(cs, x)?;
    let mut p = p_in;
    let mut multiplications = 0;
    while test_value(cs, x, grad_f, &constraint_grad, snap.m_beta, p, norm)? > 0.0 {
        if multiplications >= config.max_multiplications_per_step {
            return Ok(PenaltyUpdate {
                p,
                multiplications,
                capped: Some(CapReason::MultiplicationLimit),
            });
        }
        if p >= config.p_max {
            return Ok(PenaltyUpdate {
                p,
                multiplications,
                capped: Some(CapReason::PenaltyMax),
            });
        }
        p = (p * config.kappa).min(config.p_max);
        multiplications += 1;
    }
    Ok(PenaltyUpdate {
        p,
        multiplications,
        capped: None,
    })
}
