use serde::Serialize;

use crate::error::{Error, Result};

/// Step-size policy `gamma_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    /// `gamma_k = gamma0 / k`.
    InverseK { gamma0: f64 },
    /// `gamma_k = (alpha0 / k) / max(|G_k|, floor)`.
    Normalized { alpha0: f64, floor: f64 },
    /// Fixed step. Does not satisfy the Robbins-Monro conditions.
    Constant { gamma: f64 },
}

impl StepSchedule {
    pub const DEFAULT_FLOOR: f64 = 1e-12;

    pub fn normalized(alpha0: f64) -> Self {
        StepSchedule::Normalized {
            alpha0,
            floor: Self::DEFAULT_FLOOR,
        }
    }

    /// Base coefficient (`gamma0`, `alpha0` or the constant step).
    pub fn scale(&self) -> f64 {
        match *self {
            StepSchedule::InverseK { gamma0 } => gamma0,
            StepSchedule::Normalized { alpha0, .. } => alpha0,
            StepSchedule::Constant { gamma } => gamma,
        }
    }

    pub fn with_scale(self, scale: f64) -> Self {
        match self {
            StepSchedule::InverseK { .. } => StepSchedule::InverseK { gamma0: scale },
            StepSchedule::Normalized { floor, .. } => StepSchedule::Normalized {
                alpha0: scale,
                floor,
            },
            StepSchedule::Constant { .. } => StepSchedule::Constant { gamma: scale },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepSchedule::InverseK { gamma0 } => gamma0 > 0.0 && gamma0.is_finite(),
            StepSchedule::Normalized { alpha0, floor } => {
                alpha0 > 0.0 && alpha0.is_finite() && floor > 0.0
            }
            StepSchedule::Constant { gamma } => gamma > 0.0 && gamma.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid step schedule {self:?}"
            )))
        }
    }

    /// `gamma_k` for `k >= 1`.
    pub fn step_size(&self, k: usize, grad_norm: f64) -> f64 {
        debug_assert!(k >= 1);
        let k = k.max(1) as f64;
        match *self {
            StepSchedule::InverseK { gamma0 } => gamma0 / k,
            StepSchedule::Normalized { alpha0, floor } => (alpha0 / k) / grad_norm.max(floor),
            StepSchedule::Constant { gamma } => gamma,
        }
    }
}
