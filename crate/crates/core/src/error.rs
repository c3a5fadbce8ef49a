use thiserror::Error;

/// Which family a constraint belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Equality,
    Inequality,
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintKind::Equality => f.write_str("equality"),
            ConstraintKind::Inequality => f.write_str("inequality"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinitePoint { index: usize },

    #[error("{kind} constraint {index} evaluated to a non-finite value")]
    NonFiniteConstraint { kind: ConstraintKind, index: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("penalty gradient requires 1 < beta < inf, got {beta}")]
    UnsupportedBeta { beta: f64 },

    #[error("directional penalty derivative is only defined at infeasible points")]
    FeasiblePoint,

    #[error("point lies outside the feasible domain")]
    OutsideDomain,

    #[error("iterate diverged at k = {k} (|G| = {grad_norm:e})")]
    Diverged { k: usize, grad_norm: f64 },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
}

pub type Result<T> = std::result::Result<T, Error>;
