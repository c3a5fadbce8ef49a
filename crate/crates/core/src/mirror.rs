//! Mirror maps and the Fenchel coupling.
//!
//! Only the Euclidean regularizer `R(x) = 1/2 ||x||^2` is provided. Its mirror
//! map `argmax_{x in X} <y, x> - R(x)` is the Euclidean projection onto `X`.

use crate::error::{Error, Result};
use crate::problem::{dot, FeasibleDomain};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    #[default]
    Euclidean,
}

impl Regularizer {
    /// Strong convexity modulus `K`.
    pub fn strong_convexity(&self) -> f64 {
        match self {
            Regularizer::Euclidean => 1.0,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Regularizer::Euclidean => 0.5 * dot(x, x),
        }
    }

    /// Maps a dual point back into the domain.
    pub fn mirror(&self, y: &[f64], domain: &FeasibleDomain) -> Vec<f64> {
        match self {
            Regularizer::Euclidean => domain.project(y),
        }
    }

    /// Convex conjugate restricted to the domain, `R*(y) = max_{x in X} <y,x> - R(x)`.
    pub fn conjugate(&self, y: &[f64], domain: &FeasibleDomain) -> f64 {
        let x = self.mirror(y, domain);
        dot(y, &x) - self.value(&x)
    }

    /// `F(x, y) = R(x) + R*(y) - <y, x>` for `x` in the domain.
    pub fn fenchel(&self, x: &[f64], y: &[f64], domain: &FeasibleDomain) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if !domain.contains(x, 1e-12) {
            return Err(Error::OutsideDomain);
        }
        let value = self.value(x) + self.conjugate(y, domain) - dot(y, x);
        Ok(value.max(0.0))
    }
}
