//! Least-squares regression with weights pushed onto `{-1, +1}` by the
//! equality constraints `w_i^2 - 1 = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::problem::{Constraint, ConstraintSystem};

/// Standard deviation of the additive label noise (variance 0.01).
pub const NOISE_STD: f64 = 0.1;

/// Probability that a ground-truth weight is `+1`.
pub const ACTIVE_PROBABILITY: f64 = 0.3;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, w: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^T r`.
    pub fn tr_mul_vec(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, ri) in r.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * ri;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    pub x_train: Matrix,
    pub y_train: Vec<f64>,
    pub x_test: Matrix,
    pub y_test: Vec<f64>,
    pub w_star: Vec<f64>,
    pub seed: u64,
    pub n_samples: usize,
    pub p_features: usize,
    pub noise_std: f64,
}

/// Number of training rows for an 80/20 split.
pub fn train_rows(n_samples: usize) -> usize {
    n_samples * 4 / 5
}

/// Draws `w*`, Gaussian features and noisy labels; the first 80% of rows train.
pub fn make_regression(
    seed: u64,
    n_samples: usize,
    p_features: usize,
) -> Result<RegressionDataset> {
    make_regression_with_noise(seed, n_samples, p_features, NOISE_STD)
}

pub fn make_regression_with_noise(
    seed: u64,
    n_samples: usize,
    p_features: usize,
    noise_std: f64,
) -> Result<RegressionDataset> {
    if n_samples < 5 {
        return Err(Error::InvalidConfig(format!(
            "need at least 5 samples, got {n_samples}"
        )));
    }
    if p_features == 0 {
        return Err(Error::InvalidConfig("need at least one feature".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_star: Vec<f64> = (0..p_features)
        .map(|_| {
            if rng.random_bool(ACTIVE_PROBABILITY) {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let data: Vec<f64> = (0..n_samples * p_features)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let x = Matrix {
        rows: n_samples,
        cols: p_features,
        data,
    };
    let clean = x.mul_vec(&w_star);
    let y: Vec<f64> = if noise_std > 0.0 {
        let noise = Normal::new(0.0, noise_std).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        clean.iter().map(|c| c + noise.sample(&mut rng)).collect()
    } else {
        clean
    };

    let n_train = train_rows(n_samples);
    let split = n_train * p_features;
    let (train, test) = x.data.split_at(split);
    Ok(RegressionDataset {
        x_train: Matrix {
            rows: n_train,
            cols: p_features,
            data: train.to_vec(),
        },
        y_train: y[..n_train].to_vec(),
        x_test: Matrix {
            rows: n_samples - n_train,
            cols: p_features,
            data: test.to_vec(),
        },
        y_test: y[n_train..].to_vec(),
        w_star,
        seed,
        n_samples,
        p_features,
        noise_std,
    })
}

/// How the squared residual is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LossScale {
    /// `||Xw - y||^2`.
    Sum,
    /// `||Xw - y||^2 / n_train`.
    Mean,
}

/// Full-batch least-squares objective on the training split.
#[derive(Debug, Clone)]
pub struct RegressionObjective {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub scale: LossScale,
}

impl RegressionObjective {
    pub fn new(data: &RegressionDataset, scale: LossScale) -> Self {
        RegressionObjective {
            x: data.x_train.clone(),
            y: data.y_train.clone(),
            scale,
        }
    }

    fn factor(&self) -> f64 {
        match self.scale {
            LossScale::Sum => 1.0,
            LossScale::Mean => 1.0 / self.x.rows as f64,
        }
    }

    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let mut r = self.x.mul_vec(w);
        for (ri, yi) in r.iter_mut().zip(&self.y) {
            *ri -= yi;
        }
        r
    }

    /// Value and gradient `2 X^T (Xw - y)` (times the scale factor).
    pub fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let r = self.residual(w);
        let c = self.factor();
        let value = c * r.iter().map(|v| v * v).sum::<f64>();
        let mut g = self.x.tr_mul_vec(&r);
        for gi in &mut g {
            *gi *= 2.0 * c;
        }
        (value, g)
    }
}

impl Objective for RegressionObjective {
    fn dim(&self) -> usize {
        self.x.cols
    }

    fn value(&self, w: &[f64]) -> f64 {
        let r = self.residual(w);
        self.factor() * r.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, w: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.value_and_gradient(w).1);
    }
}

/// `h_i(w) = w_i^2 - 1` for every feature.
pub fn binary_constraints(p: usize) -> ConstraintSystem {
    let eq = (0..p)
        .map(|i| Constraint::new(move |w| w[i] * w[i] - 1.0, move |w, g| g[i] = 2.0 * w[i]))
        .collect();
    ConstraintSystem::new(p, eq, vec![])
}

/// Fraction of coordinates whose sign matches `w*`; a zero weight never matches.
pub fn support_recovery(w_hat: &[f64], w_star: &[f64]) -> f64 {
    assert_eq!(w_hat.len(), w_star.len());
    let hits = w_hat
        .iter()
        .zip(w_star)
        .filter(|(w, s)| **w != 0.0 && w.signum() == **s)
        .count();
    hits as f64 / w_star.len() as f64
}

/// `||X_test w - y_test||^2 / n_test`.
pub fn test_mse(w_hat: &[f64], data: &RegressionDataset) -> f64 {
    let pred = data.x_test.mul_vec(w_hat);
    let sse: f64 = pred
        .iter()
        .zip(&data.y_test)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    sse / data.y_test.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_model_has_zero_residual() {
        let data = make_regression_with_noise(3, 40, 6, 0.0).unwrap();
        for scale in [LossScale::Sum, LossScale::Mean] {
            let obj = RegressionObjective::new(&data, scale);
            let (v, g) = obj.value_and_gradient(&data.w_star);
            assert!(v.abs() < 1e-20, "{v}");
            assert!(g.iter().all(|x| x.abs() < 1e-12));
        }
        assert!(test_mse(&data.w_star, &data) < 1e-20);
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let a = make_regression(11, 80, 20).unwrap();
        let b = make_regression(11, 80, 20).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, make_regression(12, 80, 20).unwrap());
        assert_eq!(a.x_train.rows, 64);
        assert_eq!(a.x_test.rows, 16);
        assert!(a.w_star.iter().all(|w| *w == 1.0 || *w == -1.0));
    }

    #[test]
    fn active_fraction_concentrates() {
        let data = make_regression(5, 5, 500).unwrap();
        let frac = data.w_star.iter().filter(|w| **w == 1.0).count() as f64 / 500.0;
        assert!((0.22..=0.38).contains(&frac), "{frac}");
    }

    #[test]
    fn constraint_violation() {
        let cs = binary_constraints(7);
        assert_eq!(
            cs.violation(&[1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0], 2.0)
                .unwrap(),
            0.0
        );
        assert!((cs.violation(&[0.0; 7], 2.0).unwrap() - 7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn recovery_examples() {
        let w = [1.0, -1.0, -1.0, 1.0];
        assert_eq!(support_recovery(&w, &w), 1.0);
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        assert_eq!(support_recovery(&neg, &w), 0.0);
        assert_eq!(support_recovery(&[0.9, 0.0, -0.2, 3.0], &w), 0.75);
    }

    #[test]
    fn rejects_tiny_datasets() {
        assert!(make_regression(0, 4, 3).is_err());
        assert!(make_regression(0, 10, 0).is_err());
    }
}
