//! Run traces and their text renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::solver::{CapReason, SolverConfig};

/// One recorded iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    /// Constraint violation `M(x)`.
    pub m: f64,
    /// Penalty function value `f + p M`.
    pub penalty: f64,
    pub p: f64,
    pub gamma: f64,
    pub grad_norm: f64,
}

/// A change of the penalty parameter (or an attempt that hit a cap).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyEvent {
    pub k: usize,
    pub p_before: f64,
    pub p_after: f64,
    pub multiplications: u32,
    pub capped: Option<CapReason>,
}

/// Source of the objective gradient fed to the penalty test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestGradient {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub final_x: Vec<f64>,
    pub final_f: f64,
    pub final_m: f64,
    pub final_p: f64,
    pub penalty_updates: usize,
    pub capped_updates: usize,
    pub wall_clock_secs: f64,
    pub seed: u64,
    pub test_gradient: TestGradient,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub name: String,
    pub config: SolverConfig,
    pub rows: Vec<TraceRow>,
    pub events: Vec<PenaltyEvent>,
    pub summary: RunSummary,
}

impl RunReport {
    pub fn last(&self) -> &TraceRow {
        self.rows
            .last()
            .expect("a report always holds the initial row")
    }

    pub fn penalty_column(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.p)
    }

    /// Running minimum of the objective column.
    pub fn running_min(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.rows
            .iter()
            .map(|r| {
                best = best.min(r.f);
                best
            })
            .collect()
    }

    /// `trace.csv`: `k,x1..xn,f,M,P,p,gamma,grad_norm`, floats with 17 significant digits.
    pub fn trace_csv(&self) -> String {
        let n = self.rows.first().map_or(0, |r| r.x.len());
        let mut out = String::from("k");
        for i in 1..=n {
            write!(out, ",x{i}").unwrap();
        }
        out.push_str(",f,M,P,p,gamma,grad_norm\n");
        for row in &self.rows {
            write!(out, "{}", row.k).unwrap();
            for v in row.x.iter().chain([
                &row.f,
                &row.m,
                &row.penalty,
                &row.p,
                &row.gamma,
                &row.grad_norm,
            ]) {
                out.push(',');
                out.push_str(&fmt_float(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Decimal text with 17 significant digits, which round-trips every f64.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips() {
        for v in [
            0.1,
            -1.0 / 3.0,
            1e-300,
            6.02214076e23,
            0.0,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_float(1.5), "1.5000000000000000e0");
    }
}
