//! Reductions with a fixed, order-independent evaluation shape.

use serde::{Deserialize, Serialize};

/// How per-sample contributions are reduced into means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Summation {
    /// Recursive pairwise summation over the sample order.
    #[default]
    Pairwise,
    /// Sequential Neumaier-compensated summation.
    Compensated,
}

impl Summation {
    pub fn sum(self, values: &[f64]) -> f64 {
        match self {
            Summation::Pairwise => pairwise_sum(values),
            Summation::Compensated => compensated_sum(values),
        }
    }

    pub fn mean(self, values: &[f64]) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        self.sum(values) / values.len() as f64
    }
}

const PAIRWISE_BLOCK: usize = 32;

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Neumaier's variant of Kahan summation.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}
