use rayon::prelude::*;
use serde::Serialize;

use super::psi::{check_multiplier, evaluate, Eval};
use crate::error::Result;
use crate::types::{EmpiricalMeasure, Kind, RobustConfig};

/// Below this many samples the per-sample pass runs on the calling thread.
const PARALLEL_MIN_SAMPLES: usize = 512;

/// Closed interval of subgradients of the dual objective at one multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubgradientInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SubgradientInterval {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Dual objective, its excess part and subgradient bounds at one multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DualPoint {
    pub multiplier: f64,
    pub value: f64,
    pub psi_mean: f64,
    pub excess_mean: f64,
    pub slope: SubgradientInterval,
}

pub(crate) fn evaluate_dual(
    measure: &EmpiricalMeasure,
    multiplier: f64,
    config: &RobustConfig,
) -> Result<DualPoint> {
    check_multiplier(measure.kind(), multiplier)?;
    let samples = measure.samples();
    let scale = config.scale;
    let evals: Vec<Eval> = if samples.len() >= PARALLEL_MIN_SAMPLES {
        samples
            .par_iter()
            .map(|s| evaluate(s, multiplier, scale))
            .collect()
    } else {
        samples.iter().map(|s| evaluate(s, multiplier, scale)).collect()
    };
    let sum = config.summation;
    let column = |f: fn(&Eval) -> f64| -> f64 {
        let v: Vec<f64> = evals.iter().map(f).collect();
        sum.mean(&v)
    };
    let psi_mean = column(|e| e.value);
    let excess_mean = column(|e| e.excess);
    let lo = column(|e| e.slope_lo);
    let hi = column(|e| e.slope_hi);
    let delta = config.delta;
    Ok(DualPoint {
        multiplier,
        value: multiplier * delta + psi_mean,
        psi_mean,
        excess_mean,
        slope: SubgradientInterval {
            lo: delta + lo,
            hi: delta + hi,
        },
    })
}

/// `m * delta + mean_i Psi_m(z_i, y_i)`.
pub fn dual_objective(
    measure: &EmpiricalMeasure,
    multiplier: f64,
    config: &RobustConfig,
) -> Result<f64> {
    Ok(evaluate_dual(measure, multiplier, config)?.value)
}

/// Subdifferential of the dual objective at `multiplier`: `delta` plus the
/// mean over samples of the hull of active branch slopes.
///
/// For FBA at `multiplier = 0` the objective is only defined to the right;
/// the returned interval is `(-inf, G'(0+)]`.
pub fn subgradient_interval(
    measure: &EmpiricalMeasure,
    multiplier: f64,
    config: &RobustConfig,
) -> Result<SubgradientInterval> {
    let point = evaluate_dual(measure, multiplier, config)?;
    if measure.kind() == Kind::Fba && multiplier == 0.0 {
        // at 0 all branches tie; the right derivative is the largest slope
        return Ok(SubgradientInterval {
            lo: f64::NEG_INFINITY,
            hi: point.slope.hi,
        });
    }
    Ok(point.slope)
}
