//! Wasserstein radius calibration.
//!
//! A concentration bound for the empirical measure of `N` samples on a domain
//! of diameter `r` reads
//!
//! ```text
//! P(D(P, P_N) >= delta) ~ exp(-N (8r - 2 sqrt(16r^2 + 16 r delta + 24 r + 12 delta + 9) + 4 delta + 6) / (3 + 4r))
//! ```
//!
//! Setting the right-hand side to `1 - confidence` and solving for `delta`
//! gives the radius whose ball contains the true measure with the requested
//! confidence.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::EmpiricalMeasure;

const MAX_RADIUS: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusQuery {
    pub n_samples: usize,
    pub domain_radius: f64,
    pub confidence: f64,
}

impl RadiusQuery {
    pub fn new(n_samples: usize, domain_radius: f64, confidence: f64) -> Result<Self> {
        let q = Self {
            n_samples,
            domain_radius,
            confidence,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::validation("radius calibration needs N >= 1"));
        }
        if !(self.domain_radius > 0.0 && self.domain_radius.is_finite()) {
            return Err(Error::Range(format!(
                "domain radius must be positive and finite, got {}",
                self.domain_radius
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::validation(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Exponent rate `E(delta)` with `P ~ exp(-N E(delta))`.
///
/// With `a = 4r + 3` the numerator is `2a + 4 delta - 2 sqrt(a^2 + 4 a delta)`,
/// evaluated in the conjugate form `16 delta^2 / (2a + 4 delta + 2 sqrt(..))`
/// to avoid cancellation near `delta = 0`.
pub fn bound_exponent(domain_radius: f64, delta: f64) -> f64 {
    let a = 4.0 * domain_radius + 3.0;
    let root = (a * a + 4.0 * a * delta).sqrt();
    16.0 * delta * delta / ((2.0 * a + 4.0 * delta + 2.0 * root) * a)
}

/// Tail probability bound `exp(-N E(delta))`.
pub fn tail_bound(n_samples: usize, domain_radius: f64, delta: f64) -> f64 {
    (-(n_samples as f64) * bound_exponent(domain_radius, delta)).exp()
}

/// Radius `delta` at which the tail bound equals `1 - confidence`.
pub fn confidence_to_radius(query: &RadiusQuery) -> Result<f64> {
    query.validate()?;
    let n = query.n_samples as f64;
    let r = query.domain_radius;
    // N E(delta) = -ln(1 - confidence); E is strictly increasing on delta >= 0
    let target = -(-query.confidence).ln_1p();
    let excess = |delta: f64| n * bound_exponent(r, delta) - target;

    let mut hi = 1.0_f64;
    while excess(hi) < 0.0 {
        hi *= 2.0;
        if hi > MAX_RADIUS {
            return Err(Error::Range(format!(
                "confidence {} needs a radius beyond {MAX_RADIUS:e}",
                query.confidence
            )));
        }
    }
    let mut lo = 0.0_f64;
    loop {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint with the smaller residual in probability space
    let goal = 1.0 - query.confidence;
    let residual = |d: f64| (tail_bound(query.n_samples, r, d) - goal).abs();
    Ok(if residual(lo) <= residual(hi) { lo } else { hi })
}

/// Diameter of the sample support under `sqrt(S |y - y'|^2 + |z - z'|^2)`.
pub fn empirical_domain_radius(measure: &EmpiricalMeasure, scale: f64) -> Result<f64> {
    if measure.len() < 2 {
        return Err(Error::validation(
            "empirical domain radius needs at least two samples",
        ));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::validation(format!("scale must be positive, got {scale}")));
    }
    let samples = measure.samples();
    let max_sq = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let a = &samples[i];
            samples[i + 1..]
                .iter()
                .map(|b| {
                    let dz: f64 = a
                        .z()
                        .iter()
                        .zip(b.z())
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum();
                    let dy = a.y().alive().abs_diff(b.y().alive()) as f64;
                    scale * dy + dz
                })
                .fold(0.0_f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(max_sq.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusRow {
    pub confidence: f64,
    pub delta: f64,
}

/// One radius per confidence level, in input order.
pub fn radius_table(
    n_samples: usize,
    domain_radius: f64,
    confidences: &[f64],
) -> Result<Vec<RadiusRow>> {
    confidences
        .iter()
        .map(|&confidence| {
            let q = RadiusQuery::new(n_samples, domain_radius, confidence)?;
            Ok(RadiusRow {
                confidence,
                delta: confidence_to_radius(&q)?,
            })
        })
        .collect()
}

/// Confidence levels of the published radius tables.
pub const TABLE_CONFIDENCES: [f64; 6] = [0.80, 0.85, 0.90, 0.95, 0.99, 0.999];
