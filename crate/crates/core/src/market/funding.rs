//! Funding scaling, default-time sampling and measure assembly.

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::curves::SpreadCurve;
use super::rng::{substream, Factor};
use super::swap::Exposures;
use crate::error::{Error, Result};
use crate::types::{survival_vector_from_times, EmpiricalMeasure, Kind, ObservationGrid, SurvivalVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Cost,
    Benefit,
}

/// `z_k = s(t_k) (t_k - t_{k-1}) X(t_k)` for `k = 1..=n`, using the
/// discounted positive (cost) or negative (benefit) exposure.
pub fn funding_scale(
    exposures: &Exposures,
    spread: &SpreadCurve,
    grid: &ObservationGrid,
    side: Side,
) -> Result<Vec<Vec<f64>>> {
    if exposures.times.len() != grid.times().len()
        || exposures
            .times
            .iter()
            .zip(grid.times())
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::validation("exposure dates do not match the observation grid"));
    }
    let weights: Vec<f64> = grid
        .exposure_times()
        .iter()
        .zip(grid.accruals())
        .map(|(&t, dt)| spread.spread(t) * dt)
        .collect();
    let source = match side {
        Side::Cost => &exposures.positive,
        Side::Benefit => &exposures.negative,
    };
    Ok(source
        .iter()
        .map(|row| row[1..].iter().zip(&weights).map(|(x, w)| w * x).collect())
        .collect())
}

/// Joint survival vectors from independent exponential default times.
pub fn sample_survival(
    hazard_cpty: f64,
    hazard_firm: f64,
    n_samples: usize,
    seed: u64,
    grid: &ObservationGrid,
) -> Result<Vec<SurvivalVector>> {
    let dist = |l: f64| {
        Exp::new(l)
            .ok()
            .filter(|_| l > 0.0)
            .ok_or_else(|| Error::validation(format!("hazard rate must be positive, got {l}")))
    };
    let (dc, df) = (dist(hazard_cpty)?, dist(hazard_firm)?);
    (0..n_samples)
        .map(|i| {
            let tau_c: f64 = dc.sample(&mut substream(seed, Factor::CounterpartyDefault, i as u64));
            let tau_f: f64 = df.sample(&mut substream(seed, Factor::FirmDefault, i as u64));
            survival_vector_from_times(tau_c.max(f64::MIN_POSITIVE), tau_f.max(f64::MIN_POSITIVE), grid)
        })
        .collect()
}

/// Pair exposure rows with survival vectors, checking the kind's sign rule.
pub fn assemble_measure(
    z: Vec<Vec<f64>>,
    survival: &[SurvivalVector],
    kind: Kind,
    grid: &ObservationGrid,
) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::from_rows(kind, z, survival, grid.clone())
}

/// Rowwise `z+ + z-`.
pub fn net_rows(cost: &[Vec<f64>], benefit: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if cost.len() != benefit.len() {
        return Err(Error::validation("cost and benefit row counts differ"));
    }
    Ok(cost
        .iter()
        .zip(benefit)
        .map(|(c, b)| c.iter().zip(b).map(|(x, y)| x + y).collect())
        .collect())
}

/// Per-date mean and PFE of an `N x n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileStats {
    pub quantile: f64,
    pub mean: Vec<f64>,
    pub pfe: Vec<f64>,
    /// `sum_k pfe_k`.
    pub integrated_pfe: f64,
}

/// Lower nearest-rank quantile: the `ceil(q N)`-th smallest value.
pub fn lower_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

pub fn exposure_stats(matrix: &[Vec<f64>], quantile: f64) -> Result<ProfileStats> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::validation(format!(
            "quantile must lie in (0, 1), got {quantile}"
        )));
    }
    let Some(first) = matrix.first() else {
        return Err(Error::validation("exposure matrix has no rows"));
    };
    let cols = first.len();
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::validation("exposure matrix rows differ in length"));
    }
    let n = matrix.len() as f64;
    let mut mean = Vec::with_capacity(cols);
    let mut pfe = Vec::with_capacity(cols);
    let mut column = Vec::with_capacity(matrix.len());
    for k in 0..cols {
        column.clear();
        column.extend(matrix.iter().map(|r| r[k]));
        mean.push(crate::sum::pairwise_sum(&column) / n);
        column.sort_by(f64::total_cmp);
        pfe.push(lower_quantile(&column, quantile));
    }
    let integrated_pfe = pfe.iter().sum();
    Ok(ProfileStats {
        quantile,
        mean,
        pfe,
        integrated_pfe,
    })
}

/// Stats of the exposure rows of a measure.
pub fn measure_stats(measure: &EmpiricalMeasure, quantile: f64) -> Result<ProfileStats> {
    let rows: Vec<Vec<f64>> = measure.samples().iter().map(|s| s.z().to_vec()).collect();
    exposure_stats(&rows, quantile)
}
