//! Monte Carlo generation of funding exposure measures for swap portfolios.
//!
//! Pipeline: par curve bootstrap, Hull-White paths, netted swap exposures,
//! funding scaling, independent default times, then one empirical measure
//! per adjustment kind.

pub mod config;
pub mod curves;
pub mod funding;
pub mod hull_white;
pub mod rng;
pub mod swap;

use serde::Serialize;

pub use config::{build_curves, GridSpec, MarketConfig, SimulationConfig};
pub use curves::{bootstrap_par_curve, hazard_from_cds, CurveSet, DiscountCurve, SpreadCurve};
pub use funding::{
    assemble_measure, exposure_stats, funding_scale, lower_quantile, measure_stats, net_rows,
    sample_survival, ProfileStats, Side,
};
pub use hull_white::{simulate_paths, HullWhite, HullWhiteParams, RatePaths};
pub use swap::{
    deterministic_profile, portfolio_exposure, simulation_times, Exposures, SwapSpec,
};

use crate::error::Result;
use crate::types::{EmpiricalMeasure, Kind, ObservationGrid, SurvivalVector};

/// Everything produced by one simulation run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: ObservationGrid,
    pub curves: CurveSet,
    /// Exposures in reporting units (divided by `exposure_unit`).
    pub exposures: Exposures,
    pub survival: Vec<SurvivalVector>,
    pub fca: EmpiricalMeasure,
    pub fba: EmpiricalMeasure,
    pub fva: EmpiricalMeasure,
}

impl Simulation {
    pub fn measure(&self, kind: Kind) -> &EmpiricalMeasure {
        match kind {
            Kind::Fca => &self.fca,
            Kind::Fba => &self.fba,
            Kind::Fva => &self.fva,
        }
    }

    /// Per-date exposure profile at `t_1 ..= t_n`.
    pub fn profile(&self, quantile: f64) -> Result<Vec<ProfileRow>> {
        let tail = |m: &[Vec<f64>]| -> Vec<Vec<f64>> { m.iter().map(|r| r[1..].to_vec()).collect() };
        let pos = exposure_stats(&tail(&self.exposures.positive), quantile)?;
        let neg = exposure_stats(&tail(&self.exposures.negative), quantile)?;
        let fca = measure_stats(&self.fca, quantile)?;
        let fba = measure_stats(&self.fba, quantile)?;
        let n = self.survival.len() as f64;
        Ok(self
            .grid
            .exposure_times()
            .iter()
            .enumerate()
            .map(|(k, &time)| ProfileRow {
                time,
                ee: pos.mean[k],
                nee: neg.mean[k],
                pfe: pos.pfe[k],
                funding_ee: fca.mean[k],
                funding_nee: fba.mean[k],
                funding_pfe: fca.pfe[k],
                survival: self.survival.iter().filter(|y| y.get(k) == 1).count() as f64 / n,
            })
            .collect())
    }
}

/// One line of the exposure profile report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub time: f64,
    /// Mean discounted positive exposure.
    pub ee: f64,
    /// Mean discounted negative exposure.
    pub nee: f64,
    /// Quantile of discounted positive exposure.
    pub pfe: f64,
    /// Mean funding cost `z+`.
    pub funding_ee: f64,
    /// Mean funding benefit `z-`.
    pub funding_nee: f64,
    /// Quantile of `z+`.
    pub funding_pfe: f64,
    /// Fraction of samples with both names alive.
    pub survival: f64,
}

/// Run the whole pipeline for a validated configuration.
pub fn simulate(config: &SimulationConfig) -> Result<Simulation> {
    config.validate()?;
    let grid = config.observation_grid()?;
    let curves = config.build_curves()?;
    let params = &config.hull_white;
    let times = simulation_times(&grid, &config.portfolio);
    let paths = simulate_paths(params, &curves, &times, config.seed)?;
    let exposures = portfolio_exposure(&paths, &config.portfolio, params, &curves.discount, &grid)?
        .in_units(config.exposure_unit);
    drop(paths);
    let cost = funding_scale(&exposures, &curves.funding_spread, &grid, Side::Cost)?;
    let benefit = funding_scale(&exposures, &curves.funding_spread, &grid, Side::Benefit)?;
    let net = net_rows(&cost, &benefit)?;
    let survival = sample_survival(
        curves.hazard_cpty,
        curves.hazard_firm,
        params.n_paths,
        config.seed,
        &grid,
    )?;
    let fca = assemble_measure(cost, &survival, Kind::Fca, &grid)?;
    let fba = assemble_measure(benefit, &survival, Kind::Fba, &grid)?;
    let fva = assemble_measure(net, &survival, Kind::Fva, &grid)?;
    Ok(Simulation {
        grid,
        curves,
        exposures,
        survival,
        fca,
        fba,
        fva,
    })
}
