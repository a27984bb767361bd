//! Simulation run configuration (TOML or JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::curves::{bootstrap_par_curve, hazard_from_cds, CurveSet, SpreadCurve};
use super::hull_white::HullWhiteParams;
use super::swap::SwapSpec;
use crate::error::{Error, Result};
use crate::types::ObservationGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParCurve {
    pub tenors: Vec<f64>,
    /// Decimal par swap rates.
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdsSpreads {
    pub counterparty_bp: f64,
    pub firm_bp: f64,
}

fn default_recovery() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub swap_curve: ParCurve,
    pub funding_curve: SpreadCurve,
    pub cds: CdsSpreads,
    #[serde(default = "default_recovery")]
    pub recovery: f64,
}

/// Either explicit dates (starting at 0) or a uniform step to a horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Times { times: Vec<f64> },
    Uniform { horizon: f64, step: f64 },
}

impl GridSpec {
    pub fn build(&self) -> Result<ObservationGrid> {
        match self {
            GridSpec::Times { times } => ObservationGrid::new(times.clone()),
            GridSpec::Uniform { horizon, step } => ObservationGrid::uniform(*horizon, *step),
        }
    }
}

fn default_unit() -> f64 {
    1.0
}

fn default_quantile() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub seed: u64,
    /// Monetary divisor applied to exposures before funding scaling
    /// (e.g. 1000 to report in thousands).
    #[serde(default = "default_unit")]
    pub exposure_unit: f64,
    /// Quantile used for PFE profiles.
    #[serde(default = "default_quantile")]
    pub pfe_quantile: f64,
    pub grid: GridSpec,
    pub hull_white: HullWhiteParams,
    pub market: MarketConfig,
    pub portfolio: Vec<SwapSpec>,
}

impl SimulationConfig {
    /// Parse by extension: `.json` as JSON, anything else as TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config = if json {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        };
        config.map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("{e}"))
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exposure_unit > 0.0 && self.exposure_unit.is_finite()) {
            return Err(Error::Config(format!(
                "exposure_unit must be positive, got {}",
                self.exposure_unit
            )));
        }
        if !(self.pfe_quantile > 0.0 && self.pfe_quantile < 1.0) {
            return Err(Error::Config(format!(
                "pfe_quantile must lie in (0, 1), got {}",
                self.pfe_quantile
            )));
        }
        self.hull_white.validate()?;
        let grid = self.grid.build()?;
        if self.portfolio.is_empty() {
            return Err(Error::Config("portfolio has no swaps".into()));
        }
        for (i, s) in self.portfolio.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::Config(format!("portfolio[{i}]: {e}")))?;
            if s.maturity > grid.horizon() + 1e-10 {
                return Err(Error::Config(format!(
                    "portfolio[{i}] matures at {} beyond the grid horizon {}",
                    s.maturity,
                    grid.horizon()
                )));
            }
        }
        Ok(())
    }

    pub fn observation_grid(&self) -> Result<ObservationGrid> {
        self.grid.build()
    }

    pub fn build_curves(&self) -> Result<CurveSet> {
        build_curves(&self.market)
    }
}

pub fn build_curves(market: &MarketConfig) -> Result<CurveSet> {
    let discount = bootstrap_par_curve(&market.swap_curve.tenors, &market.swap_curve.rates)?;
    let funding = SpreadCurve::new(
        market.funding_curve.tenors.clone(),
        market.funding_curve.spreads.clone(),
    )?;
    CurveSet::new(
        discount,
        funding,
        hazard_from_cds(market.cds.counterparty_bp, market.recovery)?,
        hazard_from_cds(market.cds.firm_bp, market.recovery)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 7
exposure_unit = 1000.0

[grid]
horizon = 5.0
step = 0.5

[hull_white]
n_paths = 10

[market]
swap_curve = { tenors = [1, 2, 3, 5, 7, 10, 30], rates = [0.0213, 0.0195, 0.0189, 0.0188, 0.0194, 0.0205, 0.0227] }
funding_curve = { tenors = [1, 2, 3, 5, 7, 10], spreads = [0.0013, 0.0021, 0.0031, 0.0059, 0.0084, 0.0107] }
cds = { counterparty_bp = 53, firm_bp = 53 }

[[portfolio]]
notional = 500000
fixed_rate = 0.02
maturity = 5
payer_fixed = true
"#;

    #[test]
    fn parses_toml_with_defaults() {
        let c = SimulationConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.hull_white.mean_reversion, 0.2);
        assert_eq!(c.hull_white.volatility, 0.015);
        assert_eq!(c.market.recovery, 0.4);
        assert_eq!(c.portfolio[0].pay_frequency, 1);
        assert_eq!(c.observation_grid().unwrap().n(), 10);
        let curves = c.build_curves().unwrap();
        assert!((curves.hazard_cpty - 0.0053 / 0.6).abs() < 1e-16);
        assert_eq!(curves.funding_spread.spread(5.0), 0.0059);
    }

    #[test]
    fn json_round_trip() {
        let c = SimulationConfig::from_toml(SAMPLE).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(SimulationConfig::from_json(&json).unwrap(), c);
        let explicit = json.replace(r#"{"horizon":5.0,"step":0.5}"#, r#"{"times":[0.0,1.0,5.0]}"#);
        assert_eq!(SimulationConfig::from_json(&explicit).unwrap().observation_grid().unwrap().n(), 2);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let broken = SAMPLE.replace("n_paths = 10", "n_paths = \"ten\"");
        let msg = SimulationConfig::from_toml(&broken).unwrap_err().to_string();
        assert!(msg.contains("line"), "{msg}");
        let bad = SAMPLE.replace("maturity = 5", "maturity = 9");
        assert!(SimulationConfig::from_toml(&bad).is_err());
        let typo = SAMPLE.replace("payer_fixed", "payer_fxed");
        assert!(SimulationConfig::from_toml(&typo).is_err());
        let msg = SimulationConfig::from_json("{\n  \"seed\": 1,\n  oops\n}").unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }
}
