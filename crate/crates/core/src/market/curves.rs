//! Discount, funding-spread and hazard inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discount factors on increasing node times starting at `(0, 1)`,
/// log-linearly interpolated (piecewise flat forwards).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    times: Vec<f64>,
    log_dfs: Vec<f64>,
}

impl DiscountCurve {
    /// Nodes exclude `t = 0`, which is added with `DF = 1`.
    pub fn new(times: &[f64], dfs: &[f64]) -> Result<Self> {
        if times.len() != dfs.len() || times.is_empty() {
            return Err(Error::Curve(
                "discount curve needs matching, nonempty node arrays".into(),
            ));
        }
        let mut t = vec![0.0];
        let mut l: Vec<f64> = vec![0.0];
        for (&ti, &di) in times.iter().zip(dfs) {
            if !(ti > *t.last().unwrap()) {
                return Err(Error::Curve(format!("discount node times must increase (at {ti})")));
            }
            if !(di > 0.0 && di <= 1.0) {
                return Err(Error::Curve(format!("discount factor {di} at {ti} outside (0, 1]")));
            }
            if di > l.last().unwrap().exp() {
                return Err(Error::Curve(format!(
                    "discount factors must be nonincreasing (DF({ti}) = {di})"
                )));
            }
            t.push(ti);
            l.push(di.ln());
        }
        Ok(Self { times: t, log_dfs: l })
    }

    /// Continuously compounded flat curve, nodes at whole years to `horizon`.
    pub fn flat(rate: f64, horizon: f64) -> Result<Self> {
        let times: Vec<f64> = (1..=horizon.ceil() as usize).map(|k| k as f64).collect();
        let dfs: Vec<f64> = times.iter().map(|t| (-rate * t).exp()).collect();
        Self::new(&times, &dfs)
    }

    fn segment(&self, t: f64) -> usize {
        // index i with times[i] <= t < times[i + 1], clamped to the last segment
        let i = self.times.partition_point(|&x| x <= t);
        i.saturating_sub(1).min(self.times.len() - 2)
    }

    fn segment_forward(&self, i: usize) -> f64 {
        -(self.log_dfs[i + 1] - self.log_dfs[i]) / (self.times[i + 1] - self.times[i])
    }

    /// `P(0, t)`; beyond the last node the last forward is extended.
    pub fn df(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let i = self.segment(t);
        let f = self.segment_forward(i);
        (self.log_dfs[i] - f * (t - self.times[i])).exp()
    }

    /// Instantaneous forward `f(0, t)` (right-continuous at nodes).
    pub fn forward(&self, t: f64) -> f64 {
        self.segment_forward(self.segment(t.max(0.0)))
    }

    pub fn node_times(&self) -> &[f64] {
        &self.times[1..]
    }

    pub fn node_dfs(&self) -> Vec<f64> {
        self.log_dfs[1..].iter().map(|l| l.exp()).collect()
    }
}

/// Bootstrap a discount curve from par swap rates with an annual fixed leg.
///
/// Par rates at whole years between quoted tenors are linearly interpolated
/// (flat before the first quote); each year's discount factor then follows
/// from `s_j * sum_{i<=j} DF_i + DF_j = 1`.
pub fn bootstrap_par_curve(tenors: &[f64], par_rates: &[f64]) -> Result<DiscountCurve> {
    if tenors.len() != par_rates.len() || tenors.len() < 2 {
        return Err(Error::Curve(
            "par curve needs at least two (tenor, rate) nodes".into(),
        ));
    }
    if tenors.windows(2).any(|w| !(w[1] > w[0])) || !(tenors[0] > 0.0) {
        return Err(Error::Curve("par tenors must be positive and strictly increasing".into()));
    }
    if let Some(t) = tenors.iter().find(|t| (*t - t.round()).abs() > 1e-9) {
        return Err(Error::Curve(format!(
            "annual-leg bootstrap needs whole-year tenors, got {t}"
        )));
    }
    let last = tenors.last().unwrap().round() as usize;
    let mut times = Vec::with_capacity(last);
    let mut dfs: Vec<f64> = Vec::with_capacity(last);
    let mut annuity = 0.0;
    for year in 1..=last {
        let t = year as f64;
        let s = interp_linear_flat(tenors, par_rates, t);
        let df = (1.0 - s * annuity) / (1.0 + s);
        if !(df > 0.0) {
            return Err(Error::Curve(format!(
                "bootstrap implies nonpositive discount factor {df} at {t}y"
            )));
        }
        annuity += df;
        times.push(t);
        dfs.push(df);
    }
    DiscountCurve::new(&times, &dfs)
}

/// Linear interpolation, flat outside the node range.
pub(crate) fn interp_linear_flat(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Annualized funding spread by tenor (decimal), linear between nodes and
/// flat beyond them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadCurve {
    pub tenors: Vec<f64>,
    pub spreads: Vec<f64>,
}

impl SpreadCurve {
    pub fn new(tenors: Vec<f64>, spreads: Vec<f64>) -> Result<Self> {
        if tenors.len() != spreads.len() || tenors.is_empty() {
            return Err(Error::Curve("spread curve needs matching nonempty arrays".into()));
        }
        if tenors.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Curve("spread tenors must strictly increase".into()));
        }
        if let Some(s) = spreads.iter().find(|s| !(**s >= 0.0)) {
            return Err(Error::Curve(format!("funding spreads must be >= 0, got {s}")));
        }
        Ok(Self { tenors, spreads })
    }

    pub fn flat(spread: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![spread])
    }

    pub fn spread(&self, t: f64) -> f64 {
        interp_linear_flat(&self.tenors, &self.spreads, t)
    }
}

/// Constant default intensity implied by a CDS spread.
pub fn hazard_from_cds(spread_bp: f64, recovery: f64) -> Result<f64> {
    if !(spread_bp > 0.0) {
        return Err(Error::Curve(format!("CDS spread must be positive, got {spread_bp}bp")));
    }
    if !(0.0..1.0).contains(&recovery) {
        return Err(Error::Curve(format!("recovery must lie in [0, 1), got {recovery}")));
    }
    Ok(spread_bp * 1e-4 / (1.0 - recovery))
}

/// Everything the simulator needs from the market.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    pub discount: DiscountCurve,
    pub funding_spread: SpreadCurve,
    pub hazard_cpty: f64,
    pub hazard_firm: f64,
}

impl CurveSet {
    pub fn new(
        discount: DiscountCurve,
        funding_spread: SpreadCurve,
        hazard_cpty: f64,
        hazard_firm: f64,
    ) -> Result<Self> {
        if !(hazard_cpty > 0.0 && hazard_firm > 0.0) {
            return Err(Error::Curve(format!(
                "hazard rates must be positive (got {hazard_cpty}, {hazard_firm})"
            )));
        }
        Ok(Self {
            discount,
            funding_spread,
            hazard_cpty,
            hazard_firm,
        })
    }
}
