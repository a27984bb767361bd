//! Vanilla fixed-float swaps and netted portfolio exposure.
//!
//! Floating coupons are simple-compounded and fixed in advance, so a swap's
//! floating leg between resets is `P(t, T_j) / P(T_{j-1}, T_j) - P(t, T_m)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curves::DiscountCurve;
use super::hull_white::{HullWhite, HullWhiteParams, RatePaths};
use crate::error::{Error, Result};
use crate::types::ObservationGrid;

const TIME_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapSpec {
    pub notional: f64,
    pub fixed_rate: f64,
    pub maturity: f64,
    pub payer_fixed: bool,
    #[serde(default = "default_frequency")]
    pub pay_frequency: u32,
}

fn default_frequency() -> u32 {
    1
}

impl SwapSpec {
    pub fn new(
        notional: f64,
        fixed_rate: f64,
        maturity: f64,
        payer_fixed: bool,
        pay_frequency: u32,
    ) -> Result<Self> {
        let s = Self {
            notional,
            fixed_rate,
            maturity,
            payer_fixed,
            pay_frequency,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.notional > 0.0 && self.notional.is_finite()) {
            return Err(Error::validation(format!(
                "swap notional must be positive, got {}",
                self.notional
            )));
        }
        if !self.fixed_rate.is_finite() {
            return Err(Error::validation("swap fixed rate must be finite"));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::validation(format!(
                "swap maturity must be positive, got {}",
                self.maturity
            )));
        }
        if ![1, 2, 4].contains(&self.pay_frequency) {
            return Err(Error::validation(format!(
                "pay frequency must be 1, 2 or 4, got {}",
                self.pay_frequency
            )));
        }
        let periods = self.maturity * f64::from(self.pay_frequency);
        if (periods - periods.round()).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "maturity {} is not a whole number of {}-per-year periods",
                self.maturity, self.pay_frequency
            )));
        }
        Ok(())
    }

    pub fn accrual(&self) -> f64 {
        1.0 / f64::from(self.pay_frequency)
    }

    /// Payment dates `T_1, ..., T_m` (also the floating resets, with `T_0 = 0`).
    pub fn payment_times(&self) -> Vec<f64> {
        let m = (self.maturity * f64::from(self.pay_frequency)).round() as usize;
        (1..=m).map(|i| i as f64 * self.accrual()).collect()
    }

    /// Reset dates `T_0 = 0, ..., T_{m-1}`.
    pub fn reset_times(&self) -> Vec<f64> {
        let mut t = vec![0.0];
        let pay = self.payment_times();
        t.extend_from_slice(&pay[..pay.len() - 1]);
        t
    }

    /// Fixed rate making the swap worth zero on `curve` at time zero.
    pub fn par_rate(&self, curve: &DiscountCurve) -> f64 {
        let pay = self.payment_times();
        let annuity: f64 = pay.iter().map(|&t| self.accrual() * curve.df(t)).sum();
        (1.0 - curve.df(self.maturity)) / annuity
    }

    pub fn with_fixed_rate(&self, fixed_rate: f64) -> Self {
        Self {
            fixed_rate,
            ..self.clone()
        }
    }

    fn sign(&self) -> f64 {
        if self.payer_fixed {
            1.0
        } else {
            -1.0
        }
    }

    /// Value at `t` given bond prices `bond(T)` = `P(t, T)` and the fixing
    /// discount factor `P(T_{j-1}, T_j)` of the current period.
    fn value_with(&self, t: f64, bond: impl Fn(f64) -> f64, fixing: impl Fn(f64, f64) -> f64) -> f64 {
        let pay = self.payment_times();
        let j = pay.partition_point(|&p| p <= t + TIME_TOL);
        if j == pay.len() {
            return 0.0;
        }
        let reset = if j == 0 { 0.0 } else { pay[j - 1] };
        let fixed: f64 = pay[j..].iter().map(|&p| bond(p)).sum::<f64>() * self.accrual() * self.fixed_rate;
        let float = bond(pay[j]) / fixing(reset, pay[j]) - bond(self.maturity);
        self.sign() * self.notional * (float - fixed)
    }

    /// Value at `t` with all rates read off the initial curve.
    pub fn deterministic_value(&self, curve: &DiscountCurve, t: f64) -> f64 {
        let base = curve.df(t);
        self.value_with(
            t,
            |p| curve.df(p) / base,
            |r, p| curve.df(p) / curve.df(r),
        )
    }
}

/// Times the simulator must visit: the grid plus every reset date.
pub fn simulation_times(grid: &ObservationGrid, portfolio: &[SwapSpec]) -> Vec<f64> {
    let mut times: Vec<f64> = grid.times().to_vec();
    for s in portfolio {
        times.extend(s.reset_times());
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= TIME_TOL);
    times
}

/// Netted portfolio values on every path and grid date `t_0 ..= t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Exposures {
    pub times: Vec<f64>,
    /// Undiscounted netting-set value `V_i(t_k)`.
    pub value: Vec<Vec<f64>>,
    /// `D_i(t_k) max(V, 0)`.
    pub positive: Vec<Vec<f64>>,
    /// `D_i(t_k) min(V, 0)`.
    pub negative: Vec<Vec<f64>>,
}

impl Exposures {
    pub fn n_paths(&self) -> usize {
        self.value.len()
    }

    /// Every monetary entry divided by `unit`.
    pub fn in_units(&self, unit: f64) -> Self {
        let div = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.iter().map(|r| r.iter().map(|v| v / unit).collect()).collect()
        };
        Self {
            times: self.times.clone(),
            value: div(&self.value),
            positive: div(&self.positive),
            negative: div(&self.negative),
        }
    }
}

fn check_portfolio(portfolio: &[SwapSpec], grid: &ObservationGrid) -> Result<()> {
    if portfolio.is_empty() {
        return Err(Error::validation("portfolio has no swaps"));
    }
    for (i, s) in portfolio.iter().enumerate() {
        s.validate()?;
        if s.maturity > grid.horizon() + TIME_TOL {
            return Err(Error::validation(format!(
                "swap {i} matures at {} beyond the grid horizon {}",
                s.maturity,
                grid.horizon()
            )));
        }
    }
    Ok(())
}

/// Netting-set exposure along simulated paths. `paths` must contain every
/// grid date and every reset date (see [`simulation_times`]).
pub fn portfolio_exposure(
    paths: &RatePaths,
    portfolio: &[SwapSpec],
    params: &HullWhiteParams,
    curve: &DiscountCurve,
    grid: &ObservationGrid,
) -> Result<Exposures> {
    check_portfolio(portfolio, grid)?;
    let locate = |t: f64| {
        paths.index_of(t).ok_or_else(|| {
            Error::validation(format!("simulation grid is missing time {t}"))
        })
    };
    let grid_idx = grid.times().iter().map(|&t| locate(t)).collect::<Result<Vec<_>>>()?;
    for s in portfolio {
        for r in s.reset_times() {
            locate(r)?;
        }
    }
    let model = params.model(curve);
    let times = grid.times().to_vec();

    let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..paths.n_paths())
        .into_par_iter()
        .map(|p| {
            let mut value = Vec::with_capacity(times.len());
            let mut pos = Vec::with_capacity(times.len());
            let mut neg = Vec::with_capacity(times.len());
            for (&t, &k) in times.iter().zip(&grid_idx) {
                let v: f64 = portfolio
                    .iter()
                    .map(|s| path_value(s, &model, paths, p, t, k))
                    .sum();
                let d = paths.numeraire_df(&model, p, k);
                value.push(v);
                pos.push(d * v.max(0.0));
                neg.push(d * v.min(0.0));
            }
            (value, pos, neg)
        })
        .collect();

    let mut out = Exposures {
        times,
        value: Vec::with_capacity(rows.len()),
        positive: Vec::with_capacity(rows.len()),
        negative: Vec::with_capacity(rows.len()),
    };
    for (v, p, n) in rows {
        out.value.push(v);
        out.positive.push(p);
        out.negative.push(n);
    }
    Ok(out)
}

fn path_value(
    swap: &SwapSpec,
    model: &HullWhite,
    paths: &RatePaths,
    path: usize,
    t: f64,
    step: usize,
) -> f64 {
    let x = paths.x(path, step);
    swap.value_with(
        t,
        |m| model.bond(t, m, x),
        |r, m| {
            let k = paths.index_of(r).expect("reset dates checked above");
            model.bond(r, m, paths.x(path, k))
        },
    )
}

/// Portfolio value at each grid date with rates read off the initial curve.
pub fn deterministic_profile(
    portfolio: &[SwapSpec],
    curve: &DiscountCurve,
    grid: &ObservationGrid,
) -> Result<Vec<f64>> {
    check_portfolio(portfolio, grid)?;
    Ok(grid
        .times()
        .iter()
        .map(|&t| portfolio.iter().map(|s| s.deterministic_value(curve, t)).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::curves::{bootstrap_par_curve, CurveSet, SpreadCurve};
    use crate::market::hull_white::simulate_paths;

    fn curve() -> DiscountCurve {
        bootstrap_par_curve(
            &[1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 30.0],
            &[0.0213, 0.0195, 0.0189, 0.0188, 0.0194, 0.0205, 0.0227],
        )
        .unwrap()
    }

    fn curves() -> CurveSet {
        CurveSet::new(curve(), SpreadCurve::flat(0.01).unwrap(), 0.01, 0.01).unwrap()
    }

    fn run(
        portfolio: &[SwapSpec],
        sigma: f64,
        n_paths: usize,
        grid: &ObservationGrid,
    ) -> Exposures {
        let c = curves();
        let params = HullWhiteParams::new(0.2, sigma, n_paths).unwrap();
        let paths = simulate_paths(&params, &c, &simulation_times(grid, portfolio), 3).unwrap();
        portfolio_exposure(&paths, portfolio, &params, &c.discount, grid).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(SwapSpec::new(0.0, 0.02, 5.0, true, 1).is_err());
        assert!(SwapSpec::new(1.0, 0.02, 0.0, true, 1).is_err());
        assert!(SwapSpec::new(1.0, 0.02, 5.0, true, 3).is_err());
        assert!(SwapSpec::new(1.0, 0.02, 5.3, true, 2).is_err());
        let s = SwapSpec::new(1.0, 0.02, 1.5, true, 2).unwrap();
        assert_eq!(s.payment_times(), vec![0.5, 1.0, 1.5]);
        assert_eq!(s.reset_times(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn at_market_swap_is_worth_zero() {
        let c = curve();
        for freq in [1, 2, 4] {
            let s = SwapSpec::new(1e6, 0.0, 7.0, true, freq).unwrap();
            let s = s.with_fixed_rate(s.par_rate(&c));
            assert!(s.deterministic_value(&c, 0.0).abs() < 1e-10 * 1e6);
            let grid = ObservationGrid::uniform(7.0, 0.25).unwrap();
            let e = run(&[s], 0.015, 4, &grid);
            for row in &e.value {
                assert!(row[0].abs() < 1e-10 * 1e6);
            }
        }
    }

    #[test]
    fn payer_and_receiver_net_to_zero() {
        let pay = SwapSpec::new(5e5, 0.025, 6.0, true, 2).unwrap();
        let rec = SwapSpec {
            payer_fixed: false,
            ..pay.clone()
        };
        let grid = ObservationGrid::uniform(6.0, 0.5).unwrap();
        let e = run(&[pay, rec], 0.015, 50, &grid);
        for row in e.value.iter().chain(&e.positive).chain(&e.negative) {
            assert!(row.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn two_period_swap_by_hand() {
        // flat 3% annual compounding: DF(t) = 1.03^-t
        let c = DiscountCurve::new(&[1.0, 2.0, 3.0], &[1.03f64.powi(-1), 1.03f64.powi(-2), 1.03f64.powi(-3)])
            .unwrap();
        let s = SwapSpec::new(100.0, 0.025, 2.0, true, 1).unwrap();
        // at t = 0: floating pays 3 at each date, fixed pays 2.5
        let hand0 = 0.5 / 1.03 + 0.5 / 1.03f64.powi(2);
        assert!((s.deterministic_value(&c, 0.0) - hand0).abs() < 1e-12);
        // at t = 0.5: both remaining flows, seen from 0.5
        let hand = hand0 * 1.03f64.powf(0.5);
        assert!((s.deterministic_value(&c, 0.5) - hand).abs() < 1e-12);
        // at t = 1: only the final net flow 0.5 remains
        assert!((s.deterministic_value(&c, 1.0) - 0.5 / 1.03).abs() < 1e-12);
        assert_eq!(s.deterministic_value(&c, 2.0), 0.0);
        // receiver is the mirror image
        let r = SwapSpec { payer_fixed: false, ..s };
        assert!((r.deterministic_value(&c, 0.0) + hand0).abs() < 1e-12);
    }

    #[test]
    fn zero_volatility_matches_deterministic_profile() {
        let portfolio = vec![
            SwapSpec::new(4e5, 0.02, 4.0, true, 2).unwrap(),
            SwapSpec::new(1e6, 0.025, 12.0, false, 1).unwrap(),
            SwapSpec::new(7e5, 0.022, 8.5, true, 4).unwrap(),
        ];
        let grid = ObservationGrid::uniform(12.0, 0.25).unwrap();
        let c = curve();
        let det = deterministic_profile(&portfolio, &c, &grid).unwrap();
        let e = run(&portfolio, 0.0, 2, &grid);
        for row in &e.value {
            for (v, d) in row.iter().zip(&det) {
                assert!((v - d).abs() < 1e-10 * 1e6, "{v} vs {d}");
            }
        }
        for (k, &t) in grid.times().iter().enumerate() {
            let disc = c.df(t) * det[k].max(0.0);
            assert!((e.positive[0][k] - disc).abs() < 1e-10 * 1e6);
        }
    }

    #[test]
    fn netting_is_linear_before_truncation() {
        let a = SwapSpec::new(6e5, 0.021, 5.0, true, 2).unwrap();
        let b = SwapSpec::new(9e5, 0.024, 9.0, false, 1).unwrap();
        let grid = ObservationGrid::uniform(9.0, 0.5).unwrap();
        let ea = run(&[a.clone()], 0.015, 40, &grid);
        let eb = run(&[b.clone()], 0.015, 40, &grid);
        let ab = run(&[a, b], 0.015, 40, &grid);
        for p in 0..40 {
            for k in 0..grid.times().len() {
                let sum = ea.value[p][k] + eb.value[p][k];
                assert!((ab.value[p][k] - sum).abs() <= 1e-9 * (1.0 + sum.abs()));
                assert!(ab.positive[p][k] <= ea.positive[p][k] + eb.positive[p][k] + 1e-9);
            }
        }
    }

    #[test]
    fn maturity_beyond_horizon_rejected() {
        let c = curves();
        let grid = ObservationGrid::uniform(5.0, 1.0).unwrap();
        let s = SwapSpec::new(1.0, 0.02, 6.0, true, 1).unwrap();
        let params = HullWhiteParams::new(0.2, 0.01, 1).unwrap();
        let paths = simulate_paths(&params, &c, &simulation_times(&grid, &[s.clone()]), 0).unwrap();
        assert!(portfolio_exposure(&paths, &[s], &params, &c.discount, &grid).is_err());
    }
}
