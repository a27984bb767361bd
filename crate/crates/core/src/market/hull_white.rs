//! One-factor Hull-White short rate, `r(t) = x(t) + phi(t)`.
//!
//! `x` is an Ornstein-Uhlenbeck state started at zero and `phi` is fitted to
//! the initial discount curve. The pair `(x, int_0^t x)` is jointly Gaussian
//! across a step, so paths are sampled from the exact transition.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curves::{CurveSet, DiscountCurve};
use super::rng::{substream, Factor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullWhiteParams {
    #[serde(default = "default_mean_reversion")]
    pub mean_reversion: f64,
    #[serde(default = "default_volatility")]
    pub volatility: f64,
    pub n_paths: usize,
}

fn default_mean_reversion() -> f64 {
    0.2
}

fn default_volatility() -> f64 {
    0.015
}

impl HullWhiteParams {
    pub fn new(mean_reversion: f64, volatility: f64, n_paths: usize) -> Result<Self> {
        let p = Self {
            mean_reversion,
            volatility,
            n_paths,
        };
        p.validate()?;
        Ok(p)
    }

    /// `sigma = 0` is accepted as the deterministic limit.
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_reversion > 0.0 && self.mean_reversion.is_finite()) {
            return Err(Error::validation(format!(
                "mean reversion must be positive, got {}",
                self.mean_reversion
            )));
        }
        if !(self.volatility >= 0.0 && self.volatility.is_finite()) {
            return Err(Error::validation(format!(
                "volatility must be nonnegative, got {}",
                self.volatility
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::validation("n_paths must be at least 1"));
        }
        Ok(())
    }

    pub fn model<'a>(&self, curve: &'a DiscountCurve) -> HullWhite<'a> {
        HullWhite {
            a: self.mean_reversion,
            sigma: self.volatility,
            curve,
        }
    }
}

/// Closed-form pieces of the model on a given initial curve.
#[derive(Debug, Clone, Copy)]
pub struct HullWhite<'a> {
    pub a: f64,
    pub sigma: f64,
    pub curve: &'a DiscountCurve,
}

impl HullWhite<'_> {
    pub fn b(&self, t: f64, maturity: f64) -> f64 {
        -(-self.a * (maturity - t)).exp_m1() / self.a
    }

    /// Variance of `int_t^T x(u) du` given `x(t)`.
    pub fn v(&self, t: f64, maturity: f64) -> f64 {
        let a = self.a;
        let tau = maturity - t;
        let s2 = self.sigma * self.sigma;
        s2 / (a * a)
            * (tau + 2.0 / a * (-a * tau).exp() - 0.5 / a * (-2.0 * a * tau).exp() - 1.5 / a)
    }

    pub fn phi(&self, t: f64) -> f64 {
        let a = self.a;
        let g = self.sigma / a * (-(-a * t).exp_m1());
        self.curve.forward(t) + 0.5 * g * g
    }

    /// Zero-coupon bond `P(t, T)` given the state `x(t)`.
    pub fn bond(&self, t: f64, maturity: f64, x: f64) -> f64 {
        if maturity <= t {
            return 1.0;
        }
        let ratio = self.curve.df(maturity) / self.curve.df(t);
        let adj = 0.5 * (self.v(t, maturity) - self.v(0.0, maturity) + self.v(0.0, t));
        ratio * (adj - self.b(t, maturity) * x).exp()
    }

    /// Bank-account discount `exp(-int_0^t r)` given `int_0^t x`.
    pub fn numeraire_df(&self, t: f64, integral: f64) -> f64 {
        self.curve.df(t) * (-0.5 * self.v(0.0, t) - integral).exp()
    }

    /// Lower-triangular factor of the step covariance of `(x, int x)`.
    fn step_factor(&self, dt: f64) -> [f64; 3] {
        let a = self.a;
        let s2 = self.sigma * self.sigma;
        let e1 = (-a * dt).exp();
        let e2 = (-2.0 * a * dt).exp();
        let b = (1.0 - e1) / a;
        let var_x = s2 * (1.0 - e2) / (2.0 * a);
        let var_i = s2 / (a * a) * (dt - 2.0 * b + (1.0 - e2) / (2.0 * a));
        let cov = s2 / (2.0 * a * a) * (1.0 - e1) * (1.0 - e1);
        let l11 = var_x.sqrt();
        let l21 = if l11 > 0.0 { cov / l11 } else { 0.0 };
        let l22 = (var_i - l21 * l21).max(0.0).sqrt();
        [l11, l21, l22]
    }
}

/// Simulated state on a time grid starting at zero, row-major by path.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePaths {
    times: Vec<f64>,
    n_paths: usize,
    x: Vec<f64>,
    integral: Vec<f64>,
}

impl RatePaths {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn x(&self, path: usize, step: usize) -> f64 {
        self.x[path * self.times.len() + step]
    }

    pub fn integral(&self, path: usize, step: usize) -> f64 {
        self.integral[path * self.times.len() + step]
    }

    /// Index of `t` in the simulation grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = self.times.partition_point(|&s| s < t - 1e-10);
        (i < self.times.len() && (self.times[i] - t).abs() <= 1e-10).then_some(i)
    }

    pub fn short_rate(&self, model: &HullWhite, path: usize, step: usize) -> f64 {
        self.x(path, step) + model.phi(self.times[step])
    }

    pub fn numeraire_df(&self, model: &HullWhite, path: usize, step: usize) -> f64 {
        model.numeraire_df(self.times[step], self.integral(path, step))
    }

    /// `n_paths x times` matrix of short rates.
    pub fn short_rates(&self, model: &HullWhite) -> Vec<Vec<f64>> {
        (0..self.n_paths)
            .map(|p| (0..self.times.len()).map(|k| self.short_rate(model, p, k)).collect())
            .collect()
    }
}

/// Simulate on the given times (zero is prepended when missing).
pub fn simulate_paths(
    params: &HullWhiteParams,
    curves: &CurveSet,
    times: &[f64],
    seed: u64,
) -> Result<RatePaths> {
    params.validate()?;
    let mut grid = Vec::with_capacity(times.len() + 1);
    if times.first().is_none_or(|&t| t > 0.0) {
        grid.push(0.0);
    }
    for &t in times {
        if !(t.is_finite() && t >= 0.0) || grid.last().is_some_and(|&p| t <= p) {
            return Err(Error::validation(format!(
                "simulation times must be finite, nonnegative and increasing (at {t})"
            )));
        }
        grid.push(t);
    }
    let model = params.model(&curves.discount);
    let factors: Vec<[f64; 3]> = grid.windows(2).map(|w| model.step_factor(w[1] - w[0])).collect();
    let decay: Vec<(f64, f64)> = grid
        .windows(2)
        .map(|w| {
            let dt = w[1] - w[0];
            ((-model.a * dt).exp(), model.b(0.0, dt))
        })
        .collect();

    let steps = grid.len();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..params.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = substream(seed, Factor::Rates, path as u64);
            let mut xs = Vec::with_capacity(steps);
            let mut is = Vec::with_capacity(steps);
            let (mut x, mut integral) = (0.0, 0.0);
            xs.push(x);
            is.push(integral);
            for (f, &(e, b)) in factors.iter().zip(&decay) {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                integral += b * x + f[1] * z1 + f[2] * z2;
                x = e * x + f[0] * z1;
                xs.push(x);
                is.push(integral);
            }
            (xs, is)
        })
        .collect();

    let mut x = Vec::with_capacity(params.n_paths * steps);
    let mut integral = Vec::with_capacity(params.n_paths * steps);
    for (xs, is) in rows {
        x.extend(xs);
        integral.extend(is);
    }
    Ok(RatePaths {
        times: grid,
        n_paths: params.n_paths,
        x,
        integral,
    })
}
