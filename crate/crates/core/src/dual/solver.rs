//! Outer minimization of the dual objective over the multiplier.
//!
//! The objective is convex in the multiplier, hence unimodal in its logarithm.
//! A golden-section search on `ln m` over the configured bracket locates the
//! minimizer; a bisection on the sign of the subgradient then pins it to
//! machine precision inside the final golden bracket. The subgradient
//! interval at the result is reported as the optimality certificate.

use serde::Serialize;

use super::objective::{evaluate_dual, DualPoint, SubgradientInterval};
use super::psi::{psi, PsiValue};
use crate::error::{Error, Result};
use crate::types::{baseline_value_with, EmpiricalMeasure, Kind, RobustConfig};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
/// Golden search stops once the log-bracket is this narrow.
const GOLDEN_LOG_WIDTH: f64 = 1e-7;
const MAX_GOLDEN_ITERS: usize = 200;
const MAX_POLISH_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverInfo {
    /// Objective evaluations spent by the search.
    pub iterations: usize,
    /// Final multiplier bracket.
    pub bracket: [f64; 2],
    /// Subgradient interval at the reported multiplier.
    pub certificate_interval: [f64; 2],
}

/// Worst-case adjustment and its penalty decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustResult {
    pub kind: Kind,
    pub delta: f64,
    pub scale: f64,
    pub baseline: f64,
    pub robust_value: f64,
    /// Optimal dual multiplier; `+inf` when `delta = 0`.
    pub multiplier_star: f64,
    /// `robust_value - baseline`.
    pub penalty: f64,
    /// `multiplier_star * delta` (0 when `delta = 0`).
    pub delta_term: f64,
    /// Mean over samples of `Psi - <z, y>` at the optimum.
    pub psi_excess_mean: f64,
    pub n: usize,
    pub n_samples: usize,
    pub solver: SolverInfo,
    pub per_sample: Vec<PsiValue>,
}

/// Supremum of the expected funding adjustment over the Wasserstein ball of
/// radius `config.delta` around `measure`.
pub fn robust_adjustment(measure: &EmpiricalMeasure, config: &RobustConfig) -> Result<RobustResult> {
    config.validate()?;
    let baseline = baseline_value_with(measure, config.summation);
    if config.delta == 0.0 {
        return Ok(zero_radius(measure, config, baseline));
    }

    let search = Search::new(measure, config);
    let (point, info) = match measure.kind() {
        Kind::Fca | Kind::Fva => search.run()?,
        Kind::Fba => search.run_with_boundary()?,
    };

    let per_sample = measure
        .samples()
        .iter()
        .map(|s| psi(s, point.multiplier, config.scale))
        .collect::<Result<Vec<_>>>()?;
    let delta_term = point.multiplier * config.delta;
    Ok(RobustResult {
        kind: measure.kind(),
        delta: config.delta,
        scale: config.scale,
        baseline,
        robust_value: point.value,
        multiplier_star: point.multiplier,
        penalty: point.value - baseline,
        delta_term,
        psi_excess_mean: point.excess_mean,
        n: measure.n(),
        n_samples: measure.len(),
        solver: info,
        per_sample,
    })
}

/// `delta = 0`: the ball is the empirical measure itself. The infimum sits at
/// `m -> inf`, where every sample stays put.
fn zero_radius(measure: &EmpiricalMeasure, config: &RobustConfig, baseline: f64) -> RobustResult {
    let per_sample = measure
        .samples()
        .iter()
        .map(|s| {
            let alive = s.y().alive();
            let branch_values = (0..=s.n())
                .map(|l| if l == alive { 0.0 } else { f64::NEG_INFINITY })
                .collect();
            PsiValue {
                value: s.inner(),
                l_star: alive,
                cost_k: 0,
                branch_values,
            }
        })
        .collect();
    RobustResult {
        kind: measure.kind(),
        delta: 0.0,
        scale: config.scale,
        baseline,
        robust_value: baseline,
        multiplier_star: f64::INFINITY,
        penalty: 0.0,
        delta_term: 0.0,
        psi_excess_mean: 0.0,
        n: measure.n(),
        n_samples: measure.len(),
        solver: SolverInfo {
            iterations: 0,
            bracket: [config.multiplier_max, f64::INFINITY],
            certificate_interval: [0.0, 0.0],
        },
        per_sample,
    }
}

struct Search<'a> {
    measure: &'a EmpiricalMeasure,
    config: &'a RobustConfig,
    evaluations: std::cell::Cell<usize>,
}

impl<'a> Search<'a> {
    fn new(measure: &'a EmpiricalMeasure, config: &'a RobustConfig) -> Self {
        Self {
            measure,
            config,
            evaluations: std::cell::Cell::new(0),
        }
    }

    fn at(&self, m: f64) -> Result<DualPoint> {
        self.evaluations.set(self.evaluations.get() + 1);
        evaluate_dual(self.measure, m, self.config)
    }

    fn info(&self, bracket: [f64; 2], slope: SubgradientInterval) -> SolverInfo {
        SolverInfo {
            iterations: self.evaluations.get(),
            bracket,
            certificate_interval: [slope.lo, slope.hi],
        }
    }

    /// Interior minimization over `[multiplier_min, multiplier_max]`.
    fn run(&self) -> Result<(DualPoint, SolverInfo)> {
        let cfg = self.config;
        let (mut a, mut b) = (cfg.multiplier_min.ln(), cfg.multiplier_max.ln());
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut pc = self.at(c.exp())?;
        let mut pd = self.at(d.exp())?;
        let mut iters = 0;
        while b - a > GOLDEN_LOG_WIDTH && iters < MAX_GOLDEN_ITERS {
            if pc.value <= pd.value {
                b = d;
                d = c;
                pd = pc;
                c = b - INV_PHI * (b - a);
                pc = self.at(c.exp())?;
            } else {
                a = c;
                c = d;
                pc = pd;
                d = a + INV_PHI * (b - a);
                pd = self.at(d.exp())?;
            }
            iters += 1;
        }
        let golden = if pc.value <= pd.value { pc } else { pd };
        let (lo_m, hi_m) = (a.exp(), b.exp());

        let lower = self.at(cfg.multiplier_min)?;
        if lower.slope.lo > 0.0 && lo_m <= cfg.multiplier_min * (1.0 + 1e-6) {
            return Err(Error::BracketExhausted {
                multiplier: lower.multiplier,
                bound: cfg.multiplier_min,
                slope_lo: lower.slope.lo,
                slope_hi: lower.slope.hi,
            });
        }
        let upper = self.at(cfg.multiplier_max)?;
        if upper.slope.hi < 0.0 && hi_m >= cfg.multiplier_max * (1.0 - 1e-6) {
            return Err(Error::BracketExhausted {
                multiplier: upper.multiplier,
                bound: cfg.multiplier_max,
                slope_lo: upper.slope.lo,
                slope_hi: upper.slope.hi,
            });
        }

        let best = match self.polish(lo_m, hi_m)? {
            Some(p) if p.value <= golden.value + 4.0 * f64::EPSILON * golden.value.abs() => p,
            _ => golden,
        };
        let info = self.info([lo_m, hi_m], best.slope);
        Ok((best, info))
    }

    /// Bisection on the subgradient sign inside the golden bracket, widened
    /// slightly in case rounding moved the true minimizer across an end.
    fn polish(&self, lo_m: f64, hi_m: f64) -> Result<Option<DualPoint>> {
        let cfg = self.config;
        let mut a = (lo_m * (1.0 - 1e-6)).max(cfg.multiplier_min);
        let mut b = (hi_m * (1.0 + 1e-6)).min(cfg.multiplier_max);
        let pa = self.at(a)?;
        if pa.slope.contains(0.0, 0.0) {
            return Ok(Some(pa));
        }
        let pb = self.at(b)?;
        if pb.slope.contains(0.0, 0.0) {
            return Ok(Some(pb));
        }
        if !(pa.slope.hi < 0.0 && pb.slope.lo > 0.0) {
            return Ok(None);
        }
        for _ in 0..MAX_POLISH_ITERS {
            let mid = (a * b).sqrt();
            if !(mid > a && mid < b) {
                break;
            }
            let p = self.at(mid)?;
            if p.slope.contains(0.0, 0.0) {
                return Ok(Some(p));
            }
            if p.slope.hi < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let pa = self.at(a)?;
        let pb = self.at(b)?;
        Ok(Some(if pa.value <= pb.value { pa } else { pb }))
    }

    /// FBA: the minimizer may sit on the boundary `beta = 0`.
    fn run_with_boundary(&self) -> Result<(DualPoint, SolverInfo)> {
        let cfg = self.config;
        let origin = self.at(0.0)?;
        // right derivative at 0+, read off at the bracket floor
        let floor = self.at(cfg.multiplier_min)?;
        if floor.slope.hi >= 0.0 {
            let info = self.info([0.0, cfg.multiplier_min], floor.slope);
            return Ok((origin, info));
        }
        let (interior, info) = self.run()?;
        if origin.value <= interior.value {
            let info = self.info([0.0, info.bracket[1]], floor.slope);
            return Ok((origin, info));
        }
        Ok((interior, info))
    }
}
