//! Brute-force verifiers for the dual engine.
//!
//! [`brute_force_psi`] evaluates the per-sample inner supremum by enumerating
//! every survival vector and scanning a dense grid for the exposures; it knows
//! nothing about the closed-form branch structure. [`grid_minimize_dual`] scans
//! the dual objective on a log grid instead of running the bracketed solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dual::{dual_objective, psi};
use crate::error::{Error, Result};
use crate::types::{
    EmpiricalMeasure, ExposureSample, Kind, ObservationGrid, RobustConfig, SurvivalVector,
};

/// Largest vector length accepted by [`brute_force_psi`].
pub const MAX_BRUTE_FORCE_N: usize = 6;
pub const MAX_ENUMERATION_N: usize = 20;

/// Exposure grid: step `h` over a box of half-width `bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub step: f64,
    pub bound: f64,
}

impl GridSpec {
    pub fn new(step: f64, bound: f64) -> Self {
        Self { step, bound }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            step: 1e-3,
            bound: 10.0,
        }
    }
}

/// All `n + 1` block survival vectors of length `n`, longest survival first.
pub fn enumerate_b1(n: usize) -> Result<Vec<SurvivalVector>> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::validation(format!(
            "enumeration limited to n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    (0..=n).rev().map(|alive| SurvivalVector::new(n, alive)).collect()
}

/// `sup_{u, v} <u, v> - m * (|u - z|^2 + S |v - y|^2)` over the kind's exposure
/// box and all block survival vectors, with `u` restricted to the lattice
/// `h * Z` inside the box.
pub fn brute_force_psi(
    sample: &ExposureSample,
    multiplier: f64,
    scale: f64,
    grid: GridSpec,
) -> Result<f64> {
    let n = sample.n();
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::validation(format!(
            "brute force limited to n <= {MAX_BRUTE_FORCE_N}, got {n}"
        )));
    }
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(Error::Domain {
            name: "multiplier",
            value: multiplier,
            reason: "brute force needs a positive finite multiplier",
        });
    }
    if !(grid.step > 0.0 && grid.bound > 0.0) {
        return Err(Error::validation("grid step and bound must be positive"));
    }
    let z = sample.z();
    let zmax = z.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let needed = 1.0 / (2.0 * multiplier) + zmax;
    let mut bound = grid.bound;
    if bound < needed {
        log::warn!("brute-force box {bound} below analytic optimum bound {needed}; widening");
        bound = needed * 1.05 + grid.step;
    }
    let steps = (bound / grid.step).ceil() as i64;
    let (lo, hi) = match sample.kind() {
        Kind::Fca => (0, steps),
        Kind::Fba => (-steps, 0),
        Kind::Fva => (-steps, steps),
    };

    // Given v, the objective separates over components, and each component
    // only sees whether v_k is 0 or 1.
    let component_best = |zk: f64, vk: f64| -> f64 {
        (lo..=hi)
            .map(|j| {
                let u = j as f64 * grid.step;
                u * vk - multiplier * (u - zk) * (u - zk)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let best_dead: Vec<f64> = z.iter().map(|&zk| component_best(zk, 0.0)).collect();
    let best_alive: Vec<f64> = z.iter().map(|&zk| component_best(zk, 1.0)).collect();

    let y = sample.y();
    let mut best = f64::NEG_INFINITY;
    for v in enumerate_b1(n)? {
        let transport: f64 = (0..n)
            .map(|k| {
                let d = f64::from(v.get(k)) - f64::from(y.get(k));
                d * d
            })
            .sum();
        let payoff: f64 = (0..n)
            .map(|k| {
                if v.get(k) == 1 {
                    best_alive[k]
                } else {
                    best_dead[k]
                }
            })
            .sum();
        best = best.max(payoff - multiplier * scale * transport);
    }
    Ok(best)
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Default certificate grid: 2001 points over `[1e-6, 1e6]`.
pub fn default_multiplier_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 2001)
}

/// Argmin and minimum of the dual objective over the given multipliers.
pub fn grid_minimize_dual(
    measure: &EmpiricalMeasure,
    config: &RobustConfig,
    multiplier_grid: &[f64],
) -> Result<(f64, f64)> {
    let mut best = (f64::NAN, f64::INFINITY);
    for &m in multiplier_grid {
        let value = dual_objective(measure, m, config)?;
        if value < best.1 {
            best = (m, value);
        }
    }
    if best.0.is_nan() {
        return Err(Error::validation("multiplier grid is empty"));
    }
    Ok(best)
}

/// Allowed closed-form vs brute-force gap for a lattice of step `h`.
pub fn psi_tolerance(step: f64, multiplier: f64, n: usize) -> f64 {
    10.0 * step * step * multiplier * n as f64 + 1e-6
}

/// A random small instance for the cross-check suite.
#[derive(Debug, Clone)]
pub struct Instance {
    pub sample: ExposureSample,
    pub multiplier: f64,
    pub scale: f64,
}

pub fn random_instance(rng: &mut impl Rng, kind: Kind, max_n: usize) -> Instance {
    let n = rng.random_range(1..=max_n);
    let z: Vec<f64> = (0..n)
        .map(|_| {
            let magnitude: f64 = rng.random_range(0.0..3.0);
            match kind {
                Kind::Fca => magnitude,
                Kind::Fba => -magnitude,
                Kind::Fva => rng.random_range(-3.0..3.0),
            }
        })
        .collect();
    let alive = rng.random_range(0..=n);
    let y = SurvivalVector::new(n, alive).expect("alive <= n");
    let multiplier = (rng.random_range(0.05_f64.ln()..20.0_f64.ln())).exp();
    let scale = [0.5, 1.0, 4.0][rng.random_range(0..3)];
    Instance {
        sample: ExposureSample::new(kind, z, y).expect("sign domain respected"),
        multiplier,
        scale,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KindReport {
    pub kind: Kind,
    pub instances: usize,
    pub failures: usize,
    /// Largest absolute closed-form vs brute-force gap.
    pub worst_gap: f64,
    /// Largest gap as a fraction of the allowed tolerance.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub step: f64,
    pub kinds: Vec<KindReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.kinds.iter().all(|k| k.failures == 0)
    }
}

/// Randomized closed-form vs brute-force comparison, `instances` per kind.
pub fn run_verification(seed: u64, instances: usize, step: f64) -> Result<VerifyReport> {
    let mut kinds = Vec::new();
    for (idx, kind) in Kind::ALL.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(idx as u64);
        let mut report = KindReport {
            kind,
            instances,
            failures: 0,
            worst_gap: 0.0,
            worst_ratio: 0.0,
        };
        for _ in 0..instances {
            let inst = random_instance(&mut rng, kind, 4);
            let closed = psi(&inst.sample, inst.multiplier, inst.scale)?.value;
            let brute = brute_force_psi(
                &inst.sample,
                inst.multiplier,
                inst.scale,
                GridSpec::new(step, 10.0),
            )?;
            let gap = (closed - brute).abs();
            let tol = psi_tolerance(step, inst.multiplier, inst.sample.n());
            report.worst_gap = report.worst_gap.max(gap);
            report.worst_ratio = report.worst_ratio.max(gap / tol);
            if !(gap <= tol) {
                report.failures += 1;
            }
        }
        kinds.push(report);
    }
    Ok(VerifyReport { seed, step, kinds })
}

/// Single-grid convenience for tests: an index grid of length `n`.
pub fn unit_measure(kind: Kind, rows: &[(&[f64], usize)]) -> Result<EmpiricalMeasure> {
    let n = rows.first().map_or(0, |(z, _)| z.len());
    let samples = rows
        .iter()
        .map(|(z, alive)| ExposureSample::new(kind, z.to_vec(), SurvivalVector::new(z.len(), *alive)?))
        .collect::<Result<Vec<_>>>()?;
    EmpiricalMeasure::new(kind, samples, ObservationGrid::unit(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(kind: Kind, z: &[f64], alive: usize) -> ExposureSample {
        ExposureSample::new(kind, z.to_vec(), SurvivalVector::new(z.len(), alive).unwrap()).unwrap()
    }

    #[test]
    fn enumerates_block_vectors() {
        let v = enumerate_b1(1).unwrap();
        assert_eq!(v.iter().map(|s| s.bits()).collect::<Vec<_>>(), vec![vec![1], vec![0]]);
        let v = enumerate_b1(3).unwrap();
        assert_eq!(v.len(), 4);
        for s in &v {
            assert!(SurvivalVector::from_bits(&s.bits()).is_ok());
        }
        assert!(v.windows(2).all(|w| w[0].alive() > w[1].alive()));
        assert!(enumerate_b1(21).is_err());
    }

    #[test]
    fn brute_force_single_period_fca() {
        // hand enumeration: v=1 keeps u=z+1/2 for 1 + 1/4; v=0 pays S=1 for at most 0 - 1
        let s = sample(Kind::Fca, &[1.0], 1);
        let v = brute_force_psi(&s, 1.0, 1.0, GridSpec::new(1e-3, 10.0)).unwrap();
        assert!((v - 1.25).abs() < 1e-3, "{v}");
    }

    #[test]
    fn brute_force_limits() {
        let s = sample(Kind::Fca, &[0.7, 0.2], 1);
        let v = brute_force_psi(&s, 1e6, 1.0, GridSpec::new(1e-3, 2.0)).unwrap();
        assert!((v - 0.7).abs() < 1e-3, "{v}");

        let s = sample(Kind::Fca, &[0.0], 0);
        for gamma in [0.5, 1.0, 3.0] {
            let v = brute_force_psi(&s, gamma, 1.0, GridSpec::new(1e-3, 10.0)).unwrap();
            assert!(v.abs() < 1e-6, "{gamma}: {v}");
        }
    }

    #[test]
    fn brute_force_widens_small_box() {
        let s = sample(Kind::Fca, &[1.0], 1);
        let v = brute_force_psi(&s, 1.0, 1.0, GridSpec::new(1e-3, 0.1)).unwrap();
        assert!((v - 1.25).abs() < 1e-3, "{v}");
    }

    #[test]
    fn brute_force_rejects_bad_inputs() {
        let s = sample(Kind::Fca, &[1.0; 7], 7);
        assert!(brute_force_psi(&s, 1.0, 1.0, GridSpec::default()).is_err());
        let s = sample(Kind::Fca, &[1.0], 1);
        assert!(brute_force_psi(&s, 0.0, 1.0, GridSpec::default()).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-6, 1e6, 2001);
        assert_eq!(g.len(), 2001);
        assert!((g[0] - 1e-6).abs() < 1e-18);
        assert!((g[2000] - 1e6).abs() < 1e-6);
        assert!((g[1000] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_minimum_single_sample_fca() {
        let m = unit_measure(Kind::Fca, &[(&[1.0], 1)]).unwrap();
        let cfg = RobustConfig::new(1.0, 1.0).unwrap();
        let (gamma, value) = grid_minimize_dual(&m, &cfg, &default_multiplier_grid()).unwrap();
        assert!((value - 2.0).abs() < 1e-3, "{value}");
        assert!((gamma - 0.5).abs() < 0.01, "{gamma}");
    }

    #[test]
    fn grid_minimum_at_right_edge_without_radius() {
        let m = unit_measure(Kind::Fca, &[(&[1.0, 2.0], 1), (&[0.5, 0.0], 2)]).unwrap();
        let cfg = RobustConfig::new(0.0, 1.0).unwrap();
        let grid = default_multiplier_grid();
        let (gamma, value) = grid_minimize_dual(&m, &cfg, &grid).unwrap();
        assert_eq!(gamma, *grid.last().unwrap());
        // baseline is (1 + 0.5) / 2
        assert!((value - 0.75).abs() < 1e-5);
    }

    #[test]
    fn grid_minimum_fba_clamps_to_zero() {
        let m = unit_measure(Kind::Fba, &[(&[-1.0], 1)]).unwrap();
        let cfg = RobustConfig::new(2.0, 1.0).unwrap();
        let grid = default_multiplier_grid();
        let (beta, value) = grid_minimize_dual(&m, &cfg, &grid).unwrap();
        assert_eq!(beta, grid[0]);
        assert!(value.abs() < 1e-5, "{value}");
    }

    #[test]
    fn verification_suite_passes_small() {
        let report = run_verification(11, 20, 1e-3).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
