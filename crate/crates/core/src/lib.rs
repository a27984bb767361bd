//! Worst-case funding valuation adjustments under distributional ambiguity.
//!
//! The crate computes the supremum of the funding cost adjustment (FCA), the
//! funding benefit adjustment (FBA) and bilateral FVA over a Wasserstein ball
//! of radius `delta` around an empirical measure of simulated
//! `(funding exposure, joint survival)` samples. The supremum is evaluated
//! through its one-dimensional convex dual: the inner per-sample problem has
//! a closed form (a maximum over `n + 1` survival branches), and the outer
//! problem is a scalar convex minimization over the dual multiplier.
//!
//! Module map:
//!
//! - [`types`]: grids, survival vectors, samples, empirical measures.
//! - [`dual`]: inner suprema, dual objective, subgradients, outer solver.
//! - [`radius`]: confidence level to Wasserstein radius calibration.
//! - [`market`]: curves, Hull-White paths, swap exposures, default times.
//! - [`oracle`]: brute-force verifiers independent of the closed forms.
//! - [`samples`]: CSV sample file reader/writer.

pub mod dual;
pub mod error;
pub mod market;
pub mod oracle;
pub mod radius;
pub mod samples;
pub mod sum;
pub mod types;

pub use dual::{
    dual_objective, psi, psi_fba, psi_fca, psi_fva, robust_adjustment, subgradient_interval,
    PsiValue, ResultRecord, RobustResult, SolverInfo, SubgradientInterval,
};
pub use error::{Error, Result};
pub use types::{
    baseline_value, survival_vector_from_times, EmpiricalMeasure, ExposureSample, Kind,
    ObservationGrid, RobustConfig, SurvivalVector,
};
