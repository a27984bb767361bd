//! Closed-form inner suprema.
//!
//! For a sample `(z, y)` with `a = ||y||_1` and prefix sums `P_l`, the inner
//! supremum is `<z, y>` plus the maximum over `l = 0..=n` survival branches
//!
//! ```text
//! FCA / FVA:  l / (4 m) + (P_l - P_a) - m S |l - a|
//! FBA:        sum_{k<=l} g_k(m) + (P_l - P_a) - m S |l - a|
//!             g_k(m) = -z_k - m z_k^2   if -z_k <= 1 / (2 m)
//!                    = 1 / (4 m)        otherwise
//! ```
//!
//! Every branch is convex in the multiplier `m`, so `Psi` is convex as their
//! pointwise maximum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{ExposureSample, Kind};

/// Relative tolerance for treating a branch as attaining the maximum.
pub const ACTIVE_RTOL: f64 = 1e-9;

/// Inner supremum together with the branch structure behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiValue {
    pub value: f64,
    /// Smallest maximizing survival length.
    pub l_star: usize,
    /// Survival flips `|l* - ||y||_1|` paid for by the adversary.
    pub cost_k: usize,
    /// Branch values `h(l)` for `l = 0..=n`, excluding `<z, y>`.
    pub branch_values: Vec<f64>,
}

impl PsiValue {
    /// `Psi - <z, y>`, the adversarial gain net of transport cost.
    pub fn excess(&self) -> f64 {
        self.branch_values[self.l_star]
    }
}

/// Value and active-branch slope range of one sample at one multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Eval {
    pub value: f64,
    pub excess: f64,
    pub slope_lo: f64,
    pub slope_hi: f64,
}

pub(crate) fn check_multiplier(kind: Kind, m: f64) -> Result<()> {
    match kind {
        Kind::Fca | Kind::Fva if !(m > 0.0 && m.is_finite()) => Err(Error::Domain {
            name: "multiplier",
            value: m,
            reason: "FCA and FVA duals need a positive finite multiplier",
        }),
        Kind::Fba if !(m >= 0.0 && m.is_finite()) => Err(Error::Domain {
            name: "multiplier",
            value: m,
            reason: "FBA dual needs a nonnegative finite multiplier",
        }),
        _ => Ok(()),
    }
}

/// Walks the `n + 1` branches of one sample, carrying prefix sums.
struct Branches<'a> {
    z: &'a [f64],
    alive: usize,
    kind: Kind,
    m: f64,
    scale: f64,
    /// `P_a`.
    inner: f64,
}

impl<'a> Branches<'a> {
    fn new(sample: &'a ExposureSample, m: f64, scale: f64) -> Self {
        Self {
            z: sample.z(),
            alive: sample.y().alive(),
            kind: sample.kind(),
            m,
            scale,
            inner: sample.inner(),
        }
    }

    /// Calls `f(l, value, slope)` for `l = 0..=n` in order.
    fn for_each(&self, mut f: impl FnMut(usize, f64, f64)) {
        let m = self.m;
        let s = self.scale;
        let a = self.alive;
        let mut prefix = 0.0;
        // gain and its m-derivative accumulated over the first l components
        let mut gain = 0.0;
        let mut gain_slope = 0.0;
        let per_component = match self.kind {
            Kind::Fca | Kind::Fva => 1.0 / (4.0 * m),
            Kind::Fba => 0.0,
        };
        let per_component_slope = match self.kind {
            Kind::Fca | Kind::Fva => -1.0 / (4.0 * m * m),
            Kind::Fba => 0.0,
        };
        for l in 0..=self.z.len() {
            if l > 0 {
                let zk = self.z[l - 1];
                prefix += zk;
                match self.kind {
                    Kind::Fca | Kind::Fva => {
                        gain += per_component;
                        gain_slope += per_component_slope;
                    }
                    Kind::Fba => {
                        // -z <= 1/(2m), written without dividing by m
                        if -2.0 * m * zk <= 1.0 {
                            gain += -zk - m * zk * zk;
                            gain_slope += -zk * zk;
                        } else {
                            gain += 1.0 / (4.0 * m);
                            gain_slope += -1.0 / (4.0 * m * m);
                        }
                    }
                }
            }
            let k = l.abs_diff(a) as f64;
            let shift = if l == a { 0.0 } else { prefix - self.inner };
            let value = gain + shift - m * s * k;
            let slope = gain_slope - s * k;
            f(l, value, slope);
        }
    }

    fn eval(&self) -> (Eval, usize) {
        let mut best = f64::NEG_INFINITY;
        let mut l_star = 0;
        self.for_each(|l, v, _| {
            if v > best {
                best = v;
                l_star = l;
            }
        });
        let tol = ACTIVE_RTOL * (1.0 + best.abs());
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        self.for_each(|_, v, slope| {
            if v >= best - tol {
                lo = lo.min(slope);
                hi = hi.max(slope);
            }
        });
        // at beta = 0 every FBA branch equals -P_a; skip the rounding of prefix sums
        let (value, excess) = if self.kind == Kind::Fba && self.m == 0.0 {
            (0.0, -self.inner)
        } else {
            (self.inner + best, best)
        };
        (
            Eval {
                value,
                excess,
                slope_lo: lo,
                slope_hi: hi,
            },
            l_star,
        )
    }
}

pub(crate) fn evaluate(sample: &ExposureSample, m: f64, scale: f64) -> Eval {
    Branches::new(sample, m, scale).eval().0
}

/// Inner supremum for any kind, dispatching on the sample's kind.
pub fn psi(sample: &ExposureSample, multiplier: f64, scale: f64) -> Result<PsiValue> {
    check_multiplier(sample.kind(), multiplier)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain {
            name: "scale",
            value: scale,
            reason: "transport scale must be positive",
        });
    }
    let branches = Branches::new(sample, multiplier, scale);
    let mut branch_values = Vec::with_capacity(sample.n() + 1);
    branches.for_each(|_, v, _| branch_values.push(v));
    let (eval, l_star) = branches.eval();
    Ok(PsiValue {
        value: eval.value,
        l_star,
        cost_k: l_star.abs_diff(sample.y().alive()),
        branch_values,
    })
}

fn require_kind(sample: &ExposureSample, kind: Kind) -> Result<()> {
    if sample.kind() != kind {
        return Err(Error::validation(format!(
            "expected a {kind} sample, got {}",
            sample.kind()
        )));
    }
    Ok(())
}

/// Worst-case funding cost sample value at multiplier `gamma`.
pub fn psi_fca(sample: &ExposureSample, gamma: f64, scale: f64) -> Result<PsiValue> {
    require_kind(sample, Kind::Fca)?;
    psi(sample, gamma, scale)
}

/// Worst-case funding benefit sample value at multiplier `beta >= 0`.
pub fn psi_fba(sample: &ExposureSample, beta: f64, scale: f64) -> Result<PsiValue> {
    require_kind(sample, Kind::Fba)?;
    psi(sample, beta, scale)
}

pub fn psi_fva(sample: &ExposureSample, alpha: f64, scale: f64) -> Result<PsiValue> {
    require_kind(sample, Kind::Fva)?;
    psi(sample, alpha, scale)
}
