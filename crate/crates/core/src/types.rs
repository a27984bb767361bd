//! Domain types shared by the dual engine, the simulator and the oracle.
//!
//! All types validate on construction and are immutable afterwards, so the
//! numerical hot loops never re-check them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::Summation;

/// Which funding adjustment a sample set describes.
///
/// The kind fixes the sign domain of the funding exposures: FCA samples are
/// nonnegative, FBA samples nonpositive, FVA samples unrestricted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Fca,
    Fba,
    Fva,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Fca, Kind::Fba, Kind::Fva];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Fca => "fca",
            Kind::Fba => "fba",
            Kind::Fva => "fva",
        }
    }

    /// Whether `value` lies in the sign domain of this kind.
    pub fn admits(self, value: f64) -> bool {
        match self {
            Kind::Fca => value >= 0.0,
            Kind::Fba => value <= 0.0,
            Kind::Fva => value.is_finite(),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fca" => Ok(Kind::Fca),
            "fba" => Ok(Kind::Fba),
            "fva" => Ok(Kind::Fva),
            other => Err(Error::validation(format!(
                "unknown adjustment kind '{other}' (expected fca, fba or fva)"
            ))),
        }
    }
}

/// Observation dates `0 = t_0 < t_1 < ... < t_n` in year fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ObservationGrid {
    times: Vec<f64>,
}

impl ObservationGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::validation(
                "observation grid needs t_0 = 0 and at least one exposure date",
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::validation(format!(
                "observation grid must start at t_0 = 0, got {}",
                times[0]
            )));
        }
        if let Some(w) = times
            .windows(2)
            .find(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(Error::validation(format!(
                "observation grid must be strictly increasing and finite ({} -> {})",
                w[0], w[1]
            )));
        }
        Ok(Self { times })
    }

    /// `0, step, 2 step, ...` up to `horizon`, with a final stub if `step`
    /// does not divide `horizon`.
    pub fn uniform(horizon: f64, step: f64) -> Result<Self> {
        if !(horizon > 0.0 && step > 0.0) || !horizon.is_finite() {
            return Err(Error::validation(format!(
                "uniform grid needs positive horizon and step (got {horizon}, {step})"
            )));
        }
        let count = (horizon / step - 1e-9).ceil() as usize;
        let mut times: Vec<f64> = (0..count).map(|k| k as f64 * step).collect();
        times.push(horizon);
        Self::new(times)
    }

    /// Index grid `0, 1, ..., n` for measures read without calendar dates.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new((0..=n).map(|k| k as f64).collect())
    }

    /// Number of exposure dates `n`.
    pub fn n(&self) -> usize {
        self.times.len() - 1
    }

    /// All dates including `t_0`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Exposure dates `t_1 ..= t_n`.
    pub fn exposure_times(&self) -> &[f64] {
        &self.times[1..]
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("grid is nonempty")
    }

    /// Accrual fractions `t_k - t_{k-1}` for `k = 1..=n`.
    pub fn accruals(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

impl TryFrom<Vec<f64>> for ObservationGrid {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::new(times)
    }
}

impl From<ObservationGrid> for Vec<f64> {
    fn from(grid: ObservationGrid) -> Self {
        grid.times
    }
}

/// Joint survival indicator: a block of ones followed by zeros.
///
/// Stored as `(len, alive)` where `alive = ||y||_1`; the block structure makes
/// the bit pattern redundant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SurvivalVector {
    len: usize,
    alive: usize,
}

impl SurvivalVector {
    pub fn new(len: usize, alive: usize) -> Result<Self> {
        if alive > len {
            return Err(Error::validation(format!(
                "survival count {alive} exceeds vector length {len}"
            )));
        }
        Ok(Self { len, alive })
    }

    /// Validate a 0/1 pattern as nonincreasing.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let alive = bits.iter().take_while(|&&b| b == 1).count();
        if let Some(bad) = bits[alive..].iter().find(|&&b| b != 0) {
            return Err(Error::validation(format!(
                "survival vector {bits:?} is not a block of ones followed by zeros (found {bad})"
            )));
        }
        Ok(Self {
            len: bits.len(),
            alive,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `||y||_1`: number of leading periods survived.
    pub fn alive(&self) -> usize {
        self.alive
    }

    pub fn get(&self, k: usize) -> u8 {
        u8::from(k < self.alive)
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|k| self.get(k)).collect()
    }
}

/// One Monte Carlo path: funding-scaled discounted exposures `z` and the
/// joint survival indicator `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureSample {
    kind: Kind,
    z: Vec<f64>,
    y: SurvivalVector,
}

impl ExposureSample {
    pub fn new(kind: Kind, z: Vec<f64>, y: SurvivalVector) -> Result<Self> {
        if z.len() != y.len() {
            return Err(Error::validation(format!(
                "exposure length {} differs from survival length {}",
                z.len(),
                y.len()
            )));
        }
        if z.is_empty() {
            return Err(Error::validation("samples need at least one exposure date"));
        }
        if let Some((k, v)) = z
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || !kind.admits(**v))
        {
            return Err(Error::validation(format!(
                "{kind} sample has inadmissible exposure z[{}] = {v}",
                k + 1
            )));
        }
        Ok(Self { kind, z, y })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn y(&self) -> SurvivalVector {
        self.y
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `<z, y>`: exposures summed over the surviving prefix.
    pub fn inner(&self) -> f64 {
        self.z[..self.y.alive()].iter().sum()
    }

    /// Same sample with exposures multiplied by `factor`; the sign domain is
    /// revalidated.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.kind, self.z.iter().map(|v| v * factor).collect(), self.y)
    }
}

/// `N` equally weighted samples on a shared observation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    kind: Kind,
    samples: Vec<ExposureSample>,
    grid: ObservationGrid,
}

impl EmpiricalMeasure {
    pub fn new(kind: Kind, samples: Vec<ExposureSample>, grid: ObservationGrid) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::validation("empirical measure needs at least one sample"));
        }
        let n = grid.n();
        for (i, s) in samples.iter().enumerate() {
            if s.kind() != kind {
                return Err(Error::validation(format!(
                    "sample {i} has kind {} in a {kind} measure",
                    s.kind()
                )));
            }
            if s.n() != n {
                return Err(Error::validation(format!(
                    "sample {i} has {} exposure dates, grid has {n}",
                    s.n()
                )));
            }
        }
        Ok(Self {
            kind,
            samples,
            grid,
        })
    }

    /// Build from raw rows; each row is paired with the survival vector of
    /// the same index.
    pub fn from_rows(
        kind: Kind,
        rows: Vec<Vec<f64>>,
        survival: &[SurvivalVector],
        grid: ObservationGrid,
    ) -> Result<Self> {
        if rows.len() != survival.len() {
            return Err(Error::validation(format!(
                "{} exposure rows but {} survival vectors",
                rows.len(),
                survival.len()
            )));
        }
        let samples = rows
            .into_iter()
            .zip(survival)
            .map(|(z, y)| ExposureSample::new(kind, z, *y))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, samples, grid)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn samples(&self) -> &[ExposureSample] {
        &self.samples
    }

    pub fn grid(&self) -> &ObservationGrid {
        &self.grid
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of exposure dates `n`.
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Every exposure multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| s.scaled(factor))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.kind, samples, self.grid.clone())
    }

    /// Relabel as an FVA measure (always admissible).
    pub fn as_fva(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| ExposureSample {
                kind: Kind::Fva,
                z: s.z.clone(),
                y: s.y,
            })
            .collect();
        Self {
            kind: Kind::Fva,
            samples,
            grid: self.grid.clone(),
        }
    }
}

/// Ambiguity radius, transport scale and solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustConfig {
    /// Wasserstein radius `delta >= 0`.
    pub delta: f64,
    /// Weight `S > 0` of survival moves in the transport cost.
    pub scale: f64,
    pub multiplier_min: f64,
    pub multiplier_max: f64,
    pub tolerance: f64,
    pub summation: Summation,
}

impl RobustConfig {
    pub const DEFAULT_MULTIPLIER_MIN: f64 = 1e-8;
    pub const DEFAULT_MULTIPLIER_MAX: f64 = 1e8;
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    pub fn new(delta: f64, scale: f64) -> Result<Self> {
        let cfg = Self {
            delta,
            scale,
            multiplier_min: Self::DEFAULT_MULTIPLIER_MIN,
            multiplier_max: Self::DEFAULT_MULTIPLIER_MAX,
            tolerance: Self::DEFAULT_TOLERANCE,
            summation: Summation::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        let cfg = Self { delta, ..self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_bracket(self, multiplier_min: f64, multiplier_max: f64) -> Result<Self> {
        let cfg = Self {
            multiplier_min,
            multiplier_max,
            ..self
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_summation(self, summation: Summation) -> Self {
        Self { summation, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::validation(format!(
                "radius delta must be finite and >= 0, got {}",
                self.delta
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::validation(format!(
                "scale must be finite and > 0, got {}",
                self.scale
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::validation(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if !(self.multiplier_min > 0.0
            && self.multiplier_max > self.multiplier_min
            && self.multiplier_max.is_finite())
        {
            return Err(Error::validation(format!(
                "multiplier bracket must satisfy 0 < min < max < inf, got [{}, {}]",
                self.multiplier_min, self.multiplier_max
            )));
        }
        Ok(())
    }
}

/// Mean of `<z_i, y_i>` over the measure.
pub fn baseline_value(measure: &EmpiricalMeasure) -> f64 {
    baseline_value_with(measure, Summation::default())
}

pub fn baseline_value_with(measure: &EmpiricalMeasure, summation: Summation) -> f64 {
    let inner: Vec<f64> = measure.samples().iter().map(ExposureSample::inner).collect();
    summation.mean(&inner)
}

/// `y_k = 1` iff both names survive past `t_k`.
pub fn survival_vector_from_times(
    tau_c: f64,
    tau_f: f64,
    grid: &ObservationGrid,
) -> Result<SurvivalVector> {
    if !(tau_c > 0.0) || !(tau_f > 0.0) {
        return Err(Error::validation(format!(
            "default times must be positive (got {tau_c}, {tau_f})"
        )));
    }
    let tau = tau_c.min(tau_f);
    let alive = grid.exposure_times().partition_point(|&t| t < tau);
    SurvivalVector::new(grid.n(), alive)
}
