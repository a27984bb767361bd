//! Dual engine for the worst-case adjustments.
//!
//! The primal problem `sup { E_P <Z, Y> : D_c(P, P_N) <= delta }` with ground
//! cost `c((u, v), (z, y)) = |u - z|^2 + S |v - y|^2` is solved through
//! `inf_{m >= 0} m * delta + (1/N) sum_i Psi_m(z_i, y_i)`.

mod objective;
mod psi;
mod solver;

use serde::{Serialize, Serializer};

pub use objective::{dual_objective, subgradient_interval, SubgradientInterval};
pub use psi::{psi, psi_fba, psi_fca, psi_fva, PsiValue, ACTIVE_RTOL};
pub use solver::{robust_adjustment, RobustResult, SolverInfo};

use crate::types::Kind;

/// Non-finite floats as strings, since JSON has no infinity.
fn extended_f64<S: Serializer>(value: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    if value.is_finite() {
        ser.serialize_f64(*value)
    } else if value.is_nan() {
        ser.serialize_str("nan")
    } else if *value > 0.0 {
        ser.serialize_str("inf")
    } else {
        ser.serialize_str("-inf")
    }
}

fn extended_pair<S: Serializer>(value: &[f64; 2], ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct Ext(f64);
    impl Serialize for Ext {
        fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
            extended_f64(&self.0, ser)
        }
    }
    let mut seq = ser.serialize_seq(Some(2))?;
    seq.serialize_element(&Ext(value[0]))?;
    seq.serialize_element(&Ext(value[1]))?;
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverRecord {
    pub iterations: usize,
    #[serde(serialize_with = "extended_pair")]
    pub bracket: [f64; 2],
    #[serde(serialize_with = "extended_pair")]
    pub certificate_interval: [f64; 2],
}

/// JSON result record of a robust run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub kind: Kind,
    pub delta: f64,
    pub scale: f64,
    pub baseline: f64,
    pub robust_value: f64,
    #[serde(serialize_with = "extended_f64")]
    pub multiplier_star: f64,
    pub delta_term: f64,
    pub psi_excess_mean: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub n_samples: usize,
    pub solver: SolverRecord,
}

impl From<&RobustResult> for ResultRecord {
    fn from(r: &RobustResult) -> Self {
        Self {
            kind: r.kind,
            delta: r.delta,
            scale: r.scale,
            baseline: r.baseline,
            robust_value: r.robust_value,
            multiplier_star: r.multiplier_star,
            delta_term: r.delta_term,
            psi_excess_mean: r.psi_excess_mean,
            n: r.n,
            n_samples: r.n_samples,
            solver: SolverRecord {
                iterations: r.solver.iterations,
                bracket: r.solver.bracket,
                certificate_interval: r.solver.certificate_interval,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::unit_measure;
    use crate::types::RobustConfig;

    #[test]
    fn record_json_shape() {
        let m = unit_measure(Kind::Fca, &[(&[1.0], 1)]).unwrap();
        let r = robust_adjustment(&m, &RobustConfig::new(1.0, 1.0).unwrap()).unwrap();
        let json = serde_json::to_value(ResultRecord::from(&r)).unwrap();
        for key in [
            "kind", "delta", "scale", "baseline", "robust_value", "multiplier_star",
            "delta_term", "psi_excess_mean", "n", "N", "solver",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["kind"], "fca");
        assert_eq!(json["N"], 1);
        assert_eq!(json["solver"]["bracket"].as_array().unwrap().len(), 2);

        let r = robust_adjustment(&m, &RobustConfig::new(0.0, 1.0).unwrap()).unwrap();
        let json = serde_json::to_value(ResultRecord::from(&r)).unwrap();
        assert_eq!(json["multiplier_star"], "inf");
        assert_eq!(json["robust_value"], 1.0);
    }
}
