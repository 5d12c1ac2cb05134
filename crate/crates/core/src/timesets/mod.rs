//! Time sets: decreasing sequences, Cantor sets and intervals.
//!
//! A [`SetDescriptor`] names a set (serializable as `{kind, params, count|level}`);
//! [`SetDescriptor::to_time_set`] produces the finite point set used by the
//! maximal experiments, while [`SetDescriptor::geometry`] keeps the infinite
//! structure (interval, Cantor) that covering numbers are computed from.

mod cantor;
mod covering;
mod dyadic;
mod exponents;

pub use cantor::{cantor_dimension, CantorApprox};
pub use covering::{
    covering_number, greedy_cover_points, sufficiency_sum, SetGeometry, SufficiencyReport, Verdict,
    COVER_SLACK,
};
pub use dyadic::{dyadic_classes, lemma6_check, DyadicProfile, Lemma6Report};
pub use exponents::{cantor_admissible, exponents, ExponentInterval, Exponents, Flagged};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Sequence families `t_k`, listed in their original (decreasing) order.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceKind {
    /// `t_k = k^{-p}`, `k ≥ 1`.
    Power(f64),
    /// `t_k = 1 / ln k`, starting at `k = 3`, the first index with `t_k < 1`.
    LogReciprocal,
    /// `t_k = r^k`, `k ≥ 1`.
    Geometric(f64),
    /// Caller-supplied terms, strictly decreasing.
    Explicit(Vec<f64>),
}

/// First index of the log-reciprocal family.
pub const LOG_RECIPROCAL_START: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerParams {
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricParams {
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitParams {
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorParams {
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalParams {
    pub lo: f64,
    pub hi: f64,
}

/// Serializable description of a time set.
///
/// For `cantor` the finite point set is the endpoint set of the level
/// intervals; for `interval` it is a uniform mesh of `count` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDescriptor {
    Power {
        params: PowerParams,
        count: usize,
    },
    Geometric {
        params: GeometricParams,
        count: usize,
    },
    LogReciprocal {
        #[serde(default)]
        params: NoParams,
        count: usize,
    },
    Explicit {
        params: ExplicitParams,
    },
    Cantor {
        params: CantorParams,
        level: u32,
    },
    Interval {
        params: IntervalParams,
        count: usize,
    },
}

impl SetDescriptor {
    pub fn cantor(lambda: f64, level: u32) -> Self {
        SetDescriptor::Cantor {
            params: CantorParams { lambda },
            level,
        }
    }

    pub fn interval(lo: f64, hi: f64, count: usize) -> Self {
        SetDescriptor::Interval {
            params: IntervalParams { lo, hi },
            count,
        }
    }

    pub fn power(p: f64, count: usize) -> Self {
        SetDescriptor::Power {
            params: PowerParams { p },
            count,
        }
    }

    pub fn geometric(ratio: f64, count: usize) -> Self {
        SetDescriptor::Geometric {
            params: GeometricParams { ratio },
            count,
        }
    }

    pub fn to_time_set(&self) -> Result<TimeSet> {
        match self {
            SetDescriptor::Power { params, count } => {
                seq_generate_with(SequenceKind::Power(params.p), *count, self.clone())
            }
            SetDescriptor::Geometric { params, count } => {
                seq_generate_with(SequenceKind::Geometric(params.ratio), *count, self.clone())
            }
            SetDescriptor::LogReciprocal { count, .. } => {
                seq_generate_with(SequenceKind::LogReciprocal, *count, self.clone())
            }
            SetDescriptor::Explicit { params } => {
                let n = params.times.len();
                seq_generate_with(SequenceKind::Explicit(params.times.clone()), n, self.clone())
            }
            SetDescriptor::Cantor { params, level } => {
                let approx = CantorApprox::build(params.lambda, *level)?;
                TimeSet::from_sorted(approx.endpoints(), self.clone())
            }
            SetDescriptor::Interval { params, count } => {
                let (lo, hi) = check_interval(params)?;
                if *count < 2 {
                    return Err(invalid("count", "interval mesh needs at least 2 points"));
                }
                let step = (hi - lo) / (*count - 1) as f64;
                let mut times: Vec<f64> = (0..*count).map(|i| lo + i as f64 * step).collect();
                times[*count - 1] = hi;
                TimeSet::from_sorted(times, self.clone())
            }
        }
    }

    /// Geometry used for covering numbers.
    pub fn geometry(&self) -> Result<SetGeometry> {
        match self {
            SetDescriptor::Cantor { params, level } => {
                Ok(SetGeometry::Cantor(CantorApprox::build(params.lambda, *level)?))
            }
            SetDescriptor::Interval { params, .. } => {
                let (lo, hi) = check_interval(params)?;
                Ok(SetGeometry::Interval { lo, hi })
            }
            _ => Ok(SetGeometry::Finite(self.to_time_set()?)),
        }
    }
}

fn check_interval(p: &IntervalParams) -> Result<(f64, f64)> {
    if !(p.lo.is_finite() && p.hi.is_finite() && 0.0 <= p.lo && p.lo <= p.hi && p.hi <= 1.0) {
        return Err(invalid(
            "interval",
            format!("need 0 <= lo <= hi <= 1, got [{}, {}]", p.lo, p.hi),
        ));
    }
    Ok((p.lo, p.hi))
}

/// Finite, strictly increasing set of times in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSet {
    times: Vec<f64>,
    descriptor: SetDescriptor,
}

impl TimeSet {
    /// Builds from ascending points; rejects duplicates and values outside `[0, 1]`.
    pub fn from_sorted(times: Vec<f64>, descriptor: SetDescriptor) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && (0.0..=1.0).contains(*t))) {
            return Err(invalid("times", format!("{t} lies outside [0, 1]")));
        }
        if let Some(i) = times.windows(2).position(|w| w[0] >= w[1]) {
            return Err(invalid(
                "times",
                format!("not strictly increasing at position {}", i + 1),
            ));
        }
        Ok(Self { times, descriptor })
    }

    /// Sorts and deduplicates arbitrary points in `[0, 1]`.
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        points.sort_by(f64::total_cmp);
        points.dedup();
        let descriptor = SetDescriptor::Explicit {
            params: ExplicitParams {
                times: points.iter().rev().copied().collect(),
            },
        };
        Self::from_sorted(points, descriptor)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn descriptor(&self) -> &SetDescriptor {
        &self.descriptor
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn union(&self, other: &TimeSet) -> Result<TimeSet> {
        let mut all = self.times.clone();
        all.extend_from_slice(&other.times);
        Self::from_points(all)
    }
}

/// First `count` terms of a sequence family, validated strictly decreasing
/// and inside `(0, 1]`.
pub fn seq_generate(kind: SequenceKind, count: usize) -> Result<TimeSet> {
    let descriptor = match &kind {
        SequenceKind::Power(p) => SetDescriptor::power(*p, count),
        SequenceKind::Geometric(r) => SetDescriptor::geometric(*r, count),
        SequenceKind::LogReciprocal => SetDescriptor::LogReciprocal {
            params: NoParams {},
            count,
        },
        SequenceKind::Explicit(v) => SetDescriptor::Explicit {
            params: ExplicitParams { times: v.clone() },
        },
    };
    seq_generate_with(kind, count, descriptor)
}

fn seq_generate_with(kind: SequenceKind, count: usize, descriptor: SetDescriptor) -> Result<TimeSet> {
    if count == 0 {
        return Err(invalid("count", "must be >= 1"));
    }
    let terms: Vec<f64> = match kind {
        SequenceKind::Power(p) => {
            if !(p.is_finite() && p > 0.0) {
                return Err(invalid("p", format!("power sequences need p > 0, got {p}")));
            }
            (1..=count).map(|k| (k as f64).powf(-p)).collect()
        }
        SequenceKind::Geometric(r) => {
            if !(r > 0.0 && r < 1.0) {
                return Err(invalid("ratio", format!("must lie in (0, 1), got {r}")));
            }
            (1..=count as i32).map(|k| r.powi(k)).collect()
        }
        SequenceKind::LogReciprocal => (0..count as u64)
            .map(|i| log_reciprocal_term(LOG_RECIPROCAL_START + i))
            .collect(),
        SequenceKind::Explicit(v) => {
            if v.len() != count {
                return Err(invalid("count", "explicit list length mismatch"));
            }
            v
        }
    };
    if let Some(t) = terms.iter().find(|t| !(t.is_finite() && **t > 0.0 && **t <= 1.0)) {
        return Err(invalid("times", format!("term {t} lies outside (0, 1]")));
    }
    if let Some(i) = terms.windows(2).position(|w| w[1] >= w[0]) {
        return Err(Error::NotDecreasing { index: i + 1 });
    }
    let mut times = terms;
    times.reverse();
    TimeSet::from_sorted(times, descriptor)
}

/// `t_k = 1 / ln k`.
pub fn log_reciprocal_term(k: u64) -> f64 {
    1.0 / (k as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn geometric_and_power_examples() {
        let g = seq_generate(SequenceKind::Geometric(0.5), 3).unwrap();
        assert_eq!(g.times(), &[0.125, 0.25, 0.5]);
        let p = seq_generate(SequenceKind::Power(2.0), 3).unwrap();
        assert_eq!(p.times(), &[1.0 / 9.0, 0.25, 1.0]);
    }

    #[test]
    fn log_reciprocal_starts_below_one() {
        let s = seq_generate(SequenceKind::LogReciprocal, 2).unwrap();
        assert_relative_eq!(s.times()[1], 1.0 / 3f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(s.times()[1], 0.9102, epsilon = 1e-4);
        assert_relative_eq!(s.times()[0], 1.0 / 4f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn sequence_errors() {
        assert!(matches!(
            seq_generate(SequenceKind::Explicit(vec![0.5, 0.6]), 2),
            Err(Error::NotDecreasing { index: 1 })
        ));
        assert!(seq_generate(SequenceKind::Power(0.0), 3).is_err());
        assert!(seq_generate(SequenceKind::Power(-1.0), 3).is_err());
        assert!(seq_generate(SequenceKind::Geometric(1.5), 3).is_err());
        assert!(seq_generate(SequenceKind::Explicit(vec![1.5]), 1).is_err());
    }

    #[test]
    fn descriptor_json_roundtrip_and_strictness() {
        let d: SetDescriptor =
            serde_json::from_str(r#"{"kind":"cantor","params":{"lambda":0.25},"level":3}"#).unwrap();
        assert_eq!(d, SetDescriptor::cantor(0.25, 3));
        let back: SetDescriptor = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
        let lr: SetDescriptor =
            serde_json::from_str(r#"{"kind":"log_reciprocal","count":5}"#).unwrap();
        assert_eq!(lr.to_time_set().unwrap().len(), 5);
        assert!(serde_json::from_str::<SetDescriptor>(
            r#"{"kind":"power","params":{"p":2},"count":3,"extra":1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<SetDescriptor>(
            r#"{"kind":"power","params":{"p":2,"q":1},"count":3}"#
        )
        .is_err());
    }

    #[test]
    fn cantor_and_interval_point_sets() {
        let c = SetDescriptor::cantor(1.0 / 3.0, 2).to_time_set().unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.times()[0], 0.0);
        assert_eq!(c.times()[7], 1.0);
        let m = SetDescriptor::interval(0.0, 1.0, 5).to_time_set().unwrap();
        assert_eq!(m.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
