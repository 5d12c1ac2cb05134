use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::{CantorApprox, TimeSet};

/// Relative slack on `r` when deciding whether a point is covered; absorbs
/// endpoint round-off of order 1e-16 so that e.g. `N_{[0,1]}(2^{-3}) = 8`.
pub const COVER_SLACK: f64 = 1e-9;

/// Set structure as seen by covering numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum SetGeometry {
    Finite(TimeSet),
    Interval { lo: f64, hi: f64 },
    Cantor(CantorApprox),
}

impl SetGeometry {
    /// Smallest radius at which covering numbers are exact for this geometry.
    pub fn min_valid_radius(&self) -> f64 {
        match self {
            SetGeometry::Cantor(c) => c.min_radius(),
            _ => 0.0,
        }
    }

    /// Cardinality for finite sets.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            SetGeometry::Finite(t) => Some(t.len()),
            _ => None,
        }
    }
}

/// `N_E(r)`: the minimal number of closed length-`r` intervals covering `E`.
pub fn covering_number(set: &SetGeometry, r: f64) -> Result<u64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid("r", format!("radius must be finite and > 0, got {r}")));
    }
    match set {
        SetGeometry::Finite(ts) => Ok(greedy_cover_points(ts.times(), r).len() as u64),
        SetGeometry::Interval { lo, hi } => Ok(greedy_cover_intervals(&[(*lo, *hi)], r)),
        SetGeometry::Cantor(c) => c.covering_number(r),
    }
}

/// Left-to-right greedy cover of sorted points: each interval starts at the
/// leftmost uncovered point. Returns the placed intervals `[p, p + r]`.
pub fn greedy_cover_points(sorted: &[f64], r: f64) -> Vec<(f64, f64)> {
    let reach = r * (1.0 + COVER_SLACK);
    let mut cover = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let start = sorted[i];
        cover.push((start, start + r));
        while i < sorted.len() && sorted[i] - start <= reach {
            i += 1;
        }
    }
    cover
}

/// Greedy count for a sorted union of disjoint closed intervals.
pub(crate) fn greedy_cover_intervals(intervals: &[(f64, f64)], r: f64) -> u64 {
    let slack = r * COVER_SLACK;
    let count_for = |len: f64| ((len / r) - COVER_SLACK).ceil().max(1.0) as u64;
    let mut covered_to = f64::NEG_INFINITY;
    let mut total = 0u64;
    for &(u, v) in intervals {
        if v <= covered_to + slack {
            continue;
        }
        let (start, k) = if u > covered_to + slack {
            (u, count_for(v - u))
        } else {
            (covered_to, count_for(v - covered_to))
        };
        total += k;
        covered_to = start + k as f64 * r;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    Diverging,
    Inconclusive,
}

/// Partial sums of `Σ_m N_E(2^{-m}) 2^{-2ms/a}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficiencyReport {
    pub covering: Vec<u64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
    /// Geometric-mean term ratio over the last [`TAIL_WINDOW`] terms.
    pub tail_ratio: f64,
    /// First `m` with `N_E(2^{-m}) = #E` (finite sets only).
    pub saturation_index: Option<usize>,
    /// Last index summed; below the request when the geometry's validity domain ends first.
    pub m_max: usize,
    pub clamped: bool,
    /// Geometric tail beyond `m_max` when converged.
    pub tail_estimate: Option<f64>,
    /// Partial sum plus tail when converged.
    pub total_estimate: Option<f64>,
}

pub const TAIL_WINDOW: usize = 8;
pub const CONVERGED_RATIO: f64 = 0.95;
const MIN_TERMS: usize = 8;

pub fn sufficiency_sum(set: &SetGeometry, s: f64, a: f64, m_max: usize) -> Result<SufficiencyReport> {
    if m_max < MIN_TERMS {
        return Err(invalid("m_max", format!("must be >= {MIN_TERMS}, got {m_max}")));
    }
    if !(s.is_finite() && a.is_finite() && a > 0.0) {
        return Err(invalid("a", "need finite s and a > 0"));
    }
    let min_r = set.min_valid_radius();
    let mut last = m_max;
    while last > 0 && 2f64.powi(-(last as i32)) < min_r * (1.0 - super::COVER_SLACK) {
        last -= 1;
    }
    if last < MIN_TERMS {
        return Err(invalid(
            "m_max",
            format!("geometry is exact only down to r = {min_r:e}; fewer than {MIN_TERMS} terms remain"),
        ));
    }
    let decay = 2f64.powf(-2.0 * s / a);
    let mut covering = Vec::with_capacity(last + 1);
    let mut terms = Vec::with_capacity(last + 1);
    let mut partial_sums = Vec::with_capacity(last + 1);
    let mut acc = 0.0;
    for m in 0..=last {
        let n = covering_number(set, 2f64.powi(-(m as i32)))?;
        let term = n as f64 * decay.powi(m as i32);
        acc += term;
        covering.push(n);
        terms.push(term);
        partial_sums.push(acc);
    }
    let saturation_index = set
        .cardinality()
        .and_then(|card| covering.iter().position(|&n| n as usize == card));

    let window = &terms[terms.len() - TAIL_WINDOW..];
    let tail_ratio = (window[TAIL_WINDOW - 1] / window[0]).powf(1.0 / (TAIL_WINDOW - 1) as f64);
    let last_term = terms[last];

    let (verdict, tail_estimate) = if saturation_index.is_some() {
        // exact: N is constant from here on
        if decay < 1.0 {
            (Verdict::Converged, Some(last_term * decay / (1.0 - decay)))
        } else {
            (Verdict::Diverging, None)
        }
    } else if tail_ratio < CONVERGED_RATIO {
        (
            Verdict::Converged,
            Some(last_term * tail_ratio / (1.0 - tail_ratio)),
        )
    } else if tail_ratio >= 1.0 {
        (Verdict::Diverging, None)
    } else {
        (Verdict::Inconclusive, None)
    };

    Ok(SufficiencyReport {
        covering,
        terms,
        partial_sums,
        verdict,
        tail_ratio,
        saturation_index,
        m_max: last,
        clamped: last < m_max,
        total_estimate: tail_estimate.map(|t| acc + t),
        tail_estimate,
    })
}
