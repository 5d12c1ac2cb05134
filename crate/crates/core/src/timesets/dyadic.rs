use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fit::least_squares;

use super::{covering_number, SetGeometry, TimeSet};

/// Counts of the dyadic classes `A_j = {t : 2^{-j-1} < t ≤ 2^{-j}}`, `j ≥ 1`.
///
/// `counts[0]` is the overflow bin for times in `(1/2, 1]`, which belong to
/// no class; `beyond` holds times `≤ 2^{-j_max-1}` (including `0`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicProfile {
    pub counts: Vec<usize>,
    pub beyond: usize,
    pub j_max: usize,
    /// Least-squares slope of `log₂ counts[j]` against `j` over nonempty classes.
    pub b_fit: Option<f64>,
}

impl DyadicProfile {
    pub fn overflow(&self) -> usize {
        self.counts[0]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.beyond
    }
}

pub fn dyadic_classes(ts: &TimeSet, j_max: usize) -> Result<DyadicProfile> {
    let times = ts.times();
    if times.is_empty() {
        return Err(Error::EmptySet);
    }
    // number of times ≤ x
    let upto = |x: f64| times.partition_point(|&t| t <= x);
    let mut counts = vec![0usize; j_max + 1];
    counts[0] = upto(1.0) - upto(0.5);
    for (j, slot) in counts.iter_mut().enumerate().skip(1) {
        let hi = 2f64.powi(-(j as i32));
        *slot = upto(hi) - upto(0.5 * hi);
    }
    let beyond = upto(2f64.powi(-(j_max as i32) - 1));
    let (xs, ys): (Vec<f64>, Vec<f64>) = counts
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &c)| c > 0)
        .map(|(j, &c)| (j as f64, (c as f64).log2()))
        .unzip();
    Ok(DyadicProfile {
        counts,
        beyond,
        j_max,
        b_fit: least_squares(&xs, &ys).map(|f| f.slope),
    })
}

/// Empirical constant in `N_E(2^{-m}) ≤ C 2^{bm/(b+1)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma6Report {
    /// `C'` in `#A_j ≤ C' 2^{bj}`, fitted on the first half of the complete classes.
    pub profile_constant: f64,
    /// Largest `j` whose class lies entirely above the smallest time.
    pub complete_classes: usize,
    pub covering: Vec<u64>,
    /// `N_E(2^{-m}) / 2^{bm/(b+1)}` for `m = 0..=m_max`.
    pub ratios: Vec<f64>,
    pub empirical_c: f64,
    /// Max ratio over the second half of `m` divided by the max over the first half.
    pub growth: f64,
    pub bounded: bool,
}

const BOUNDED_GROWTH: f64 = 1.25;
const PROFILE_SLACK: f64 = 2.0;

pub fn lemma6_check(ts: &TimeSet, b: f64, m_max: usize) -> Result<Lemma6Report> {
    if !(b.is_finite() && b >= 0.0) {
        return Err(invalid("b", format!("must be finite and >= 0, got {b}")));
    }
    if m_max < 2 {
        return Err(invalid("m_max", "must be >= 2"));
    }
    let t_min = ts.times()[0];
    let mut complete = 0usize;
    while complete < 60 && 2f64.powi(-(complete as i32) - 2) >= t_min {
        complete += 1;
    }
    let profile = dyadic_classes(ts, complete.max(1))?;
    let weight = |j: usize| 2f64.powf(b * j as f64);
    let half = (complete / 2).max(1);
    let profile_constant = (1..=half.min(complete.max(1)))
        .map(|j| profile.counts[j] as f64 / weight(j))
        .fold(0.0, f64::max);
    for j in 1..=complete {
        let bound = PROFILE_SLACK * profile_constant * weight(j);
        if profile.counts[j] as f64 > bound {
            return Err(Error::ProfileViolation {
                j,
                count: profile.counts[j],
                bound,
            });
        }
    }

    let geometry = SetGeometry::Finite(ts.clone());
    let exponent = b / (b + 1.0);
    let mut covering = Vec::with_capacity(m_max + 1);
    let mut ratios = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let n = covering_number(&geometry, 2f64.powi(-(m as i32)))?;
        covering.push(n);
        ratios.push(n as f64 / 2f64.powf(exponent * m as f64));
    }
    let split = m_max / 2;
    let first = ratios[..=split].iter().copied().fold(0.0, f64::max);
    let second = ratios[split + 1..].iter().copied().fold(0.0, f64::max);
    let growth = second / first;
    Ok(Lemma6Report {
        profile_constant,
        complete_classes: complete,
        covering,
        empirical_c: first.max(second),
        growth,
        bounded: growth < BOUNDED_GROWTH,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timesets::{seq_generate, SequenceKind};

    #[test]
    fn geometric_has_one_per_class() {
        let g = seq_generate(SequenceKind::Geometric(0.5), 12).unwrap();
        let p = dyadic_classes(&g, 12).unwrap();
        assert_eq!(p.overflow(), 0);
        assert!(p.counts[1..].iter().all(|&c| c == 1));
        assert_eq!(p.total(), 12);
        assert_eq!(p.b_fit, Some(0.0));
    }

    #[test]
    fn power_two_class_four() {
        let s = seq_generate(SequenceKind::Power(2.0), 100).unwrap();
        let p = dyadic_classes(&s, 6).unwrap();
        assert_eq!(p.counts[4], 2);
        assert_eq!(p.total(), 100);
    }

    #[test]
    fn single_time_one_is_overflow() {
        let s = TimeSet::from_points(vec![1.0]).unwrap();
        let p = dyadic_classes(&s, 5).unwrap();
        assert_eq!(p.overflow(), 1);
        assert!(p.counts[1..].iter().all(|&c| c == 0));
        assert_eq!(p.beyond, 0);
    }

    #[test]
    fn zero_goes_beyond() {
        let s = TimeSet::from_points(vec![0.0, 0.3]).unwrap();
        let p = dyadic_classes(&s, 4).unwrap();
        assert_eq!(p.beyond, 1);
        assert_eq!(p.counts[1], 1);
    }

    #[test]
    fn lemma6_single_point() {
        let s = TimeSet::from_points(vec![0.5]).unwrap();
        let rep = lemma6_check(&s, 1.0, 10).unwrap();
        assert!(rep.covering.iter().all(|&n| n == 1));
        assert_eq!(rep.ratios[0], 1.0);
    }

    #[test]
    fn lemma6_geometric_reports_growth() {
        let g = seq_generate(SequenceKind::Geometric(0.5), 40).unwrap();
        let rep = lemma6_check(&g, 0.0, 30).unwrap();
        assert!(!rep.bounded, "growth {}", rep.growth);
        assert!(rep.growth > 1.5);
    }

    #[test]
    fn lemma6_power_sequence_bounded() {
        let gamma = 2.0 / 3.0;
        let s = seq_generate(SequenceKind::Power(1.0 / gamma), 20000).unwrap();
        let rep = lemma6_check(&s, gamma, 20).unwrap();
        assert!(rep.bounded, "growth {}", rep.growth);
    }

    #[test]
    fn lemma6_profile_violation() {
        let s = seq_generate(SequenceKind::Power(2.0), 5000).unwrap();
        assert!(matches!(
            lemma6_check(&s, 0.0, 12),
            Err(Error::ProfileViolation { .. })
        ));
    }
}
