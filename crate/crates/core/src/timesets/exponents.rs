use serde::Serialize;

use crate::error::Result;
use crate::spectral::ExponentParams;

use super::cantor_dimension;

/// A derived exponent that may be undefined under the given parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Flagged<T> {
    Defined(T),
    /// No finite bound: every value is admissible.
    Unbounded,
    Undefined(String),
}

impl<T: Copy> Flagged<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Flagged::Defined(v) => Some(*v),
            _ => None,
        }
    }
}

/// The exponent range `[p₀, 2]` or `(1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentInterval {
    pub lower: f64,
    pub lower_closed: bool,
    pub upper: f64,
}

impl ExponentInterval {
    pub fn contains(&self, p: f64) -> bool {
        let above = if self.lower_closed {
            p >= self.lower
        } else {
            p > self.lower
        };
        above && p <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exponents {
    /// `γ = 2s/(a − s)`: summability exponent admitted by the dyadic-class criterion.
    pub gamma: Flagged<f64>,
    /// `2s/a`: the older summability exponent that `γ` improves on.
    pub baseline_gamma: f64,
    /// `p₀ = 2/(1 + 2s/(na))`.
    pub p0: f64,
    pub interval_i: Flagged<ExponentInterval>,
    /// Cantor sets with dimension `κ < 2s/a` satisfy the density condition.
    pub cantor_threshold: f64,
    /// Largest admissible class-growth exponent `b = 2s/(a − s)` (needs `a > 1`, `s ≤ 1/2`).
    pub b_max: Flagged<f64>,
    /// Strict upper bound on `γ` from `1/γ > (a − 2s)/(2s)` (needs `a ≥ 2s`, `s ≤ 1/2`).
    pub cor7_gamma_bound: Flagged<f64>,
}

pub fn exponents(params: &ExponentParams) -> Exponents {
    let (a, s, n) = (params.a(), params.s(), params.n() as f64);
    let gamma = if s < a {
        Flagged::Defined(2.0 * s / (a - s))
    } else {
        Flagged::Undefined(format!("needs s < a (s = {s}, a = {a})"))
    };
    let p0 = 2.0 / (1.0 + 2.0 * s / (n * a));
    let interval_i = if !(a > 1.0 && s < a) {
        Flagged::Undefined(format!("needs a > 1 and 0 < s < a (s = {s}, a = {a})"))
    } else if params.n() == 1 && s >= a / 2.0 {
        Flagged::Defined(ExponentInterval {
            lower: 1.0,
            lower_closed: false,
            upper: 2.0,
        })
    } else {
        Flagged::Defined(ExponentInterval {
            lower: p0,
            lower_closed: true,
            upper: 2.0,
        })
    };
    let b_max = if a > 1.0 && s <= 0.5 {
        Flagged::Defined(2.0 * s / (a - s))
    } else {
        Flagged::Undefined(format!("needs a > 1 and s <= 1/2 (s = {s}, a = {a})"))
    };
    let cor7_gamma_bound = if !(s <= 0.5 && a >= 2.0 * s) {
        Flagged::Undefined(format!("needs a >= 2s and s <= 1/2 (s = {s}, a = {a})"))
    } else if a == 2.0 * s {
        Flagged::Unbounded
    } else {
        Flagged::Defined(2.0 * s / (a - 2.0 * s))
    };
    Exponents {
        gamma,
        baseline_gamma: 2.0 * s / a,
        p0,
        interval_i,
        cantor_threshold: 2.0 * s / a,
        b_max,
        cor7_gamma_bound,
    }
}

/// Whether `C(λ)` satisfies `κ < 2s/a`.
pub fn cantor_admissible(lambda: f64, params: &ExponentParams) -> Result<bool> {
    Ok(cantor_dimension(lambda)? < 2.0 * params.s() / params.a())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn classical_case() {
        let e = exponents(&ExponentParams::new(2.0, 0.5, 1).unwrap());
        assert_relative_eq!(e.gamma.value().unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(e.baseline_gamma, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.p0, 4.0 / 3.0, epsilon = 1e-15);
        let i = e.interval_i.value().unwrap();
        assert!(i.lower_closed && i.contains(4.0 / 3.0) && !i.contains(1.3));
        assert_relative_eq!(e.cor7_gamma_bound.value().unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cantor_threshold_one_admits_all() {
        let p = ExponentParams::new(2.0, 1.0, 1).unwrap();
        assert_eq!(exponents(&p).cantor_threshold, 1.0);
        for lambda in [0.01, 0.25, 1.0 / 3.0, 0.49] {
            assert!(cantor_admissible(lambda, &p).unwrap());
        }
        assert!(matches!(exponents(&p).b_max, Flagged::Undefined(_)));
    }

    #[test]
    fn open_interval_branch() {
        let e = exponents(&ExponentParams::new(2.0, 1.5, 1).unwrap());
        let i = e.interval_i.value().unwrap();
        assert!(!i.lower_closed && i.contains(1.01) && !i.contains(1.0));
        let e2 = exponents(&ExponentParams::new(2.0, 1.5, 2).unwrap());
        assert!(e2.interval_i.value().unwrap().lower_closed);
        assert!(matches!(
            exponents(&ExponentParams::new(2.0, 3.0, 1).unwrap()).gamma,
            Flagged::Undefined(_)
        ));
        assert_eq!(
            exponents(&ExponentParams::new(1.0, 0.5, 1).unwrap()).cor7_gamma_bound,
            Flagged::Unbounded
        );
    }

    proptest! {
        #[test]
        fn gamma_improves_baseline(a in 0.1f64..10.0, frac in 0.001f64..0.999) {
            let s = a * frac;
            let e = exponents(&ExponentParams::new(a, s, 1).unwrap());
            prop_assert!(e.gamma.value().unwrap() > e.baseline_gamma);
        }
    }
}
