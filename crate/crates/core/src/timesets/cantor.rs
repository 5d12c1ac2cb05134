use serde::Serialize;

use crate::error::{invalid, Error, Result};

use super::covering::{greedy_cover_intervals, COVER_SLACK};

const MAX_LEVEL: u32 = 30;

/// Level-`k` approximation of the middle-gap Cantor set `C(λ)`: `2^k` closed
/// intervals of length `λ^k`, sorted left to right.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CantorApprox {
    lambda: f64,
    level: u32,
    intervals: Vec<(f64, f64)>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 0.5 {
        Ok(())
    } else {
        Err(invalid("lambda", format!("must lie in (0, 1/2), got {lambda}")))
    }
}

/// Hausdorff dimension `κ = ln 2 / ln(1/λ)`.
pub fn cantor_dimension(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(2f64.ln() / (1.0 / lambda).ln())
}

impl CantorApprox {
    /// Children of `[u, v]` are `[u, u + λ(v−u)]` and `[v − λ(v−u), v]`.
    pub fn build(lambda: f64, level: u32) -> Result<Self> {
        check_lambda(lambda)?;
        if level > MAX_LEVEL {
            return Err(invalid("level", format!("at most {MAX_LEVEL}, got {level}")));
        }
        let mut intervals = vec![(0.0, 1.0)];
        for _ in 0..level {
            intervals = intervals
                .iter()
                .flat_map(|&(u, v)| {
                    let d = lambda * (v - u);
                    [(u, u + d), (v - d, v)]
                })
                .collect();
        }
        Ok(Self {
            lambda,
            level,
            intervals,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Length `λ^level` of each interval; the smallest radius for which
    /// [`Self::covering_number`] is exact.
    pub fn min_radius(&self) -> f64 {
        self.lambda.powi(self.level as i32)
    }

    pub fn dimension(&self) -> f64 {
        cantor_dimension(self.lambda).expect("lambda validated at construction")
    }

    /// Sorted endpoints of all level intervals (`2^{level+1}` points, or 2 at level 0).
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|&(u, v)| [u, v]).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(u, v)| v - u).sum()
    }

    /// `N_{C(λ)}(r)` for `r ≥ λ^level`, computed on the level intervals.
    /// Every level interval meets `C(λ)` at both ends, so the count matches
    /// the limit set in this range.
    pub fn covering_number(&self, r: f64) -> Result<u64> {
        let min = self.min_radius();
        if r.is_nan() || r <= 0.0 {
            return Err(invalid("r", format!("radius must be > 0, got {r}")));
        }
        if r < min * (1.0 - COVER_SLACK) {
            return Err(Error::OutsideValidity { radius: r, min });
        }
        Ok(greedy_cover_intervals(&self.intervals, r))
    }

    /// `N_{C(λ)}(r)` for any `r > 0` using self-similarity: when every gap
    /// between level-`j` intervals exceeds `r`, `N(r) = 2^j N(r/λ^j)`.
    pub fn covering_number_self_similar(&self, r: f64) -> Result<u64> {
        let min = self.min_radius();
        if r >= min * (1.0 - COVER_SLACK) {
            return self.covering_number(r);
        }
        let lambda = self.lambda;
        // smallest gap among level-j intervals is (1 − 2λ)λ^{j−1}
        let mut j = 0i32;
        while (1.0 - 2.0 * lambda) * lambda.powi(j) > r {
            j += 1;
        }
        if j == 0 {
            return Err(Error::OutsideValidity { radius: r, min });
        }
        let inner = self.covering_number_self_similar(r / lambda.powi(j))?;
        1u64.checked_shl(j as u32)
            .and_then(|p| p.checked_mul(inner))
            .ok_or_else(|| invalid("r", "covering number overflows u64"))
    }
}
