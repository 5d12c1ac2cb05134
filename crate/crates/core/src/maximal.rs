//! Maximal functions `S*f(x) = sup_{t∈E} |S_t f(x)|` over finite time sets and
//! the empirical sides of the maximal inequalities.
//!
//! All spatial integrals use the dual lattice of the frequency grid with at
//! least twice the per-axis mode count, so `∫|S_t f|²` is integrated exactly
//! and the maximal integrals converge under lattice refinement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sampling::SpectralSampler;
use crate::spectral::{ExponentParams, LatticeField, LatticePlan, SpectralFunction};
use crate::timesets::{
    dyadic_classes, greedy_cover_points, sufficiency_sum, SetGeometry, SufficiencyReport, TimeSet,
};

/// Truncation index for `Σ_m N_E(2^{-m}) 2^{-2ms/a}` in maximal reports.
pub const MAXIMAL_SUM_M_MAX: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximalReport {
    pub dim: usize,
    pub period: f64,
    pub resolution: usize,
    /// `sup_{t∈E} |S_t f(x_j)|` on the lattice, row-major.
    pub max_values: Vec<f64>,
    /// Lattice quadrature of `max_values²`.
    pub l2_sq: f64,
    /// `‖f‖²_{H_s}` with the `Δξⁿ` weight.
    pub hs_sq: f64,
    /// Density sum including the exact geometric tail past saturation.
    pub sum_value: f64,
    pub sum_m_max: usize,
    pub saturation_index: Option<usize>,
    /// `l2_sq / (sum_value · (2π)⁻ⁿ hs_sq)`; the `(2π)⁻ⁿ` makes the
    /// denominator Plancherel-consistent with `l2_sq`.
    pub ratio: f64,
}

impl MaximalReport {
    pub fn point(&self, index: usize) -> [f64; 2] {
        let h = self.period / self.resolution as f64;
        match self.dim {
            1 => [index as f64 * h, 0.0],
            _ => [
                (index / self.resolution) as f64 * h,
                (index % self.resolution) as f64 * h,
            ],
        }
    }

    fn cell_volume(&self) -> f64 {
        (self.period / self.resolution as f64).powi(self.dim as i32)
    }
}

fn check_oversampled(f: &SpectralFunction, resolution: usize) -> Result<()> {
    let need = 2 * f.grid().side();
    if resolution < need {
        return Err(Error::Resolution {
            reason: format!("spatial resolution {resolution} below 2 x modes per axis = {need}"),
        });
    }
    Ok(())
}

/// Lattice fields `S_t f` for each `t`, combined pointwise by `fold` and
/// merged across threads by `merge`.
fn fold_fields<T, F, M>(
    f: &SpectralFunction,
    times: &[f64],
    params: &ExponentParams,
    resolution: usize,
    init: impl Fn() -> T + Sync + Send,
    fold: F,
    merge: M,
) -> Result<T>
where
    T: Send,
    F: Fn(&mut T, usize, &LatticeField) + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let chunk = times.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
    times
        .par_chunks(chunk)
        .enumerate()
        .map(|(c, ts)| -> Result<T> {
            let mut plan = LatticePlan::new(*f.grid(), resolution)?;
            let mut acc = init();
            for (i, &t) in ts.iter().enumerate() {
                let field = plan.synthesize(f.propagate(t, params)?.coeffs());
                fold(&mut acc, c * chunk + i, &field);
            }
            Ok(acc)
        })
        .try_reduce(&init, |x, y| Ok(merge(x, y)))
}

/// `Σ_m N_E(2^{-m}) 2^{-2ms/a}` as used in [`MaximalReport::sum_value`].
pub fn density_sum(e: &TimeSet, params: &ExponentParams) -> Result<SufficiencyReport> {
    sufficiency_sum(
        &SetGeometry::Finite(e.clone()),
        params.s(),
        params.a(),
        MAXIMAL_SUM_M_MAX,
    )
}

/// Pointwise maximal function over a finite time set.
pub fn maximal_field(
    f: &SpectralFunction,
    e: &TimeSet,
    params: &ExponentParams,
    spatial_resolution: usize,
) -> Result<MaximalReport> {
    if e.is_empty() {
        return Err(Error::EmptySet);
    }
    check_oversampled(f, spatial_resolution)?;
    let grid = f.grid();
    let size = spatial_resolution.pow(grid.dim() as u32);
    let max_values = fold_fields(
        f,
        e.times(),
        params,
        spatial_resolution,
        || vec![0.0f64; size],
        |acc, _, field| {
            for (m, v) in acc.iter_mut().zip(&field.values) {
                *m = m.max(v.norm());
            }
        },
        |mut x, y| {
            for (a, b) in x.iter_mut().zip(y) {
                *a = a.max(b);
            }
            x
        },
    )?;
    let sum = density_sum(e, params)?;
    let sum_value = sum.total_estimate.expect("finite sets always converge for s > 0");
    let hs_sq = f.h_s_norm(params.s()).powi(2);
    let mut report = MaximalReport {
        dim: grid.dim(),
        period: grid.period(),
        resolution: spatial_resolution,
        max_values,
        l2_sq: 0.0,
        hs_sq,
        sum_value,
        sum_m_max: sum.m_max,
        saturation_index: sum.saturation_index,
        ratio: 0.0,
    };
    report.l2_sq = report.max_values.iter().map(|v| v * v).sum::<f64>() * report.cell_volume();
    let plancherel = (2.0 * PI).powi(-(grid.dim() as i32));
    report.ratio = report.l2_sq / (sum_value * plancherel * hs_sq);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepStats {
    pub trials: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub ratios: Vec<f64>,
}

/// Empirical constant of the maximal estimate over seeded random functions.
pub fn theorem4_ratio_sweep(
    trials: usize,
    sampler: &SpectralSampler,
    e: &TimeSet,
    params: &ExponentParams,
    spatial_resolution: usize,
    seed: u64,
) -> Result<SweepStats> {
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(trials);
    for _ in 0..trials {
        let f = sampler.sample(&mut rng);
        ratios.push(maximal_field(&f, e, params, spatial_resolution)?.ratio);
    }
    Ok(SweepStats {
        trials,
        max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_ratio: ratios.iter().sum::<f64>() / trials as f64,
        ratios,
    })
}

/// Splits at `|ξ| = 2^{b₁ j}`: low keeps `|ξ| ≤ 2^{b₁ j}`, high the rest.
pub fn lowhigh_split(
    f: &SpectralFunction,
    j: usize,
    b1: f64,
) -> Result<(SpectralFunction, SpectralFunction)> {
    if j == 0 {
        return Err(invalid("j", "must be >= 1"));
    }
    if !(b1.is_finite() && b1 > 0.0) {
        return Err(invalid("b1", format!("must be finite and > 0, got {b1}")));
    }
    let cutoff = 2f64.powf(b1 * j as f64);
    Ok((f.restrict(|r| r <= cutoff), f.restrict(|r| r > cutoff)))
}

/// `Ã_j`: uniform points `i·2^{-j}/N`, `N = ⌈2^{bj}⌉`, merged with the class
/// members of `A_j`; starts at 0, ends at `2^{-j}`, gaps `≤ 2^{-j}2^{-bj}`.
pub fn augmented_class(ts: &TimeSet, j: usize, b: f64) -> Vec<f64> {
    let hi = 2f64.powi(-(j as i32));
    let steps = 2f64.powf(b * j as f64).ceil().max(1.0) as usize;
    let mut v: Vec<f64> = (0..=steps).map(|i| hi * i as f64 / steps as f64).collect();
    v[steps] = hi;
    v.extend(ts.times().iter().copied().filter(|&t| t > 0.5 * hi && t <= hi));
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassTerms {
    pub j: usize,
    pub augmented_len: usize,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem3Sums {
    pub b: f64,
    pub b1: f64,
    /// `Σ_j 2^{bj} Σ_{k>0} ‖S_{v_k,low_j} f − S_{v_{k−1},low_j} f‖₂²`.
    pub low_sum: f64,
    /// `Σ_j Σ_{v_k ∈ Ã_j} ‖S_{v_k,high_j} f‖₂²`.
    pub high_sum: f64,
    pub hs_sq: f64,
    pub classes: Vec<ClassTerms>,
}

/// Both frequency-split sums, computed exactly via Plancherel on the lattice.
pub fn theorem3_sums(
    f: &SpectralFunction,
    ts: &TimeSet,
    params: &ExponentParams,
    b: Option<f64>,
    j_max: usize,
) -> Result<Theorem3Sums> {
    if j_max == 0 {
        return Err(invalid("j_max", "must be >= 1"));
    }
    let (a, s) = (params.a(), params.s());
    let b = match b {
        Some(b) => b,
        None => {
            params.require_s_below_a()?;
            2.0 * s / (a - s)
        }
    };
    if !(b.is_finite() && b > 0.0) {
        return Err(invalid("b", format!("must be finite and > 0, got {b}")));
    }
    let b1 = b / (2.0 * s);
    let profile = dyadic_classes(ts, j_max)?;
    if let Some(j) = (1..=j_max).find(|&j| profile.counts[j] == 0) {
        return Err(Error::EmptyClass { j });
    }
    let grid = f.grid();
    let weight = grid.cell_volume() / (2.0 * PI).powi(grid.dim() as i32);
    let active: Vec<(f64, f64)> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(i, c)| (grid.norm(i), c.norm_sqr() * weight))
        .collect();

    let mut classes = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let cutoff = 2f64.powf(b1 * j as f64);
        let v = augmented_class(ts, j, b);
        let mut low = 0.0;
        let mut high_mass = 0.0;
        for &(r, mass) in &active {
            if r <= cutoff {
                let w = r.powf(a);
                let steps: f64 = v
                    .windows(2)
                    .map(|p| (0.5 * (p[1] - p[0]) * w).sin().powi(2))
                    .sum();
                low += 4.0 * steps * mass;
            } else {
                high_mass += mass;
            }
        }
        classes.push(ClassTerms {
            j,
            augmented_len: v.len(),
            low: 2f64.powf(b * j as f64) * low,
            high: v.len() as f64 * high_mass,
        });
    }
    Ok(Theorem3Sums {
        b,
        b1,
        low_sum: classes.iter().map(|c| c.low).sum(),
        high_sum: classes.iter().map(|c| c.high).sum(),
        hs_sq: f.h_s_norm(s).powi(2),
        classes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSupCheck {
    /// Mesh lower bound for `∫ sup_{t,u∈I} |S_t f − S_u f|²`.
    pub lhs: f64,
    /// `r² A^{2a} ‖f‖₂²`.
    pub rhs_bound: f64,
    pub support_radius: f64,
    pub empirical_constant: f64,
}

/// Mesh estimate of the interval oscillation integral on `[start, start + r]`.
pub fn interval_sup_check(
    f: &SpectralFunction,
    start: f64,
    r: f64,
    params: &ExponentParams,
    n_mesh: usize,
    spatial_resolution: usize,
) -> Result<IntervalSupCheck> {
    if !(r.is_finite() && r >= 0.0) || !start.is_finite() {
        return Err(invalid("r", format!("interval length must be finite and >= 0, got {r}")));
    }
    if n_mesh < 16 {
        return Err(invalid("n_mesh", format!("must be >= 16, got {n_mesh}")));
    }
    check_oversampled(f, spatial_resolution)?;
    let support_radius = f.support_radius();
    let rhs_bound = r * r * support_radius.powf(2.0 * params.a()) * f.l2_norm_sq();
    if r == 0.0 {
        return Ok(IntervalSupCheck {
            lhs: 0.0,
            rhs_bound,
            support_radius,
            empirical_constant: 0.0,
        });
    }
    let times: Vec<f64> = (0..=n_mesh)
        .map(|i| start + r * i as f64 / n_mesh as f64)
        .collect();
    let fields = fold_fields(
        f,
        &times,
        params,
        spatial_resolution,
        Vec::new,
        |acc: &mut Vec<(usize, Vec<Complex64>)>, i, field| acc.push((i, field.values.clone())),
        |mut x, y| {
            x.extend(y);
            x
        },
    )?;
    let size = fields[0].1.len();
    let cell = (f.grid().period() / spatial_resolution as f64).powi(f.grid().dim() as i32);
    let lhs: f64 = (0..size)
        .into_par_iter()
        .map(|p| {
            let mut diam = 0.0f64;
            for (i, (_, zi)) in fields.iter().enumerate() {
                for (_, zj) in &fields[i + 1..] {
                    diam = diam.max((zi[p] - zj[p]).norm_sqr());
                }
            }
            diam
        })
        .sum::<f64>()
        * cell;
    Ok(IntervalSupCheck {
        lhs,
        rhs_bound,
        support_radius,
        empirical_constant: if rhs_bound > 0.0 { lhs / rhs_bound } else { 0.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionCheck {
    pub intervals: usize,
    /// `∫ sup_{t∈E} |S_t f − f|²`.
    pub lhs: f64,
    /// `Σ_l ∫ sup_{t∈E∩I_l} |S_t f − f|²`.
    pub rhs: f64,
}

/// Splits `E` by a greedy length-`r` cover and compares the global
/// oscillation integral with the sum of per-interval ones.
pub fn interval_composition(
    f: &SpectralFunction,
    e: &TimeSet,
    r: f64,
    params: &ExponentParams,
    spatial_resolution: usize,
) -> Result<CompositionCheck> {
    check_oversampled(f, spatial_resolution)?;
    let cover = greedy_cover_points(e.times(), r);
    // group index of each time
    let mut group = Vec::with_capacity(e.len());
    let mut g = 0;
    for &t in e.times() {
        while t > cover[g].0 + r * (1.0 + crate::timesets::COVER_SLACK) {
            g += 1;
        }
        group.push(g);
    }
    let mut plan = LatticePlan::new(*f.grid(), spatial_resolution)?;
    let base = plan.synthesize(f.coeffs());
    let size = base.values.len();
    let mut per_group = vec![vec![0.0f64; size]; cover.len()];
    for (&t, &g) in e.times().iter().zip(&group) {
        let field = plan.synthesize(f.propagate(t, params)?.coeffs());
        for ((m, v), b0) in per_group[g].iter_mut().zip(&field.values).zip(&base.values) {
            *m = m.max((v - b0).norm_sqr());
        }
    }
    let cell = base.cell_volume();
    let lhs = (0..size)
        .map(|p| per_group.iter().map(|g| g[p]).fold(0.0, f64::max))
        .sum::<f64>()
        * cell;
    let rhs = per_group.iter().flatten().sum::<f64>() * cell;
    Ok(CompositionCheck {
        intervals: cover.len(),
        lhs,
        rhs,
    })
}
