//! Unboundedness of the maximal operator along `t_k = 1/ln k`.
//!
//! `f̂_ν(ξ) = φ(2^{-ν}ξ)` with a smooth bump `φ` on the annulus
//! `1/A ≤ |ξ| ≤ A`, equal to one near the stationary radius `a^{-1/(a−1)}`.
//! At `x ∈ [C2^{-ν}, 1]` the time `τ = x·2^{ν(1−a)}` puts the phase of
//! `S_τ f_ν(x)` in the form `2^ν x (|η|^a + η)` after rescaling, whose single
//! critical point yields `|S_τ f_ν(x)| ≈ 2^{ν/2} x^{-1/2}`. Integrating the
//! square of that single-time value over `x` bounds `‖S*f_ν‖₂²` from below.
//!
//! Sizing for the default period `L = 32`, `a = 2` (`A = 2.6`):
//!
//! | ν  | mode bound M | nonzero modes |
//! |----|--------------|---------------|
//! | 6  | 848          | ≈ 1 420       |
//! | 9  | 6 780        | ≈ 11 300      |
//! | 12 | 54 230       | ≈ 90 300      |

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fit::{least_squares, LineFit};
use crate::spectral::{ExponentParams, FrequencyGrid, LatticePlan, SpectralFunction};
use crate::timesets::{log_reciprocal_term, LOG_RECIPROCAL_START};

/// Largest frequency grid the module will allocate.
pub const MAX_MODES: usize = 1 << 22;
/// Minimum lattice points across the dilated annulus.
const ANNULUS_POINTS: f64 = 64.0;
/// Quadrature points per `2π` of phase in the stationary-phase integral.
const POINTS_PER_TURN: f64 = 32.0;
const MAX_QUADRATURE_POINTS: usize = 1 << 26;
/// Largest `k` representable exactly in `f64`.
const ENUMERABLE_K: f64 = 9_007_199_254_740_992.0;

/// `C^∞` step: 0 for `u ≤ 0`, 1 for `u ≥ 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let l = (-1.0 / u).exp();
        let r = (-1.0 / (1.0 - u)).exp();
        l / (l + r)
    }
}

/// Even plateau bump for the transverse variable: 1 on `|ξ| ≤ 1/2`, 0 on `|ξ| ≥ 1`.
pub fn psi(xi: f64) -> f64 {
    smooth_step((1.0 - xi.abs()) / 0.5)
}

/// Annulus bump `φ` for a dispersion exponent `a > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpSpec {
    a: f64,
    annulus: f64,
    plateau: (f64, f64),
}

impl BumpSpec {
    /// Plateau `[0.9η₀, 1.1η₀]` around `η₀ = a^{-1/(a−1)}`, narrowed when the
    /// annulus leaves less room.
    pub fn new(a: f64, annulus: f64) -> Result<Self> {
        if !(a.is_finite() && a > 1.0) {
            return Err(invalid("a", format!("the bump needs a > 1, got {a}")));
        }
        if !(annulus.is_finite() && annulus > 1.0) {
            return Err(invalid("A", format!("must be > 1, got {annulus}")));
        }
        let eta = critical_radius(a);
        let inner = 1.0 / annulus;
        if !(inner < eta && eta < annulus) {
            return Err(invalid(
                "A",
                format!("a^(-1/(a-1)) = {eta} must lie in (1/A, A) = ({inner}, {annulus})"),
            ));
        }
        let half = (0.1 * eta).min(0.5 * (eta - inner)).min(0.5 * (annulus - eta));
        Ok(Self {
            a,
            annulus,
            plateau: (eta - half, eta + half),
        })
    }

    /// `A = 2.6·max(1, a^{-1/(a−1)})`.
    pub fn for_exponent(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 1.0) {
            return Err(invalid("a", format!("the bump needs a > 1, got {a}")));
        }
        Self::new(a, 2.0 * critical_radius(a).max(1.0) * 1.3)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn annulus(&self) -> f64 {
        self.annulus
    }

    pub fn plateau(&self) -> (f64, f64) {
        self.plateau
    }

    pub fn critical_radius(&self) -> f64 {
        critical_radius(self.a)
    }

    pub fn phi(&self, xi: f64) -> f64 {
        let r = xi.abs();
        let inner = 1.0 / self.annulus;
        let (lo, hi) = self.plateau;
        if r <= inner || r >= self.annulus {
            0.0
        } else if r < lo {
            smooth_step((r - inner) / (lo - inner))
        } else if r <= hi {
            1.0
        } else {
            smooth_step((self.annulus - r) / (self.annulus - hi))
        }
    }
}

fn critical_radius(a: f64) -> f64 {
    a.powf(-1.0 / (a - 1.0))
}

/// Smallest 1-D grid of period `period` meeting the [`make_f_nu`] preconditions.
pub fn grid_for_nu(nu: u32, spec: &BumpSpec, period: f64) -> Result<FrequencyGrid> {
    if !(period.is_finite() && period > 0.0) {
        return Err(invalid("period", format!("must be > 0, got {period}")));
    }
    let spacing = 2.0 * PI / period;
    let band = spec.annulus * 2f64.powi(nu as i32);
    let mode_bound = (band / spacing).ceil() as usize;
    if 2 * mode_bound + 1 > MAX_MODES {
        return Err(Error::Budget {
            reason: format!("nu = {nu} needs {} modes (limit {MAX_MODES})", 2 * mode_bound + 1),
        });
    }
    FrequencyGrid::new(1, period, mode_bound)
}

fn check_dilation(nu: u32, spec: &BumpSpec, grid: &FrequencyGrid) -> Result<()> {
    if grid.len() > MAX_MODES {
        return Err(Error::Budget {
            reason: format!("{} modes exceed the limit {MAX_MODES}", grid.len()),
        });
    }
    let scale = 2f64.powi(nu as i32);
    let band = grid.mode_bound() as f64 * grid.spacing();
    let need_band = spec.annulus * scale;
    let max_spacing = (spec.annulus - 1.0 / spec.annulus) * scale / ANNULUS_POINTS;
    if band < need_band {
        return Err(Error::Resolution {
            reason: format!(
                "band {band} below A·2^nu = {need_band}; need mode bound >= {}",
                (need_band / grid.spacing()).ceil()
            ),
        });
    }
    if grid.spacing() > max_spacing {
        return Err(Error::Resolution {
            reason: format!(
                "spacing {} exceeds (A − 1/A)·2^nu/64 = {max_spacing}; need period >= {}",
                grid.spacing(),
                2.0 * PI / max_spacing
            ),
        });
    }
    Ok(())
}

/// `f̂_ν(ξ) = φ(2^{-ν}ξ)` on a 1-D grid.
pub fn make_f_nu(nu: u32, spec: &BumpSpec, grid: FrequencyGrid) -> Result<SpectralFunction> {
    if grid.dim() != 1 {
        return Err(invalid("grid", "make_f_nu needs a 1-D grid; use make_tensor_f_nu"));
    }
    check_dilation(nu, spec, &grid)?;
    let scale = 2f64.powi(-(nu as i32));
    SpectralFunction::sample_symbol(grid, |xi| Complex64::new(spec.phi(scale * xi[0]), 0.0))
}

/// `f̂_ν(ξ) = φ(2^{-ν}ξ₁) ψ(ξ₂)` on a 2-D grid.
pub fn make_tensor_f_nu(nu: u32, spec: &BumpSpec, grid: FrequencyGrid) -> Result<SpectralFunction> {
    if grid.dim() != 2 {
        return Err(invalid("grid", "make_tensor_f_nu needs a 2-D grid"));
    }
    check_dilation(nu, spec, &grid)?;
    let scale = 2f64.powi(-(nu as i32));
    SpectralFunction::sample_symbol(grid, |xi| {
        Complex64::new(spec.phi(scale * xi[0]) * psi(xi[1]), 0.0)
    })
}

/// `ψ` sampled on a 1-D grid covering its support.
pub fn make_psi(grid: FrequencyGrid) -> Result<SpectralFunction> {
    if grid.dim() != 1 {
        return Err(invalid("grid", "psi lives on a 1-D grid"));
    }
    if grid.mode_bound() as f64 * grid.spacing() < 1.0 {
        return Err(Error::Resolution {
            reason: "band must cover supp psi = [-1, 1]".into(),
        });
    }
    SpectralFunction::sample_symbol(grid, |xi| Complex64::new(psi(xi[0]), 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeChoice {
    pub t: f64,
    pub tau: f64,
    /// Index of the selected `t_k` when the neighborhood of `k* = e^{1/τ}` is enumerable.
    pub k: Option<u64>,
    /// `|t − τ|` exactly when enumerated, else the analytic gap bound `τ² e^{-1/τ}`.
    pub substitution_error_bound: f64,
    /// The analytic bound is positive but flushes to zero in `f64`.
    pub below_representable: bool,
}

/// Nearest term of `t_k = 1/ln k`, `k ≥ 3`, to `τ`.
///
/// Past `k* = e^{1/τ} > 2^53` the term itself is returned as `τ`, with the
/// gap of the sequence near `k*`, `t_k − t_{k+1} ≈ 1/(k ln² k) = τ²/k*`,
/// as the error bound.
pub fn nearest_log_reciprocal_time(tau: f64) -> Result<TimeChoice> {
    let first = log_reciprocal_term(LOG_RECIPROCAL_START);
    if !(tau > 0.0 && tau < first) {
        return Err(invalid("tau", format!("must lie in (0, 1/ln 3), got {tau}")));
    }
    let inv = 1.0 / tau;
    if inv > ENUMERABLE_K.ln() {
        let bound = tau * tau * (-inv).exp();
        return Ok(TimeChoice {
            t: tau,
            tau,
            k: None,
            substitution_error_bound: bound,
            below_representable: bound == 0.0,
        });
    }
    // largest k with t_k ≥ τ
    let mut k = (inv.exp().floor() as u64).max(LOG_RECIPROCAL_START);
    while k > LOG_RECIPROCAL_START && log_reciprocal_term(k) < tau {
        k -= 1;
    }
    while log_reciprocal_term(k + 1) >= tau {
        k += 1;
    }
    let (upper, lower) = (log_reciprocal_term(k), log_reciprocal_term(k + 1));
    let (k, t) = if upper - tau <= tau - lower {
        (k, upper)
    } else {
        (k + 1, lower)
    };
    Ok(TimeChoice {
        t,
        tau,
        k: Some(k),
        substitution_error_bound: (t - tau).abs(),
        below_representable: false,
    })
}

fn check_x_range(x: f64, nu: u32, c_lower: f64) -> Result<()> {
    if c_lower.is_nan() || c_lower < 4.0 {
        return Err(invalid("C", format!("must be >= 4, got {c_lower}")));
    }
    let lo = c_lower * 2f64.powi(-(nu as i32));
    if !(x >= lo && x <= 1.0) {
        return Err(invalid("x", format!("must lie in [C·2^-nu, 1] = [{lo}, 1], got {x}")));
    }
    Ok(())
}

/// Sequence time approximating `τ = x·2^{ν(1−a)}`.
pub fn optimal_time(x: f64, nu: u32, params: &ExponentParams, c_lower: f64) -> Result<TimeChoice> {
    params.require_dispersive()?;
    check_x_range(x, nu, c_lower)?;
    nearest_log_reciprocal_time(x * 2f64.powf(nu as f64 * (1.0 - params.a())))
}

/// Setup shared by every row of a growth table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthConfig {
    pub nu_min: u32,
    pub nu_max: u32,
    pub c_lower: f64,
    /// Points of the logarithmic `x` mesh on `[C2^{-ν}, 1]`.
    pub mesh: usize,
    pub period: f64,
    /// Spatial dimension, 1 or 2.
    pub dim: usize,
    /// Further values of `C` whose fitted exponents are reported.
    pub sensitivity: Vec<f64>,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self {
            nu_min: 6,
            nu_max: 12,
            c_lower: 8.0,
            mesh: 512,
            period: 32.0,
            dim: 1,
            sensitivity: vec![4.0, 16.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub nu: u32,
    pub modes: usize,
    pub norm_f: f64,
    /// Square root of the mesh quadrature of `|S_{t(x)} f_ν(x)|²`.
    pub lower_bound_maximal: f64,
    pub ratio: f64,
    /// Largest `|t − τ|` bound over the mesh.
    pub substitution_error_bound: f64,
    /// Largest `lipschitz_time_bound / |S_τ f_ν(x)|` over the mesh.
    pub substitution_relative: f64,
    pub enumerated_samples: usize,
    /// `log r_ν` minus the fitted line.
    pub fit_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub c_lower: f64,
    pub exponent: f64,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthTable {
    pub config: GrowthConfig,
    pub rows: Vec<GrowthRow>,
    /// Least-squares fit of `log r_ν` against `log ν`.
    pub fit: LineFit,
    pub exponent: f64,
    /// Least-squares fit of `r_ν²` against `ν`; `r² ∝ ν − ν₀` gives `ν₀ = −intercept/slope`.
    pub square_fit: LineFit,
    pub square_offset: f64,
    /// `‖ψ‖₂²` for the transverse factor when `dim = 2`.
    pub transverse_norm_sq: Option<f64>,
    pub sensitivity: Vec<SensitivityRow>,
    pub strictly_increasing: bool,
}

/// Logarithmic mesh on `[lo, 1]` with trapezoid weights for `∫ g(x) dx`.
pub fn log_mesh(lo: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    let (u0, u1) = (lo.ln(), 0.0f64);
    let du = (u1 - u0) / (count - 1) as f64;
    let xs: Vec<f64> = (0..count).map(|i| (u0 + du * i as f64).exp()).collect();
    let weights = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let end = i == 0 || i == count - 1;
            x * du * if end { 0.5 } else { 1.0 }
        })
        .collect();
    (xs, weights)
}

struct MeshSample {
    weight: f64,
    value: Complex64,
    choice: TimeChoice,
}

fn sample_mesh(
    f: &SpectralFunction,
    nu: u32,
    params: &ExponentParams,
    c_lower: f64,
    mesh: usize,
) -> Result<Vec<MeshSample>> {
    let (xs, weights) = log_mesh(c_lower * 2f64.powi(-(nu as i32)), mesh);
    let choices = xs
        .iter()
        .map(|&x| optimal_time(x, nu, params, c_lower))
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = choices.iter().map(|c| c.t).collect();
    let values = f.evaluate_with_times(params, &xs, &times)?;
    Ok(weights
        .into_iter()
        .zip(values)
        .zip(choices)
        .map(|((weight, value), choice)| MeshSample {
            weight,
            value,
            choice,
        })
        .collect())
}

/// Mesh quadrature of `|S_{t(x)} f_ν(x)|²` over `[C2^{-ν}, 1]` for a 1-D `f_ν`.
pub fn lower_bound_integral(
    f: &SpectralFunction,
    nu: u32,
    params: &ExponentParams,
    c_lower: f64,
    mesh: usize,
) -> Result<f64> {
    if mesh < 2 {
        return Err(invalid("mesh", "needs at least 2 points"));
    }
    Ok(sample_mesh(f, nu, params, c_lower, mesh)?
        .iter()
        .map(|s| s.weight * s.value.norm_sqr())
        .sum())
}

const TRANSVERSE_MODES: usize = 8;

struct Transverse {
    psi: SpectralFunction,
    norm_sq: f64,
}

impl Transverse {
    fn new(period: f64) -> Result<Self> {
        let spacing = 2.0 * PI / period;
        let bound = ((1.0 / spacing).ceil() as usize).max(TRANSVERSE_MODES);
        let psi = make_psi(FrequencyGrid::new(1, period, bound)?)?;
        let norm_sq = psi.l2_norm_sq();
        Ok(Self { psi, norm_sq })
    }

    /// `∫ |J(t, x′)|² dx′` by lattice quadrature of `J = S_t ψ`.
    fn energy(&self, t: f64, params: &ExponentParams, plan: &mut LatticePlan) -> Result<f64> {
        Ok(plan.synthesize(self.psi.propagate(t, params)?.coeffs()).l2_norm_sq())
    }
}

fn growth_row(
    nu: u32,
    spec: &BumpSpec,
    params: &ExponentParams,
    config: &GrowthConfig,
    c_lower: f64,
    transverse: Option<&Transverse>,
) -> Result<GrowthRow> {
    let grid = grid_for_nu(nu, spec, config.period)?;
    let f = make_f_nu(nu, spec, grid)?;
    let samples = sample_mesh(&f, nu, params, c_lower, config.mesh)?;
    let one_d = ExponentParams::new(params.a(), params.s(), 1)?;
    let lip_rate = f.lipschitz_time_bound(0.0, 1.0, &one_d);

    let (integral, norm_sq) = match transverse {
        None => (
            samples.iter().map(|s| s.weight * s.value.norm_sqr()).sum::<f64>(),
            f.l2_norm_sq(),
        ),
        Some(tr) => {
            let mut plan = LatticePlan::new(*tr.psi.grid(), 2 * tr.psi.grid().side())?;
            let mut total = 0.0;
            for s in &samples {
                total += s.weight * s.value.norm_sqr() * tr.energy(s.choice.t, &one_d, &mut plan)?;
            }
            (total, f.l2_norm_sq() * tr.norm_sq)
        }
    };
    let substitution_relative = samples
        .iter()
        .map(|s| lip_rate * s.choice.substitution_error_bound / s.value.norm())
        .fold(0.0, f64::max);
    let lower = integral.sqrt();
    let norm_f = norm_sq.sqrt();
    Ok(GrowthRow {
        nu,
        modes: f.coeffs().iter().filter(|c| c.norm_sqr() > 0.0).count(),
        norm_f,
        lower_bound_maximal: lower,
        ratio: lower / norm_f,
        substitution_error_bound: samples
            .iter()
            .map(|s| s.choice.substitution_error_bound)
            .fold(0.0, f64::max),
        substitution_relative,
        enumerated_samples: samples.iter().filter(|s| s.choice.k.is_some()).count(),
        fit_residual: 0.0,
    })
}

fn fit_exponent(nus: &[u32], ratios: &[f64]) -> Result<LineFit> {
    let xs: Vec<f64> = nus.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    least_squares(&xs, &ys).ok_or_else(|| invalid("nu_range", "need at least two values of nu"))
}

fn validate_growth(params: &ExponentParams, config: &GrowthConfig) -> Result<()> {
    params.require_dispersive()?;
    if config.nu_max <= config.nu_min {
        return Err(invalid("nu_range", "need nu_min < nu_max"));
    }
    if config.mesh < 256 {
        return Err(invalid("mesh", format!("needs >= 256 points, got {}", config.mesh)));
    }
    match config.dim {
        1 => {}
        2 if params.a() == 2.0 => {}
        2 => return Err(invalid("a", "the tensor construction needs a = 2")),
        d => return Err(invalid("dim", format!("must be 1 or 2, got {d}"))),
    }
    for &c in std::iter::once(&config.c_lower).chain(&config.sensitivity) {
        if c.is_nan() || c < 4.0 {
            return Err(invalid("C", format!("must be >= 4, got {c}")));
        }
        if c * 2f64.powi(-(config.nu_min as i32)) >= 1.0 {
            return Err(invalid("nu_range", format!("C·2^-nu_min must be < 1 (C = {c})")));
        }
    }
    Ok(())
}

/// Growth of the maximal lower bound relative to `‖f_ν‖₂` across `ν`.
pub fn growth_experiment(
    params: &ExponentParams,
    spec: &BumpSpec,
    config: &GrowthConfig,
) -> Result<GrowthTable> {
    validate_growth(params, config)?;
    // budget check up front, before any allocation
    grid_for_nu(config.nu_max, spec, config.period)?;
    let transverse = match config.dim {
        2 => Some(Transverse::new(config.period)?),
        _ => None,
    };
    let nus: Vec<u32> = (config.nu_min..=config.nu_max).collect();
    let run = |c: f64| -> Result<Vec<GrowthRow>> {
        nus.par_iter()
            .map(|&nu| growth_row(nu, spec, params, config, c, transverse.as_ref()))
            .collect()
    };
    let mut rows = run(config.c_lower)?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let fit = fit_exponent(&nus, &ratios)?;
    for row in &mut rows {
        row.fit_residual = row.ratio.ln() - fit.predict((row.nu as f64).ln());
    }
    let squares: Vec<f64> = ratios.iter().map(|r| r * r).collect();
    let nu_f: Vec<f64> = nus.iter().map(|&n| n as f64).collect();
    let square_fit = least_squares(&nu_f, &squares).expect("at least two distinct nu");
    let sensitivity = config
        .sensitivity
        .iter()
        .map(|&c| -> Result<SensitivityRow> {
            let ratios: Vec<f64> = run(c)?.iter().map(|r| r.ratio).collect();
            Ok(SensitivityRow {
                c_lower: c,
                exponent: fit_exponent(&nus, &ratios)?.slope,
                ratios,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GrowthTable {
        config: config.clone(),
        strictly_increasing: ratios.windows(2).all(|w| w[1] > w[0]),
        exponent: fit.slope,
        fit,
        square_offset: -square_fit.intercept / square_fit.slope,
        square_fit,
        transverse_norm_sq: transverse.map(|t| t.norm_sq),
        sensitivity,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPhase {
    pub nu: u32,
    pub x: f64,
    /// `|∫ e^{i2^ν x K(η)} φ(η) dη|`, `K(η) = |η|^a + η`.
    pub integral_abs: f64,
    /// `c·2^{-ν/2} x^{-1/2}`.
    pub predicted_floor: f64,
    pub quadrature_points: usize,
    pub critical_point: f64,
}

/// Phase derivative `K′(η)`.
fn phase_slope(eta: f64, a: f64) -> f64 {
    if eta >= 0.0 {
        a * eta.powf(a - 1.0) + 1.0
    } else {
        1.0 - a * (-eta).powf(a - 1.0)
    }
}

/// The unique zero of `K′` on `supp φ`, located by bisection after a sign-change scan.
pub fn critical_point(spec: &BumpSpec) -> Result<f64> {
    let a = spec.a;
    let (inner, outer) = (1.0 / spec.annulus, spec.annulus);
    let scan = 4096;
    let mut brackets = Vec::new();
    for (lo, hi) in [(-outer, -inner), (inner, outer)] {
        let h = (hi - lo) / scan as f64;
        for i in 0..scan {
            let (u, v) = (lo + h * i as f64, lo + h * (i + 1) as f64);
            if phase_slope(u, a).signum() != phase_slope(v, a).signum() {
                brackets.push((u, v));
            }
        }
    }
    let [(mut lo, mut hi)] = brackets[..] else {
        return Err(invalid(
            "a",
            format!("expected one critical point on supp phi, found {}", brackets.len()),
        ));
    };
    let s_lo = phase_slope(lo, a).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if phase_slope(mid, a).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn oscillatory_integral(spec: &BumpSpec, lambda: f64) -> Result<(Complex64, usize)> {
    let a = spec.a;
    let (inner, outer) = (1.0 / spec.annulus, spec.annulus);
    let max_slope = lambda * (a * outer.powf(a - 1.0) + 1.0);
    let per_unit = (POINTS_PER_TURN * max_slope / (2.0 * PI)).max(64.0);
    let n = ((outer - inner) * per_unit).ceil() as usize + 1;
    if 2 * n > MAX_QUADRATURE_POINTS {
        return Err(Error::Budget {
            reason: format!("stationary-phase quadrature needs {} points (limit {MAX_QUADRATURE_POINTS})", 2 * n),
        });
    }
    let h = (outer - inner) / (n - 1) as f64;
    // φ vanishes at both ends of each segment, so the trapezoid rule is a plain sum
    let total = [-1.0f64, 1.0]
        .iter()
        .map(|&sign| {
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let eta = sign * (inner + h * i as f64);
                    let phase = lambda * (eta.abs().powf(a) + eta);
                    Complex64::cis(phase) * spec.phi(eta)
                })
                .sum::<Complex64>()
        })
        .sum::<Complex64>()
        * h;
    Ok((total, 2 * n))
}

/// Oscillatory integral behind the lower bound, with the floor `c·2^{-ν/2}x^{-1/2}`.
pub fn stationary_phase_check(
    nu: u32,
    x: f64,
    spec: &BumpSpec,
    c_lower: f64,
    floor_constant: f64,
) -> Result<StationaryPhase> {
    check_x_range(x, nu, c_lower)?;
    let lambda = 2f64.powi(nu as i32) * x;
    let (value, points) = oscillatory_integral(spec, lambda)?;
    Ok(StationaryPhase {
        nu,
        x,
        integral_abs: value.norm(),
        predicted_floor: floor_constant / lambda.sqrt(),
        quadrature_points: points,
        critical_point: critical_point(spec)?,
    })
}

/// Safety factor applied to the brute-force minimum when fixing the floor constant.
pub const FLOOR_SAFETY: f64 = 0.5;

/// `FLOOR_SAFETY · min (2^ν x)^{1/2} |∫ e^{iG} φ|` over `ν ∈ nus` and a
/// logarithmic `x` mesh on `[C2^{-ν}, 1]`.
pub fn calibrate_floor(spec: &BumpSpec, nus: &[u32], c_lower: f64, mesh: usize) -> Result<f64> {
    if nus.is_empty() || mesh < 2 {
        return Err(invalid("nus", "need at least one nu and two mesh points"));
    }
    let mut best = f64::INFINITY;
    for &nu in nus {
        let lo = c_lower * 2f64.powi(-(nu as i32));
        check_x_range(lo, nu, c_lower)?;
        for x in log_mesh(lo, mesh).0 {
            let x = x.min(1.0);
            let lambda = 2f64.powi(nu as i32) * x;
            let (value, _) = oscillatory_integral(spec, lambda)?;
            best = best.min(value.norm() * lambda.sqrt());
        }
    }
    Ok(FLOOR_SAFETY * best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec2() -> BumpSpec {
        BumpSpec::for_exponent(2.0).unwrap()
    }

    fn params(a: f64) -> ExponentParams {
        ExponentParams::new(a, 0.5, 1).unwrap()
    }

    #[test]
    fn bump_examples() {
        let s = spec2();
        assert_relative_eq!(s.annulus(), 2.6, epsilon = 1e-15);
        assert_eq!(s.phi(0.5), 1.0);
        assert_eq!(s.phi(-0.5), 1.0);
        assert_eq!(s.phi(1.0 / (2.0 * 2.6)), 0.0);
        assert_eq!(s.phi(2.0 * 2.6), 0.0);
        for i in 0..10_000 {
            let xi = -3.0 + 6.0 * i as f64 / 9_999.0;
            let v = s.phi(xi);
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(v, s.phi(-xi));
        }
        assert!(BumpSpec::for_exponent(1.05).is_err());
        for a in [1.3, 1.5, 3.0, 6.0] {
            let b = BumpSpec::for_exponent(a).unwrap();
            assert_eq!(b.phi(b.critical_radius()), 1.0);
            assert!(b.phi(1.0 / b.annulus()) == 0.0 && b.phi(b.annulus()) == 0.0);
        }
        assert!(BumpSpec::new(2.0, 1.5).is_err());
        assert!(BumpSpec::new(1.0, 2.6).is_err());
    }

    #[test]
    fn smooth_step_properties() {
        assert_eq!(smooth_step(0.5), 0.5);
        assert_relative_eq!(smooth_step(0.3) + smooth_step(0.7), 1.0, epsilon = 1e-15);
        assert!(smooth_step(1e-3) < 1e-300);
        assert_eq!(psi(0.25), 1.0);
        assert_eq!(psi(1.0), 0.0);
    }

    #[test]
    fn f_nu_support_and_norm_law() {
        let s = spec2();
        let mut prev: Option<f64> = None;
        for nu in 4..9 {
            let grid = grid_for_nu(nu, &s, 32.0).unwrap();
            let f = make_f_nu(nu, &s, grid).unwrap();
            let scale = 2f64.powi(nu as i32);
            for (i, c) in f.coeffs().iter().enumerate() {
                let r = grid.norm(i);
                if r <= scale / s.annulus() || r >= scale * s.annulus() {
                    assert_eq!(c.norm(), 0.0);
                }
            }
            let norm = f.l2_norm_sq().sqrt();
            // continuum value: (2π)^{-1} 2^ν ∫φ²
            let h = 1e-4;
            let int_phi2: f64 = (0..60_000).map(|i| s.phi(-3.0 + h * i as f64).powi(2)).sum::<f64>() * h;
            assert_relative_eq!(norm, (scale * int_phi2 / (2.0 * PI)).sqrt(), max_relative = 1e-3);
            if let Some(p) = prev {
                assert_relative_eq!(norm / p, 2f64.sqrt(), max_relative = 0.02);
            }
            prev = Some(norm);
        }
    }

    #[test]
    fn nu_zero_samples_phi() {
        let s = spec2();
        let grid = FrequencyGrid::new(1, 64.0 * PI, 100).unwrap();
        let f = make_f_nu(0, &s, grid).unwrap();
        for (i, c) in f.coeffs().iter().enumerate() {
            assert_eq!(c.re, s.phi(grid.frequency(i)[0]));
        }
    }

    #[test]
    fn dilation_preconditions() {
        let s = spec2();
        let coarse = FrequencyGrid::new(1, 32.0, 10).unwrap();
        assert!(matches!(make_f_nu(6, &s, coarse), Err(Error::Resolution { .. })));
        let wide = FrequencyGrid::new(1, 2.0, 200).unwrap(); // spacing π
        assert!(matches!(make_f_nu(6, &s, wide), Err(Error::Resolution { .. })));
        assert!(matches!(grid_for_nu(30, &s, 32.0), Err(Error::Budget { .. })));
    }

    #[test]
    fn time_selection_enumerated() {
        let c = nearest_log_reciprocal_time(0.2).unwrap();
        let k = c.k.unwrap();
        assert!(k == 148 || k == 149);
        let d148 = (log_reciprocal_term(148) - 0.2).abs();
        let d149 = (log_reciprocal_term(149) - 0.2).abs();
        assert_eq!(k, if d148 <= d149 { 148 } else { 149 });
        assert_eq!(c.substitution_error_bound, d148.min(d149));

        let c = nearest_log_reciprocal_time(0.05).unwrap();
        let k = c.k.unwrap();
        let kstar = 20f64.exp();
        assert!((k as f64 - kstar).abs() <= 1.0);
        let gap = log_reciprocal_term(k - 1) - log_reciprocal_term(k);
        assert!(c.substitution_error_bound <= gap);
        assert!(c.substitution_error_bound < 6e-12);
        for j in [k - 1, k + 1] {
            assert!((log_reciprocal_term(j) - 0.05).abs() >= c.substitution_error_bound);
        }
    }

    #[test]
    fn time_selection_analytic() {
        let c = optimal_time(1.0, 12, &params(2.0), 8.0).unwrap();
        assert_eq!(c.tau, 1.0 / 4096.0);
        assert_eq!(c.t, c.tau);
        assert!(c.k.is_none());
        assert_eq!(c.substitution_error_bound, 0.0);
        assert!(c.below_representable);
        assert!(optimal_time(0.01, 6, &params(2.0), 8.0).is_err());
        assert!(optimal_time(0.5, 6, &params(2.0), 2.0).is_err());
        assert!(optimal_time(0.5, 6, &params(1.0), 8.0).is_err());
        assert!(nearest_log_reciprocal_time(0.95).is_err());
    }

    #[test]
    fn mesh_integrates_reciprocal() {
        let (xs, w) = log_mesh(1e-3, 512);
        assert_relative_eq!(xs[0], 1e-3, max_relative = 1e-12);
        assert_relative_eq!(*xs.last().unwrap(), 1.0, max_relative = 1e-12);
        let integral: f64 = xs.iter().zip(&w).map(|(x, w)| w / x).sum();
        assert_relative_eq!(integral, 1e3f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn evaluation_matches_scaled_oscillatory_integral() {
        let s = spec2();
        let p = params(2.0);
        let nu = 6;
        let f = make_f_nu(nu, &s, grid_for_nu(nu, &s, 32.0).unwrap()).unwrap();
        for x in [0.2, 0.5, 1.0] {
            let tau = x * 2f64.powi(-(nu as i32));
            let direct = f.evaluate(tau, &p, &[x]).unwrap()[0].norm();
            let sp = stationary_phase_check(nu, x, &s, 8.0, 0.0).unwrap();
            let expect = 2f64.powi(nu as i32) * sp.integral_abs / (2.0 * PI);
            assert_relative_eq!(direct, expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn critical_point_location() {
        for a in [1.5, 2.0, 3.0] {
            let s = BumpSpec::for_exponent(a).unwrap();
            assert_relative_eq!(critical_point(&s).unwrap(), -s.critical_radius(), epsilon = 1e-12);
        }
    }

    #[test]
    fn stationary_phase_scaling_and_floor() {
        let s = spec2();
        let c = calibrate_floor(&s, &[4, 5, 6], 8.0, 16).unwrap();
        assert!(c > 0.0);
        // the law is asymptotic; 2^ν x ≥ 128 is past the plateau-width regime
        for (nu, x) in [(7, 1.0), (8, 0.5), (9, 1.0)] {
            let lo = stationary_phase_check(nu, x, &s, 8.0, c).unwrap();
            let hi = stationary_phase_check(nu + 2, x, &s, 8.0, c).unwrap();
            let ratio = hi.integral_abs / lo.integral_abs;
            assert!((ratio - 0.5).abs() < 0.075, "ratio {ratio}");
            assert!(lo.integral_abs >= lo.predicted_floor);
            assert!(hi.integral_abs >= hi.predicted_floor);
        }
    }

    #[test]
    fn tensor_evaluation_factorizes() {
        let s = spec2();
        let p2 = ExponentParams::new(2.0, 0.5, 2).unwrap();
        let p1 = params(2.0);
        let nu = 3;
        let g1 = grid_for_nu(nu, &s, 32.0).unwrap();
        let g2 = FrequencyGrid::new(2, 32.0, g1.mode_bound()).unwrap();
        let f2 = make_tensor_f_nu(nu, &s, g2).unwrap();
        let f1 = make_f_nu(nu, &s, g1).unwrap();
        let psi_f = make_psi(FrequencyGrid::new(1, 32.0, g1.mode_bound()).unwrap()).unwrap();
        assert_relative_eq!(f2.l2_norm_sq(), f1.l2_norm_sq() * psi_f.l2_norm_sq(), max_relative = 1e-10);
        let pts = [0.5, 0.0, 0.9, 1.3, 0.7, -2.0];
        let times = [0.5 / 8.0, 0.9 / 8.0, 0.7 / 8.0];
        let v2 = f2.evaluate_with_times(&p2, &pts, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let a = f1.evaluate(t, &p1, &[pts[2 * k]]).unwrap()[0];
            let b = psi_f.evaluate(t, &p1, &[pts[2 * k + 1]]).unwrap()[0];
            assert_relative_eq!((v2[k] - a * b).norm(), 0.0, epsilon = 1e-10 * v2[k].norm().max(1e-3));
        }
    }

    #[test]
    fn small_growth_table() {
        let cfg = GrowthConfig {
            nu_min: 4,
            nu_max: 6,
            mesh: 256,
            sensitivity: vec![],
            ..GrowthConfig::default()
        };
        let t = growth_experiment(&params(2.0), &spec2(), &cfg).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(t.rows.iter().all(|r| r.norm_f > 0.0 && r.lower_bound_maximal > 0.0));
        let cfg2 = GrowthConfig { dim: 2, ..cfg.clone() };
        let t2 = growth_experiment(&ExponentParams::new(2.0, 0.5, 2).unwrap(), &spec2(), &cfg2).unwrap();
        for (r1, r2) in t.rows.iter().zip(&t2.rows) {
            assert_relative_eq!(r2.ratio, r1.ratio, max_relative = 1e-9);
        }
        assert!(growth_experiment(&params(2.0), &spec2(), &GrowthConfig { mesh: 100, ..cfg }).is_err());
    }
}
