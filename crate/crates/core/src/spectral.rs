//! Band-limited functions on a periodic frequency lattice.
//!
//! A [`FrequencyGrid`] fixes the lattice `ξ = (2π/L)·m`, `|m_i| ≤ M`, and every
//! integral over frequency becomes a Riemann sum with weight `Δξⁿ`. Spatial
//! values use the inverse-transform normalization
//! `S_t f(x) = (2π)⁻ⁿ Σ_m e^{iξ·x} e^{it|ξ|^a} f̂(ξ_m) Δξⁿ`, so on the torus of
//! side `L` Plancherel holds exactly in the form `‖f‖₂² = (2π)⁻ⁿ Σ |f̂|² Δξⁿ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Exponents shared by every experiment: dispersion `a`, regularity `s`, dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ExponentParams {
    a: f64,
    s: f64,
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    a: f64,
    s: f64,
    n: usize,
}

impl TryFrom<RawParams> for ExponentParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ExponentParams::new(raw.a, raw.s, raw.n)
    }
}

impl From<ExponentParams> for RawParams {
    fn from(p: ExponentParams) -> Self {
        RawParams {
            a: p.a,
            s: p.s,
            n: p.n,
        }
    }
}

impl ExponentParams {
    pub fn new(a: f64, s: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid("a", format!("must be finite and > 0, got {a}")));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(invalid("s", format!("must be finite and > 0, got {s}")));
        }
        if n == 0 {
            return Err(invalid("n", "dimension must be >= 1"));
        }
        Ok(Self { a, s, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Same exponents with a different regularity.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(self.a, s, self.n)
    }

    pub fn require_dispersive(&self) -> Result<()> {
        if self.a > 1.0 {
            Ok(())
        } else {
            Err(invalid("a", format!("requires a > 1, got {}", self.a)))
        }
    }

    pub fn require_s_below_a(&self) -> Result<()> {
        if self.s < self.a {
            Ok(())
        } else {
            Err(invalid(
                "s",
                format!("requires s < a, got s = {}, a = {}", self.s, self.a),
            ))
        }
    }
}

/// Uniform frequency lattice for a torus of side `period`.
///
/// Modes are enumerated lexicographically in `m` with the first coordinate
/// varying slowest; every reduction in this crate follows that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct FrequencyGrid {
    dim: usize,
    period: f64,
    mode_bound: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    period: f64,
    mode_bound: usize,
}

impl TryFrom<RawGrid> for FrequencyGrid {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        FrequencyGrid::new(raw.dim, raw.period, raw.mode_bound)
    }
}

impl From<FrequencyGrid> for RawGrid {
    fn from(g: FrequencyGrid) -> Self {
        RawGrid {
            dim: g.dim,
            period: g.period,
            mode_bound: g.mode_bound,
        }
    }
}

impl FrequencyGrid {
    pub fn new(dim: usize, period: f64, mode_bound: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(invalid("dim", format!("only 1 or 2 supported, got {dim}")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid("period", format!("must be finite and > 0, got {period}")));
        }
        if mode_bound == 0 {
            return Err(invalid("mode_bound", "must be >= 1"));
        }
        let side = 2 * mode_bound + 1;
        if dim == 2 && side.checked_mul(side).is_none() {
            return Err(invalid("mode_bound", "mode count overflows"));
        }
        Ok(Self {
            dim,
            period,
            mode_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn mode_bound(&self) -> usize {
        self.mode_bound
    }

    /// Lattice spacing `Δξ = 2π / L`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Modes per axis, `2M + 1`.
    pub fn side(&self) -> usize {
        2 * self.mode_bound + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Riemann-sum weight `Δξⁿ`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Integer lattice coordinates of mode `index`; unused trailing entries are zero.
    pub fn mode(&self, index: usize) -> [i64; 2] {
        let side = self.side();
        let m = self.mode_bound as i64;
        match self.dim {
            1 => [index as i64 - m, 0],
            _ => [(index / side) as i64 - m, (index % side) as i64 - m],
        }
    }

    pub fn frequency(&self, index: usize) -> [f64; 2] {
        let [m1, m2] = self.mode(index);
        let h = self.spacing();
        [m1 as f64 * h, m2 as f64 * h]
    }

    /// `|ξ|` of mode `index`.
    pub fn norm(&self, index: usize) -> f64 {
        let [x, y] = self.frequency(index);
        x.hypot(y)
    }

    /// Largest `|ξ|` on the lattice (the corner mode).
    pub fn max_norm(&self) -> f64 {
        let r = self.mode_bound as f64 * self.spacing();
        r * (self.dim as f64).sqrt()
    }

    fn norms(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.norm(i)).collect()
    }
}

/// Values of `S_t f` on the uniform spatial lattice `x_j = j·L/P` dual to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    pub dim: usize,
    pub period: f64,
    pub resolution: usize,
    /// Row-major, first coordinate slowest.
    pub values: Vec<Complex64>,
}

impl LatticeField {
    /// Quadrature weight `(L/P)ⁿ` of one lattice cell.
    pub fn cell_volume(&self) -> f64 {
        (self.period / self.resolution as f64).powi(self.dim as i32)
    }

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

    /// `∫ |g|²` over the torus by the lattice rule.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume()
    }
}

/// Band-limited function given by its Fourier coefficients on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: FrequencyGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn zeros(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: FrequencyGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(invalid(
                "coeffs",
                format!("expected {} coefficients, got {}", grid.len(), coeffs.len()),
            ));
        }
        if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFiniteSymbol {
                frequency: grid.frequency(i)[..grid.dim()].to_vec(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Samples `symbol` at every lattice frequency. The closure receives `ξ`
    /// as a slice of length `dim`.
    pub fn sample_symbol<F>(grid: FrequencyGrid, symbol: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let dim = grid.dim();
        let mut coeffs = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let xi = grid.frequency(i);
            let v = symbol(&xi[..dim]);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteSymbol {
                    frequency: xi[..dim].to_vec(),
                });
            }
            coeffs.push(v);
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Largest `|ξ|` carrying a nonzero coefficient; zero for the zero function.
    pub fn support_radius(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, _)| self.grid.norm(i))
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map_coeffs(|_, c| c * factor)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| op(x, y))
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs,
        })
    }

    fn map_coeffs(&self, op: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| op(i, c))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Keeps the modes where `keep(|ξ|)` holds and zeroes the rest.
    pub fn restrict(&self, keep: impl Fn(f64) -> bool) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        self.map_coeffs(|i, c| if keep(self.grid.norm(i)) { c } else { zero })
    }

    /// `(S_t f)^(ξ) = e^{it|ξ|^a} f̂(ξ)`.
    pub fn propagate(&self, t: f64, params: &ExponentParams) -> Result<Self> {
        if !t.is_finite() {
            return Err(invalid("t", "time must be finite"));
        }
        if t == 0.0 {
            return Ok(self.clone());
        }
        let a = params.a();
        Ok(self.map_coeffs(|i, c| c * Complex64::cis(t * self.grid.norm(i).powf(a))))
    }

    /// Multiplies by the Bessel symbol `(1 + |ξ|²)^{-s/2}`.
    pub fn bessel_apply(&self, s: f64) -> Self {
        if s == 0.0 {
            return self.clone();
        }
        self.map_coeffs(|i, c| {
            let r = self.grid.norm(i);
            c * (1.0 + r * r).powf(-0.5 * s)
        })
    }

    /// `(Σ_m (1+|ξ_m|²)^s |f̂(ξ_m)|² Δξⁿ)^{1/2}`; any real `s`.
    pub fn h_s_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, c)| {
                let r = self.grid.norm(i);
                (1.0 + r * r).powf(s) * c.norm_sqr()
            })
            .sum();
        (sum * self.grid.cell_volume()).sqrt()
    }

    /// Spatial `‖f‖₂²` over the torus, `(2π)⁻ⁿ Σ |f̂|² Δξⁿ`.
    pub fn l2_norm_sq(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        sum * self.grid.cell_volume() / (2.0 * PI).powi(self.grid.dim() as i32)
    }

    /// `|t − u| · (2π)⁻ⁿ Σ |ξ|^a |f̂(ξ)| Δξⁿ`, a uniform bound on `|S_t f − S_u f|`.
    pub fn lipschitz_time_bound(&self, t: f64, u: f64, params: &ExponentParams) -> f64 {
        let dt = (t - u).abs();
        if dt == 0.0 {
            return 0.0;
        }
        let a = params.a();
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.grid.norm(i).powf(a) * c.norm())
            .sum();
        dt * sum * self.grid.cell_volume() / (2.0 * PI).powi(self.grid.dim() as i32)
    }

    /// Splits into `f_0, …, f_K`: `f̂_0` on `|ξ| ≤ 1` and `f̂_k` on
    /// `2^{k−1} < |ξ| ≤ 2^k`, `K = ⌈log₂ max|ξ|⌉` over the lattice.
    pub fn dyadic_decompose(&self) -> Vec<Self> {
        let count = dyadic_index(self.grid.max_norm()) + 1;
        let mut pieces = vec![Self::zeros(self.grid); count];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = dyadic_index(self.grid.norm(i));
            pieces[k].coeffs[i] = c;
        }
        pieces
    }

    /// Direct Riemann-sum evaluation of `S_t f` at `points` (flattened with stride `dim`).
    pub fn evaluate(&self, t: f64, params: &ExponentParams, points: &[f64]) -> Result<Vec<Complex64>> {
        let count = self.check_points(points)?;
        self.evaluate_with_times(params, points, &vec![t; count])
    }

    /// Evaluates `S_{t_i} f(x_i)`, each point with its own time.
    pub fn evaluate_with_times(
        &self,
        params: &ExponentParams,
        points: &[f64],
        times: &[f64],
    ) -> Result<Vec<Complex64>> {
        let count = self.check_points(points)?;
        if times.len() != count {
            return Err(invalid(
                "times",
                format!("{} times for {count} points", times.len()),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("t", "time must be finite"));
        }
        let dim = self.grid.dim();
        let a = params.a();
        let active: Vec<(usize, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, _)| (i, self.grid.norm(i).powf(a)))
            .collect();
        let weight = self.grid.cell_volume() / (2.0 * PI).powi(dim as i32);
        let out = (0..count)
            .into_par_iter()
            .map(|p| {
                let x = &points[p * dim..(p + 1) * dim];
                let t = times[p];
                let mut acc = Complex64::new(0.0, 0.0);
                for &(i, w) in &active {
                    let xi = self.grid.frequency(i);
                    let phase = xi[0] * x[0] + if dim == 2 { xi[1] * x[1] } else { 0.0 } + t * w;
                    acc += self.coeffs[i] * Complex64::cis(phase);
                }
                acc * weight
            })
            .collect();
        Ok(out)
    }

    fn check_points(&self, points: &[f64]) -> Result<usize> {
        let dim = self.grid.dim();
        if !points.len().is_multiple_of(dim) {
            return Err(invalid(
                "points",
                format!("flattened length {} is not a multiple of dim {dim}", points.len()),
            ));
        }
        let limit = self.grid.period();
        if let Some(x) = points.iter().find(|x| !(x.is_finite() && x.abs() <= limit)) {
            return Err(invalid(
                "points",
                format!("coordinate {x} lies outside [-L, L] with L = {limit}"),
            ));
        }
        Ok(points.len() / dim)
    }

    /// `S_t f` on the `resolution`-point dual lattice via FFT.
    pub fn evaluate_lattice(
        &self,
        t: f64,
        params: &ExponentParams,
        resolution: usize,
    ) -> Result<LatticeField> {
        let propagated = self.propagate(t, params)?;
        let mut plan = LatticePlan::new(self.grid, resolution)?;
        Ok(plan.synthesize(&propagated.coeffs))
    }

    /// Inverse of [`Self::evaluate_lattice`] at `t = 0`: recovers coefficients
    /// from lattice values, `f̂(ξ_m) = (L/P)ⁿ Σ_j g(x_j) e^{-iξ_m·x_j}`.
    pub fn from_lattice(grid: FrequencyGrid, field: &LatticeField) -> Result<Self> {
        if field.dim != grid.dim() || field.period != grid.period() {
            return Err(Error::GridMismatch);
        }
        let mut plan = LatticePlan::new(grid, field.resolution)?;
        let coeffs = plan.analyze(&field.values);
        Self::from_coeffs(grid, coeffs)
    }
}

fn dyadic_index(r: f64) -> usize {
    let mut k = 0;
    let mut edge = 1.0;
    while r > edge {
        k += 1;
        edge *= 2.0;
    }
    k
}

/// Reusable FFT plans for repeated lattice synthesis on one grid.
pub struct LatticePlan {
    grid: FrequencyGrid,
    resolution: usize,
    inverse: Arc<dyn Fft<f64>>,
    forward: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    column: Vec<Complex64>,
}

impl LatticePlan {
    pub fn new(grid: FrequencyGrid, resolution: usize) -> Result<Self> {
        if resolution < grid.side() {
            return Err(Error::Resolution {
                reason: format!(
                    "spatial resolution {resolution} below mode count per axis {}",
                    grid.side()
                ),
            });
        }
        let mut planner = FftPlanner::new();
        let size = resolution.pow(grid.dim() as u32);
        Ok(Self {
            grid,
            resolution,
            inverse: planner.plan_fft_inverse(resolution),
            forward: planner.plan_fft_forward(resolution),
            buffer: vec![Complex64::new(0.0, 0.0); size],
            column: vec![Complex64::new(0.0, 0.0); resolution],
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    fn slot(&self, index: usize) -> usize {
        let p = self.resolution as i64;
        let [m1, m2] = self.grid.mode(index);
        let w1 = m1.rem_euclid(p) as usize;
        match self.grid.dim() {
            1 => w1,
            _ => w1 * self.resolution + m2.rem_euclid(p) as usize,
        }
    }

    fn transform(&mut self, inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        let p = self.resolution;
        // rows (contiguous); in 1-D this is the whole buffer
        for row in self.buffer.chunks_exact_mut(p) {
            fft.process(row);
        }
        if self.grid.dim() == 2 {
            for c in 0..p {
                for r in 0..p {
                    self.column[r] = self.buffer[r * p + c];
                }
                fft.process(&mut self.column);
                for r in 0..p {
                    self.buffer[r * p + c] = self.column[r];
                }
            }
        }
    }

    /// Lattice values of `(2π)⁻ⁿ Σ c_m e^{iξ_m·x} Δξⁿ`.
    pub fn synthesize(&mut self, coeffs: &[Complex64]) -> LatticeField {
        self.buffer.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (i, &c) in coeffs.iter().enumerate() {
            let slot = self.slot(i);
            self.buffer[slot] = c;
        }
        self.transform(true);
        let dim = self.grid.dim();
        let weight = self.grid.cell_volume() / (2.0 * PI).powi(dim as i32);
        LatticeField {
            dim,
            period: self.grid.period(),
            resolution: self.resolution,
            values: self.buffer.iter().map(|v| v * weight).collect(),
        }
    }

    fn analyze(&mut self, values: &[Complex64]) -> Vec<Complex64> {
        self.buffer.copy_from_slice(values);
        self.transform(false);
        let weight = (self.grid.period() / self.resolution as f64).powi(self.grid.dim() as i32);
        (0..self.grid.len())
            .map(|i| self.buffer[self.slot(i)] * weight)
            .collect()
    }
}

/// Largest `|m(ξ)|` over a lattice for `m(ξ) = (e^{iδ|ξ|^a} − 1)/(1+|ξ|²)^{s/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    /// `|ξ|` where the maximum is attained.
    pub at_norm: f64,
    /// True when the maximizer sits on the outermost lattice shell.
    pub at_boundary: bool,
}

pub fn delta_multiplier_sup(
    grid: &FrequencyGrid,
    delta: f64,
    params: &ExponentParams,
) -> Result<SupEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    params.require_dispersive()?;
    params.require_s_below_a()?;
    let (a, s) = (params.a(), params.s());
    let norms = grid.norms();
    let (value, at_norm) = norms
        .iter()
        .map(|&r| {
            let num = 2.0 * (0.5 * delta * r.powf(a)).sin().abs();
            (num * (1.0 + r * r).powf(-0.5 * s), r)
        })
        .fold((0.0, 0.0), |best, cur| if cur.0 > best.0 { cur } else { best });
    let outer = grid.mode_bound() as f64 * grid.spacing();
    Ok(SupEstimate {
        value,
        at_norm,
        at_boundary: at_norm >= outer * (1.0 - 1e-12),
    })
}
