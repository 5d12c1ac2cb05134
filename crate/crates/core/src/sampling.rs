//! Seeded random band-limited functions.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::spectral::{FrequencyGrid, SpectralFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumKind {
    /// i.i.d. complex Gaussian coefficients damped by `(1+|ξ|²)^{-decay/2}`.
    Gaussian { decay: f64 },
    /// One uniformly chosen mode with a complex Gaussian coefficient.
    SingleMode,
}

impl Default for SpectrumKind {
    fn default() -> Self {
        SpectrumKind::Gaussian { decay: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSampler {
    pub grid: FrequencyGrid,
    pub kind: SpectrumKind,
}

impl SpectralSampler {
    pub fn new(grid: FrequencyGrid, kind: SpectrumKind) -> Self {
        Self { grid, kind }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SpectralFunction {
        let grid = self.grid;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        match self.kind {
            SpectrumKind::Gaussian { decay } => {
                for (i, c) in coeffs.iter_mut().enumerate() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let r = grid.norm(i);
                    *c = Complex64::new(re, im) * (1.0 + r * r).powf(-0.5 * decay);
                }
            }
            SpectrumKind::SingleMode => {
                let i = rng.gen_range(0..grid.len());
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                coeffs[i] = Complex64::new(re, im);
            }
        }
        SpectralFunction::from_coeffs(grid, coeffs).expect("gaussian samples are finite")
    }
}
