//! Numerical laboratory for pointwise convergence of fractional Schrödinger
//! means `S_t f = e^{it|D|^a} f` along time sets.
//!
//! - [`spectral`]: band-limited functions on a periodic frequency lattice,
//!   propagation, Sobolev norms, FFT evaluation, multiplier sups.
//! - [`timesets`]: sequences, Cantor sets, covering numbers and the density sum.
//! - [`maximal`]: maximal functions over finite time sets and the split sums.
//! - [`counterexample`]: the growing family `f_ν` along `t_k = 1/ln k`.

pub mod counterexample;
pub mod error;
pub mod fit;
pub mod maximal;
pub mod sampling;
pub mod spectral;
pub mod timesets;

pub use error::{Error, Result};
pub use fit::{least_squares, LineFit};
pub use sampling::{SpectralSampler, SpectrumKind};
pub use spectral::{ExponentParams, FrequencyGrid, LatticeField, LatticePlan, SpectralFunction};
pub use timesets::{SetDescriptor, TimeSet, Verdict};

pub use num_complex::Complex64;
