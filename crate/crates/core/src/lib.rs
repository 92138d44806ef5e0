//! Reconstruction of a full uniform-linear-array response from dithered
//! one-bit measurements of a sparse (MIMO virtual) linear array.
//!
//! The sparse snapshot is lifted to a Hankel matrix whose rank equals the
//! number of far-field targets. Observed entries are quantized to one bit
//! against a uniform dither, the matrix is completed with singular value
//! thresholding, and the completed array is turned back into an angle
//! spectrum.
//!
//! Modules, in pipeline order:
//! - [`array`]: steering vectors, scene synthesis, MIMO virtual arrays.
//! - [`hankel`]: Hankel lifting, observation sets, de-Hankelization.
//! - [`quantization`]: dithered uniform and one-bit quantizers.
//! - [`svt`]: singular value shrinkage and the SVT completion loop.
//! - [`theory`]: recovery bounds and their Monte Carlo validators.
//! - [`spectrum`]: FFT angle spectra and peak detection.
//! - [`experiment`]: configuration, end-to-end runs, Monte Carlo, outputs.

pub mod array;
pub mod error;
pub mod experiment;
pub mod hankel;
pub mod linalg;
pub mod quantization;
pub mod rng;
pub mod spectrum;
pub mod svt;
pub mod theory;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMat = faer::Mat<Complex64>;
