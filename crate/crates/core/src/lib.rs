//! Reconstruction of real-valued images from scattered samples of their
//! 2-D Fourier transform.
//!
//! The pipeline has two stages:
//!
//! 1. kernel interpolation of the scattered visibilities onto a regular
//!    frequency grid, either with a classical radial kernel or with a
//!    variably scaled kernel whose extra features come from the Fourier
//!    transform of a segmented back-projection ([`kernel`], [`scaling`]);
//! 2. FFT-based projected Landweber iteration that extrapolates out of the
//!    sampled band under a positivity constraint ([`inversion`]).
//!
//! [`pipeline`] chains both stages with shape-parameter selection,
//! [`source`] and [`sampling`] simulate test data, and [`diagnostics`]
//! covers conditioning checks, error metrics and source extraction.
//!
//! Units: image coordinates are in arcsec, spatial frequencies in
//! arcsec⁻¹, visibilities in photon cm⁻² s⁻¹ and image pixels in
//! photon cm⁻² s⁻¹ arcsec⁻². The forward transform uses the
//! `exp(+2πi u·x)` sign convention.

pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod inversion;
pub mod io;
pub mod kernel;
pub mod model;
pub mod pipeline;
pub mod sampling;
pub mod scaling;
pub mod source;

pub use error::{Error, Result};
pub use model::{Complex64, FrequencyGrid, ImageGrid, SupportMask, UVPoint, VisibilitySet};
