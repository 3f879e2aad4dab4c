//! Ground-truth sources with exponential profile `A·exp(−B‖x − x_p‖)` and
//! their exact visibilities.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Complex64, ImageGrid, UVPoint, VisibilitySet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpSource {
    /// Peak position in arcsec.
    pub x_p: (f64, f64),
    /// Full width at half maximum in arcsec.
    pub fwhm: f64,
    /// Integrated flux in photon cm⁻² s⁻¹.
    pub flux: f64,
}

impl ExpSource {
    pub fn new(x_p: (f64, f64), fwhm: f64, flux: f64) -> Result<Self> {
        let s = Self { x_p, fwhm, flux };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm > 0.0 && self.fwhm.is_finite()) {
            return Err(Error::InvalidInput(format!("fwhm must be > 0, got {}", self.fwhm)));
        }
        if !(self.flux > 0.0 && self.flux.is_finite()) {
            return Err(Error::InvalidInput(format!("flux must be > 0, got {}", self.flux)));
        }
        if !(self.x_p.0.is_finite() && self.x_p.1.is_finite()) {
            return Err(Error::InvalidInput("non-finite source position".into()));
        }
        Ok(())
    }

    /// Decay rate `B = 2 ln 2 / FWHM`.
    pub fn decay(&self) -> f64 {
        2.0 * LN_2 / self.fwhm
    }

    /// Peak amplitude `A = flux·B²/(2π)`.
    pub fn amplitude(&self) -> f64 {
        let b = self.decay();
        self.flux * b * b / (2.0 * PI)
    }

    pub fn intensity(&self, x: f64, y: f64) -> f64 {
        let r = (x - self.x_p.0).hypot(y - self.x_p.1);
        self.amplitude() * (-self.decay() * r).exp()
    }

    /// Closed-form `∫ I(x) exp(2πi u·x) dx`.
    pub fn visibility(&self, p: &UVPoint) -> Complex64 {
        let b = self.decay();
        let q2 = p.u * p.u + p.v * p.v;
        let modulus = self.amplitude() * 2.0 * PI * b / (b * b + 4.0 * PI * PI * q2).powf(1.5);
        let phase = 2.0 * PI * (p.u * self.x_p.0 + p.v * self.x_p.1);
        Complex64::from_polar(modulus, phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceModel {
    pub sources: Vec<ExpSource>,
}

impl SourceModel {
    pub fn new(sources: Vec<ExpSource>) -> Result<Self> {
        let m = Self { sources };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::InvalidInput("source model has no sources".into()));
        }
        self.sources.iter().try_for_each(ExpSource::validate)
    }

    /// A single source of FWHM 11 arcsec and flux 10⁴ at the given position.
    pub fn single(x_p: (f64, f64)) -> Self {
        Self {
            sources: vec![ExpSource {
                x_p,
                fwhm: 11.0,
                flux: 1.0e4,
            }],
        }
    }

    /// Double foot-point flare: peaks at (−15,−15) and (15,15) arcsec,
    /// FWHM 11 arcsec, 4.88·10³ photon cm⁻² s⁻¹ each.
    pub fn double_footpoint() -> Self {
        let fp = |x: f64| ExpSource {
            x_p: (x, x),
            fwhm: 11.0,
            flux: 4.88e3,
        };
        Self {
            sources: vec![fp(-15.0), fp(15.0)],
        }
    }

    pub fn total_flux(&self) -> f64 {
        self.sources.iter().map(|s| s.flux).sum()
    }

    pub fn intensity(&self, x: f64, y: f64) -> f64 {
        self.sources.iter().map(|s| s.intensity(x, y)).sum()
    }

    pub fn visibility(&self, p: &UVPoint) -> Complex64 {
        self.sources.iter().map(|s| s.visibility(p)).sum()
    }
}

/// Samples the model at every pixel center of `grid`.
pub fn render_image(model: &SourceModel, grid: &ImageGrid) -> ImageGrid {
    let side = grid.side();
    let mut out = grid.clone();
    out.data_mut().par_chunks_mut(side).enumerate().for_each(|(i, row)| {
        for (j, px) in row.iter_mut().enumerate() {
            let (x, y) = grid.coordinate(i, j);
            *px = model.intensity(x, y);
        }
    });
    out
}

pub fn exact_visibility(model: &SourceModel, point: &UVPoint) -> Complex64 {
    model.visibility(point)
}

/// Exact visibilities plus complex Gaussian noise of standard deviation
/// `noise_sigma` on each of Re and Im.
///
/// Noise is drawn once per conjugate pair `{p, −p}`: the partner receives
/// the conjugate of the noisy value, so Hermitian symmetry of the data is
/// exact. A sample at the origin only receives noise on its real part.
pub fn simulate_visibilities(
    model: &SourceModel,
    points: &[UVPoint],
    noise_sigma: f64,
    seed: u64,
    label: impl Into<String>,
) -> Result<VisibilitySet> {
    model.validate()?;
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise sigma must be >= 0, got {noise_sigma}"
        )));
    }
    let index: HashMap<(u64, u64), usize> = points.iter().enumerate().map(|(i, p)| (p.key(), i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;

    let mut values: Vec<Option<Complex64>> = vec![None; points.len()];
    for (i, p) in points.iter().enumerate() {
        if values[i].is_some() {
            continue;
        }
        let exact = model.visibility(p);
        let partner = index.get(&(-*p).key()).copied();
        let mut noisy = exact;
        if noise_sigma > 0.0 {
            noisy.re += normal.sample(&mut rng);
            if partner != Some(i) {
                noisy.im += normal.sample(&mut rng);
            }
        }
        if partner == Some(i) {
            noisy.im = 0.0;
        }
        values[i] = Some(noisy);
        if let Some(j) = partner {
            if j != i && values[j].is_none() {
                values[j] = Some(noisy.conj());
            }
        }
    }
    let values = values.into_iter().map(|v| v.expect("every sample assigned")).collect();
    VisibilitySet::new(points.to_vec(), values, label)
}
