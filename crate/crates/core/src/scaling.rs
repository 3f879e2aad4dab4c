//! Scaling function Ψ for variably scaled kernels, built from a rough
//! inverse of the data: back-projection, thresholding, forward transform,
//! then bilinear interpolation of the central window onto the nodes and the
//! evaluation grid.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::forward_image;
use crate::kernel::ScalingFunction;
use crate::model::{Complex64, FrequencyGrid, ImageGrid, UVPoint, VisibilitySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackProjectionConfig {
    pub side: usize,
    /// arcsec
    pub pixel_size: f64,
    pub weighting: Weighting,
}

impl Default for BackProjectionConfig {
    fn default() -> Self {
        Self {
            side: 128,
            pixel_size: 1.0,
            weighting: Weighting::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiScaleMode {
    /// Ψ as computed, `(Re V̄, Im V̄)`.
    Raw,
    /// Ψ rescaled so its peak modulus equals the data's frequency extent.
    MatchUvExtent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowRule {
    /// Half-width `max‖u_j‖` plus one cell of the transform grid.
    AutoByDataExtent,
    /// Indices `M/2 − ⌊L/2⌋ − 1 ..= M/2 + ⌊L/2⌋ + 1`.
    Manual(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingBuildConfig {
    /// Segmentation threshold `p`, as a fraction of the image maximum.
    pub threshold: f64,
    pub psi_scale_mode: PsiScaleMode,
    pub window: WindowRule,
}

impl Default for ScalingBuildConfig {
    fn default() -> Self {
        Self {
            threshold: 0.8,
            psi_scale_mode: PsiScaleMode::MatchUvExtent,
            window: WindowRule::AutoByDataExtent,
        }
    }
}

impl ScalingBuildConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidInput(format!(
                "segmentation threshold must be in (0, 1), got {}",
                self.threshold
            )));
        }
        if !(0.70..=0.90).contains(&self.threshold) {
            log::warn!(
                "segmentation threshold {} is outside the usual range [0.70, 0.90]",
                self.threshold
            );
        }
        Ok(())
    }
}

/// `Ī(x) = (1/n) Σ_j Re(V_j exp(−2πi u_j·x))` on a centered grid.
pub fn back_project(data: &VisibilitySet, config: &BackProjectionConfig) -> Result<ImageGrid> {
    if data.is_empty() {
        return Err(Error::InvalidInput(
            "back-projection needs at least one visibility".into(),
        ));
    }
    if config.side % 2 != 0 {
        return Err(Error::GridSize(format!(
            "back-projection side must be even, got {}",
            config.side
        )));
    }
    let mut image = ImageGrid::zeros(config.side, config.pixel_size, (0.0, 0.0))?;
    let side = config.side;
    let n = data.len() as f64;
    let proto = image.clone();
    image.data_mut().par_chunks_mut(side).enumerate().for_each(|(i, row)| {
        for (j, px) in row.iter_mut().enumerate() {
            let (x, y) = proto.coordinate(i, j);
            let mut acc = 0.0;
            for (p, v) in data.points().iter().zip(data.values()) {
                let phase = -2.0 * PI * (p.u * x + p.v * y);
                let (s, c) = phase.sin_cos();
                acc += v.re * c - v.im * s;
            }
            *px = acc / n;
        }
    });
    Ok(image)
}

/// Keeps pixels with `|Ī(x)| > p·max Ī`, zeroes the rest.
pub fn segment(image: &ImageGrid, p: f64) -> Result<ImageGrid> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidInput(format!("threshold must be in (0, 1), got {p}")));
    }
    let max = image.max();
    if !(max > 0.0) {
        return Err(Error::Degenerate(format!(
            "cannot segment an image whose maximum is {max}"
        )));
    }
    let cut = p * max;
    let mut out = image.clone();
    out.data_mut().iter_mut().for_each(|v| {
        if v.abs() <= cut {
            *v = 0.0;
        }
    });
    Ok(out)
}

/// Forward transform of an image onto the centered frequency grid of mesh
/// `1/(side·pixel_size)`.
pub fn forward_transform(image: &ImageGrid) -> FrequencyGrid {
    forward_image(image)
}

/// Square window of a centered frequency grid, addressable by bilinear
/// interpolation in physical coordinates.
#[derive(Debug, Clone)]
struct Window<'a> {
    grid: &'a FrequencyGrid,
    lo: usize,
    hi: usize,
}

impl Window<'_> {
    fn bilinear(&self, q: &UVPoint) -> Complex64 {
        let h = (self.grid.side() / 2) as f64;
        let mesh = self.grid.mesh();
        let clamp = |t: f64| t.clamp(self.lo as f64, self.hi as f64);
        let fi = clamp(q.u / mesh + h);
        let fj = clamp(q.v / mesh + h);
        let i0 = (fi.floor() as usize).min(self.hi.saturating_sub(1)).max(self.lo);
        let j0 = (fj.floor() as usize).min(self.hi.saturating_sub(1)).max(self.lo);
        let (i1, j1) = ((i0 + 1).min(self.hi), (j0 + 1).min(self.hi));
        let (ti, tj) = (fi - i0 as f64, fj - j0 as f64);
        let g = |i, j| self.grid.get(i, j);
        g(i0, j0) * ((1.0 - ti) * (1.0 - tj))
            + g(i1, j0) * (ti * (1.0 - tj))
            + g(i0, j1) * ((1.0 - ti) * tj)
            + g(i1, j1) * (ti * tj)
    }
}

fn window<'a>(grid: &'a FrequencyGrid, rule: WindowRule, q_max: f64) -> Result<Window<'a>> {
    let side = grid.side();
    let center = side / 2;
    let half = match rule {
        WindowRule::AutoByDataExtent => (q_max / grid.mesh()).ceil() as usize,
        WindowRule::Manual(l) => l / 2 + 1,
    };
    // the centered grid spans indices 0..side, i.e. center − side/2 ..= center + side/2 − 1
    if half > center - 1 {
        return Err(Error::Window {
            required: half as f64 * grid.mesh(),
            available: (center - 1) as f64 * grid.mesh(),
        });
    }
    Ok(Window {
        grid,
        lo: center - half,
        hi: center + half,
    })
}

/// Builds Ψ at the data nodes and at every sample of `eval_grid`.
pub fn build_scaling(
    data: &VisibilitySet,
    eval_grid: &FrequencyGrid,
    bp: &BackProjectionConfig,
    config: &ScalingBuildConfig,
) -> Result<ScalingFunction> {
    config.validate()?;
    let rough = back_project(data, bp)?;
    let segmented = segment(&rough, config.threshold)?;
    let vbar = forward_transform(&segmented);
    let q_max = data.max_radius() + vbar.mesh();
    let win = window(&vbar, config.window, q_max)?;

    let sample = |pts: &[UVPoint]| -> Vec<[f64; 2]> {
        pts.par_iter()
            .map(|q| {
                let z = win.bilinear(q);
                [z.re, z.im]
            })
            .collect()
    };
    let node_values = sample(data.points());
    let eval_values = sample(&eval_grid.coordinates());

    let scale_factor = match config.psi_scale_mode {
        PsiScaleMode::Raw => 1.0,
        PsiScaleMode::MatchUvExtent => {
            let peak = node_values
                .iter()
                .chain(&eval_values)
                .map(|p| p[0].hypot(p[1]))
                .fold(0.0, f64::max);
            if peak > 0.0 {
                q_max / peak
            } else {
                1.0
            }
        }
    };
    ScalingFunction::new(node_values, eval_values, scale_factor)
}
