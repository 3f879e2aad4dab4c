//! Support projection, zero padding and projected Landweber extrapolation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{swap_quadrants, RealFft2};
use crate::kernel::{eigen_condition, fit, kernel_matrix, Interpolant, KernelModel, ScalingFunction};
use crate::model::{grid_points, Complex64, FrequencyGrid, ImageGrid, SupportMask, VisibilitySet};

/// Relative size of the imaginary part tolerated after inverting a
/// Hermitian grid.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SupportSpec {
    /// Disk whose radius is the largest data frequency.
    DataExtent,
    Disk {
        radius: f64,
    },
    Full,
}

impl SupportSpec {
    pub fn resolve(&self, data: &VisibilitySet) -> Result<SupportMask> {
        match *self {
            SupportSpec::DataExtent => SupportMask::disk(data.max_radius()),
            SupportSpec::Disk { radius } => SupportMask::disk(radius),
            SupportSpec::Full => Ok(SupportMask::Full),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Central `M × M` block of the padded image.
    CenterCrop,
    /// First pixel of each `s × s` tile; requires `T = M·s`.
    MaskSubsample(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandweberConfig {
    pub tau: f64,
    pub max_iterations: usize,
    pub rel_change_tol: f64,
    pub support: SupportSpec,
    pub pad_side: usize,
    pub output_side: usize,
    pub reduction: Reduction,
}

impl Default for LandweberConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            max_iterations: 500,
            rel_change_tol: 1e-4,
            support: SupportSpec::DataExtent,
            pad_side: 1920,
            output_side: 128,
            reduction: Reduction::CenterCrop,
        }
    }
}

impl LandweberConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 2.0) {
            return Err(Error::InvalidInput(format!("tau must be in (0, 2), got {}", self.tau)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be >= 1".into()));
        }
        if !(self.rel_change_tol >= 0.0) {
            return Err(Error::InvalidInput("rel_change_tol must be >= 0".into()));
        }
        check_reduction(self.pad_side, self.output_side, self.reduction)
    }
}

fn check_reduction(t: usize, m: usize, reduction: Reduction) -> Result<()> {
    if m < 2 || m % 2 != 0 || t % 2 != 0 {
        return Err(Error::GridSize(format!("sides must be even, got T = {t}, M = {m}")));
    }
    match reduction {
        Reduction::CenterCrop if t < m => Err(Error::GridSize(format!(
            "center crop needs T >= M, got T = {t}, M = {m}"
        ))),
        Reduction::MaskSubsample(s) if s == 0 || t != m * s => Err(Error::GridSize(format!(
            "mask subsampling by {s} needs T = M·{s}, got T = {t}, M = {m}"
        ))),
        _ => Ok(()),
    }
}

/// Zeroes samples outside the support.
pub fn project_support(grid: &FrequencyGrid, mask: &SupportMask) -> FrequencyGrid {
    let chi = mask.realize_on(grid);
    let mut out = grid.clone();
    out.data_mut()
        .iter_mut()
        .zip(&chi)
        .filter(|(_, &inside)| !inside)
        .for_each(|(z, _)| *z = Complex64::new(0.0, 0.0));
    out
}

/// Embeds an `N × N` grid at the center of a `T × T` zero grid of the same
/// mesh.
pub fn zero_pad(grid: &FrequencyGrid, t: usize) -> Result<FrequencyGrid> {
    let n = grid.side();
    if t < n || t % 2 != 0 {
        return Err(Error::GridSize(format!("cannot pad a {n}-grid to {t}")));
    }
    if t == n {
        return Ok(grid.clone());
    }
    let off = (t - n) / 2;
    let mut data = vec![Complex64::new(0.0, 0.0); t * t];
    for i in 0..n {
        data[(i + off) * t + off..(i + off) * t + off + n].copy_from_slice(&grid.data()[i * n..(i + 1) * n]);
    }
    FrequencyGrid::new(t, grid.mesh(), data)
}

/// Averages the grid with its conjugate reflection `q ↦ −q`. The first row
/// and column have no reflected partner on an even grid and are zeroed.
pub fn hermitian_symmetrize(grid: &FrequencyGrid) -> FrequencyGrid {
    let n = grid.side();
    let src = grid.data();
    let data: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == 0 || j == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                (src[k] + src[(n - i) * n + (n - j)].conj()) * 0.5
            }
        })
        .collect();
    FrequencyGrid::new(n, grid.mesh(), data).expect("same shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `‖χ_D(ℱ(I⁽ᵏ⁾) − ℱ(Ĩ))‖_F`
    pub residual: f64,
    /// `‖I⁽ᵏ⁾ − I⁽ᵏ⁻¹⁾‖_F / ‖I⁽ᵏ⁻¹⁾‖_F`; infinite at `k = 1`.
    pub rel_change: f64,
}

#[derive(Debug, Clone)]
pub struct LandweberOutcome {
    /// Final iterate on the padded grid, pixel size `1/(T·mesh)`.
    pub image: ImageGrid,
    pub log: Vec<IterationRecord>,
    pub converged: bool,
    /// `‖Im‖_F / ‖Re‖_F` of `ℱ⁻¹(data)`.
    pub imaginary_ratio: f64,
}

impl LandweberOutcome {
    pub fn iterations(&self) -> usize {
        self.log.len()
    }
}

/// Hermitian part `(S(q) + conj(S(−q)))/2` of a centered grid at native
/// half-spectrum index `(k, l)`, conjugated to the `exp(−2πi ·)` convention
/// of [`RealFft2`], together with the anti-Hermitian part's squared modulus.
fn native_half(grid: &FrequencyGrid, k: usize, l: usize) -> (Complex64, f64) {
    let t = grid.side();
    let h = t / 2;
    let c = |a: usize| (a + h) % t;
    let s = grid.get(c(k), c(l));
    let r = grid.get(c((t - k) % t), c((t - l) % t));
    let even = (s.conj() + r) * 0.5;
    let odd = (s.conj() - r) * 0.5;
    (even, odd.norm_sqr())
}

/// Projected Landweber iteration
///
/// `ℱ(I⁽ᵏ⁺¹⁾) = τ ℱ(Ĩ) + (1 − τ χ_D) ℱ(I⁽ᵏ⁾)`, `I⁽ᵏ⁺¹⁾ ← max(I⁽ᵏ⁺¹⁾, 0)`,
///
/// from `I⁽⁰⁾ = 0`, where `data` is `ℱ(Ĩ)` on the padded grid. Stops after
/// `max_iterations` or once the relative change drops below
/// `rel_change_tol`.
///
/// Only the real part of `ℱ⁻¹(data)` is used; the Frobenius ratio of the
/// discarded imaginary part to the real part is reported and warned about
/// above [`IMAGINARY_TOLERANCE`].
pub fn landweber(data: &FrequencyGrid, mask: &SupportMask, config: &LandweberConfig) -> Result<LandweberOutcome> {
    if !(config.tau > 0.0 && config.tau < 2.0) {
        return Err(Error::InvalidInput(format!(
            "tau must be in (0, 2), got {}",
            config.tau
        )));
    }
    let t = data.side();
    let du = data.mesh();
    let dx = 1.0 / (t as f64 * du);
    let (fwd_scale, inv_scale) = (dx * dx, du * du);
    let tau = config.tau;

    let fft = RealFft2::new(t);
    let hw = fft.half_width();
    let inside = mask.realize_on(data);
    let cell = |k: usize, l: usize| inside[((k + t / 2) % t) * t + (l + t / 2) % t];

    // half-spectrum layout: index l * t + k
    let (target, odd): (Vec<Complex64>, Vec<f64>) = (0..fft.half_len())
        .into_par_iter()
        .map(|idx| native_half(data, idx % t, idx / t))
        .unzip();
    let chi: Vec<bool> = (0..fft.half_len())
        .into_par_iter()
        .map(|idx| cell(idx % t, idx / t))
        .collect();
    // columns l = 0 and l = t/2 stand for themselves, the others for a pair;
    // per-column partial sums are added in a fixed order so results do not
    // depend on the thread schedule
    let weight = |l: usize| if l == 0 || l == hw - 1 { 1.0 } else { 2.0 };
    let (even_energy, odd_energy) = ordered_sum2(
        target
            .par_chunks(t)
            .zip(odd.par_chunks(t))
            .enumerate()
            .map(|(l, (z, o))| {
                let w = weight(l);
                (
                    w * z.iter().map(|z| z.norm_sqr()).sum::<f64>(),
                    w * o.iter().sum::<f64>(),
                )
            })
            .collect(),
    );
    let imaginary_ratio = if odd_energy == 0.0 {
        0.0
    } else {
        (odd_energy / even_energy.max(f64::MIN_POSITIVE)).sqrt()
    };
    if imaginary_ratio > IMAGINARY_TOLERANCE {
        log::warn!("inverse transform of the data grid has relative imaginary part {imaginary_ratio:.3e}");
    }

    // `next` holds the right-hand side of the update for the coming
    // iteration; with I⁽⁰⁾ = 0 that is τ·χ_D·ℱ(Ĩ)
    let mut next: Vec<Complex64> = target
        .par_iter()
        .zip(&chi)
        .map(|(&g, &inside)| if inside { g * tau } else { Complex64::new(0.0, 0.0) })
        .collect();
    let mut work = vec![Complex64::new(0.0, 0.0); fft.half_len()];
    let mut image = vec![0.0; t * t];
    let mut raw = vec![0.0; t * t];

    let mut log = Vec::new();
    let mut converged = false;

    for k in 0..config.max_iterations {
        fft.inverse(&mut next, &mut raw, &mut work);

        // positivity, change and divergence check in one pass; `raw` keeps
        // a copy for the forward transform, which consumes its input
        let parts: Vec<(f64, f64, bool)> = image
            .par_chunks_mut(t)
            .zip(raw.par_chunks_mut(t))
            .map(|(old, new)| {
                let mut acc = (0.0, 0.0, true);
                for (o, r) in old.iter_mut().zip(new.iter_mut()) {
                    let v = *r * inv_scale;
                    acc.2 &= v.is_finite();
                    let p = v.max(0.0);
                    acc.0 += (p - *o) * (p - *o);
                    acc.1 += *o * *o;
                    *o = p;
                    *r = p;
                }
                acc
            })
            .collect();
        let finite = parts.iter().all(|p| p.2);
        let (diff2, prev2) = ordered_sum2(parts.into_iter().map(|p| (p.0, p.1)).collect());
        if !finite {
            return Err(Error::Divergence { iteration: k + 1 });
        }
        let rel_change = if prev2 > 0.0 {
            (diff2 / prev2).sqrt()
        } else if diff2 == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };

        fft.forward(&mut raw, &mut next, &mut work);
        let residual = next
            .par_chunks_mut(t)
            .zip(target.par_chunks(t))
            .zip(chi.par_chunks(t))
            .enumerate()
            .map(|(l, ((f, g), inside))| {
                let mut acc = 0.0;
                for ((f, &g), &inside) in f.iter_mut().zip(g).zip(inside) {
                    let current = *f * fwd_scale;
                    if inside {
                        *f = g * tau + current * (1.0 - tau);
                        acc += (current - g).norm_sqr();
                    } else {
                        *f = current;
                    }
                }
                weight(l) * acc
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum::<f64>()
            .sqrt();
        log.push(IterationRecord {
            k: k + 1,
            residual,
            rel_change,
        });
        if rel_change < config.rel_change_tol {
            converged = true;
            break;
        }
    }

    swap_quadrants(&mut image, t);
    Ok(LandweberOutcome {
        image: ImageGrid::new(t, dx, (0.0, 0.0), image)?,
        log,
        converged,
        imaginary_ratio,
    })
}

/// Shrinks the padded image to `output_side`.
pub fn reduce(image: &ImageGrid, output_side: usize, reduction: Reduction) -> Result<ImageGrid> {
    let t = image.side();
    let m = output_side;
    check_reduction(t, m, reduction)?;
    match reduction {
        Reduction::CenterCrop => {
            let off = (t - m) / 2;
            let data = (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .map(|(i, j)| image.get(i + off, j + off))
                .collect();
            ImageGrid::new(m, image.pixel_size(), image.center(), data)
        }
        Reduction::MaskSubsample(s) => {
            let data = (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .map(|(i, j)| image.get(s * i, s * j))
                .collect();
            ImageGrid::new(m, image.pixel_size() * s as f64, image.center(), data)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionConfig {
    /// Side `N` of the evaluation grid.
    pub eval_side: usize,
    /// Mesh of the evaluation grid, arcsec⁻¹.
    pub eval_mesh: f64,
    pub landweber: LandweberConfig,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            eval_side: 320,
            eval_mesh: 5e-4,
            landweber: LandweberConfig::default(),
        }
    }
}

impl InversionConfig {
    pub fn eval_grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::zeros(self.eval_side, self.eval_mesh)
    }

    pub fn validate(&self) -> Result<()> {
        self.eval_grid()?;
        self.landweber.validate()?;
        if self.landweber.pad_side < self.eval_side {
            return Err(Error::GridSize(format!(
                "pad side {} is smaller than the evaluation grid {}",
                self.landweber.pad_side, self.eval_side
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub imaginary_ratio: f64,
    pub node_residual: f64,
    pub jitter: f64,
    pub condition_number: f64,
    pub support_radius: Option<f64>,
    pub log: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Final `M × M` image.
    pub image: ImageGrid,
    /// Interpolated, symmetrized and support-projected `N × N` grid.
    pub surface: FrequencyGrid,
    pub report: RunReport,
}

/// Kernel interpolant of the data and the surface derived from it.
#[derive(Debug, Clone)]
pub struct InterpolatedSurface {
    pub interpolant: Interpolant,
    /// Interpolated, symmetrized and support-projected `N × N` grid.
    pub surface: FrequencyGrid,
    pub mask: SupportMask,
}

/// Fits the interpolant, evaluates it on the `N × N` grid, symmetrizes and
/// projects onto the support. A scaling function selects the VSK variant.
pub fn interpolate_surface(
    data: &VisibilitySet,
    kernel: &KernelModel,
    scaling: Option<&ScalingFunction>,
    config: &InversionConfig,
) -> Result<InterpolatedSurface> {
    config.validate()?;
    let n = config.eval_side;
    let targets = grid_points(n, config.eval_mesh);
    if let Some(s) = scaling {
        if s.eval_values.len() != targets.len() {
            return Err(Error::ScalingMismatch {
                expected: targets.len(),
                got: s.eval_values.len(),
            });
        }
    }
    let interpolant = fit(kernel, data, scaling)?;
    let values = interpolant.evaluate(&targets, scaling.map(|s| &s.eval_values[..]))?;
    let grid = hermitian_symmetrize(&FrequencyGrid::new(n, config.eval_mesh, values)?);
    let mask = config.landweber.support.resolve(data)?;
    Ok(InterpolatedSurface {
        surface: project_support(&grid, &mask),
        interpolant,
        mask,
    })
}

fn ordered_sum2(parts: Vec<(f64, f64)>) -> (f64, f64) {
    parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Pads a projected surface, runs Landweber and reduces to `M × M`.
pub fn invert_surface(
    surface: &FrequencyGrid,
    mask: &SupportMask,
    config: &LandweberConfig,
) -> Result<(ImageGrid, LandweberOutcome)> {
    config.validate()?;
    let padded = zero_pad(surface, config.pad_side)?;
    let outcome = landweber(&padded, mask, config)?;
    let image = reduce(&outcome.image, config.output_side, config.reduction)?;
    Ok((image, outcome))
}

pub fn algorithm_name(vsk: bool) -> &'static str {
    if vsk {
        "Land-VSK"
    } else {
        "Land-RBF"
    }
}

/// Interpolates, symmetrizes, projects, pads, extrapolates and reduces.
/// With a scaling function this is Land-VSK, without it Land-RBF.
pub fn reconstruct(
    data: &VisibilitySet,
    kernel: &KernelModel,
    scaling: Option<&ScalingFunction>,
    config: &InversionConfig,
) -> Result<Reconstruction> {
    let InterpolatedSurface {
        interpolant,
        surface,
        mask,
    } = interpolate_surface(data, kernel, scaling, config)?;
    let (image, outcome) = invert_surface(&surface, &mask, &config.landweber)?;
    let condition_number = eigen_condition(&kernel_matrix(kernel, data.points(), scaling)?);
    let report = RunReport {
        algorithm: algorithm_name(scaling.is_some()).to_string(),
        epsilon: kernel.epsilon,
        iterations: outcome.iterations(),
        converged: outcome.converged,
        final_residual: outcome.log.last().map_or(0.0, |r| r.residual),
        imaginary_ratio: outcome.imaginary_ratio,
        node_residual: interpolant.relative_node_residual(data),
        jitter: interpolant.jitter(),
        condition_number,
        support_radius: mask.radius(),
        log: outcome.log,
    };
    Ok(Reconstruction { image, surface, report })
}
