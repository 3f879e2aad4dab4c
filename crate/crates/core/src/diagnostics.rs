//! Kernel-matrix diagnostics, Hadamard-product identities, error metrics and
//! source-parameter extraction.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{distance_matrix, eigen_condition, kernel_matrix, KernelModel, ScalingFunction};
use crate::model::{FrequencyGrid, ImageGrid, SupportMask, UVPoint};
use crate::source::SourceModel;

/// `trace(K) / ‖K‖_F`.
pub fn spectral_ratio(matrix: &DMatrix<f64>) -> Result<f64> {
    if !matrix.is_square() {
        return Err(Error::InvalidInput(format!(
            "matrix is {}×{}, not square",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let frob = matrix.norm();
    if frob == 0.0 {
        return Err(Error::InvalidInput("spectral ratio of a zero matrix".into()));
    }
    Ok(matrix.trace() / frob)
}

/// `λ_max / λ_min` of a symmetric matrix, `∞` unless positive definite.
pub fn condition_number(matrix: &DMatrix<f64>) -> f64 {
    eigen_condition(matrix)
}

pub fn min_eigenvalue(matrix: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(matrix.clone()).eigenvalues.min()
}

/// Entrywise squares of a distance matrix.
pub fn squared(distances: &DMatrix<f64>) -> DMatrix<f64> {
    distances.map(|d| d * d)
}

pub fn hadamard_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.component_mul(b)
}

/// Interval `[λ_min(E)·min Mᵢᵢ, λ_max(E)·max Mᵢᵢ]` containing the spectrum
/// of `E ∘ M` for positive semidefinite `E` and `M`.
pub fn schur_bounds(e: &DMatrix<f64>, m: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(e.clone()).eigenvalues;
    let diag = m.diagonal();
    (eig.min() * diag.min(), eig.max() * diag.max())
}

/// `K^{∘(εD−1)}` with exponent `εd − 1` on the plain distance `d = √Dᵢⱼ`;
/// entries with `d = 0` are 1.
fn hadamard_power(k: &DMatrix<f64>, distances: &DMatrix<f64>, epsilon: f64) -> DMatrix<f64> {
    k.zip_map(
        distances,
        |kij, d| if d == 0.0 { 1.0 } else { kij.powf(epsilon * d - 1.0) },
    )
}

/// Distances between the scaled feature values `Ψ(uᵢ)`.
fn feature_distances(scaling: &ScalingFunction) -> DMatrix<f64> {
    let psi = scaling.scaled_nodes();
    let n = psi.len();
    DMatrix::from_fn(n, n, |i, j| {
        ((psi[i][0] - psi[j][0]).powi(2) + (psi[i][1] - psi[j][1]).powi(2)).sqrt()
    })
}

struct HadamardParts {
    k: DMatrix<f64>,
    k_gauss: DMatrix<f64>,
    k_vsk: DMatrix<f64>,
    k_gauss_vsk: DMatrix<f64>,
    k_gauss_phi: DMatrix<f64>,
    d: DMatrix<f64>,
    d_vsk: DMatrix<f64>,
}

fn hadamard_parts(nodes: &[UVPoint], scaling: &ScalingFunction, epsilon: f64) -> Result<HadamardParts> {
    let matern = KernelModel::matern(epsilon);
    matern.validate()?;
    let d = distance_matrix(nodes, None)?;
    let d_vsk = distance_matrix(nodes, Some(scaling))?;
    let e2 = epsilon * epsilon;
    Ok(HadamardParts {
        k: kernel_matrix(&matern, nodes, None)?,
        k_vsk: kernel_matrix(&matern, nodes, Some(scaling))?,
        k_gauss: d.map(|r| (-e2 * r * r).exp()),
        k_gauss_vsk: d_vsk.map(|r| (-e2 * r * r).exp()),
        k_gauss_phi: feature_distances(scaling).map(|s| (-e2 * s * s).exp()),
        d,
        d_vsk,
    })
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.zip_map(b, |x, y| (x - y).abs()).max()
}

/// Largest entrywise deviation over the identities
///
/// * `K_G = K ∘ K^{∘(εD−1)}`,
/// * `K_G^Ψ = K^Ψ ∘ (K^Ψ)^{∘(εD^Ψ−1)}`,
/// * `K_G^Ψ = K_G ∘ K_G^φ`,
///
/// for the Matérn C⁰ kernel `K`, the Gaussian `K_G` of the same ε and the
/// Gaussian `K_G^φ` on the feature values.
pub fn hadamard_identity_check(nodes: &[UVPoint], scaling: &ScalingFunction, epsilon: f64) -> Result<f64> {
    let p = hadamard_parts(nodes, scaling, epsilon)?;
    let plain = hadamard_product(&p.k, &hadamard_power(&p.k, &p.d, epsilon));
    let augmented = hadamard_product(&p.k_vsk, &hadamard_power(&p.k_vsk, &p.d_vsk, epsilon));
    let split = hadamard_product(&p.k_gauss, &p.k_gauss_phi);
    Ok(max_abs_diff(&plain, &p.k_gauss)
        .max(max_abs_diff(&augmented, &p.k_gauss_vsk))
        .max(max_abs_diff(&split, &p.k_gauss_vsk)))
}

/// `H = K^{∘(εD−1)} ∘ K_G^φ ∘ ((K^Ψ)^{∘(εD^Ψ−1)})^{∘−1}`, which satisfies
/// `K^Ψ = K ∘ H`.
pub fn prop2_matrix(nodes: &[UVPoint], scaling: &ScalingFunction, epsilon: f64) -> Result<DMatrix<f64>> {
    let p = hadamard_parts(nodes, scaling, epsilon)?;
    let numerator = hadamard_product(&hadamard_power(&p.k, &p.d, epsilon), &p.k_gauss_phi);
    let denominator = hadamard_power(&p.k_vsk, &p.d_vsk, epsilon);
    let h = numerator.component_div(&denominator);
    debug_assert!(h.diagonal().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    Ok(h)
}

/// Smallest eigenvalue of [`prop2_matrix`]; when it is nonnegative (up to
/// `−1e-10`) the conditioning of `K^Ψ` is no worse than that of `K`.
pub fn prop2_hypothesis(nodes: &[UVPoint], scaling: &ScalingFunction, epsilon: f64) -> Result<f64> {
    Ok(min_eigenvalue(&prop2_matrix(nodes, scaling, epsilon)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    pub spectral_ratio_classic: f64,
    pub spectral_ratio_vsk: f64,
    pub cond_classic: f64,
    pub cond_vsk: f64,
    pub prop2_min_eig: f64,
}

/// Spectral ratios, condition numbers and the Hadamard positivity hypothesis for
/// the Matérn C⁰ kernel with and without the scaling function.
pub fn kernel_diagnostics(nodes: &[UVPoint], scaling: &ScalingFunction, epsilon: f64) -> Result<KernelDiagnostics> {
    let matern = KernelModel::matern(epsilon);
    let k = kernel_matrix(&matern, nodes, None)?;
    let k_vsk = kernel_matrix(&matern, nodes, Some(scaling))?;
    Ok(KernelDiagnostics {
        spectral_ratio_classic: spectral_ratio(&k)?,
        spectral_ratio_vsk: spectral_ratio(&k_vsk)?,
        cond_classic: condition_number(&k),
        cond_vsk: condition_number(&k_vsk),
        prop2_min_eig: prop2_hypothesis(nodes, scaling, epsilon)?,
    })
}

/// `‖V − W‖_F / ‖W‖_F`.
pub fn rrmse(reconstruction: &[f64], truth: &[f64]) -> Result<f64> {
    if reconstruction.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "surface sizes differ: {} vs {}",
            reconstruction.len(),
            truth.len()
        )));
    }
    let norm = truth.iter().map(|w| w * w).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidInput("truth surface has zero norm".into()));
    }
    let diff = reconstruction
        .iter()
        .zip(truth)
        .map(|(v, w)| (v - w) * (v - w))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm)
}

/// RRMSE between the modulus of an interpolated surface and the modulus of
/// the exact model visibilities, over the grid samples inside `mask`.
pub fn surface_rrmse(surface: &FrequencyGrid, truth: &SourceModel, mask: &SupportMask) -> Result<f64> {
    let inside = mask.realize_on(surface);
    let (rec, exact): (Vec<f64>, Vec<f64>) = surface
        .coordinates()
        .into_iter()
        .zip(surface.data())
        .zip(inside)
        .filter(|(_, keep)| *keep)
        .map(|((q, z), _)| (z.norm(), truth.visibility(&q).norm()))
        .unzip();
    rrmse(&rec, &exact)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceEstimate {
    /// Intensity-weighted centroid, arcsec.
    pub x_p: (f64, f64),
    pub fwhm: f64,
    pub flux: f64,
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSummary {
    pub sources: Vec<SourceEstimate>,
    pub total_flux: f64,
}

/// Pixels 8-connected to `seed` with value `≥ threshold`, and whether the
/// region reaches the image border.
fn region(image: &ImageGrid, seed: (usize, usize), threshold: f64) -> (Vec<bool>, bool) {
    let n = image.side();
    let mut member = vec![false; n * n];
    let mut stack = vec![seed];
    member[seed.0 * n + seed.1] = true;
    let mut border = false;
    while let Some((i, j)) = stack.pop() {
        border |= i == 0 || j == 0 || i == n - 1 || j == n - 1;
        for di in -1isize..=1 {
            for dj in -1isize..=1 {
                let (a, b) = (i as isize + di, j as isize + dj);
                if a < 0 || b < 0 || a >= n as isize || b >= n as isize {
                    continue;
                }
                let (a, b) = (a as usize, b as usize);
                if !member[a * n + b] && image.get(a, b) >= threshold {
                    member[a * n + b] = true;
                    stack.push((a, b));
                }
            }
        }
    }
    (member, border)
}

fn local_maxima(image: &ImageGrid, floor: f64) -> Vec<(usize, usize, f64)> {
    let n = image.side();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = image.get(i, j);
            if v < floor {
                continue;
            }
            let is_max = (i.saturating_sub(1)..=(i + 1).min(n - 1))
                .flat_map(|a| (j.saturating_sub(1)..=(j + 1).min(n - 1)).map(move |b| (a, b)))
                .all(|(a, b)| image.get(a, b) <= v);
            if is_max {
                out.push((i, j, v));
            }
        }
    }
    out.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    out
}

fn area_diameter(pixels: usize, pixel_size: f64) -> f64 {
    2.0 * (pixels as f64 * pixel_size * pixel_size / std::f64::consts::PI).sqrt()
}

/// Up to `max_peaks` sources from a nonnegative image.
///
/// Peaks are local maxima of at least half the global maximum, taken in
/// decreasing order and kept when at least twice the global peak's FWHM away
/// from every kept peak. A peak whose half-maximum region touches the border
/// is degenerate and dropped. Each pixel belongs to its nearest kept peak;
/// a peak's position is the intensity centroid and its FWHM the equal-area
/// diameter of its half-maximum region, and its flux sums all its pixels.
pub fn extract_sources(image: &ImageGrid, max_peaks: usize) -> Result<SourceSummary> {
    let n = image.side();
    let px = image.pixel_size();
    let max = image.max();
    if !(max > 0.0) || max_peaks == 0 {
        return Err(Error::NoPeaks);
    }
    let candidates = local_maxima(image, 0.5 * max);

    let mut fwhm_estimate = None;
    let mut kept: Vec<(usize, usize, f64, Vec<bool>)> = Vec::new();
    for &(i, j, v) in &candidates {
        if kept.len() == max_peaks {
            break;
        }
        if let Some(sep) = fwhm_estimate {
            let (x, y) = image.coordinate(i, j);
            let close = kept.iter().any(|&(a, b, _, _)| {
                let (xa, ya) = image.coordinate(a, b);
                (x - xa).hypot(y - ya) < 2.0 * sep
            });
            if close {
                continue;
            }
        }
        let (member, border) = region(image, (i, j), 0.5 * v);
        if border {
            log::debug!("dropping degenerate peak at ({i}, {j})");
            continue;
        }
        if fwhm_estimate.is_none() {
            fwhm_estimate = Some(area_diameter(member.iter().filter(|&&m| m).count(), px));
        }
        kept.push((i, j, v, member));
    }
    if kept.is_empty() {
        return Err(Error::NoPeaks);
    }

    let peak_xy: Vec<(f64, f64)> = kept.iter().map(|&(i, j, _, _)| image.coordinate(i, j)).collect();
    let mut flux = vec![0.0; kept.len()];
    let mut weight = vec![0.0; kept.len()];
    let mut moment = vec![(0.0, 0.0); kept.len()];
    let mut area = vec![0usize; kept.len()];
    for i in 0..n {
        for j in 0..n {
            let v = image.get(i, j);
            let (x, y) = image.coordinate(i, j);
            let owner = peak_xy
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = (x - a.1 .0).hypot(y - a.1 .1);
                    let db = (x - b.1 .0).hypot(y - b.1 .1);
                    da.total_cmp(&db)
                })
                .map(|(k, _)| k)
                .expect("at least one peak");
            flux[owner] += v * px * px;
            if kept[owner].3[i * n + j] {
                area[owner] += 1;
                weight[owner] += v;
                moment[owner].0 += v * x;
                moment[owner].1 += v * y;
            }
        }
    }

    let sources = kept
        .iter()
        .enumerate()
        .map(|(k, &(_, _, v, _))| SourceEstimate {
            x_p: (moment[k].0 / weight[k], moment[k].1 / weight[k]),
            fwhm: area_diameter(area[k], px),
            flux: flux[k],
            peak: v,
        })
        .collect();
    Ok(SourceSummary {
        sources,
        total_flux: image.total_flux(),
    })
}
