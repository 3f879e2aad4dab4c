//! Power function and shape-parameter selection.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    augment, feature_distance, node_features, symmetric_from, Feature, KernelFamily, KernelModel, ScalingFunction,
    SpdFactor,
};
use crate::error::{Error, Result};
use crate::model::UVPoint;

const NEGATIVE_WARN: f64 = -1e-10;

/// Evaluates the power function `√(K(u,u) − k(u)ᵀ K⁻¹ k(u))` for many
/// targets with one factorization of `K`.
#[derive(Debug)]
pub struct PowerEvaluator {
    kernel: KernelModel,
    features: Vec<Feature>,
    factor: SpdFactor,
}

impl PowerEvaluator {
    pub fn new(kernel: &KernelModel, nodes: &[UVPoint], scaling: Option<&ScalingFunction>) -> Result<Self> {
        kernel.validate()?;
        let features = node_features(nodes, scaling)?;
        let k = symmetric_from(&features, |r| kernel.profile(r));
        Ok(Self {
            kernel: *kernel,
            features,
            factor: SpdFactor::new(k)?,
        })
    }

    fn at_feature(&self, t: &Feature) -> f64 {
        // exactly zero on the node set
        if self.features.iter().any(|f| f == t) {
            return 0.0;
        }
        let k = DVector::from_iterator(
            self.features.len(),
            self.features
                .iter()
                .map(|f| self.kernel.profile(feature_distance(t, f))),
        );
        let w = self
            .factor
            .cholesky()
            .l_dirty()
            .solve_lower_triangular(&k)
            .expect("Cholesky factor has a non-zero diagonal");
        let p2 = self.kernel.profile(0.0) - w.norm_squared();
        if p2 < NEGATIVE_WARN {
            log::warn!("power function squared is {p2:.3e} before clamping; kernel matrix is numerically unstable");
        }
        p2.max(0.0).sqrt()
    }

    /// Power function at each target; `target_psi` holds unscaled Ψ values
    /// when the evaluator was built with a scaling function.
    pub fn evaluate(&self, targets: &[UVPoint], target_psi: Option<&[[f64; 2]]>, scale_factor: f64) -> Vec<f64> {
        let psi: Option<Vec<[f64; 2]>> =
            target_psi.map(|p| p.iter().map(|v| [v[0] * scale_factor, v[1] * scale_factor]).collect());
        let features = augment(targets, psi.as_deref());
        features.par_iter().map(|t| self.at_feature(t)).collect()
    }

    pub fn max_over(&self, targets: &[UVPoint]) -> f64 {
        self.evaluate(targets, None, 1.0).into_iter().fold(0.0, f64::max)
    }
}

/// Power function at a single target via the Schur complement.
pub fn power_function(
    kernel: &KernelModel,
    nodes: &[UVPoint],
    scaling: Option<&ScalingFunction>,
    target: &UVPoint,
    target_psi: Option<[f64; 2]>,
) -> Result<f64> {
    if scaling.is_some() != target_psi.is_some() {
        return Err(Error::ScalingMismatch {
            expected: 1,
            got: usize::from(target_psi.is_some()),
        });
    }
    let ev = PowerEvaluator::new(kernel, nodes, scaling)?;
    let psi = target_psi.map(|p| [p]);
    let scale = scaling.map_or(1.0, |s| s.scale_factor);
    Ok(ev.evaluate(std::slice::from_ref(target), psi.as_ref().map(|p| &p[..]), scale)[0])
}

/// Power function at a single target as `√(det K̃ / det K)`, where `K̃` is
/// the kernel matrix of the nodes augmented with the target.
pub fn power_function_det_ratio(
    kernel: &KernelModel,
    nodes: &[UVPoint],
    scaling: Option<&ScalingFunction>,
    target: &UVPoint,
    target_psi: Option<[f64; 2]>,
) -> Result<f64> {
    let base = node_features(nodes, scaling)?;
    let scale = scaling.map_or(1.0, |s| s.scale_factor);
    let psi = target_psi.unwrap_or([0.0, 0.0]);
    let t: Feature = [target.u, target.v, psi[0] * scale, psi[1] * scale];
    let mut all = Vec::with_capacity(base.len() + 1);
    all.push(t);
    all.extend_from_slice(&base);
    let k = symmetric_from(&base, |r| kernel.profile(r));
    let k_aug: DMatrix<f64> = symmetric_from(&all, |r| kernel.profile(r));
    let ratio = k_aug.determinant() / k.determinant();
    Ok(ratio.max(0.0).sqrt())
}

/// `count` logarithmically spaced values in `[lo, hi]`.
pub fn shape_candidates(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == count - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSelection {
    pub epsilon: f64,
    /// `(ε, max power)` for every candidate that could be factorized.
    pub curve: Vec<(f64, f64)>,
    /// Candidates whose kernel matrix could not be factorized.
    pub rejected: Vec<f64>,
}

/// Picks the candidate minimizing the maximum power function over
/// `targets`; ties go to the smallest ε.
pub fn select_shape_parameter(
    family: KernelFamily,
    nodes: &[UVPoint],
    targets: &[UVPoint],
    candidates: &[f64],
) -> Result<ShapeSelection> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no shape parameter candidates".into()));
    }
    if candidates.len() == 1 {
        let eps = candidates[0];
        let kernel = KernelModel::new(family, eps)?;
        let curve = PowerEvaluator::new(&kernel, nodes, None)
            .map(|ev| vec![(eps, ev.max_over(targets))])
            .unwrap_or_default();
        let rejected = if curve.is_empty() { vec![eps] } else { Vec::new() };
        return Ok(ShapeSelection {
            epsilon: eps,
            curve,
            rejected,
        });
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let scores: Vec<(f64, Result<f64>)> = sorted
        .par_iter()
        .map(|&eps| {
            let score = KernelModel::new(family, eps)
                .and_then(|k| PowerEvaluator::new(&k, nodes, None))
                .map(|ev| ev.max_over(targets));
            (eps, score)
        })
        .collect();
    let mut curve = Vec::new();
    let mut rejected = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for (eps, score) in scores {
        match score {
            Ok(s) => {
                curve.push((eps, s));
                if best.is_none_or(|(_, b)| s < b) {
                    best = Some((eps, s));
                }
            }
            Err(e) => {
                log::debug!("shape parameter {eps} rejected: {e}");
                rejected.push(eps);
            }
        }
    }
    let (epsilon, _) = best.ok_or(Error::SelectionFailed)?;
    Ok(ShapeSelection {
        epsilon,
        curve,
        rejected,
    })
}
