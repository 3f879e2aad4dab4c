//! Radial kernels, classical and variably scaled kernel (VSK) interpolation.
//!
//! A VSK evaluates an ordinary radial kernel on augmented coordinates
//! `(u, v, Ψ₁(u), Ψ₂(u))`. Distances here are plain Euclidean distances;
//! the squared-distance matrices used by the Hadamard diagnostics live in
//! [`crate::diagnostics`].

mod power;
mod solve;

pub use power::{
    power_function, power_function_det_ratio, select_shape_parameter, shape_candidates, PowerEvaluator, ShapeSelection,
};
pub use solve::{eigen_condition, SpdFactor};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{find_duplicate, Complex64, UVPoint, VisibilitySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `exp(−ε r)`
    MaternC0,
    /// `exp(−ε² r²)`
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelModel {
    pub family: KernelFamily,
    /// Shape parameter, in units of inverse distance.
    pub epsilon: f64,
}

impl KernelModel {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        let k = Self { family, epsilon };
        k.validate()?;
        Ok(k)
    }

    pub fn matern(epsilon: f64) -> Self {
        Self {
            family: KernelFamily::MaternC0,
            epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "shape parameter must be > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Radial profile as a function of distance.
    #[inline]
    pub fn profile(&self, r: f64) -> f64 {
        match self.family {
            KernelFamily::MaternC0 => (-self.epsilon * r).exp(),
            KernelFamily::Gaussian => {
                let er = self.epsilon * r;
                (-er * er).exp()
            }
        }
    }
}

/// Values of the scaling function Ψ at the interpolation nodes and at the
/// evaluation samples. Features entering the kernel are
/// `scale_factor · Ψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFunction {
    pub node_values: Vec<[f64; 2]>,
    pub eval_values: Vec<[f64; 2]>,
    pub scale_factor: f64,
}

impl ScalingFunction {
    pub fn new(node_values: Vec<[f64; 2]>, eval_values: Vec<[f64; 2]>, scale_factor: f64) -> Result<Self> {
        let finite = |v: &[[f64; 2]]| v.iter().all(|p| p[0].is_finite() && p[1].is_finite());
        if !finite(&node_values) || !finite(&eval_values) || !scale_factor.is_finite() {
            return Err(Error::InvalidInput("scaling function has non-finite values".into()));
        }
        Ok(Self {
            node_values,
            eval_values,
            scale_factor,
        })
    }

    /// Ψ ≡ 0 on `n` nodes; reduces a VSK to the classical kernel.
    pub fn zero(n: usize) -> Self {
        Self {
            node_values: vec![[0.0; 2]; n],
            eval_values: Vec::new(),
            scale_factor: 1.0,
        }
    }

    pub fn scaled_nodes(&self) -> Vec<[f64; 2]> {
        scale(&self.node_values, self.scale_factor)
    }

    pub fn scaled_eval(&self) -> Vec<[f64; 2]> {
        scale(&self.eval_values, self.scale_factor)
    }
}

fn scale(values: &[[f64; 2]], s: f64) -> Vec<[f64; 2]> {
    values.iter().map(|p| [p[0] * s, p[1] * s]).collect()
}

/// A point of the augmented space `ℝ⁴`.
pub(crate) type Feature = [f64; 4];

pub(crate) fn augment(points: &[UVPoint], psi: Option<&[[f64; 2]]>) -> Vec<Feature> {
    match psi {
        Some(psi) => points.iter().zip(psi).map(|(p, s)| [p.u, p.v, s[0], s[1]]).collect(),
        None => points.iter().map(|p| [p.u, p.v, 0.0, 0.0]).collect(),
    }
}

#[inline]
pub(crate) fn feature_distance(a: &Feature, b: &Feature) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    let d3 = a[3] - b[3];
    (d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3).sqrt()
}

fn node_features(nodes: &[UVPoint], scaling: Option<&ScalingFunction>) -> Result<Vec<Feature>> {
    if let Some((first, second)) = find_duplicate(nodes) {
        return Err(Error::DuplicateNode { first, second });
    }
    match scaling {
        Some(s) => {
            if s.node_values.len() != nodes.len() {
                return Err(Error::ScalingMismatch {
                    expected: nodes.len(),
                    got: s.node_values.len(),
                });
            }
            Ok(augment(nodes, Some(&s.scaled_nodes())))
        }
        None => Ok(augment(nodes, None)),
    }
}

fn symmetric_from(features: &[Feature], f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = features.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = f(0.0);
        for j in 0..i {
            let v = f(feature_distance(&features[i], &features[j]));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Plain Euclidean distances between nodes, in `ℝ²` or, with a scaling
/// function, between augmented nodes in `ℝ⁴`.
pub fn distance_matrix(nodes: &[UVPoint], scaling: Option<&ScalingFunction>) -> Result<DMatrix<f64>> {
    let features = node_features(nodes, scaling)?;
    Ok(symmetric_from(&features, |r| r))
}

pub fn kernel_matrix(
    kernel: &KernelModel,
    nodes: &[UVPoint],
    scaling: Option<&ScalingFunction>,
) -> Result<DMatrix<f64>> {
    kernel.validate()?;
    let features = node_features(nodes, scaling)?;
    Ok(symmetric_from(&features, |r| kernel.profile(r)))
}

/// Kernel interpolant of complex data: independent real expansions for the
/// real and imaginary parts sharing one kernel matrix.
#[derive(Debug, Clone)]
pub struct Interpolant {
    kernel: KernelModel,
    nodes: Vec<UVPoint>,
    features: Vec<Feature>,
    scale_factor: Option<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    jitter: f64,
}

impl Interpolant {
    pub fn kernel(&self) -> &KernelModel {
        &self.kernel
    }

    pub fn nodes(&self) -> &[UVPoint] {
        &self.nodes
    }

    pub fn is_vsk(&self) -> bool {
        self.scale_factor.is_some()
    }

    /// Coefficients of the real-part expansion.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Coefficients of the imaginary-part expansion.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Diagonal shift that was needed to factorize the kernel matrix.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    #[inline]
    fn value_at(&self, target: &Feature) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for ((f, a), b) in self.features.iter().zip(&self.alpha).zip(&self.beta) {
            let k = self.kernel.profile(feature_distance(target, f));
            re += a * k;
            im += b * k;
        }
        Complex64::new(re, im)
    }

    /// Evaluates the interpolant at `targets`. A VSK interpolant needs the
    /// unscaled Ψ values of the targets; they are multiplied by the same
    /// scale factor as the node values.
    pub fn evaluate(&self, targets: &[UVPoint], target_psi: Option<&[[f64; 2]]>) -> Result<Vec<Complex64>> {
        let features = match (self.scale_factor, target_psi) {
            (None, _) => augment(targets, None),
            (Some(_), None) => {
                return Err(Error::ScalingMismatch {
                    expected: targets.len(),
                    got: 0,
                })
            }
            (Some(s), Some(psi)) => {
                if psi.len() != targets.len() {
                    return Err(Error::ScalingMismatch {
                        expected: targets.len(),
                        got: psi.len(),
                    });
                }
                augment(targets, Some(&scale(psi, s)))
            }
        };
        Ok(features.par_iter().map(|t| self.value_at(t)).collect())
    }

    /// Values at the interpolation nodes.
    pub fn evaluate_at_nodes(&self) -> Vec<Complex64> {
        self.features.par_iter().map(|t| self.value_at(t)).collect()
    }

    /// `max_i |P(u_i) − V_i| / max_i |V_i|`.
    pub fn relative_node_residual(&self, data: &VisibilitySet) -> f64 {
        let vals = self.evaluate_at_nodes();
        let worst = vals
            .iter()
            .zip(data.values())
            .map(|(p, v)| (p - v).norm())
            .fold(0.0, f64::max);
        let scale = data.max_abs();
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }
}

/// Solves `K α = Re(V)` and `K β = Im(V)` with one factorization of `K`.
pub fn fit(kernel: &KernelModel, data: &VisibilitySet, scaling: Option<&ScalingFunction>) -> Result<Interpolant> {
    kernel.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidInput("no visibilities to interpolate".into()));
    }
    let features = node_features(data.points(), scaling)?;
    let k = symmetric_from(&features, |r| kernel.profile(r));
    let factor = SpdFactor::new(k)?;
    let n = data.len();
    let mut rhs = DMatrix::zeros(n, 2);
    for (i, v) in data.values().iter().enumerate() {
        rhs[(i, 0)] = v.re;
        rhs[(i, 1)] = v.im;
    }
    let coef = factor.solve(&rhs);
    Ok(Interpolant {
        kernel: *kernel,
        nodes: data.points().to_vec(),
        features,
        scale_factor: scaling.map(|s| s.scale_factor),
        alpha: coef.column(0).iter().copied().collect(),
        beta: coef.column(1).iter().copied().collect(),
        jitter: factor.jitter(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SamplingPattern;
    use crate::source::{simulate_visibilities, SourceModel};
    use std::f64::consts::LN_2;

    fn pts(v: &[(f64, f64)]) -> Vec<UVPoint> {
        v.iter().map(|&(u, w)| UVPoint::new(u, w)).collect()
    }

    #[test]
    fn distances_plain_and_augmented() {
        let nodes = pts(&[(0.0, 0.0), (3.0, 4.0)]);
        let d = distance_matrix(&nodes, None).unwrap();
        assert_eq!(d[(0, 1)], 5.0);
        assert_eq!(d[(0, 0)], 0.0);
        let zero = ScalingFunction::zero(2);
        assert_eq!(distance_matrix(&nodes, Some(&zero)).unwrap(), d);
        let psi = ScalingFunction::new(vec![[0.0, 0.0], [0.0, 12.0]], vec![], 1.0).unwrap();
        assert_eq!(distance_matrix(&nodes, Some(&psi)).unwrap()[(1, 0)], 13.0);
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let nodes = pts(&[(1.0, 1.0), (2.0, 0.0), (1.0, 1.0)]);
        assert!(matches!(
            distance_matrix(&nodes, None),
            Err(Error::DuplicateNode { first: 0, second: 2 })
        ));
        let psi = ScalingFunction::zero(3);
        assert!(matches!(
            distance_matrix(&nodes[..2], Some(&psi)),
            Err(Error::ScalingMismatch { .. })
        ));
    }

    #[test]
    fn kernel_entries() {
        let m = KernelModel::matern(1.0);
        assert_eq!(m.profile(0.0), 1.0);
        approx::assert_relative_eq!(m.profile(LN_2), 0.5, max_relative = 1e-15);
        let g = KernelModel::new(KernelFamily::Gaussian, 1.0).unwrap();
        approx::assert_relative_eq!(g.profile(1.0), 0.367_879_441_171_442_3, max_relative = 1e-15);
        assert!(KernelModel::new(KernelFamily::Gaussian, 0.0).is_err());

        let nodes = SamplingPattern::stix().generate().unwrap();
        let k = kernel_matrix(&KernelModel::matern(0.01), &nodes, None).unwrap();
        for i in 0..k.nrows() {
            assert_eq!(k[(i, i)], 1.0);
            for j in 0..k.ncols() {
                assert_eq!(k[(i, j)], k[(j, i)]);
            }
        }
    }

    #[test]
    fn single_node_fit() {
        let data = VisibilitySet::new(vec![UVPoint::new(0.0, 0.0)], vec![Complex64::new(2.0, 3.0)], "").unwrap();
        let p = fit(&KernelModel::matern(1.0), &data, None).unwrap();
        assert_eq!(p.alpha(), &[2.0]);
        assert_eq!(p.beta(), &[3.0]);
        let data = VisibilitySet::new(vec![UVPoint::new(0.0, 0.0)], vec![Complex64::new(1.0, 0.0)], "").unwrap();
        let p = fit(&KernelModel::matern(1.0), &data, None).unwrap();
        let v = p.evaluate(&[UVPoint::new(LN_2, 0.0)], None).unwrap();
        approx::assert_relative_eq!(v[0].re, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn stix_fit_reproduces_data() {
        let nodes = SamplingPattern::stix().generate().unwrap();
        let data = simulate_visibilities(&SourceModel::double_footpoint(), &nodes, 0.0, 0, "").unwrap();
        let p = fit(&KernelModel::matern(0.01), &data, None).unwrap();
        assert!(p.relative_node_residual(&data) <= 1e-8);
        let back = p.evaluate(data.points(), None).unwrap();
        for (a, b) in back.iter().zip(data.values()) {
            assert!((a - b).norm() <= 1e-8 * data.max_abs());
        }
    }

    #[test]
    fn far_targets_decay() {
        let nodes = pts(&[(0.0, 0.0), (0.1, 0.0)]);
        let data = VisibilitySet::new(nodes, vec![Complex64::new(1.0, 1.0), Complex64::new(0.5, -1.0)], "").unwrap();
        let p = fit(&KernelModel::matern(5.0), &data, None).unwrap();
        let far = p.evaluate(&[UVPoint::new(10.0, 0.0)], None).unwrap();
        assert!(far[0].norm() < 1e-6 * data.max_abs());
    }

    #[test]
    fn vsk_evaluation_requires_target_psi() {
        let nodes = pts(&[(0.0, 0.0), (0.1, 0.0)]);
        let data = VisibilitySet::new(nodes, vec![Complex64::new(1.0, 0.0); 2], "").unwrap();
        let psi = ScalingFunction::new(vec![[0.0, 1.0], [1.0, 0.0]], vec![], 0.5).unwrap();
        let p = fit(&KernelModel::matern(1.0), &data, Some(&psi)).unwrap();
        assert!(p.is_vsk());
        assert!(matches!(
            p.evaluate(&[UVPoint::ORIGIN], None),
            Err(Error::ScalingMismatch { .. })
        ));
        assert!(p.evaluate(&[UVPoint::ORIGIN], Some(&[[0.0, 0.0], [1.0, 1.0]])).is_err());
        let at_nodes = p.evaluate(data.points(), Some(&psi.node_values)).unwrap();
        for v in at_nodes {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
