//! End-to-end Land-RBF / Land-VSK reconstruction.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::inversion::{reconstruct, InversionConfig, Reconstruction};
use crate::kernel::{
    select_shape_parameter, shape_candidates, KernelFamily, KernelModel, ScalingFunction, ShapeSelection,
};
use crate::model::{FrequencyGrid, SupportMask, UVPoint, VisibilitySet};
use crate::scaling::{build_scaling, BackProjectionConfig, ScalingBuildConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonRule {
    Fixed(f64),
    /// Minimize the maximum power function over `count` log-spaced
    /// candidates in `[lo, hi]`.
    Select {
        lo: f64,
        hi: f64,
        count: usize,
    },
}

impl Default for EpsilonRule {
    fn default() -> Self {
        EpsilonRule::Fixed(0.01)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub family: KernelFamily,
    pub epsilon: EpsilonRule,
    /// Land-VSK when set, Land-RBF otherwise.
    pub vsk: bool,
    /// Every `target_stride`-th sample of the evaluation grid along each
    /// axis, inside the support, is a power-function target.
    pub target_stride: usize,
    pub back_projection: BackProjectionConfig,
    pub scaling: ScalingBuildConfig,
    pub inversion: InversionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            family: KernelFamily::MaternC0,
            epsilon: EpsilonRule::default(),
            vsk: true,
            target_stride: 16,
            back_projection: BackProjectionConfig::default(),
            scaling: ScalingBuildConfig::default(),
            inversion: InversionConfig::default(),
        }
    }
}

/// Regular subsample of `grid` restricted to `mask`.
pub fn power_targets(grid: &FrequencyGrid, mask: &SupportMask, stride: usize) -> Vec<UVPoint> {
    let n = grid.side();
    let stride = stride.max(1);
    (0..n)
        .step_by(stride)
        .flat_map(|i| (0..n).step_by(stride).map(move |j| (i, j)))
        .map(|(i, j)| grid.coordinate(i, j))
        .filter(|q| mask.contains(q))
        .collect()
}

pub fn choose_epsilon(data: &VisibilitySet, config: &PipelineConfig) -> Result<(f64, Option<ShapeSelection>)> {
    match config.epsilon {
        EpsilonRule::Fixed(eps) => Ok((eps, None)),
        EpsilonRule::Select { lo, hi, count } => {
            let grid = config.inversion.eval_grid()?;
            let mask = config.inversion.landweber.support.resolve(data)?;
            let targets = power_targets(&grid, &mask, config.target_stride);
            let sel = select_shape_parameter(config.family, data.points(), &targets, &shape_candidates(lo, hi, count))?;
            Ok((sel.epsilon, Some(sel)))
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub reconstruction: Reconstruction,
    pub kernel: KernelModel,
    pub selection: Option<ShapeSelection>,
    pub scaling: Option<ScalingFunction>,
}

pub fn build_pipeline_scaling(data: &VisibilitySet, config: &PipelineConfig) -> Result<ScalingFunction> {
    build_scaling(
        data,
        &config.inversion.eval_grid()?,
        &config.back_projection,
        &config.scaling,
    )
}

pub fn run_pipeline(data: &VisibilitySet, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.inversion.validate()?;
    let (epsilon, selection) = choose_epsilon(data, config)?;
    let kernel = KernelModel::new(config.family, epsilon)?;
    let scaling = if config.vsk {
        Some(build_pipeline_scaling(data, config)?)
    } else {
        None
    };
    let reconstruction = reconstruct(data, &kernel, scaling.as_ref(), &config.inversion)?;
    Ok(PipelineOutput {
        reconstruction,
        kernel,
        selection,
        scaling,
    })
}
