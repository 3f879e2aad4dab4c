use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vskf_core::io::read_json;
use vskf_core::pipeline::PipelineConfig;
use vskf_core::sampling::SamplingPattern;
use vskf_core::source::SourceModel;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Interpolate,
    Invert,
    Pipeline,
    Diagnose,
    Paramfit,
    SelectEpsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    /// Visibility CSV, surface directory or image file, depending on mode.
    pub input: Option<PathBuf>,
    /// Ground-truth source model JSON; enables RRMSE.
    pub truth: Option<PathBuf>,
    pub out: PathBuf,
    /// Write the Landweber iteration log as CSV.
    pub iterlog: bool,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            input: None,
            truth: None,
            out: PathBuf::from("out"),
            iterlog: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub seed: u64,
    pub sampling: SamplingPattern,
    pub source: SourceModel,
    /// Noise standard deviation on Re and Im, as a fraction of `|V(0)|`.
    pub noise_fraction: f64,
    pub pipeline: PipelineConfig,
    pub io: IoConfig,
    /// Independent simulated reconstructions run by `pipeline`.
    pub repeat: usize,
    /// Upper bound on the number of sources `paramfit` reports.
    pub max_peaks: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: None,
            seed: 0,
            sampling: SamplingPattern::stix(),
            source: SourceModel::double_footpoint(),
            noise_fraction: 0.0,
            pipeline: PipelineConfig::default(),
            io: IoConfig::default(),
            repeat: 1,
            max_peaks: 2,
        }
    }
}

/// Command-line values that take precedence over the JSON file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub vsk: Option<bool>,
    pub out: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub iterlog: bool,
    pub repeat: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => Ok(read_json(p)?),
            None => Ok(Self::default()),
        }
    }

    pub fn apply(&mut self, mode: Mode, o: Overrides) {
        self.mode = Some(mode);
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(vsk) = o.vsk {
            self.pipeline.vsk = vsk;
        }
        if let Some(out) = o.out {
            self.io.out = out;
        }
        if o.truth.is_some() {
            self.io.truth = o.truth;
        }
        if o.input.is_some() {
            self.io.input = o.input;
        }
        self.io.iterlog |= o.iterlog;
        if let Some(k) = o.repeat {
            self.repeat = k;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.noise_fraction >= 0.0 && self.noise_fraction.is_finite()) {
            return Err(CliError::Usage(format!(
                "noise_fraction must be >= 0, got {}",
                self.noise_fraction
            )));
        }
        if self.repeat == 0 {
            return Err(CliError::Usage("repeat must be at least 1".into()));
        }
        if self.repeat > 1 && self.io.input.is_some() {
            return Err(CliError::Usage(
                "repeat > 1 simulates its own data and cannot take an input file".into(),
            ));
        }
        if self.max_peaks == 0 {
            return Err(CliError::Usage("max_peaks must be at least 1".into()));
        }
        self.source.validate()?;
        self.pipeline.inversion.validate()?;
        self.pipeline.scaling.validate()?;
        Ok(())
    }

    pub fn require_input(&self) -> Result<&Path, CliError> {
        self.io
            .input
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("{} requires --input", self.mode_name())))
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            Some(Mode::Simulate) => "simulate",
            Some(Mode::Interpolate) => "interpolate",
            Some(Mode::Invert) => "invert",
            Some(Mode::Pipeline) => "pipeline",
            Some(Mode::Diagnose) => "diagnose",
            Some(Mode::Paramfit) => "paramfit",
            Some(Mode::SelectEpsilon) => "select-epsilon",
            None => "run",
        }
    }
}
