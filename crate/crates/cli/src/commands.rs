use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::Serialize;
use vskf_core::diagnostics::{extract_sources, kernel_diagnostics, surface_rrmse, KernelDiagnostics, SourceSummary};
use vskf_core::inversion::{algorithm_name, interpolate_surface, invert_surface, RunReport};
use vskf_core::io::{
    read_image, read_json, read_surface, read_visibilities, write_image, write_iteration_log, write_json, write_pgm,
    write_surface, write_visibilities,
};
use vskf_core::kernel::{select_shape_parameter, shape_candidates, KernelModel, ShapeSelection};
use vskf_core::pipeline::{build_pipeline_scaling, choose_epsilon, power_targets, run_pipeline, EpsilonRule};
use vskf_core::source::{simulate_visibilities, SourceModel};
use vskf_core::{ImageGrid, SupportMask, VisibilitySet};

use crate::config::{Mode, RunConfig};
use crate::error::CliError;

type CliResult<T> = Result<T, CliError>;

pub const VISIBILITIES: &str = "visibilities.csv";
pub const TRUTH: &str = "truth.json";
pub const IMAGE: &str = "image.txt";
pub const PREVIEW: &str = "image.pgm";
pub const REPORT: &str = "report.json";
pub const DIAGNOSTICS: &str = "diagnostics.json";
pub const ITERATIONS: &str = "iterations.csv";
pub const SOURCES: &str = "sources.json";
pub const CURVE: &str = "epsilon_curve.csv";
pub const SUMMARY: &str = "summary.json";

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    cfg.validate()?;
    match cfg.mode.expect("mode is set before dispatch") {
        Mode::Simulate => simulate(cfg),
        Mode::Interpolate => interpolate(cfg),
        Mode::Invert => invert(cfg),
        Mode::Pipeline => pipeline(cfg),
        Mode::Diagnose => diagnose(cfg),
        Mode::Paramfit => paramfit(cfg),
        Mode::SelectEpsilon => select_epsilon(cfg),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| {
        vskf_core::Error::Io {
            path: dir.display().to_string(),
            source,
        }
        .into()
    })
}

fn simulated(cfg: &RunConfig, seed: u64) -> CliResult<VisibilitySet> {
    let points = cfg.sampling.generate()?;
    let sigma = cfg.noise_fraction * cfg.source.total_flux();
    Ok(simulate_visibilities(
        &cfg.source,
        &points,
        sigma,
        seed,
        format!("seed{seed}"),
    )?)
}

/// Input data and the ground truth, if known. Simulated data carries its
/// own truth; `--truth` takes precedence.
fn load_data(cfg: &RunConfig, seed: u64) -> CliResult<(VisibilitySet, Option<SourceModel>)> {
    let truth = match &cfg.io.truth {
        Some(p) => Some(read_json::<SourceModel>(p)?),
        None => None,
    };
    match &cfg.io.input {
        Some(p) => Ok((read_visibilities(p)?, truth)),
        None => {
            info!("no input given, simulating with seed {seed}");
            Ok((simulated(cfg, seed)?, truth.or_else(|| Some(cfg.source.clone()))))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Brightest pixel; ties go to the first in row-major order.
pub fn brightest(image: &ImageGrid) -> Peak {
    let n = image.side();
    let (idx, value) =
        image.data().iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, &v)| if v > best.1 { (i, v) } else { best },
        );
    let (x, y) = image.coordinate(idx / n, idx % n);
    Peak { x, y, value }
}

fn sources(image: &ImageGrid, max_peaks: usize) -> CliResult<Option<SourceSummary>> {
    match extract_sources(image, max_peaks) {
        Ok(s) => Ok(Some(s)),
        Err(vskf_core::Error::NoPeaks) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn write_image_set(dir: &Path, image: &ImageGrid) -> CliResult<()> {
    write_image(&dir.join(IMAGE), image)?;
    write_pgm(&dir.join(PREVIEW), image)?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    rows: usize,
    noise_sigma: f64,
    max_radius: f64,
    config: &'a RunConfig,
}

fn simulate(cfg: &RunConfig) -> CliResult<()> {
    let data = simulated(cfg, cfg.seed)?;
    let dir = &cfg.io.out;
    create_dir(dir)?;
    write_visibilities(&dir.join(VISIBILITIES), &data)?;
    write_json(&dir.join(TRUTH), &cfg.source)?;
    write_json(
        &dir.join(REPORT),
        &SimulateReport {
            rows: data.len(),
            noise_sigma: cfg.noise_fraction * cfg.source.total_flux(),
            max_radius: data.max_radius(),
            config: cfg,
        },
    )?;
    println!(
        "wrote {} visibilities to {}",
        data.len(),
        dir.join(VISIBILITIES).display()
    );
    Ok(())
}

#[derive(Serialize)]
struct InterpolateReport<'a> {
    interpolation: &'static str,
    epsilon: f64,
    node_residual: f64,
    jitter: f64,
    support_radius: Option<f64>,
    rrmse: Option<f64>,
    config: &'a RunConfig,
}

fn interpolate(cfg: &RunConfig) -> CliResult<()> {
    let (data, truth) = load_data(cfg, cfg.seed)?;
    let pc = &cfg.pipeline;
    let (epsilon, _) = choose_epsilon(&data, pc)?;
    let kernel = KernelModel::new(pc.family, epsilon)?;
    let scaling = if pc.vsk {
        Some(build_pipeline_scaling(&data, pc)?)
    } else {
        None
    };
    let result = interpolate_surface(&data, &kernel, scaling.as_ref(), &pc.inversion)?;
    let rrmse = match &truth {
        Some(t) => Some(surface_rrmse(&result.surface, t, &result.mask)?),
        None => None,
    };
    let dir = &cfg.io.out;
    create_dir(dir)?;
    write_surface(dir, &result.surface, result.mask.radius())?;
    write_json(
        &dir.join(REPORT),
        &InterpolateReport {
            interpolation: if pc.vsk { "VSK" } else { "RBF" },
            epsilon,
            node_residual: result.interpolant.relative_node_residual(&data),
            jitter: result.interpolant.jitter(),
            support_radius: result.mask.radius(),
            rrmse,
            config: cfg,
        },
    )?;
    println!(
        "wrote {}x{} surface to {}",
        result.surface.side(),
        result.surface.side(),
        dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct InvertReport<'a> {
    iterations: usize,
    converged: bool,
    final_residual: f64,
    imaginary_ratio: f64,
    support_radius: Option<f64>,
    peak: Peak,
    sources: Option<SourceSummary>,
    config: &'a RunConfig,
}

/// Landweber on a surface directory written by `interpolate`.
fn invert(cfg: &RunConfig) -> CliResult<()> {
    let input = cfg.require_input()?;
    let (surface, meta) = read_surface(input)?;
    let lw = &cfg.pipeline.inversion.landweber;
    let mask = match (lw.support, meta.support_radius) {
        (vskf_core::inversion::SupportSpec::DataExtent, Some(r)) => SupportMask::disk(r)?,
        (vskf_core::inversion::SupportSpec::DataExtent, None) => SupportMask::Full,
        (vskf_core::inversion::SupportSpec::Disk { radius }, _) => SupportMask::disk(radius)?,
        (vskf_core::inversion::SupportSpec::Full, _) => SupportMask::Full,
    };
    let (image, outcome) = invert_surface(&surface, &mask, lw)?;
    let dir = &cfg.io.out;
    create_dir(dir)?;
    write_image_set(dir, &image)?;
    if cfg.io.iterlog {
        write_iteration_log(&dir.join(ITERATIONS), &outcome.log)?;
    }
    let peak = brightest(&image);
    write_json(
        &dir.join(REPORT),
        &InvertReport {
            iterations: outcome.iterations(),
            converged: outcome.converged,
            final_residual: outcome.log.last().map_or(0.0, |r| r.residual),
            imaginary_ratio: outcome.imaginary_ratio,
            support_radius: mask.radius(),
            peak,
            sources: sources(&image, cfg.max_peaks)?,
            config: cfg,
        },
    )?;
    println!(
        "{} iterations, peak at ({:.2}, {:.2}) arcsec",
        outcome.iterations(),
        peak.x,
        peak.y
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
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
    pub peak: Peak,
    pub sources: Option<SourceSummary>,
    pub rrmse: Option<f64>,
    pub selection: Option<ShapeSelection>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
struct DiagnosticsReport {
    epsilon: f64,
    #[serde(flatten)]
    kernel: KernelDiagnostics,
    rrmse: Option<f64>,
}

/// One reconstruction into `dir`; returns the run report.
fn pipeline_once(
    cfg: &RunConfig,
    dir: &Path,
    data: &VisibilitySet,
    truth: Option<&SourceModel>,
) -> CliResult<PipelineReport> {
    let out = run_pipeline(data, &cfg.pipeline)?;
    let rec = &out.reconstruction;
    let mask = SupportMask::disk(rec.report.support_radius.unwrap_or(data.max_radius()))?;
    let rrmse = match truth {
        Some(t) => Some(surface_rrmse(&rec.surface, t, &mask)?),
        None => None,
    };
    let scaling = match &out.scaling {
        Some(s) => s.clone(),
        None => build_pipeline_scaling(data, &cfg.pipeline)?,
    };
    let diagnostics = DiagnosticsReport {
        epsilon: out.kernel.epsilon,
        kernel: kernel_diagnostics(data.points(), &scaling, out.kernel.epsilon)?,
        rrmse,
    };

    create_dir(dir)?;
    write_image_set(dir, &rec.image)?;
    write_surface(dir, &rec.surface, rec.report.support_radius)?;
    write_json(&dir.join(DIAGNOSTICS), &diagnostics)?;
    if cfg.io.iterlog {
        write_iteration_log(&dir.join(ITERATIONS), &rec.report.log)?;
    }
    let RunReport {
        algorithm,
        epsilon,
        iterations,
        converged,
        final_residual,
        imaginary_ratio,
        node_residual,
        jitter,
        condition_number,
        support_radius,
        ..
    } = rec.report.clone();
    let report = PipelineReport {
        algorithm,
        epsilon,
        iterations,
        converged,
        final_residual,
        imaginary_ratio,
        node_residual,
        jitter,
        condition_number,
        support_radius,
        peak: brightest(&rec.image),
        sources: sources(&rec.image, cfg.max_peaks)?,
        rrmse,
        selection: out.selection,
        config: cfg.clone(),
    };
    write_json(&dir.join(REPORT), &report)?;
    Ok(report)
}

#[derive(Serialize)]
struct RunSummary {
    seed: u64,
    dir: PathBuf,
    iterations: usize,
    peak: Peak,
    rrmse: Option<f64>,
}

#[derive(Serialize)]
struct RepeatSummary<'a> {
    algorithm: &'static str,
    runs: Vec<RunSummary>,
    mean_rrmse: Option<f64>,
    config: &'a RunConfig,
}

fn pipeline(cfg: &RunConfig) -> CliResult<()> {
    if cfg.repeat == 1 {
        let (data, truth) = load_data(cfg, cfg.seed)?;
        let report = pipeline_once(cfg, &cfg.io.out, &data, truth.as_ref())?;
        print_report_line(&report);
        return Ok(());
    }
    // independent runs, each on its own simulation with seed + i
    let runs: Vec<RunSummary> = (0..cfg.repeat as u64)
        .into_par_iter()
        .map(|i| {
            let mut run_cfg = cfg.clone();
            run_cfg.seed = cfg.seed + i;
            run_cfg.repeat = 1;
            run_cfg.io.out = cfg.io.out.join(format!("run_{i:03}"));
            let (data, truth) = load_data(&run_cfg, run_cfg.seed)?;
            let report = pipeline_once(&run_cfg, &run_cfg.io.out, &data, truth.as_ref())?;
            print_report_line(&report);
            Ok(RunSummary {
                seed: run_cfg.seed,
                dir: run_cfg.io.out,
                iterations: report.iterations,
                peak: report.peak,
                rrmse: report.rrmse,
            })
        })
        .collect::<CliResult<_>>()?;
    let rrmses: Option<Vec<f64>> = runs.iter().map(|r| r.rrmse).collect();
    let mean_rrmse = rrmses.map(|v| v.iter().sum::<f64>() / v.len() as f64);
    write_json(
        &cfg.io.out.join(SUMMARY),
        &RepeatSummary {
            algorithm: algorithm_name(cfg.pipeline.vsk),
            runs,
            mean_rrmse,
            config: cfg,
        },
    )?;
    if let Some(m) = mean_rrmse {
        println!("mean RRMSE over {} runs: {m:.4}", cfg.repeat);
    }
    Ok(())
}

fn print_report_line(r: &PipelineReport) {
    let rrmse = r.rrmse.map_or(String::new(), |v| format!(", RRMSE {v:.4}"));
    println!(
        "{} seed {}: ε = {}, {} iterations, peak at ({:.2}, {:.2}) arcsec{rrmse} -> {}",
        r.algorithm,
        r.config.seed,
        r.epsilon,
        r.iterations,
        r.peak.x,
        r.peak.y,
        r.config.io.out.display()
    );
}

#[derive(Serialize)]
struct DiagnoseReport<'a> {
    epsilon: f64,
    #[serde(flatten)]
    kernel: KernelDiagnostics,
    rrmse: Option<f64>,
    config: &'a RunConfig,
}

/// Conditioning diagnostics of the classic and VSK kernel matrices, plus
/// the surface RRMSE of the configured interpolation when the truth is known.
fn diagnose(cfg: &RunConfig) -> CliResult<()> {
    let (data, truth) = load_data(cfg, cfg.seed)?;
    let pc = &cfg.pipeline;
    let (epsilon, _) = choose_epsilon(&data, pc)?;
    let scaling = build_pipeline_scaling(&data, pc)?;
    let kernel = kernel_diagnostics(data.points(), &scaling, epsilon)?;
    let rrmse = match &truth {
        Some(t) => {
            let model = KernelModel::new(pc.family, epsilon)?;
            let s = interpolate_surface(&data, &model, pc.vsk.then_some(&scaling), &pc.inversion)?;
            Some(surface_rrmse(&s.surface, t, &s.mask)?)
        }
        None => None,
    };
    let dir = &cfg.io.out;
    create_dir(dir)?;
    let report = DiagnoseReport {
        epsilon,
        kernel,
        rrmse,
        config: cfg,
    };
    write_json(&dir.join(DIAGNOSTICS), &report)?;
    println!(
        "cond(K) = {:.3e}, cond(K^Ψ) = {:.3e}, S(K) = {:.4}, S(K^Ψ) = {:.4}",
        kernel.cond_classic, kernel.cond_vsk, kernel.spectral_ratio_classic, kernel.spectral_ratio_vsk
    );
    Ok(())
}

#[derive(Serialize)]
struct ParamfitReport<'a> {
    #[serde(flatten)]
    summary: SourceSummary,
    peak: Peak,
    config: &'a RunConfig,
}

/// Source positions, sizes and fluxes of a reconstructed image.
fn paramfit(cfg: &RunConfig) -> CliResult<()> {
    let image = read_image(cfg.require_input()?)?;
    let summary = extract_sources(&image, cfg.max_peaks)?;
    let dir = &cfg.io.out;
    create_dir(dir)?;
    for (i, s) in summary.sources.iter().enumerate() {
        println!(
            "source {i}: x_p = ({:.2}, {:.2}) arcsec, FWHM {:.2} arcsec, flux {:.1}",
            s.x_p.0, s.x_p.1, s.fwhm, s.flux
        );
    }
    write_json(
        &dir.join(SOURCES),
        &ParamfitReport {
            summary,
            peak: brightest(&image),
            config: cfg,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SelectionReport<'a> {
    epsilon: f64,
    targets: usize,
    rejected: &'a [f64],
    config: &'a RunConfig,
}

/// Max-power-function curve over the candidate shape parameters.
fn select_epsilon(cfg: &RunConfig) -> CliResult<()> {
    let (data, _) = load_data(cfg, cfg.seed)?;
    let pc = &cfg.pipeline;
    let (lo, hi, count) = match pc.epsilon {
        EpsilonRule::Select { lo, hi, count } => (lo, hi, count),
        EpsilonRule::Fixed(_) => (0.01, 1.0, 100),
    };
    let mask = pc.inversion.landweber.support.resolve(&data)?;
    let targets = power_targets(&pc.inversion.eval_grid()?, &mask, pc.target_stride);
    let sel = select_shape_parameter(pc.family, data.points(), &targets, &shape_candidates(lo, hi, count))?;
    let dir = &cfg.io.out;
    create_dir(dir)?;
    let mut curve = String::from("epsilon,max_power\n");
    for (eps, p) in &sel.curve {
        curve.push_str(&format!("{eps},{p}\n"));
    }
    fs::write(dir.join(CURVE), curve).map_err(|source| vskf_core::Error::Io {
        path: dir.join(CURVE).display().to_string(),
        source,
    })?;
    write_json(
        &dir.join(REPORT),
        &SelectionReport {
            epsilon: sel.epsilon,
            targets: targets.len(),
            rejected: &sel.rejected,
            config: cfg,
        },
    )?;
    println!("selected ε = {} from {} candidates", sel.epsilon, sel.curve.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brightest_pixel_location() {
        let mut img = ImageGrid::zeros(4, 2.0, (0.0, 0.0)).unwrap();
        img.data_mut()[4 * 1 + 3] = 5.0;
        let p = brightest(&img);
        assert_eq!(p.value, 5.0);
        assert_eq!((p.x, p.y), img.coordinate(1, 3));
    }
}
