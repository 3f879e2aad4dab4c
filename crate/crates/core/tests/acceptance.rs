//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run all criteria with `cargo test -p vskf-core --test acceptance`, or a
//! subset by number, e.g. `cargo test -p vskf-core --test acceptance -- 6 9`.
//! Failures are reported but only change the exit status when
//! `VSKF_ACCEPTANCE_STRICT` is set to anything other than `0`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use vskf_core::diagnostics::{
    condition_number, extract_sources, hadamard_identity_check, hadamard_product, prop2_hypothesis, schur_bounds,
    spectral_ratio, surface_rrmse,
};
use vskf_core::fft::inverse_to_image;
use vskf_core::inversion::{interpolate_surface, landweber, IterationRecord, LandweberConfig};
use vskf_core::kernel::{
    fit, kernel_matrix, power_function, power_function_det_ratio, select_shape_parameter, shape_candidates,
    KernelFamily, KernelModel, ScalingFunction,
};
use vskf_core::pipeline::{build_pipeline_scaling, choose_epsilon, power_targets, run_pipeline, PipelineConfig};
use vskf_core::sampling::SamplingPattern;
use vskf_core::source::{exact_visibility, render_image, simulate_visibilities, ExpSource, SourceModel};
use vskf_core::{Complex64, ImageGrid, SupportMask, UVPoint, VisibilitySet};

type Outcome = (bool, String);

/// Relative noise level of the noisy simulations, as a fraction of `|V(0)|`.
const NOISE_FRACTION: f64 = 0.02;

fn stix() -> Vec<UVPoint> {
    SamplingPattern::stix().generate().unwrap()
}

fn noisy_double(seed: u64) -> VisibilitySet {
    let model = SourceModel::double_footpoint();
    simulate_visibilities(&model, &stix(), NOISE_FRACTION * model.total_flux(), seed, "double").unwrap()
}

fn random_nodes(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<UVPoint> {
    let mut out: Vec<UVPoint> = Vec::with_capacity(n);
    while out.len() < n {
        let p = UVPoint::new(rng.random_range(-radius..radius), rng.random_range(-radius..radius));
        if p.norm() <= radius && out.iter().all(|q| q.distance(&p) > 1e-3 * radius) {
            out.push(p);
        }
    }
    out
}

fn random_scaling(rng: &mut ChaCha8Rng, n: usize, amplitude: f64) -> ScalingFunction {
    let vals = (0..n)
        .map(|_| {
            [
                rng.random_range(-amplitude..amplitude),
                rng.random_range(-amplitude..amplitude),
            ]
        })
        .collect();
    ScalingFunction::new(vals, Vec::new(), 1.0).unwrap()
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * rng.random_range(1e-3..1.0)
}

fn criterion_1() -> Outcome {
    let double = SourceModel::double_footpoint();
    let single = SourceModel::single((5.0, -3.0));
    let fib = SamplingPattern::Fibonacci { n: 100, radius: 0.0702 }
        .generate()
        .unwrap();
    let rhessi = SamplingPattern::rhessi().generate().unwrap();
    let datasets = vec![
        (
            "stix double exact",
            simulate_visibilities(&double, &stix(), 0.0, 0, "").unwrap(),
        ),
        ("stix double noisy", noisy_double(0)),
        (
            "fibonacci single",
            simulate_visibilities(&single, &fib, 0.0, 0, "").unwrap(),
        ),
        (
            "rhessi double",
            simulate_visibilities(&double, &rhessi, 0.0, 0, "").unwrap(),
        ),
    ];
    let kernels = [
        KernelModel::matern(0.01),
        KernelModel::matern(1.0),
        KernelModel::new(KernelFamily::Gaussian, 150.0).unwrap(),
        KernelModel::new(KernelFamily::Gaussian, 300.0).unwrap(),
    ];
    let config = PipelineConfig::default();
    let mut worst = (0.0, String::new());
    let mut failures = Vec::new();
    for (name, data) in &datasets {
        assert!(data.len() <= 240);
        let scaling = build_pipeline_scaling(data, &config).unwrap();
        for kernel in &kernels {
            for s in [None, Some(&scaling)] {
                let label = format!("{name} {:?} eps={} vsk={}", kernel.family, kernel.epsilon, s.is_some());
                match fit(kernel, data, s) {
                    Ok(interp) => {
                        let r = interp.relative_node_residual(data);
                        if r > worst.0 {
                            worst = (r, label.clone());
                        }
                        if !(r <= 1e-8) {
                            failures.push(format!("{label}: residual {r:.2e}"));
                        }
                    }
                    Err(e) => failures.push(format!("{label}: {e}")),
                }
            }
        }
    }
    let total = datasets.len() * kernels.len() * 2;
    if failures.is_empty() {
        (
            true,
            format!("{total} fits, worst relative residual {:.2e} ({})", worst.0, worst.1),
        )
    } else {
        (
            false,
            format!("{} of {total} fits failed: {}", failures.len(), failures.join("; ")),
        )
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=20);
        let nodes = random_nodes(&mut rng, n, 5.0);
        let scaling = random_scaling(&mut rng, n, 3.0);
        let eps = rng.random_range(0.01..=1.0);
        worst = worst.max(hadamard_identity_check(&nodes, &scaling, eps).unwrap());
    }
    (
        worst <= 1e-12,
        format!("100 instances, max deviation {worst:.2e} (limit 1e-12)"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    let mut min_gap = f64::INFINITY;
    for _ in 0..100 {
        let n = rng.random_range(2..=30);
        let nodes = random_nodes(&mut rng, n, 1.0);
        let amplitude = rng.random_range(0.01..2.0);
        let scaling = random_scaling(&mut rng, n, amplitude);
        let kernel = KernelModel::matern(rng.random_range(0.01..=5.0));
        let s = spectral_ratio(&kernel_matrix(&kernel, &nodes, None).unwrap()).unwrap();
        let sv = spectral_ratio(&kernel_matrix(&kernel, &nodes, Some(&scaling)).unwrap()).unwrap();
        min_gap = min_gap.min(sv - s);
        if sv < s {
            violations += 1;
        }
    }
    (
        violations == 0,
        format!("100 instances, {violations} violations, min S(K^Ψ) − S(K) = {min_gap:.3e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut held, mut violations) = (0, 0);
    let mut worst_ratio: f64 = 0.0;
    let instances = 100;
    for _ in 0..instances {
        let n = rng.random_range(2..=20);
        let nodes = random_nodes(&mut rng, n, 5.0);
        let amplitude = rng.random_range(0.1..3.0);
        let scaling = random_scaling(&mut rng, n, amplitude);
        let eps = rng.random_range(0.01..=1.0);
        let min_eig = prop2_hypothesis(&nodes, &scaling, eps).unwrap();
        if min_eig < -1e-10 {
            continue;
        }
        held += 1;
        let kernel = KernelModel::matern(eps);
        let c = condition_number(&kernel_matrix(&kernel, &nodes, None).unwrap());
        let cv = condition_number(&kernel_matrix(&kernel, &nodes, Some(&scaling)).unwrap());
        worst_ratio = worst_ratio.max(cv / c);
        if cv > c * (1.0 + 1e-8) {
            violations += 1;
        }
    }
    let failure_rate = 100.0 * (instances - held) as f64 / instances as f64;
    (
        violations == 0 && held > 0,
        format!(
            "{held}/{instances} instances satisfy the hypothesis (failure rate {failure_rate:.0}%), {violations} violations, max cond(K^Ψ)/cond(K) = {worst_ratio:.4}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let e = random_spd(&mut rng, n);
        let m = random_spd(&mut rng, n);
        let (lo, hi) = schur_bounds(&e, &m);
        let slack = 1e-12 * hi.abs();
        let eig = SymmetricEigen::new(hadamard_product(&e, &m)).eigenvalues;
        if eig.iter().any(|&l| l < lo - slack || l > hi + slack) {
            violations += 1;
        }
    }
    (
        violations == 0,
        format!("100 SPD pairs, {violations} eigenvalues outside the bound"),
    )
}

fn criterion_6() -> Outcome {
    let nodes = stix();
    let config = PipelineConfig::default();
    let grid = config.inversion.eval_grid().unwrap();
    let radius = nodes.iter().map(UVPoint::norm).fold(0.0, f64::max);
    let targets = power_targets(&grid, &SupportMask::disk(radius).unwrap(), 16);
    let sel = select_shape_parameter(
        KernelFamily::MaternC0,
        &nodes,
        &targets,
        &shape_candidates(0.01, 1.0, 100),
    )
    .unwrap();
    let drops: Vec<(f64, f64)> = sel
        .curve
        .windows(2)
        .filter(|w| w[1].1 < w[0].1 - 1e-10)
        .map(|w| (w[1].0, w[0].1 - w[1].1))
        .collect();
    let monotone = drops.is_empty() && sel.curve.len() == 100;
    (
        monotone && sel.epsilon == 0.01,
        format!(
            "{} targets, {} scored candidates, selected ε = {}, max power {:.4e} → {:.4e}, {} decreases beyond 1e-10",
            targets.len(),
            sel.curve.len(),
            sel.epsilon,
            sel.curve.first().map_or(f64::NAN, |c| c.1),
            sel.curve.last().map_or(f64::NAN, |c| c.1),
            drops.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let n = rng.random_range(1..=8);
        let nodes = random_nodes(&mut rng, n, 1.0);
        let family = if trial % 2 == 0 {
            KernelFamily::MaternC0
        } else {
            KernelFamily::Gaussian
        };
        let kernel = KernelModel::new(family, rng.random_range(0.5..3.0)).unwrap();
        let target = UVPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (scaling, psi) = if trial % 3 == 0 {
            (
                Some(random_scaling(&mut rng, n, 0.5)),
                Some([rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]),
            )
        } else {
            (None, None)
        };
        let a = power_function(&kernel, &nodes, scaling.as_ref(), &target, psi).unwrap();
        let b = power_function_det_ratio(&kernel, &nodes, scaling.as_ref(), &target, psi).unwrap();
        worst = worst.max((a - b).abs());
    }
    (
        worst <= 1e-8,
        format!("100 instances, max |Schur − det ratio| = {worst:.2e} (limit 1e-8)"),
    )
}

fn windows_non_increasing(log: &[IterationRecord]) -> Option<usize> {
    log.windows(11)
        .position(|w| w[10].residual > w[0].residual * (1.0 + 1e-12))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // full mask, τ = 1: first iterate is the positive part of the inverse
    let t = 64;
    let truth = render_image(
        &SourceModel::double_footpoint(),
        &ImageGrid::zeros(t, 2.0, (0.0, 0.0)).unwrap(),
    );
    let mut spectrum = vskf_core::fft::forward_image(&truth);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for z in spectrum.data_mut() {
        *z += Complex64::new(rng.random_range(-50.0..50.0), 0.0);
    }
    let spectrum = vskf_core::inversion::hermitian_symmetrize(&spectrum);
    let direct = inverse_to_image(&spectrum);
    let cfg = LandweberConfig {
        pad_side: t,
        output_side: t,
        ..Default::default()
    };
    let one = landweber(
        &spectrum,
        &SupportMask::Full,
        &LandweberConfig {
            max_iterations: 1,
            ..cfg
        },
    )
    .unwrap();
    let scale = direct.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let dev = one
        .image
        .data()
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b.re.max(0.0)).abs())
        .fold(0.0, f64::max)
        / scale;
    let negatives = direct.iter().filter(|z| z.re < 0.0).count();
    ok &= dev <= 1e-10 && negatives > 0;
    notes.push(format!("one-step deviation {dev:.1e} with {negatives} clamped pixels"));
    let full = landweber(&spectrum, &SupportMask::Full, &cfg).unwrap();
    ok &= full.iterations() == 2 && full.log[1].rel_change == 0.0;
    notes.push(format!("stationary after k = {}", full.iterations() - 1));

    // disk support on realistic data: nonnegativity and residual windows
    let mut min_pixel = f64::INFINITY;
    let mut window_breaks = 0;
    let mut iterations = Vec::new();
    for (seed, vsk) in [(0, true), (1, false)] {
        let config = PipelineConfig {
            vsk,
            ..Default::default()
        };
        let out = run_pipeline(&noisy_double(seed), &config).unwrap();
        let log = &out.reconstruction.report.log;
        min_pixel = min_pixel.min(out.reconstruction.image.min());
        if let Some(k) = windows_non_increasing(log) {
            window_breaks += 1;
            notes.push(format!("residual rose over the window starting at k = {}", log[k].k));
        }
        iterations.push(log.len());
    }
    ok &= min_pixel >= 0.0 && window_breaks == 0;
    notes.push(format!(
        "pipeline runs with {iterations:?} iterations: min pixel {min_pixel:.3e}, {window_breaks} window increases"
    ));
    (ok, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let truth = SourceModel::single((0.0, 0.0));
    let data = simulate_visibilities(&truth, &stix(), 0.0, 0, "single").unwrap();
    let start = Instant::now();
    let out = run_pipeline(&data, &PipelineConfig::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let found = extract_sources(&out.reconstruction.image, 1).unwrap();
    let est = found.sources[0];
    let position = est.x_p.0.hypot(est.x_p.1);
    let fwhm_err = (est.fwhm - 11.0).abs() / 11.0;
    let flux_err = (found.total_flux - 1e4).abs() / 1e4;
    let pass = position <= 2.0 && fwhm_err <= 0.2 && flux_err <= 0.2 && elapsed <= 120.0;
    (
        pass,
        format!(
            "{}: position error {position:.3} arcsec (≤ 2), FWHM {:.2} arcsec, error {:.1}% (≤ 20%), total flux {:.1}, error {:.2}% (≤ 20%), {} iterations, {elapsed:.1} s (≤ 120)",
            out.reconstruction.report.algorithm,
            est.fwhm,
            100.0 * fwhm_err,
            found.total_flux,
            100.0 * flux_err,
            out.reconstruction.report.iterations
        ),
    )
}

/// Surface RRMSE of one algorithm. The metric only depends on the
/// interpolation stage, so Landweber is skipped here; seed 0 is re-run
/// through the full pipeline to confirm the values coincide.
fn surface_error(data: &VisibilitySet, truth: &SourceModel, vsk: bool) -> f64 {
    let config = PipelineConfig {
        vsk,
        ..Default::default()
    };
    let (eps, _) = choose_epsilon(data, &config).unwrap();
    let kernel = KernelModel::new(config.family, eps).unwrap();
    let scaling = vsk.then(|| build_pipeline_scaling(data, &config).unwrap());
    let s = interpolate_surface(data, &kernel, scaling.as_ref(), &config.inversion).unwrap();
    surface_rrmse(&s.surface, truth, &s.mask).unwrap()
}

fn criterion_10() -> Outcome {
    let truth = SourceModel::double_footpoint();
    let start = Instant::now();
    let runs: Vec<(f64, f64)> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let data = noisy_double(seed);
            (surface_error(&data, &truth, true), surface_error(&data, &truth, false))
        })
        .collect();
    let data = noisy_double(0);
    let consistent = [(true, runs[0].0), (false, runs[0].1)].iter().all(|&(vsk, expected)| {
        let out = run_pipeline(
            &data,
            &PipelineConfig {
                vsk,
                ..Default::default()
            },
        )
        .unwrap();
        let mask = SupportMask::disk(out.reconstruction.report.support_radius.unwrap()).unwrap();
        surface_rrmse(&out.reconstruction.surface, &truth, &mask).unwrap() == expected
    });
    let elapsed = start.elapsed().as_secs_f64();
    let mean = |f: fn(&(f64, f64)) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    let (vsk, rbf) = (mean(|r| r.0), mean(|r| r.1));
    let wins = runs.iter().filter(|r| r.0 < r.1).count();
    (
        vsk < rbf && consistent && elapsed <= 600.0,
        format!(
            "mean RRMSE Land-VSK {vsk:.4} vs Land-RBF {rbf:.4} over 10 seeds (VSK lower in {wins}/10), noise σ = {NOISE_FRACTION}·|V(0)|, full-pipeline cross-check {}, {elapsed:.0} s (≤ 600)",
            if consistent { "matches" } else { "DIFFERS" }
        ),
    )
}

fn criterion_11() -> Outcome {
    let config = PipelineConfig::default();
    let mut ok = true;
    let mut notes = Vec::new();
    let exact = simulate_visibilities(&SourceModel::double_footpoint(), &stix(), 0.0, 0, "").unwrap();
    for (name, data) in [("noiseless", exact), ("noisy seed 0", noisy_double(0))] {
        let scaling = build_pipeline_scaling(&data, &config).unwrap();
        let kernel = KernelModel::matern(0.01);
        let k = kernel_matrix(&kernel, data.points(), None).unwrap();
        let kv = kernel_matrix(&kernel, data.points(), Some(&scaling)).unwrap();
        let (c, cv) = (condition_number(&k), condition_number(&kv));
        let (s, sv) = (spectral_ratio(&k).unwrap(), spectral_ratio(&kv).unwrap());
        ok &= cv < c && sv > s;
        notes.push(format!(
            "{name}: cond(K) = {c:.3e}, cond(K^Ψ) = {cv:.3e}, S(K) = {s:.4}, S(K^Ψ) = {sv:.4}"
        ));
    }
    (ok, notes.join("; "))
}

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
        })
        .collect()
}

/// `∫∫ I(x) exp(2πi q·x) dx` for one source, in polar coordinates around
/// its peak: composite Gauss-Legendre in radius, trapezoid in angle.
fn quadrature_visibility(x_p: (f64, f64), fwhm: f64, flux: f64, q: UVPoint) -> Complex64 {
    let b = 2.0 * 2f64.ln() / fwhm;
    let a = flux * b * b / (2.0 * PI);
    let (r_max, panels, n_theta) = (40.0 / b, 400, 800);
    let gl = gauss_legendre(12);
    let h = r_max / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for m in 0..n_theta {
        let theta = 2.0 * PI * m as f64 / n_theta as f64;
        let k = 2.0 * PI * (q.u * theta.cos() + q.v * theta.sin());
        let mut radial = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for &(x, w) in &gl {
                let r = mid + 0.5 * h * x;
                radial += Complex64::from_polar(0.5 * h * w * a * (-b * r).exp() * r, k * r);
            }
        }
        total += radial;
    }
    total * (2.0 * PI / n_theta as f64) * Complex64::from_polar(1.0, 2.0 * PI * (q.u * x_p.0 + q.v * x_p.1))
}

fn criterion_12() -> Outcome {
    let sources = [
        ((0.0, 0.0), 11.0, 1e4),
        ((15.0, 15.0), 11.0, 4.88e3),
        ((-7.5, 22.0), 6.0, 3e3),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut qs = vec![
        UVPoint::ORIGIN,
        UVPoint::new(0.25, 0.0),
        UVPoint::new(0.0, -0.25),
        UVPoint::new(0.1, 0.1),
    ];
    while qs.len() < 12 {
        let q = UVPoint::new(rng.random_range(-0.25..0.25), rng.random_range(-0.25..0.25));
        if q.norm() <= 0.25 {
            qs.push(q);
        }
    }
    let worst = sources
        .par_iter()
        .flat_map(|&(x_p, fwhm, flux)| qs.par_iter().map(move |&q| (x_p, fwhm, flux, q)))
        .map(|(x_p, fwhm, flux, q)| {
            let model = SourceModel::new(vec![ExpSource::new(x_p, fwhm, flux).unwrap()]).unwrap();
            let exact = exact_visibility(&model, &q);
            let quad = quadrature_visibility(x_p, fwhm, flux, q);
            (exact - quad).norm() / exact.norm()
        })
        .reduce(|| 0.0, f64::max);
    (
        worst < 1e-6,
        format!(
            "{} source/frequency pairs with q ≤ 0.25, max relative error {worst:.2e} (< 1e-6)",
            sources.len() * qs.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("interpolation exactness", criterion_1),
        ("Hadamard identities", criterion_2),
        ("spectral ratio increase under VSK", criterion_3),
        ("conditioning under the Hadamard hypothesis", criterion_4),
        ("Schur eigenvalue bound", criterion_5),
        ("shape-parameter curve and selection", criterion_6),
        ("power function dual formula", criterion_7),
        ("Landweber contraction and positivity", criterion_8),
        ("end-to-end single source", criterion_9),
        ("VSK advantage in RRMSE", criterion_10),
        ("conditioning direction", criterion_11),
        ("exact visibility vs quadrature", criterion_12),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let status = if pass { "PASS" } else { "FAIL" };
        println!(
            "{status} #{id:<2} {name}: {detail} [{:.1} s]",
            start.elapsed().as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("all selected criteria passed");
        return;
    }
    println!("failed criteria: {failed:?}");
    if std::env::var_os("VSKF_ACCEPTANCE_STRICT").is_some_and(|v| v != "0") {
        std::process::exit(1);
    }

}
