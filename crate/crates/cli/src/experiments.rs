use std::fmt::Write as _;
use std::fs;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use sphmax_core::counterexamples::{
    default_mattila_eps, fixed_time_sharpness, mattila_example, riesz_divergence, stein_example,
};
use sphmax_core::exponents::{region_csv, region_raster, report, Params};
use sphmax_core::measures::{
    self, cantor_measure, dirac, frostman_fit, lebesgue_box, product_measure, radial_power_measure,
    sphere_measure, uniform_ball_sample, DiscreteMeasure, FrostmanOptions,
};
use sphmax_core::norms::{self, certify, growth_rate, opnorm_lower, Family, Operator};
use sphmax_core::operators::{
    default_eps, geometric_t_grid, sphere_l2_norm, KernelSpec, RunManifest, Source,
};
use sphmax_core::spectral::{
    self, annulus_energy_field, decay_fit, measure_fourier, strichartz_energy_field, ComplexField,
    SpectralGrid,
};
use sphmax_core::suite::{run_suite, SuiteOptions};
use sphmax_core::wave3d::{
    blowup_probe, limit_order, wave_from_source, BlowupConfig, BlowupFamily, ThresholdSchedule,
};

use crate::artifacts::Artifacts;
use crate::config::{self, *};
use crate::{Cli, CliError, Command};

fn load<T: DeserializeOwned + Default>(cli: &Cli) -> Result<T, CliError> {
    match &cli.config {
        None => Ok(T::default()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config {
                path: "$".into(),
                msg: format!("cannot read {}: {e}", path.display()),
            })?;
            config::parse(&text, cli.command.name())
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut out = Artifacts::new(&cli.out)?;
    let seed = cli.seed;
    let name = cli.command.name();
    macro_rules! go {
        ($ty:ty, $f:ident) => {{
            let cfg: $ty = load(cli)?;
            let resolved = $f(&cfg, cli, &mut out)?;
            out.finish(name, &cfg, resolved, seed)
        }};
    }
    match cli.command {
        Command::GenMeasure => go!(GenMeasure, gen_measure),
        Command::Fourier => go!(Fourier, fourier),
        Command::Strichartz => go!(Strichartz, strichartz),
        Command::Avg => go!(Avg, avg),
        Command::Maximal => go!(Maximal, maximal),
        Command::Opnorm => go!(Opnorm, opnorm),
        Command::Growth => go!(Growth, growth),
        Command::Exponents => go!(Exponents, exponents),
        Command::Counterexample => go!(Counterexample, counterexample),
        Command::Wave => go!(Wave, wave),
        Command::Suite => {
            let cfg: Suite = load(cli)?;
            let quick = cli.quick || cfg.quick;
            let report = run_suite(&SuiteOptions { quick, seed });
            for o in &report.outcomes {
                println!("{}", o.line());
            }
            out.json("suite.json", &report)?;
            out.write("suite.csv", report.csv())?;
            out.finish(name, &Suite { quick }, json!({ "digest": report.digest }), seed)?;
            if report.passed() {
                Ok(())
            } else {
                let failed: Vec<&str> = report.outcomes.iter().filter(|o| !o.ok()).map(|o| o.id.as_str()).collect();
                Err(CliError::Failed(format!("criteria failed: {}", failed.join(", "))))
            }
        }
    }
}

fn build_measure(spec: &MeasureSpec, seed: u64) -> Result<DiscreteMeasure, CliError> {
    Ok(match spec {
        MeasureSpec::Cantor { ratio, depth } => cantor_measure(*ratio, *depth)?,
        MeasureSpec::Product { factors } => {
            let parts = factors.iter().map(|f| build_measure(f, seed)).collect::<Result<Vec<_>, _>>()?;
            product_measure(&parts)?
        }
        MeasureSpec::RadialPower { d, s, grid_n, log_u } => radial_power_measure(*d, *s, *grid_n, *log_u)?,
        MeasureSpec::Sphere { d, t, n_points } => sphere_measure(*d, *t, *n_points)?,
        MeasureSpec::LebesgueBox { d, lo, hi, cells } => lebesgue_box(*d, *lo, *hi, *cells)?,
        MeasureSpec::Dirac { point } => dirac(point)?,
        MeasureSpec::BallSample { d, radius, n } => uniform_ball_sample(*d, *radius, *n, seed)?,
        MeasureSpec::Translate { measure, shift } => {
            let m = build_measure(measure, seed)?;
            if shift.len() != m.dim() {
                return Err(CliError::Config {
                    path: "shift".into(),
                    msg: format!("{} components for a {}-dimensional measure", shift.len(), m.dim()),
                });
            }
            m.translate(shift)
        }
        MeasureSpec::Dilate { measure, factor } => build_measure(measure, seed)?.dilate(*factor),
        MeasureSpec::File { path } => {
            let bytes = fs::read(path)?;
            if bytes.starts_with(measures::io::MAGIC) {
                measures::io::read_binary(bytes.as_slice())?
            } else {
                let text = String::from_utf8(bytes)
                    .map_err(|_| sphmax_core::Error::Format(format!("{path} is neither JSON nor binary")))?;
                measures::io::from_json(&text)?
            }
        }
    })
}

fn eval_function(spec: &FunctionSpec, mu: &DiscreteMeasure, seed: u64) -> Result<Vec<f64>, CliError> {
    let d = mu.dim();
    let check = |v: &[f64], what: &str| {
        if v.len() == d {
            Ok(())
        } else {
            Err(CliError::Config {
                path: format!("f.{what}"),
                msg: format!("{} components for a {d}-dimensional measure", v.len()),
            })
        }
    };
    Ok(match spec {
        FunctionSpec::One => vec![1.0; mu.len()],
        FunctionSpec::Gaussian { a } => mu.sample(|x| (-a * x.iter().map(|c| c * c).sum::<f64>()).exp()),
        FunctionSpec::Linear { coeffs, offset } => {
            check(coeffs, "coeffs")?;
            mu.sample(|x| offset + x.iter().zip(coeffs).map(|(a, b)| a * b).sum::<f64>())
        }
        FunctionSpec::Cosine { freq } => {
            check(freq, "freq")?;
            mu.sample(|x| (x.iter().zip(freq).map(|(a, b)| a * b).sum::<f64>()).cos())
        }
        FunctionSpec::RandomSigns => {
            use rand_like::SplitMix;
            let mut r = SplitMix(seed);
            (0..mu.len()).map(|_| if r.next() & 1 == 0 { 1.0 } else { -1.0 }).collect()
        }
    })
}

/// `±1` signs need only a tiny deterministic generator.
mod rand_like {
    pub struct SplitMix(pub u64);

    impl SplitMix {
        pub fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^ (z >> 31)
        }
    }
}

fn resolve_grid(spec: Option<GridSpec>, dim: usize) -> Result<SpectralGrid, CliError> {
    Ok(match spec {
        Some(g) => SpectralGrid::new(dim, g.n, g.half_width)?,
        None => SpectralGrid::default_for(dim)?,
    })
}

fn field_csv(field: &ComplexField) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    spectral::io::write_csv(field, &mut buf)?;
    Ok(buf)
}

fn field_bin(field: &ComplexField) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    spectral::io::write_binary(field, &mut buf)?;
    Ok(buf)
}

fn gen_measure(cfg: &GenMeasure, cli: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    let mu = build_measure(&cfg.measure, cli.seed)?;
    out.write("measure.json", measures::io::to_json(&mu)?)?;
    let mut bin = Vec::new();
    measures::io::write_binary(&mu, &mut bin)?;
    out.write("measure.bin", bin)?;
    let mut csv = String::new();
    for k in 0..mu.dim() {
        let _ = write!(csv, "x{},", k + 1);
    }
    csv.push_str("weight\n");
    for (p, w) in mu.atoms().zip(mu.weights()) {
        for c in p {
            let _ = write!(csv, "{c:.17e},");
        }
        let _ = writeln!(csv, "{w:.17e}");
    }
    out.write("atoms.csv", csv)?;
    if let Some(f) = &cfg.frostman {
        let opts = FrostmanOptions { n_probes: f.n_probes, seed: cli.seed, ..FrostmanOptions::default() };
        let rep = frostman_fit(&mu, opts, f.r_min, f.r_max)?;
        out.json("frostman.json", &rep)?;
    }
    Ok(json!({ "atoms": mu.len(), "total_mass": mu.total_mass(), "digest": mu.digest() }))
}

fn fourier(cfg: &Fourier, cli: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    let mu = build_measure(&cfg.measure, cli.seed)?;
    let f = eval_function(&cfg.f, &mu, cli.seed)?;
    let grid = resolve_grid(cfg.grid, mu.dim())?;
    let field = measure_fourier(&f, &mu, &grid)?;
    out.write("fourier.csv", field_csv(&field)?)?;
    out.write("fourier.bin", field_bin(&field)?)?;
    let mut fit = String::from(sphmax_core::FitReport::CSV_HEADER);
    fit.push('\n');
    fit.push_str(&decay_fit(&field, cfg.decay_shells)?.csv_row());
    fit.push('\n');
    out.write("decay.csv", fit)?;
    Ok(json!({ "grid": grid, "measure_digest": mu.digest() }))
}

fn strichartz(cfg: &Strichartz, cli: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    let mu = build_measure(&cfg.measure, cli.seed)?;
    let f = eval_function(&cfg.f, &mu, cli.seed)?;
    let grid = resolve_grid(cfg.grid, mu.dim())?;
    let s = match cfg.s.or(mu.nominal_s()) {
        Some(s) => s,
        None => return Err(CliError::Config { path: "s".into(), msg: "measure has no nominal dimension".into() }),
    };
    let field = measure_fourier(&f, &mu, &grid)?;
    let l2 = norms::lp_norm(&f, &mu, 2.0);
    let mut csv = String::from("r,energy,ratio_to_l2\n");
    for &r in &cfg.radii {
        let e = strichartz_energy_field(&field, r, s)?;
        let _ = writeln!(csv, "{r},{e:.17e},{:.17e}", e / (l2 * l2));
    }
    out.write("strichartz.csv", csv)?;
    Ok(json!({ "grid": grid, "s": s, "l2_norm_sq": l2 * l2 }))
}

fn avg(cfg: &Avg, cli: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    let mu = build_measure(&cfg.measure, cli.seed)?;
    let f = eval_function(&cfg.f, &mu, cli.seed)?;
    let grid = resolve_grid(cfg.grid, mu.dim())?;
    let eps = cfg.eps.unwrap_or_else(|| default_eps(&grid));
    let field = Source::from_measure(&f, &mu, &grid)?.spherical_average(cfg.t, eps)?;
    out.write("avg.csv", field_csv(&field)?)?;
    out.write("avg.bin", field_bin(&field)?)?;
    let run = RunManifest {
        operator: "spherical_average".into(),
        kernel: Some(KernelSpec::sphere(cfg.t).with_eps(eps)),
        parameters: json!({ "t": cfg.t }),
        grid,
        eps,
        measure_digest: mu.digest(),
    };
    Ok(serde_json::to_value(run)?)
}

fn maximal(cfg: &Maximal, cli: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    let mu = build_measure(&cfg.measure, cli.seed)?;
    let f = eval_function(&cfg.f, &mu, cli.seed)?;
    let grid = resolve_grid(cfg.grid, mu.dim())?;
    let eps = default_eps(&grid);
    let t_grid = geometric_t_grid(cfg.t_samples);
    let field = Source::from_measure(&f, &mu, &grid)?.maximal_function(&t_grid, eps)?;
    out.write("maximal.csv", field_csv(&field)?)?;
    let run = RunManifest {
        operator: "maximal_function".into(),
        kernel: None,
        parameters: json!({ "t_grid": t_grid }),
        grid,
        eps,
        measure_digest: mu.digest(),
    };
    Ok(serde_json::to_value(run)?)
}

#[derive(Serialize)]
struct OpnormSummary {
    p: f64,
    value: f64,
    certified: f64,
    family: norms::FamilyTag,
    iterations: usize,
    seed: u64,
    witness_index: usize,
}

fn opnorm(cfg: &Opnorm, cli: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    let mu = build_measure(&cfg.mu, cli.seed)?;
    let nu = match &cfg.nu {
        Some(spec) => build_measure(spec, cli.seed)?,
        None => mu.clone(),
    };
    let grid = resolve_grid(cfg.grid, mu.dim())?;
    let family = match cfg.family {
        FamilyChoice::RandomAtoms => Family::RandomAtoms,
        FamilyChoice::Bumps => Family::Bumps,
        FamilyChoice::PowerIteration => Family::PowerIteration,
    };
    let kernel = match cfg.kernel {
        KernelChoice::Identity => None,
        KernelChoice::Sphere { t } => Some(KernelSpec::sphere(t)),
        KernelChoice::Lowpass { j } => Some(KernelSpec::lowpass(j)),
        KernelChoice::Riesz { alpha } => Some(KernelSpec::riesz(alpha)),
        KernelChoice::TruncatedRiesz { alpha } => Some(KernelSpec::truncated_riesz(alpha)),
    };
    let identity;
    let conv;
    let op: &dyn Operator = match &kernel {
        None => {
            identity = norms::Identity { mu: &mu };
            &identity
        }
        Some(k) => {
            conv = norms::Convolution::new(k, &mu, &nu, grid)?;
            &conv
        }
    };
    let est = opnorm_lower(op, cfg.p, &family, cli.seed)?;
    let certified = certify(op, &est)?;
    out.write("opnorm.csv", est.csv())?;
    out.json(
        "opnorm.json",
        &OpnormSummary {
            p: est.p,
            value: est.value,
            certified,
            family: est.family,
            iterations: est.iterations,
            seed: est.seed,
            witness_index: est.witness_index,
        },
    )?;
    Ok(json!({ "grid": grid, "kernel": kernel, "mu_digest": mu.digest(), "nu_digest": nu.digest() }))
}

fn growth(cfg: &Growth, cli: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    let mu = build_measure(&cfg.measure, cli.seed)?;
    let f = eval_function(&cfg.f, &mu, cli.seed)?;
    let grid = resolve_grid(cfg.grid, mu.dim())?;
    let field = measure_fourier(&f, &mu, &grid)?;
    let values = cfg
        .levels
        .iter()
        .map(|&j| match cfg.quantity {
            GrowthQuantity::SphereL2 => sphere_l2_norm(&field, 2f64.powi(-(j as i32))),
            GrowthQuantity::AnnulusEnergy => annulus_energy_field(&field, j),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let js: Vec<i64> = cfg.levels.iter().map(|j| *j as i64).collect();
    let fit = growth_rate(&js, &values)?;
    let mut csv = String::from("j,value\n");
    for (j, v) in js.iter().zip(&values) {
        let _ = writeln!(csv, "{j},{v:.17e}");
    }
    out.write("growth.csv", csv)?;
    out.json("growth_fit.json", &fit)?;
    Ok(json!({ "grid": grid, "measure_digest": mu.digest() }))
}

fn exponents(cfg: &Exponents, _: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    let params = Params { d: cfg.d, s_mu: cfg.s_mu, s_nu: cfg.s_nu, p: cfg.p, alpha: cfg.alpha, p_f: cfg.p_f };
    out.json("exponents.json", &report(&params)?)?;
    if let Some(r) = &cfg.region {
        let cells = region_raster(cfg.d, r.axes, r.nx, r.ny)?;
        out.write("region.csv", region_csv(r.axes, &cells))?;
    }
    Ok(json!({}))
}

fn counterexample(cfg: &Counterexample, _: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    match &cfg.construction {
        Construction::Stein { d, s, p } => {
            let r = stein_example(*d, *s, *p)?;
            for (k, probe) in r.probes.iter().enumerate() {
                out.write(&format!("divergence_{k}.csv"), probe.csv())?;
            }
            out.json("counterexample.json", &r)?;
        }
        Construction::FixedTime { d, p } => {
            let r = fixed_time_sharpness(*d, *p)?;
            out.write("divergence_0.csv", r.probe.csv())?;
            out.json("counterexample.json", &r)?;
        }
        Construction::Riesz { d, s, alpha, levels } => {
            let r = riesz_divergence(*d, *s, *alpha, *levels)?;
            out.write("divergence_0.csv", r.csv())?;
            out.json("counterexample.json", &r)?;
        }
        Construction::Mattila { d, alpha, beta, p, eps } => {
            let eps = eps.clone().unwrap_or_else(default_mattila_eps);
            let r = mattila_example(*d, *alpha, *beta, *p, &eps)?;
            out.write("annulus.csv", r.csv())?;
            out.json("counterexample.json", &r)?;
        }
    }
    Ok(json!({}))
}

fn family_of(d: &Density) -> BlowupFamily {
    match d {
        Density::SmoothBump => BlowupFamily::SmoothBump,
        Density::FixedTimeSharpness => BlowupFamily::FixedTimeSharpness,
        Density::Ball { radius } => {
            let r2 = radius * radius;
            BlowupFamily::Custom {
                label: format!("ball_{radius}"),
                density: std::sync::Arc::new(move |x: &[f64]| {
                    (x.iter().map(|v| v * v).sum::<f64>() < r2) as u8 as f64
                }),
                p: None,
            }
        }
    }
}

fn wave(cfg: &Wave, _: &Cli, out: &mut Artifacts) -> Result<serde_json::Value, CliError> {
    match &cfg.run {
        WaveTask::Solution { density, grid, t } => {
            let grid = resolve_grid(Some(*grid), 3)?;
            let dens = family_of(density).sample(&grid);
            let source = Source::from_density(&grid, &dens)?;
            let eps = default_eps(&grid);
            let u = wave_from_source(&source, *t, eps)?;
            let mut slice = Vec::new();
            u.write_slice_csv(grid.n_per_axis() / 2, &mut slice)?;
            out.write("wave_slice.csv", slice)?;
            let mut bin = Vec::new();
            u.write_binary(&mut bin)?;
            out.write("wave.bin", bin)?;
            Ok(json!({ "grid": grid, "eps": eps, "max_u": u.max() }))
        }
        WaveTask::Limit { density, grid, times } => {
            let grid = resolve_grid(Some(*grid), 3)?;
            let dens = family_of(density).sample(&grid);
            let eps = default_eps(&grid);
            let r = limit_order(&grid, &dens, times, eps)?;
            let mut csv = String::from("t,error,order\n");
            for (k, (t, e)) in r.times.iter().zip(&r.errors).enumerate() {
                let order = if k == 0 { String::new() } else { format!("{:.17e}", r.orders[k - 1]) };
                let _ = writeln!(csv, "{t},{e:.17e},{order}");
            }
            out.write("limit.csv", csv)?;
            out.json("limit.json", &r)?;
            Ok(json!({ "grid": grid, "eps": eps }))
        }
        WaveTask::Blowup { density, t, box_half_width, refinements, thresholds, eps_cells, stability } => {
            let config = BlowupConfig {
                t: *t,
                box_half_width: *box_half_width,
                refinements: refinements.clone(),
                thresholds: match thresholds {
                    Thresholds::Absolute { values } => ThresholdSchedule::Absolute { values: values.clone() },
                    Thresholds::RelativeToMax { fraction } => ThresholdSchedule::RelativeToMax { fraction: *fraction },
                },
                eps_cells: *eps_cells,
                stability: *stability,
            };
            let r = blowup_probe(&family_of(density), &config)?;
            let mut csv = String::from("n,spacing,threshold,max_u,boxes_1,boxes_2,boxes_4,local_estimate\n");
            for l in &r.levels {
                let _ = write!(csv, "{},{:.17e},{:.17e},{:.17e}", l.n, l.spacing, l.threshold, l.max_u);
                for c in &l.box_counts {
                    let _ = write!(csv, ",{c}");
                }
                let _ = writeln!(csv, ",{:.17e}", l.local_estimate);
            }
            out.write("blowup.csv", csv)?;
            out.json("blowup.json", &r)?;
            Ok(json!({ "blowup_config": config }))
        }
    }
}
