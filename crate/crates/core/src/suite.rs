//! The acceptance battery: one routine per criterion, each returning its
//! measured values and a verdict. The CLI `suite` subcommand and the
//! `acceptance` test target both run [`run_suite`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::counterexamples::{default_mattila_eps, mattila_example, stein_example};
use crate::error::Result;
use crate::exponents::{blowup_dim_fixed_time, eps_p, maximal_interval, CaseLabel};
use crate::measures::{
    cantor_measure, product_measure, radial_power_measure, sphere_measure, uniform_ball_sample,
    DiscreteMeasure,
};
use crate::norms::growth_rate;
use crate::operators::{default_eps, direct_sum, riesz_row_sum, sphere_l2_norm, KernelSpec, Source};
use crate::spectral::{
    decay_fit, littlewood_paley, measure_fourier, ComplexField, CutoffSpec, FieldDomain, SpectralGrid,
};
use crate::wave3d::{blowup_probe, limit_order, BlowupConfig, BlowupFamily};

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    /// Only the numbered criteria; otherwise the extended sweeps run too.
    pub quick: bool,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { quick: true, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub values: BTreeMap<String, f64>,
    pub detail: String,
    /// Wall-clock budget in seconds; `None` when the criterion sets none.
    pub budget: Option<f64>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl Outcome {
    fn new(id: &str, name: &str, budget: Option<f64>) -> Self {
        Outcome {
            id: id.into(),
            name: name.into(),
            passed: true,
            values: BTreeMap::new(),
            detail: String::new(),
            budget,
            elapsed: Duration::ZERO,
        }
    }

    fn record(&mut self, key: impl Into<String>, v: f64) {
        self.values.insert(key.into(), v);
    }

    fn require(&mut self, ok: bool, what: impl AsRef<str>) {
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(what.as_ref());
        }
    }

    fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.elapsed.as_secs_f64() <= b)
    }

    /// One status line, e.g. `PASS  [3] dyadic sphere scaling  slope=0.436381  (0.47 s of 120 s)`.
    pub fn line(&self) -> String {
        let ok = self.passed && self.within_budget();
        let mut s = format!("{}  [{}] {}", if ok { "PASS" } else { "FAIL" }, self.id, self.name);
        for (k, v) in &self.values {
            if *v != 0.0 && v.abs() < 1e-3 {
                let _ = write!(s, "  {k}={v:.3e}");
            } else {
                let _ = write!(s, "  {k}={v:.6}");
            }
        }
        let _ = write!(s, "  ({:.2} s", self.elapsed.as_secs_f64());
        if let Some(b) = self.budget {
            let _ = write!(s, " of {b} s");
        }
        s.push(')');
        if !self.detail.is_empty() {
            let _ = write!(s, "  {}", self.detail);
        }
        s
    }

    pub fn ok(&self) -> bool {
        self.passed && self.within_budget()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub quick: bool,
    pub seed: u64,
    pub outcomes: Vec<Outcome>,
    /// SHA-256 of the serialized numeric outcomes of the first pass.
    pub digest: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(Outcome::ok)
    }

    /// RFC 4180 table with one row per recorded value.
    pub fn csv(&self) -> String {
        let mut out = String::from("id,name,passed,key,value\n");
        for o in &self.outcomes {
            for (k, v) in &o.values {
                let _ = writeln!(out, "{},\"{}\",{},{},{:.17e}", o.id, o.name, o.passed, k, v);
            }
        }
        out
    }
}

fn timed(f: impl FnOnce() -> Result<Outcome>, id: &str, name: &str, budget: Option<f64>) -> Outcome {
    let start = Instant::now();
    let mut o = match f() {
        Ok(o) => o,
        Err(e) => {
            let mut o = Outcome::new(id, name, budget);
            o.require(false, format!("error: {e}"));
            o
        }
    };
    o.elapsed = start.elapsed();
    o
}

/// Numbered criteria 1 to 9, plus the extended sweeps unless `quick`.
pub fn run_battery(opts: &SuiteOptions) -> Vec<Outcome> {
    type Case = (&'static str, &'static str, Option<f64>, fn(&SuiteOptions) -> Result<Outcome>);
    let mut cases: Vec<Case> = vec![
        ("1", "exponent special cases", Some(1.0), c1_special_cases),
        ("2", "case iii membership", Some(5.0), c2_case_iii),
        ("3", "dyadic sphere scaling", Some(120.0), c3_scaling),
        ("4", "riesz row-sum threshold", Some(30.0), c4_row_sum),
        ("5", "fft vs direct quadrature", Some(60.0), c5_oracle),
        ("6", "spectral hygiene", Some(60.0), c6_hygiene),
        ("7", "mattila annulus exponent", Some(60.0), c7_mattila),
        ("8", "stein extremizer", Some(30.0), c8_stein),
        ("9", "wave limit and blowup", Some(180.0), c9_wave),
    ];
    if !opts.quick {
        cases.push(("x1", "stein extremizer d=3", None, x1_stein3));
        cases.push(("x2", "mattila shipped sets", None, x2_mattila_sets));
    }
    cases
        .into_iter()
        .map(|(id, name, budget, f)| {
            timed(
                || {
                    let mut o = f(opts)?;
                    o.id = id.into();
                    o.name = name.into();
                    o.budget = budget;
                    Ok(o)
                },
                id,
                name,
                budget,
            )
        })
        .collect()
}

fn digest(outcomes: &[Outcome]) -> String {
    let text = serde_json::to_string(outcomes).expect("outcomes serialize");
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    format!("{:x}", h.finalize())
}

/// Runs the battery twice and adds criterion 10, which compares the digests
/// of the two passes.
pub fn run_suite(opts: &SuiteOptions) -> SuiteReport {
    let mut outcomes = run_battery(opts);
    let first = digest(&outcomes);
    let start = Instant::now();
    let second = digest(&run_battery(opts));
    let mut o = Outcome::new("10", "determinism", None);
    o.require(first == second, format!("digests differ: {first} vs {second}"));
    o.elapsed = start.elapsed();
    outcomes.push(o);
    SuiteReport { quick: opts.quick, seed: opts.seed, outcomes, digest: first }
}

fn blank() -> Outcome {
    Outcome::new("", "", None)
}

const EXACT: f64 = 1e-12;

fn c1_special_cases(_: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    let i = maximal_interval(3, 3.0, 3.0);
    o.require(
        i.case_label == CaseLabel::I && (i.lo - 1.5).abs() <= EXACT && i.hi == f64::INFINITY,
        format!("d=3 s=3: {i:?}"),
    );
    o.record("d3_lo", i.lo);
    let mut worst: f64 = 0.0;
    for d in 2..=6u32 {
        for k in 1..=9 {
            // case i with s_nu = d needs s_mu > 2
            let s = 2.0 + (d as f64 - 2.0) * k as f64 / 10.0 + 0.05;
            if s > d as f64 {
                continue;
            }
            let i = maximal_interval(d, s, d as f64);
            o.require(i.case_label == CaseLabel::I, format!("d={d} s={s} not case i"));
            worst = worst.max((i.lo - s / (s - 1.0)).abs());
        }
    }
    o.require(worst <= EXACT, format!("left endpoint off by {worst}"));
    o.record("left_endpoint_err", worst);
    let s = 1.95;
    let i = maximal_interval(2, s, s);
    let (lo, hi) = (1.0 / (2.0 * (s - 1.75)), 1.0 / (2.0 * (2.0 - s)));
    o.require(
        i.case_label == CaseLabel::Iii && (i.lo - lo).abs() <= EXACT * lo && (i.hi - hi).abs() <= EXACT * hi,
        format!("d=2 s=1.95: {i:?}"),
    );
    o.record("d2_lo", i.lo);
    o.record("d2_hi", i.hi);
    let i = maximal_interval(3, 2.9, 2.1);
    o.require(
        i.case_label == CaseLabel::Ii && i.lo == 2.0 && i.hi == 4.0 && i.lo_open && !i.hi_open,
        format!("case ii: {i:?}"),
    );
    for d in 2..=6u32 {
        let df = d as f64;
        let b = blowup_dim_fixed_time(d, df / (df - 1.0))?;
        o.require((b - (df - 1.0)).abs() <= EXACT, format!("d={d}: blowup bound {b}"));
    }
    let p: f64 = 4.0;
    let e = eps_p(p)?;
    let (upper, lower) = (1.0 / (2.0 * p), 0.5 * (0.5 - 1.0 / p));
    o.require(
        (e - 0.125).abs() <= EXACT && (upper - 0.125).abs() <= EXACT && (lower - 0.125).abs() <= EXACT,
        format!("eps(4) = {e}"),
    );
    o.record("eps4", e);
    Ok(o)
}

fn c2_case_iii(opts: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x2);
    let (mut draws, mut violations, mut tries) = (0usize, 0usize, 0usize);
    while draws < 10_000 && tries < 100_000_000 {
        tries += 1;
        let d = rng.gen_range(2..=6u32);
        let df = d as f64;
        // outside the case iii strip the draw is rejected
        let s_mu = rng.gen_range(df - 0.5..=df);
        let s_nu = rng.gen_range(0.0..=df);
        let i = maximal_interval(d, s_mu, s_nu);
        if i.case_label != CaseLabel::Iii {
            continue;
        }
        draws += 1;
        if i.contains(2.0) || !i.contains(4.0) {
            violations += 1;
        }
    }
    o.require(draws == 10_000, format!("only {draws} admissible draws"));
    o.require(violations == 0, format!("{violations} violations"));
    o.record("draws", draws as f64);
    o.record("violations", violations as f64);
    Ok(o)
}

/// `cantor(1/4, k)²` centered at the origin.
fn planar_cantor(depth: u32) -> Result<DiscreteMeasure> {
    let c = cantor_measure(0.25, depth)?;
    Ok(product_measure(&[c.clone(), c])?.translate(&[-0.5, -0.5]))
}

fn c3_scaling(_: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    let mu = planar_cantor(8)?;
    let grid = SpectralGrid::new(2, 1024, 1.0)?;
    let fhat = measure_fourier(&vec![1.0; mu.len()], &mu, &grid)?;
    let js: Vec<i64> = (2..=7).collect();
    let norms = js
        .iter()
        .map(|j| sphere_l2_norm(&fhat, 2f64.powi(-(*j as i32))))
        .collect::<Result<Vec<_>>>()?;
    let fit = growth_rate(&js, &norms)?;
    o.record("slope", fit.slope);
    o.require(fit.slope >= 0.35, format!("slope {} below 0.35", fit.slope));
    Ok(o)
}

fn c4_row_sum(_: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    let mu = planar_cantor(10)?;
    let x = mu.atom(0).to_vec();
    for (alpha, key, want_below) in [(1.2, "ratio_alpha_1.2", true), (0.8, "ratio_alpha_0.8", false)] {
        let r = riesz_row_sum(&mu, alpha, &x, 18);
        let ratio = r.level_ratio.unwrap_or(f64::NAN);
        o.record(key, ratio);
        let ok = if want_below { ratio < 1.0 } else { ratio > 1.0 };
        o.require(ok, format!("alpha={alpha}: ratio {ratio}"));
    }
    Ok(o)
}

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// `A_t f` through the FFT path against the mollified-kernel direct sum at
/// every `stride`-th grid point along each axis.
fn fft_vs_direct(f: &[f64], mu: &DiscreteMeasure, t: f64, grid: &SpectralGrid, stride: usize) -> Result<f64> {
    let eps = default_eps(grid);
    let fast = Source::from_measure(f, mu, grid)?.spherical_average(t, eps)?.real_part();
    let n = grid.n_per_axis();
    let idx: Vec<usize> = (0..grid.len())
        .filter(|i| {
            let m = grid.multi_index(*i);
            m[..grid.dim()].iter().all(|k| k % stride == 0)
        })
        .collect();
    let points: Vec<Vec<f64>> = idx.iter().map(|i| grid.point(*i)[..grid.dim()].to_vec()).collect();
    let profile = KernelSpec::sphere(t).spatial_profile(grid.dim(), eps)?;
    let slow = direct_sum(&profile, f, mu, &points);
    let fast: Vec<f64> = idx.iter().map(|i| fast[*i]).collect();
    debug_assert!(n.is_multiple_of(stride));
    Ok(relative_l2(&fast, &slow))
}

/// `A_t` of a Gaussian under Lebesgue measure, against the closed form of
/// the mollified spherical mean.
fn gaussian_fixture() -> Result<f64> {
    let grid = SpectralGrid::new(3, 128, 2.0)?;
    let a = 24.0;
    let t = 0.3;
    let density = grid.sample_space(|x| {
        let v = (-a * x.iter().map(|c| c * c).sum::<f64>()).exp();
        if v > 1e-12 {
            v
        } else {
            0.0
        }
    });
    let eps = default_eps(&grid);
    let fast = Source::from_density(&grid, &density)?.spherical_average(t, eps)?.real_part();
    let b = PI / (eps * eps);
    let c = a * b / (a + b);
    let amp = (b / (a + b)).powf(1.5);
    let exact: Vec<f64> = (0..grid.len())
        .map(|i| {
            let r = grid.point(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            let mean = if r == 0.0 {
                (-c * t * t).exp()
            } else {
                let z = 2.0 * c * t * r;
                (-c * (r - t) * (r - t)).exp() * -(-2.0 * z).exp_m1() / (2.0 * z)
            };
            amp * mean
        })
        .collect();
    Ok(relative_l2(&fast, &exact))
}

fn c5_oracle(opts: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    let g2 = SpectralGrid::new(2, 256, 2.0)?;
    let g3 = SpectralGrid::new(3, 64, 2.0)?;
    let cantor = planar_cantor(6)?;
    let circle = sphere_measure(2, 0.5, 512)?;
    let ball = uniform_ball_sample(3, 0.5, 2000, opts.seed ^ 0x5)?;
    let radial = radial_power_measure(2, 1.5, 128, None)?.dilate(0.5);
    type Fixture<'a> = (&'a str, Box<dyn Fn() -> Result<f64> + 'a>);
    let fixtures: [Fixture; 5] = [
        ("gaussian_closed_form", Box::new(gaussian_fixture)),
        ("cantor_product", Box::new(|| fft_vs_direct(&vec![1.0; cantor.len()], &cantor, 0.5, &g2, 4))),
        ("circle_linear_f", Box::new(|| fft_vs_direct(&circle.sample(|x| x[0] + 2.0), &circle, 0.25, &g2, 4))),
        ("ball_cosine_f", Box::new(|| fft_vs_direct(&ball.sample(|x| (3.0 * x[0]).cos()), &ball, 0.5, &g3, 2))),
        ("radial_power", Box::new(|| fft_vs_direct(&radial.sample(|x| 1.0 + x[1]), &radial, 0.5, &g2, 4))),
    ];
    for (name, run) in fixtures.iter() {
        let e = run()?;
        o.record(*name, e);
        o.require(e <= 1e-3, format!("{name}: relative error {e}"));
    }
    Ok(o)
}

fn c6_hygiene(opts: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    let mut worst_pu: f64 = 0.0;
    for (dim, n) in [(2, 1024), (3, 128)] {
        let g = SpectralGrid::new(dim, n, 2.0)?;
        let ones = ComplexField::new(g, vec![Complex64::new(1.0, 0.0); g.len()], FieldDomain::Frequency)?;
        let top = crate::spectral::finest_level(&g);
        let mut acc = vec![0.0; g.len()];
        for j in 0..=top {
            let p = littlewood_paley(&ones, j, &CutoffSpec::littlewood_paley())?;
            acc.iter_mut().zip(&p.values).for_each(|(a, v)| *a += v.re);
        }
        worst_pu = acc.iter().fold(worst_pu, |w, v| w.max((v - 1.0).abs()));
    }
    o.record("partition_residual", worst_pu);
    o.require(worst_pu <= 1e-12, format!("partition residual {worst_pu}"));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6);
    let mut worst_rt: f64 = 0.0;
    for (dim, n) in [(2, 256), (3, 64)] {
        let g = SpectralGrid::new(dim, n, 2.0)?;
        let vals: Vec<Complex64> = (0..g.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let field = ComplexField::new(g, vals, FieldDomain::Space)?;
        let freq = field.to_frequency();
        let back = freq.to_space();
        let scale = field.l2_norm();
        let diff = back.added(&field.scaled(Complex64::new(-1.0, 0.0))).l2_norm() / scale;
        let plancherel = (freq.l2_norm() - scale).abs() / scale;
        worst_rt = worst_rt.max(diff).max(plancherel);
    }
    o.record("parseval_residual", worst_rt);
    o.require(worst_rt <= 1e-10, format!("round trip residual {worst_rt}"));

    let circle = sphere_measure(2, 1.0, 4096)?;
    let g2 = SpectralGrid::new(2, 256, 2.0)?;
    let a2 = decay_fit(&measure_fourier(&vec![1.0; circle.len()], &circle, &g2)?, 3)?.slope;
    let sphere = sphere_measure(3, 0.5, 50_000)?;
    let g3 = SpectralGrid::new(3, 128, 1.0)?;
    let a3 = decay_fit(&measure_fourier(&vec![1.0; sphere.len()], &sphere, &g3)?, 3)?.slope;
    o.record("decay_d2", a2);
    o.record("decay_d3", a3);
    o.require((a2 - 0.5).abs() <= 0.1, format!("circle decay {a2}"));
    o.require((a3 - 1.0).abs() <= 0.1, format!("sphere decay {a3}"));
    Ok(o)
}

fn c7_mattila(_: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    let r = mattila_example(2, 1.0, 0.5, 4.0, &default_mattila_eps())?;
    o.record("fitted", r.fit.slope);
    o.record("predicted", r.predicted);
    o.require((r.fit.slope - 0.875).abs() <= 0.1, format!("fitted {}", r.fit.slope));
    Ok(o)
}

fn c8_stein(_: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    for (p, want) in [(2.5, true), (3.0, true), (3.5, false)] {
        let r = stein_example(2, 1.5, p)?;
        o.record(format!("finite_p{p}"), r.lp_norm_finite as u8 as f64);
        o.require(r.lp_norm_finite == want, format!("p={p}: finite={}", r.lp_norm_finite));
        if p == 3.5 {
            o.record("divergence_slope", r.divergence_slope);
            o.require(r.divergence_slope > 0.0, format!("slope {}", r.divergence_slope));
        }
    }
    Ok(o)
}

fn c9_wave(_: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    let grid = SpectralGrid::new(3, 128, 2.0)?;
    let dens = BlowupFamily::SmoothBump.sample(&grid);
    let lim = limit_order(&grid, &dens, &[0.2, 0.1, 0.05], default_eps(&grid))?;
    let order = lim.min_order();
    o.record("limit_order", order);
    o.require(order >= 1.7, format!("order {order}"));
    let r = blowup_probe(&BlowupFamily::FixedTimeSharpness, &BlowupConfig::default())?;
    o.record("boxdim", r.boxdim_estimate);
    let compare = r.compare.unwrap_or(f64::NAN);
    o.record("bound", compare);
    o.require(!r.inconclusive, "blowup estimate inconclusive");
    o.require((r.boxdim_estimate - 2.0).abs() <= 0.25, format!("boxdim {}", r.boxdim_estimate));
    o.require((compare - 2.0).abs() <= EXACT, format!("bound {compare}"));
    Ok(o)
}

fn x1_stein3(_: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    // s = 2.5 in d = 3: the norm is finite exactly for p ≤ s/(s−1) = 5/3
    for (p, want) in [(1.5, true), (5.0 / 3.0, true), (1.8, false)] {
        let r = stein_example(3, 2.5, p)?;
        o.record(format!("finite_p{p:.4}"), r.lp_norm_finite as u8 as f64);
        o.require(r.lp_norm_finite == want, format!("p={p}: finite={}", r.lp_norm_finite));
        o.require(r.divergence_slope > 0.0, format!("p={p}: slope {}", r.divergence_slope));
    }
    Ok(o)
}

/// Parameter sets where the tangential box dominates the annulus mass.
pub const MATTILA_SHIPPED: [(f64, f64, f64); 6] =
    [(1.0, 0.5, 4.0), (1.0, 0.0, 4.0), (1.0, 0.5, 2.0), (0.5, 0.5, 3.0), (0.0, 0.5, 4.0), (1.0, 1.0, 1.5)];

fn x2_mattila_sets(_: &SuiteOptions) -> Result<Outcome> {
    let mut o = blank();
    for (alpha, beta, p) in MATTILA_SHIPPED {
        let r = mattila_example(2, alpha, beta, p, &default_mattila_eps())?;
        let gap = (r.fit.slope - r.predicted).abs();
        o.record(format!("gap_a{alpha}_b{beta}_p{p}"), gap);
        o.require(gap <= 0.1, format!("alpha={alpha} beta={beta} p={p}: gap {gap}"));
    }
    Ok(o)
}
