//! Executable versions of the negative results: the radial extremizer for
//! the maximal operator, the Cantor-product annulus construction, the
//! divergent Riesz row sum and the fixed-time sharpness example.
//!
//! Infinity is operationalized. A nonnegative series is declared convergent
//! when its last partial-sum increment is at most [`CAUCHY_TOLERANCE`] times
//! the partial sum, and divergent when its partial sums keep growing.

use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::exponents::blowup_dim_fixed_time;
use crate::fit::{least_squares, log2_fit, FitReport};
use crate::measures::{ball_masses, cantor_measure, product_measure};
use crate::special::{gauss_legendre, sphere_area};

pub const FINITENESS_SHELLS: usize = 40;
pub const CAUCHY_TOLERANCE: f64 = 1e-6;
/// Number of trailing levels used by every slope fit.
pub const SLOPE_WINDOW: usize = 10;
pub const DIVERGENCE_LEVELS: usize = 40;
/// Probe radii `|x|` for the radial extremizer.
pub const STEIN_PROBES: [f64; 2] = [0.125, 0.0625];
/// Relative growth rate of partial sums above which a series is divergent.
pub const GROWTH_THRESHOLD: f64 = 1e-3;

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln ∫_a^b exp(g)` for convex `g`. The interval is split in the middle and
/// each half is graded geometrically toward its outer endpoint.
fn log_integral_convex(g: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre(8);
    let m = g(a).max(g(b));
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut total = 0.0;
    for (end, dir) in [(a, 1.0), (b, -1.0)] {
        let dh = half * 1e-7;
        let slope = ((g(end + dir * dh) - g(end)) / dh).abs();
        let h0 = (half / 8.0).min(1.0 / slope.max(1e-300));
        let mut lo = 0.0;
        let mut hi = h0;
        loop {
            let hi_c = hi.min(half);
            let (c, r) = (0.5 * (lo + hi_c), 0.5 * (hi_c - lo));
            let mut s = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                let v = end + dir * (c + r * xi);
                s += wi * (g(v) - m).exp();
            }
            total += s * r;
            if hi_c >= half {
                break;
            }
            // the integrand decays away from the endpoint; stop once negligible
            if g(end + dir * hi_c) - m < -745.0 && g(mid) <= g(end + dir * hi_c) {
                break;
            }
            lo = hi_c;
            hi *= 2.0;
        }
    }
    m + total.ln()
}

/// Shell-by-shell verdict on the finiteness of a radial L^p integral.
#[derive(Debug, Clone, Serialize)]
pub struct FinitenessReport {
    /// Exponent γ in the shell integrand `e^{−γv} v^{−b}`, `v = ln(1/|x|)`.
    pub gamma: f64,
    pub log_power: f64,
    /// Natural logarithms of the partial sums over shells `v ∈ [2^k ln 2, 2^{k+1} ln 2]`.
    pub log_partial_sums: Vec<f64>,
    /// Last increment divided by the last partial sum.
    pub last_increment_ratio: f64,
    pub finite: bool,
}

/// Decides whether `∫_{|x|<1/2} |x|^a ln^{−b}(1/|x|) dx` over `R^d` is finite.
pub fn radial_finiteness(d: usize, a: f64, b: f64, shells: usize) -> FinitenessReport {
    let gamma = a + d as f64;
    let area = sphere_area(d).ln();
    let mut acc = f64::NEG_INFINITY;
    let mut log_partial_sums = Vec::with_capacity(shells);
    let mut last = f64::NEG_INFINITY;
    for k in 0..shells {
        let lo = LN_2 * 2f64.powi(k as i32);
        let s = area + log_integral_convex(|v| -gamma * v - b * v.ln(), lo, 2.0 * lo);
        acc = log_add(acc, s);
        last = s;
        log_partial_sums.push(acc);
    }
    let last_increment_ratio = (last - acc).exp();
    FinitenessReport {
        gamma,
        log_power: b,
        log_partial_sums,
        last_increment_ratio,
        finite: last_increment_ratio <= CAUCHY_TOLERANCE,
    }
}

/// Partial sums of a truncated spherical integral at one probe.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceProbe {
    pub radius: f64,
    pub partial_sums: Vec<f64>,
    /// Least-squares slope of the partial sums against `ln K` over the last
    /// [`SLOPE_WINDOW`] levels.
    pub slope: f64,
    pub divergent: bool,
}

impl DivergenceProbe {
    pub fn csv(&self) -> String {
        let mut out = String::from("level,partial_sum,increment\n");
        let mut prev = 0.0;
        for (k, s) in self.partial_sums.iter().enumerate() {
            let _ = writeln!(out, "{},{:.17e},{:.17e}", k + 1, s, s - prev);
            prev = *s;
        }
        out
    }
}

fn growth_slope(partial_sums: &[f64]) -> Result<(f64, bool)> {
    let n = partial_sums.len();
    let start = n.saturating_sub(SLOPE_WINDOW);
    let xs: Vec<f64> = (start..n).map(|k| ((k + 1) as f64).ln()).collect();
    let fit = least_squares(&xs, &partial_sums[start..])?;
    let last = partial_sums[n - 1].abs().max(f64::MIN_POSITIVE);
    Ok((fit.slope, fit.slope > GROWTH_THRESHOLD * last))
}

/// `∫ φ(|x − r y|) dσ(y)` with `φ(ρ) = ρ^{1−d}/ln(1/ρ)`, `|x| = r`, over the
/// caps `θ ∈ [θ_max 2^{−k−1}, θ_max 2^{−k}]` around the direction of `x`.
fn spherical_probe(d: usize, radius: f64, theta_max: f64, levels: usize) -> Result<DivergenceProbe> {
    let (x, w) = gauss_legendre(16);
    let norm = sphere_area(d - 1) / sphere_area(d);
    let integrand = |theta: f64| {
        let rho = radius * 2.0 * (0.5 * theta).sin();
        let phi = rho.powi(1 - d as i32) / (1.0 / rho).ln();
        phi * norm * theta.sin().powi(d as i32 - 2)
    };
    let mut partial_sums = Vec::with_capacity(levels);
    let mut acc = 0.0;
    for k in 0..levels {
        let hi = theta_max * 0.5f64.powi(k as i32);
        let lo = 0.5 * hi;
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * integrand(c + r * xi)).sum();
        acc += s * r;
        partial_sums.push(acc);
    }
    let (slope, divergent) = growth_slope(&partial_sums)?;
    Ok(DivergenceProbe { radius, partial_sums, slope, divergent })
}

#[derive(Debug, Clone, Serialize)]
pub struct SteinReport {
    pub d: usize,
    pub s: f64,
    pub p: f64,
    pub lp_norm_finite: bool,
    pub finiteness: FinitenessReport,
    /// Smallest slope over the probes.
    pub divergence_slope: f64,
    pub probes: Vec<DivergenceProbe>,
}

/// Radial extremizer `f = |x|^{1−s} ln^{−1}(1/|x|)` on the half ball against
/// `dμ = |x|^{s−d} dx`.
pub fn stein_example(d: usize, s: f64, p: f64) -> Result<SteinReport> {
    if d < 2 {
        return param(format!("dimension must be at least 2, got {d}"));
    }
    if !(s > 0.0 && s <= d as f64) {
        return param(format!("s = {s} outside (0, {d}]"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return param(format!("p = {p} must be a finite exponent above 1"));
    }
    let a = p * (1.0 - s) - d as f64 + s;
    let finiteness = radial_finiteness(d, a, p, FINITENESS_SHELLS);
    let probes = STEIN_PROBES
        .iter()
        .map(|&r| spherical_probe(d, r, PI, DIVERGENCE_LEVELS))
        .collect::<Result<Vec<_>>>()?;
    let divergence_slope = probes.iter().map(|p| p.slope).fold(f64::INFINITY, f64::min);
    Ok(SteinReport {
        d,
        s,
        p,
        lp_norm_finite: finiteness.finite,
        finiteness,
        divergence_slope,
        probes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedTimeReport {
    pub d: usize,
    pub p: f64,
    pub lp_norm_finite: bool,
    pub finiteness: FinitenessReport,
    pub probe: DivergenceProbe,
    /// Dimension of the unit sphere, on which the average is infinite.
    pub blowup_dim: f64,
    pub bound_at_critical: f64,
    pub dimension_matches: bool,
}

/// `f = |x|^{1−d} ln^{−1}(1/|x|)` on the half ball with Lebesgue measure,
/// averaged over the unit sphere.
pub fn fixed_time_sharpness(d: usize, p: f64) -> Result<FixedTimeReport> {
    if d < 2 {
        return param(format!("dimension must be at least 2, got {d}"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return param(format!("p = {p} must be a finite exponent above 1"));
    }
    let df = d as f64;
    let finiteness = radial_finiteness(d, -(df - 1.0) * p, p, FINITENESS_SHELLS);
    // |x − y| = 2 sin(θ/2) stays below 1/2 inside this cap
    let theta_max = 2.0 * 0.25f64.asin();
    let probe = spherical_probe(d, 1.0, theta_max, DIVERGENCE_LEVELS)?;
    let bound_at_critical = blowup_dim_fixed_time(d as u32, df / (df - 1.0))?;
    let blowup_dim = df - 1.0;
    Ok(FixedTimeReport {
        d,
        p,
        lp_norm_finite: finiteness.finite,
        finiteness,
        probe,
        blowup_dim,
        bound_at_critical,
        dimension_matches: (blowup_dim - bound_at_critical).abs() < 1e-12,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RieszDivergenceReport {
    pub d: usize,
    pub s: f64,
    pub alpha: f64,
    /// Contributions `2^{j(d−α)} μ(B(x, 2^{−j}))` for `j = −1, 0, 1, …`.
    pub increments: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Slope of `log₂` increments over the last [`SLOPE_WINDOW`] levels.
    pub slope: f64,
    pub cantor_depth: u32,
}

impl RieszDivergenceReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("level,partial_sum,increment\n");
        for (k, (s, inc)) in self.partial_sums.iter().zip(&self.increments).enumerate() {
            let _ = writeln!(out, "{},{:.17e},{:.17e}", k as i64 - 1, s, inc);
        }
        out
    }
}

/// Largest atom count used for the test measure of [`riesz_divergence`].
pub const RIESZ_MAX_ATOMS: usize = 1 << 22;

/// Dyadic expansion of the Riesz potential of an s-dimensional Cantor
/// product at one of its points.
pub fn riesz_divergence(d: usize, s: f64, alpha: f64, levels: u32) -> Result<RieszDivergenceReport> {
    if !(1..=3).contains(&d) {
        return param(format!("dimension must lie in 1..=3, got {d}"));
    }
    let df = d as f64;
    if !(s > 0.0 && s <= df) {
        return param(format!("s = {s} outside (0, {d}]"));
    }
    if !(alpha > 0.0 && alpha < df) {
        return param(format!("alpha = {alpha} outside (0, {d})"));
    }
    if levels < 3 {
        return param("need at least 3 levels");
    }
    let ratio = 2f64.powf(-df / s);
    // resolve balls two dyadic scales below the finest level
    let target = 0.25 * 0.5f64.powi(levels as i32);
    let depth = (target.ln() / ratio.ln()).ceil().max(1.0) as u32;
    let atoms = 1usize.checked_shl(depth * d as u32).unwrap_or(usize::MAX);
    if atoms > RIESZ_MAX_ATOMS || depth > 24 {
        return Err(Error::Resource(format!(
            "{levels} levels need cantor depth {depth} ({atoms} atoms)"
        )));
    }
    let factor = cantor_measure(ratio, depth)?;
    let mu = product_measure(&vec![factor; d])?;
    let x = mu.atom(mu.len() / 3).to_vec();
    let radii: Vec<f64> = (-1..=levels as i32).map(|j| 0.5f64.powi(j)).collect();
    let mut ascending = radii.clone();
    ascending.reverse();
    let mut masses = ball_masses(&mu, &x, &ascending);
    masses.reverse();
    let increments: Vec<f64> = radii
        .iter()
        .zip(&masses)
        .enumerate()
        .map(|(k, (_, m))| 2f64.powf((k as f64 - 1.0) * (df - alpha)) * m)
        .collect();
    let mut acc = 0.0;
    let partial_sums = increments
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    let n = increments.len();
    let start = n.saturating_sub(SLOPE_WINDOW);
    let js: Vec<f64> = (start..n).map(|k| k as f64 - 1.0).collect();
    let slope = log2_fit(&js, &increments[start..])?.slope;
    Ok(RieszDivergenceReport { d, s, alpha, increments, partial_sums, slope, cantor_depth: depth })
}

/// One coordinate factor of the Cantor product.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Factor {
    Point,
    Lebesgue,
    Cantor(f64),
}

impl Factor {
    fn of_dimension(a: f64) -> Self {
        if a == 0.0 {
            Factor::Point
        } else if a == 1.0 {
            Factor::Lebesgue
        } else {
            Factor::Cantor(2f64.powf(-1.0 / a))
        }
    }

    /// A point of the support used as a lateral probe coordinate.
    fn anchor(self) -> f64 {
        match self {
            Factor::Point => 0.0,
            Factor::Lebesgue => 0.5,
            Factor::Cantor(r) => 1.0 - r,
        }
    }

    /// Probe height, which is also the sphere radius.
    fn height(self) -> f64 {
        match self {
            Factor::Point | Factor::Lebesgue => 0.75,
            Factor::Cantor(r) => 1.0 - r,
        }
    }

    fn cdf(self, x: f64) -> f64 {
        match self {
            Factor::Point => (x >= 0.0) as u8 as f64,
            Factor::Lebesgue => x.clamp(0.0, 1.0),
            Factor::Cantor(r) => {
                let (mut x, mut scale, mut acc) = (x, 1.0, 0.0);
                for _ in 0..64 {
                    if x < 0.0 {
                        return acc;
                    }
                    if x >= 1.0 {
                        return acc + scale;
                    }
                    if x < r {
                        x /= r;
                    } else if x < 1.0 - r {
                        return acc + 0.5 * scale;
                    } else {
                        acc += 0.5 * scale;
                        x = (x - (1.0 - r)) / r;
                    }
                    scale *= 0.5;
                }
                acc + 0.5 * scale
            }
        }
    }

    /// Mass of the closed interval `[lo, hi]`.
    fn mass(self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        match self {
            Factor::Point => (lo <= 0.0 && hi >= 0.0) as u8 as f64,
            _ => self.cdf(hi) - self.cdf(lo),
        }
    }

    /// Mass of `{y : |c − y|² ∈ [a, b]}`.
    fn shell_mass(self, c: f64, a: f64, b: f64) -> f64 {
        if b < 0.0 || b < a {
            return 0.0;
        }
        let rb = b.sqrt();
        if a <= 0.0 {
            return self.mass(c - rb, c + rb);
        }
        let ra = a.sqrt();
        self.mass(c - rb, c - ra) + self.mass(c + ra, c + rb)
    }

    /// Cells `(position, weight)` resolving the factor at scale `h`.
    fn cells(self, h: f64) -> Result<Vec<(f64, f64)>> {
        match self {
            Factor::Point => Ok(vec![(0.0, 1.0)]),
            Factor::Lebesgue => {
                let n = (1.0 / h).log2().ceil().max(0.0) as u32;
                if n > MATTILA_MAX_DEPTH {
                    return Err(Error::Resource(format!("lebesgue factor needs 2^{n} cells")));
                }
                let m = 1usize << n;
                let w = 1.0 / m as f64;
                Ok((0..m).map(|i| (i as f64 * w, w)).collect())
            }
            Factor::Cantor(r) => {
                let k = (h.ln() / r.ln()).ceil().max(1.0) as u32;
                if k > MATTILA_MAX_DEPTH {
                    return Err(Error::Resource(format!(
                        "cantor factor with ratio {r} needs depth {k}, above {MATTILA_MAX_DEPTH}"
                    )));
                }
                let c = cantor_measure(r, k)?;
                Ok(c.coords().iter().zip(c.weights()).map(|(x, w)| (*x, *w)).collect())
            }
        }
    }

    fn cell_width(self, cells: usize) -> f64 {
        match self {
            Factor::Point => 0.0,
            Factor::Lebesgue => 1.0 / cells as f64,
            Factor::Cantor(r) => r.powf((cells as f64).log2()),
        }
    }
}

/// Deepest Cantor or dyadic level any factor is refined to.
pub const MATTILA_MAX_DEPTH: u32 = 20;
/// Cells must be this many times finer than the thinnest annulus.
pub const MATTILA_RESOLUTION: f64 = 16.0;
const MATTILA_MAX_WORK: usize = 400_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct MattilaReport {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub probe: Vec<f64>,
    pub eps: Vec<f64>,
    pub masses: Vec<f64>,
    pub fit: FitReport,
    /// `α(d−1)/2 + β(1 − 1/p)`.
    pub predicted: f64,
    /// Exponent of the lower bound `ε^{−1} M(ε)` for the maximal function.
    pub maximal_lower_exponent: f64,
}

impl MattilaReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("eps,mass\n");
        for (e, m) in self.eps.iter().zip(&self.masses) {
            let _ = writeln!(out, "{:.17e},{:.17e}", e, m);
        }
        out
    }
}

const GRADED_LEVELS: usize = 40;
const GRADED_NODES: usize = 2 * GRADED_LEVELS * 8;

/// `∫_a^b f` for `f` smooth inside `(a, b)` with integrable endpoint
/// singularities; panels shrink geometrically toward both ends.
fn graded_integral(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre(8);
    let half = 0.5 * (b - a);
    let mut total = 0.0;
    for (end, dir) in [(a, 1.0), (b, -1.0)] {
        let mut hi = half;
        for level in 0..GRADED_LEVELS {
            let lo = if level + 1 == GRADED_LEVELS { 0.0 } else { 0.5 * hi };
            let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * f(end + dir * (c + r * xi))).sum();
            total += s * r;
            hi = lo;
        }
    }
    total
}

/// Mean of `y^{−q}` over the cell of `factor` starting at `pos`.
fn cell_moment(factor: Factor, pos: f64, width: f64, q: f64) -> f64 {
    if q == 0.0 {
        return 1.0;
    }
    match factor {
        Factor::Point => f64::INFINITY,
        Factor::Lebesgue => {
            let (a, b) = (pos, pos + width);
            (b.powf(1.0 - q) - a.powf(1.0 - q)) / ((1.0 - q) * width)
        }
        Factor::Cantor(r) => {
            if pos > 0.0 {
                return (pos + 0.5 * width).powf(-q);
            }
            // self-similarity: the mean over [0, 1] splits over the two halves
            let (x, w) = gauss_legendre(16);
            let right: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| 0.5 * wi * (1.0 - r + 0.5 * r * (1.0 + xi)).powf(-q))
                .sum();
            let whole = 0.5 * right / (1.0 - 0.5 * r.powf(-q));
            whole * (width).powf(-q)
        }
    }
}

/// Weighted annulus mass `M(ε) = ∫_{t−ε ≤ |x−y| ≤ t+ε} |y_d|^{−β/p} dμ(y)` on
/// `μ = C_α^{d−1} × C_β` with `t = x_d`, fitted against ε.
///
/// `predicted` is the exponent of the tangential box alone. Transversal
/// crossings of the annulus contribute too, so the fit tracks `predicted`
/// only when the box dominates, e.g. `α = 1` and `β(1 − 1/p) < 1/2` in the
/// plane. Convergence in ε is slow (the correction is a power `ε^{β/2 − β/p}`
/// type term), so the fit sits slightly below the prediction.
pub fn mattila_example(d: usize, alpha: f64, beta: f64, p: f64, eps_list: &[f64]) -> Result<MattilaReport> {
    if !(2..=3).contains(&d) {
        return param(format!("dimension must be 2 or 3, got {d}"));
    }
    if !((0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta)) {
        return param(format!("alpha = {alpha}, beta = {beta} must lie in [0, 1]"));
    }
    if !(p > 1.0) {
        return param(format!("p = {p} must exceed 1"));
    }
    if eps_list.len() < 4 {
        return param("need at least 4 values of eps");
    }
    let ratio = eps_list[1] / eps_list[0];
    let geometric = eps_list.windows(2).all(|w| ((w[1] / w[0]) / ratio - 1.0).abs() < 1e-9);
    if !geometric || !(ratio > 0.0) || ratio == 1.0 || eps_list.iter().any(|e| !(*e > 0.0)) {
        return param("eps values must form a geometric sequence of positive numbers");
    }
    let fa = Factor::of_dimension(alpha);
    let fb = Factor::of_dimension(beta);
    let mut probe = vec![fa.anchor(); d - 1];
    probe.push(fb.height());
    let t = probe[d - 1];
    if eps_list.iter().any(|e| *e >= t) {
        return param(format!("eps values must be below t = {t}"));
    }
    let eps_min = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let h = eps_min / MATTILA_RESOLUTION;
    let q = beta / p;
    let lateral = if d == 3 { fa.cells(h)? } else { Vec::new() };
    // lateral mass of {y' : |x' − y'|² ∈ [a, b]}
    let lateral_mass = |a: f64, b: f64| -> f64 {
        if d == 2 {
            fa.shell_mass(probe[0], a, b)
        } else {
            lateral
                .iter()
                .map(|&(y1, w1)| {
                    let e = (probe[0] - y1) * (probe[0] - y1);
                    w1 * fa.shell_mass(probe[1], a - e, b - e)
                })
                .sum()
        }
    };
    let xd = t;
    let masses: Vec<f64> = if fb == Factor::Lebesgue {
        let work = GRADED_NODES * 10 * lateral.len().max(1) * eps_list.len();
        if work > MATTILA_MAX_WORK {
            return Err(Error::Resource(format!("annulus evaluation needs {work} cell visits")));
        }
        eps_list
            .par_iter()
            .map(|&eps| {
                let (r_lo, r_hi) = ((t - eps) * (t - eps), (t + eps) * (t + eps));
                let mut breaks = vec![0.0, 1.0];
                for r in [t - eps, t + eps] {
                    breaks.extend([xd - r, xd + r].iter().filter(|y| **y > 0.0 && **y < 1.0));
                }
                breaks.sort_by(f64::total_cmp);
                let integrand = |y: f64| {
                    let delta2 = (xd - y) * (xd - y);
                    y.powf(-q) * lateral_mass(r_lo - delta2, r_hi - delta2)
                };
                breaks.windows(2).map(|w| graded_integral(&integrand, w[0], w[1])).sum()
            })
            .collect()
    } else {
        let y_cells = fb.cells(h)?;
        let width = fb.cell_width(y_cells.len());
        let weights: Vec<(f64, f64)> = y_cells
            .iter()
            .map(|&(pos, w)| (pos, w * cell_moment(fb, pos, width, q)))
            .collect();
        let work = y_cells.len() * lateral.len().max(1) * eps_list.len();
        if work > MATTILA_MAX_WORK {
            return Err(Error::Resource(format!("annulus evaluation needs {work} cell visits")));
        }
        eps_list
            .par_iter()
            .map(|&eps| {
                let (r_lo, r_hi) = ((t - eps) * (t - eps), (t + eps) * (t + eps));
                weights
                    .iter()
                    .map(|&(y, fw)| {
                        let delta2 = (xd - y) * (xd - y);
                        let m = lateral_mass(r_lo - delta2, r_hi - delta2);
                        if m > 0.0 {
                            m * fw
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    };
    let ln_eps: Vec<f64> = eps_list.iter().map(|e| e.log2()).collect();
    let fit = log2_fit(&ln_eps, &masses)?;
    let predicted = alpha * (d as f64 - 1.0) / 2.0 + beta * (1.0 - 1.0 / p);
    Ok(MattilaReport {
        d,
        alpha,
        beta,
        p,
        probe,
        eps: eps_list.to_vec(),
        masses,
        maximal_lower_exponent: fit.slope - 1.0,
        fit,
        predicted,
    })
}

/// Geometric list `first · ratio^k`, `k < count`.
pub fn geometric_eps(first: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| first * ratio.powi(k as i32)).collect()
}

/// Default eps ladder for [`mattila_example`].
pub fn default_mattila_eps() -> Vec<f64> {
    geometric_eps(2f64.powi(-8), 0.5, 13)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_integral_matches_closed_form() {
        // ∫_1^2 e^{-c v} dv = (e^{-c} - e^{-2c}) / c
        for c in [-300.0f64, -2.0, 1e-3, 0.5, 40.0, 1e6] {
            let exact = (-c).exp() * (1.0 - (-c).exp()) / c;
            let got = log_integral_convex(|v| -c * v, 1.0, 2.0);
            if exact.is_finite() && exact > 0.0 {
                assert!((got - exact.ln()).abs() < 1e-10, "c={c} {got} {}", exact.ln());
            }
        }
        // huge c overflows the direct formula but not the log form
        let got = log_integral_convex(|v| -1e9 * v, 1.0, 2.0);
        assert!((got - (-1e9 - 1e9f64.ln())).abs() < 1e-6);
        // ∫_1^2 v^{-3} dv = 3/8
        let got = log_integral_convex(|v| -3.0 * v.ln(), 1.0, 2.0);
        assert!((got - 0.375f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn finiteness_verdicts() {
        let v = |p: f64| stein_example(2, 1.5, p).unwrap().lp_norm_finite;
        assert!(v(2.5));
        assert!(v(3.0));
        assert!(!v(3.5));
        let f = |p: f64| fixed_time_sharpness(3, p).unwrap().lp_norm_finite;
        assert!(f(1.4) && f(1.5) && !f(1.6));
    }

    #[test]
    fn cantor_cdf_is_self_similar() {
        let c = Factor::Cantor(0.25);
        assert_eq!(c.cdf(0.5), 0.5);
        assert!((c.cdf(0.125) - 0.25).abs() < 1e-15);
        assert!((c.cdf(1.0) - 1.0).abs() < 1e-15);
        let m = cantor_measure(0.25, 10).unwrap();
        for x in [0.1, 0.3, 0.77, 0.9] {
            let direct: f64 = m.coords().iter().zip(m.weights()).filter(|(a, _)| **a <= x).map(|(_, w)| w).sum();
            assert!((direct - c.cdf(x)).abs() < 2e-3, "{x}");
        }
    }

    #[test]
    fn zero_moment_cell() {
        // the mean of y^{-q} over the full set agrees with a deep atomic sum
        let r: f64 = 0.25;
        let q = 0.125;
        let m = cantor_measure(r, 16).unwrap();
        let atomic: f64 = m
            .coords()
            .iter()
            .zip(m.weights())
            .skip(1)
            .map(|(a, w)| w * a.powf(-q))
            .sum();
        let whole = cell_moment(Factor::Cantor(r), 0.0, 1.0, q);
        assert!((atomic - whole).abs() < 0.02 * whole, "{atomic} {whole}");
    }
}
