//! The three-dimensional wave equation `∂²u/∂t² = Δu`, `u(·,0) = 0`,
//! `∂u/∂t(·,0) = fμ`, solved by the spherical-mean formula `u = t·A_t(fμ)`
//! with the probability-normalized sphere measure.

use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Result};
use crate::exponents::blowup_dim_fixed_time;
use crate::fit::{least_squares, FitReport};
use crate::measures::DiscreteMeasure;
use crate::operators::{default_eps, KernelSpec, Source};
use crate::spectral::{self, ComplexField, FieldDomain, SpectralGrid};

/// `u(·, t)` sampled on a three-dimensional grid.
#[derive(Debug, Clone)]
pub struct WaveField {
    pub grid: SpectralGrid,
    pub t: f64,
    pub values: Vec<f64>,
    /// Grid indices whose value is not finite.
    pub flagged: Vec<usize>,
}

impl WaveField {
    fn new(grid: SpectralGrid, t: f64, values: Vec<f64>) -> Self {
        let flagged = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_finite())
            .map(|(i, _)| i)
            .collect();
        WaveField { grid, t, values, flagged }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV of the plane `x₃ = grid point k` (`k` in storage order).
    pub fn write_slice_csv(&self, k: usize, mut w: impl Write) -> Result<()> {
        let n = self.grid.n_per_axis();
        if k >= n {
            return param(format!("slice index {k} outside 0..{n}"));
        }
        let mut out = String::from("x1,x2,x3,u\n");
        for i in 0..n {
            for j in 0..n {
                let idx = self.grid.flat_index(&[i, j, k]);
                let x = self.grid.point(idx);
                let _ = writeln!(out, "{:e},{:e},{:e},{:e}", x[0], x[1], x[2], self.values[idx]);
            }
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    /// Binary field export in the spectral field format.
    pub fn write_binary(&self, w: impl Write) -> Result<()> {
        let field = ComplexField::from_real(self.grid, &self.values, FieldDomain::Space)?;
        spectral::io::write_binary(&field, w)
    }
}

fn check_grid(grid: &SpectralGrid) -> Result<()> {
    if grid.dim() != 3 {
        return param(format!("the wave solver works in three dimensions, got {}", grid.dim()));
    }
    Ok(())
}

/// `u(·, t) = t·A_t(fμ)` with the default mollification scale.
pub fn wave_solution(f: &[f64], mu: &DiscreteMeasure, t: f64, grid: &SpectralGrid) -> Result<WaveField> {
    check_grid(grid)?;
    let source = Source::from_measure(f, mu, grid)?;
    wave_from_source(&source, t, default_eps(grid))
}

/// `u(·, t)` for an already transformed source; `eps = 0` disables the
/// mollifier.
pub fn wave_from_source(source: &Source, t: f64, eps: f64) -> Result<WaveField> {
    check_grid(source.grid())?;
    let a = source.spherical_average(t, eps)?;
    let values = a.values.iter().map(|v| t * v.re).collect();
    Ok(WaveField::new(*source.grid(), t, values))
}

/// Convergence of `u(x,t)/t` to the data as `t → 0`.
#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub times: Vec<f64>,
    /// `max_x |u(x,t)/t − ρ_ε∗f(x)|`.
    pub errors: Vec<f64>,
    /// `log₂` error ratios between consecutive times.
    pub orders: Vec<f64>,
    pub eps: f64,
}

impl LimitReport {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Measures `max |u(·,t)/t − f|` for an absolutely continuous source given
/// by its density on the grid. The limit is taken against the mollified
/// density, which is the exact `t → 0` limit of the mollified solver.
pub fn limit_order(grid: &SpectralGrid, density: &[f64], times: &[f64], eps: f64) -> Result<LimitReport> {
    check_grid(grid)?;
    if times.len() < 2 {
        return param("need at least two times");
    }
    let source = Source::from_density(grid, density)?;
    let limit = source.apply(&KernelSpec::dirac().with_eps(eps).mollified_multiplier(grid)?).real_part();
    let mut errors = Vec::with_capacity(times.len());
    for &t in times {
        let u = wave_from_source(&source, t, eps)?;
        let e = u
            .values
            .par_iter()
            .zip(&limit)
            .map(|(v, l)| (v / t - l).abs())
            .reduce(|| 0.0, f64::max);
        errors.push(e);
    }
    let orders = errors
        .windows(2)
        .zip(times.windows(2))
        .map(|(e, t)| (e[0] / e[1]).log2() / (t[0] / t[1]).log2())
        .collect();
    Ok(LimitReport { times: times.to_vec(), errors, orders, eps })
}

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Data families for [`blowup_probe`], all against Lebesgue measure.
#[derive(Clone)]
pub enum BlowupFamily {
    /// `|x|^{−2} ln^{−1}(1/|x|)` on the half ball, in `L^p` exactly for `p ≤ 3/2`.
    FixedTimeSharpness,
    /// `exp(−1/(1 − 4|x|²))` on the half ball.
    SmoothBump,
    Custom { label: String, density: DensityFn, p: Option<f64> },
}

impl std::fmt::Debug for BlowupFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl BlowupFamily {
    pub fn label(&self) -> String {
        match self {
            BlowupFamily::FixedTimeSharpness => "fixed_time_sharpness".into(),
            BlowupFamily::SmoothBump => "smooth_bump".into(),
            BlowupFamily::Custom { label, .. } => label.clone(),
        }
    }

    /// Integrability exponent of the family, if it has one.
    pub fn p(&self) -> Option<f64> {
        match self {
            BlowupFamily::FixedTimeSharpness => Some(1.5),
            BlowupFamily::SmoothBump => None,
            BlowupFamily::Custom { p, .. } => *p,
        }
    }

    /// Density sampled on the grid. The singular point of the sharpness
    /// family gets the mean over the ball of one cell volume.
    pub fn sample(&self, grid: &SpectralGrid) -> Vec<f64> {
        match self {
            BlowupFamily::FixedTimeSharpness => {
                let h = grid.spacing();
                // radius of the ball with volume h³
                let r0 = h * (3.0 / (4.0 * std::f64::consts::PI)).cbrt();
                let center = {
                    // (1/|B|) ∫_B |x|^{-2}/ln(1/|x|) = 3/r0³ ∫_0^{r0} dr / ln(1/r)
                    let g = |r: f64| if r > 0.0 { 1.0 / (1.0 / r).ln() } else { 0.0 };
                    3.0 / r0.powi(3) * crate::special::integrate(g, 0.0, r0, 32)
                };
                grid.sample_space(|x| {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if r == 0.0 {
                        center
                    } else if r < 0.5 {
                        1.0 / (r * r * (1.0 / r).ln())
                    } else {
                        0.0
                    }
                })
            }
            BlowupFamily::SmoothBump => grid.sample_space(|x| {
                let r2 = 4.0 * x.iter().map(|v| v * v).sum::<f64>();
                if r2 < 1.0 {
                    (-1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            }),
            BlowupFamily::Custom { density, .. } => grid.sample_space(|x| density(x)),
        }
    }
}

/// How the super-level threshold is chosen at each refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdSchedule {
    /// One absolute threshold per refinement, nondecreasing.
    Absolute { values: Vec<f64> },
    /// `fraction · max u` on each refinement.
    RelativeToMax { fraction: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupConfig {
    pub t: f64,
    pub box_half_width: f64,
    /// Points per axis of each refinement, increasing.
    pub refinements: Vec<usize>,
    pub thresholds: ThresholdSchedule,
    /// Mollification scale in units of the grid spacing.
    pub eps_cells: f64,
    /// Largest spread of the per-refinement estimates still reported as stable.
    pub stability: f64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        BlowupConfig {
            t: 1.0,
            box_half_width: 2.0,
            refinements: vec![32, 64, 128],
            thresholds: ThresholdSchedule::RelativeToMax { fraction: 0.9 },
            eps_cells: 1.0,
            stability: 0.25,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementLevel {
    pub n: usize,
    pub spacing: f64,
    pub threshold: f64,
    pub max_u: f64,
    /// Boxes of side `spacing · 2^m` meeting the super-level set, `m = 0, 1, 2`.
    pub box_counts: Vec<usize>,
    pub local_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub family: String,
    pub levels: Vec<RefinementLevel>,
    pub boxdim_estimate: f64,
    pub fit: Option<FitReport>,
    pub inconclusive: bool,
    /// Dimension bound for the family's integrability exponent.
    pub compare: Option<f64>,
}

const BOX_SCALES: usize = 3;

/// Counts boxes of side `2^m` cells meeting `set`, `m < BOX_SCALES`.
fn box_counts(n: usize, set: &[bool]) -> Vec<usize> {
    (0..BOX_SCALES)
        .map(|m| {
            let b = 1usize << m;
            let nb = n.div_ceil(b);
            let mut hit = vec![false; nb * nb * nb];
            for (idx, _) in set.iter().enumerate().filter(|(_, s)| **s) {
                let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
                hit[((i / b) * nb + j / b) * nb + k / b] = true;
            }
            hit.iter().filter(|h| **h).count()
        })
        .collect()
}

fn dimension_from_counts(counts: &[usize], sizes: &[f64]) -> Result<Option<FitReport>> {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .zip(sizes)
        .filter(|(c, _)| **c > 0)
        .map(|(c, s)| ((1.0 / s).log2(), (*c as f64).log2()))
        .collect();
    if pts.len() < 2 {
        return Ok(None);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    least_squares(&xs, &ys).map(Some)
}

/// Box-counting estimate of `{x : u(x, t) > threshold}` over grid refinements.
///
/// Each refinement yields a local estimate from boxes of one, two and four
/// cells; the estimate of the finest refinement is reported. It is flagged
/// inconclusive when the local estimates of the two finest refinements differ
/// by more than `config.stability`. `fit` is the slope of the one-cell counts
/// across refinements, which overshoots when the super-level set thins more
/// slowly than the grid spacing.
pub fn blowup_probe(family: &BlowupFamily, config: &BlowupConfig) -> Result<BlowupReport> {
    let refs = &config.refinements;
    if refs.is_empty() || refs.windows(2).any(|w| w[0] >= w[1]) {
        return param("refinements must be a nonempty increasing list");
    }
    if let ThresholdSchedule::Absolute { values } = &config.thresholds {
        if values.len() != refs.len() || values.windows(2).any(|w| w[0] > w[1]) {
            return param("absolute thresholds must be nondecreasing, one per refinement");
        }
    }
    if let ThresholdSchedule::RelativeToMax { fraction } = config.thresholds {
        if !(fraction > 0.0 && fraction < 1.0) {
            return param(format!("threshold fraction {fraction} outside (0, 1)"));
        }
    }
    let mut levels = Vec::with_capacity(refs.len());
    for (k, &n) in refs.iter().enumerate() {
        let grid = SpectralGrid::new(3, n, config.box_half_width)?;
        let density = family.sample(&grid);
        let source = Source::from_density(&grid, &density)?;
        let eps = config.eps_cells * grid.spacing();
        let u = wave_from_source(&source, config.t, eps)?;
        let max_u = u.max();
        let threshold = match &config.thresholds {
            ThresholdSchedule::Absolute { values } => values[k],
            ThresholdSchedule::RelativeToMax { fraction } => fraction * max_u,
        };
        let set: Vec<bool> = u.values.iter().map(|v| !v.is_finite() || *v > threshold).collect();
        let counts = box_counts(n, &set);
        let h = grid.spacing();
        let sizes: Vec<f64> = (0..BOX_SCALES).map(|m| h * (1 << m) as f64).collect();
        let local_estimate = dimension_from_counts(&counts, &sizes)?.map_or(0.0, |f| f.slope);
        levels.push(RefinementLevel { n, spacing: h, threshold, max_u, box_counts: counts, local_estimate });
    }
    let finest: Vec<usize> = levels.iter().map(|l| l.box_counts[0]).collect();
    let sizes: Vec<f64> = levels.iter().map(|l| l.spacing).collect();
    let fit = dimension_from_counts(&finest, &sizes)?;
    let boxdim_estimate = levels.last().map_or(0.0, |l| l.local_estimate);
    let inconclusive = match levels.len() {
        0 | 1 => true,
        m => (levels[m - 1].local_estimate - levels[m - 2].local_estimate).abs() > config.stability,
    };
    let compare = match family.p() {
        Some(p) => Some(blowup_dim_fixed_time(3, p)?),
        None => None,
    };
    Ok(BlowupReport { family: family.label(), levels, boxdim_estimate, fit, inconclusive, compare })
}
