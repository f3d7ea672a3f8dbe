use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dist2, DiscreteMeasure};
use crate::error::{param, Result};
use crate::fit::least_squares;

/// Relative slack under which an atom at distance exactly `r` counts as
/// inside the closed ball `B(x, r)`.
pub(crate) const TIE_SLACK: f64 = 4.0 * f64::EPSILON;

/// `μ(B(x, r))` for the closed ball; atoms at distance `r` are included.
pub fn ball_mass(mu: &DiscreteMeasure, x: &[f64], r: f64) -> f64 {
    assert_eq!(x.len(), mu.dim(), "probe dimension mismatch");
    let rr = (r * (1.0 + TIE_SLACK)).powi(2);
    mu.atoms()
        .zip(mu.weights())
        .filter(|(p, _)| dist2(p, x) <= rr)
        .map(|(_, w)| *w)
        .sum()
}

/// Ball masses at every radius of an ascending list, in one pass over the
/// atoms.
pub fn ball_masses(mu: &DiscreteMeasure, x: &[f64], radii: &[f64]) -> Vec<f64> {
    debug_assert!(radii.windows(2).all(|w| w[0] <= w[1]));
    let limits: Vec<f64> = radii
        .iter()
        .map(|r| (r * (1.0 + TIE_SLACK)).powi(2))
        .collect();
    let mut bins = vec![0.0; radii.len()];
    for (p, w) in mu.atoms().zip(mu.weights()) {
        let d2 = dist2(p, x);
        let k = limits.partition_point(|l| *l < d2);
        if k < bins.len() {
            bins[k] += w;
        }
    }
    let mut acc = 0.0;
    for b in bins.iter_mut() {
        acc += *b;
        *b = acc;
    }
    bins
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrostmanOptions {
    pub n_probes: usize,
    pub seed: u64,
    /// Maximum gap between the upper and lower growth exponents for the
    /// measure to count as lower regular.
    pub lower_tolerance: f64,
}

impl Default for FrostmanOptions {
    fn default() -> Self {
        FrostmanOptions {
            n_probes: 256,
            seed: 0,
            lower_tolerance: 0.15,
        }
    }
}

/// Empirical ball-growth exponent of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanReport {
    pub fitted_s: f64,
    pub constant_c: f64,
    pub lower_regular: bool,
    /// Growth exponent of the smallest probed ball mass.
    pub lower_s: f64,
    pub r_range: (f64, f64),
    pub residual: f64,
}

/// Fits `log max_x μ(B(x, r))` against `log r` for radii `r_min·2^k ≤ r_max`
/// and probe centers drawn from the atoms.
pub fn frostman_fit(
    mu: &DiscreteMeasure,
    opts: FrostmanOptions,
    r_min: f64,
    r_max: f64,
) -> Result<FrostmanReport> {
    if !(r_min > 0.0 && r_min < r_max) {
        return param(format!("degenerate radius range [{r_min}, {r_max}]"));
    }
    let mut radii = vec![r_min];
    while radii.last().unwrap() * 2.0 <= r_max * (1.0 + 1e-12) {
        radii.push(radii.last().unwrap() * 2.0);
    }
    if radii.len() < 3 {
        return param(format!("radius range [{r_min}, {r_max}] gives fewer than 3 dyadic radii"));
    }
    let support: Vec<usize> = (0..mu.len()).filter(|&i| mu.weights()[i] > 0.0).collect();
    if support.is_empty() {
        return param("measure has no mass");
    }
    let probes: Vec<usize> = if support.len() <= opts.n_probes {
        support
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut pick: Vec<usize> = sample(&mut rng, support.len(), opts.n_probes)
            .into_iter()
            .map(|k| support[k])
            .collect();
        // The heaviest atom is always probed: random centers miss isolated
        // concentrations such as the origin cell of a radial power measure.
        let heaviest = support
            .iter()
            .copied()
            .fold(support[0], |b, i| if mu.weights()[i] > mu.weights()[b] { i } else { b });
        pick.push(heaviest);
        pick.sort_unstable();
        pick.dedup();
        pick
    };
    let masses: Vec<Vec<f64>> = probes
        .par_iter()
        .map(|&i| ball_masses(mu, mu.atom(i), &radii))
        .collect();
    let maxes: Vec<f64> = (0..radii.len())
        .map(|k| masses.iter().map(|m| m[k]).fold(0.0, f64::max))
        .collect();
    let mins: Vec<f64> = (0..radii.len())
        .map(|k| masses.iter().map(|m| m[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let upper = least_squares(&lr, &maxes.iter().map(|m| m.ln()).collect::<Vec<_>>())?;
    let lower = least_squares(&lr, &mins.iter().map(|m| m.ln()).collect::<Vec<_>>())?;
    let fitted_s = upper.slope.clamp(0.0, mu.dim() as f64);
    let constant_c = radii
        .iter()
        .zip(&maxes)
        .map(|(r, m)| m / r.powf(fitted_s))
        .fold(0.0, f64::max);
    Ok(FrostmanReport {
        fitted_s,
        constant_c,
        lower_regular: (lower.slope - fitted_s).abs() <= opts.lower_tolerance,
        lower_s: lower.slope,
        r_range: (r_min, *radii.last().unwrap()),
        residual: upper.residual,
    })
}
