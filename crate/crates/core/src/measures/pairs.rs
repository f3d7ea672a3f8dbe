use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dist2, DiscreteMeasure};
use crate::error::{param, Result};
use crate::fit::least_squares;

/// Pair energy `Σ_{i≠j} w_i w_j |x_i − x_j|^{-s}` with its decomposition by
/// dyadic distance level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    /// `contributions[m]` collects pairs with `2^{-m} ≤ |x−y| < 2^{-m+1}`;
    /// level 0 also takes every pair at distance `≥ 1`.
    pub contributions: Vec<f64>,
    /// Last level resolved by the atoms (twice the median nearest-neighbour
    /// spacing).
    pub resolved_level: usize,
    /// Slope of `log2` level contributions over levels `1..=resolved_level`.
    pub growth_slope: Option<f64>,
    pub divergent: bool,
}

fn level_of(d: f64) -> usize {
    if d >= 1.0 {
        0
    } else {
        (-d.log2()).floor() as usize + 1
    }
}

/// Discrete `s`-energy. The divergence flag is raised for coincident atoms
/// (including a lone point mass) and when the dyadic level contributions
/// grow across the resolved scales.
pub fn energy_integral(mu: &DiscreteMeasure, s: f64) -> Result<EnergyReport> {
    if !(s > 0.0 && s <= mu.dim() as f64) {
        return param(format!("energy exponent {s} outside (0, {}]", mu.dim()));
    }
    let n = mu.len();
    let positive: Vec<usize> = (0..n).filter(|&i| mu.weights()[i] > 0.0).collect();
    if positive.len() == 1 {
        return Ok(EnergyReport {
            value: f64::INFINITY,
            contributions: vec![],
            resolved_level: 0,
            growth_slope: None,
            divergent: true,
        });
    }
    const LEVELS: usize = 64;
    let rows: Vec<(Vec<f64>, f64, bool)> = positive
        .par_iter()
        .map(|&i| {
            let xi = mu.atom(i);
            let wi = mu.weights()[i];
            let mut levels = vec![0.0; LEVELS];
            let mut nn = f64::INFINITY;
            let mut coincident = false;
            for &j in &positive {
                if j == i {
                    continue;
                }
                let d = dist2(xi, mu.atom(j)).sqrt();
                nn = nn.min(d);
                if d == 0.0 {
                    coincident = true;
                    continue;
                }
                levels[level_of(d).min(LEVELS - 1)] += wi * mu.weights()[j] * d.powf(-s);
            }
            (levels, nn, coincident)
        })
        .collect();
    let mut contributions = vec![0.0; LEVELS];
    let mut nns = Vec::with_capacity(rows.len());
    let mut coincident = false;
    for (lv, nn, c) in &rows {
        for (a, b) in contributions.iter_mut().zip(lv) {
            *a += b;
        }
        nns.push(*nn);
        coincident |= *c;
    }
    while contributions.len() > 1 && *contributions.last().unwrap() == 0.0 {
        contributions.pop();
    }
    nns.sort_by(|a, b| a.total_cmp(b));
    let median_nn = nns[nns.len() / 2];
    let resolved_level = if median_nn > 0.0 {
        level_of(2.0 * median_nn).saturating_sub(1).min(contributions.len() - 1)
    } else {
        0
    };
    let value = if coincident {
        f64::INFINITY
    } else {
        contributions.iter().sum()
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = (1..=resolved_level)
        .filter(|&m| contributions[m] > 0.0)
        .map(|m| (m as f64, contributions[m].log2()))
        .unzip();
    let growth_slope = if xs.len() >= 3 {
        least_squares(&xs, &ys).ok().map(|f| f.slope)
    } else {
        None
    };
    Ok(EnergyReport {
        value,
        divergent: coincident || growth_slope.is_some_and(|g| g > 0.0),
        contributions,
        resolved_level,
        growth_slope,
    })
}

/// Energies along a refinement sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub values: Vec<f64>,
    /// `values[k+1] / values[k]`.
    pub ratios: Vec<f64>,
    /// Whether the last refinement multiplied the energy by more than the
    /// configured factor.
    pub divergent: bool,
}

pub fn energy_refinement(
    levels: &[DiscreteMeasure],
    s: f64,
    multiple: f64,
) -> Result<RefinementReport> {
    if levels.len() < 2 {
        return param("refinement needs at least two levels");
    }
    let values = levels
        .iter()
        .map(|m| energy_integral(m, s).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(RefinementReport {
        divergent: ratios.last().is_some_and(|r| !(*r <= multiple)),
        values,
        ratios,
    })
}

/// `μ×μ{(x, y) : t ≤ |x−y| ≤ t+ε}` over ordered pairs.
pub fn annulus_pair_mass(mu: &DiscreteMeasure, t: f64, eps: f64) -> f64 {
    let shell = shell_masses(mu, t, eps);
    shell.iter().zip(mu.weights()).map(|(a, w)| a * w).sum()
}

/// `μ×μ×μ{(x, y, z) : t ≤ |x−z| ≤ t+ε, t ≤ |y−z| ≤ t+ε}`.
pub fn chain_triple_mass(mu: &DiscreteMeasure, t: f64, eps: f64) -> f64 {
    let shell = shell_masses(mu, t, eps);
    shell.iter().zip(mu.weights()).map(|(a, w)| a * a * w).sum()
}

/// For each atom z, `μ{x : t ≤ |x−z| ≤ t+ε}`.
fn shell_masses(mu: &DiscreteMeasure, t: f64, eps: f64) -> Vec<f64> {
    assert!(t > 0.0 && eps > 0.0, "annulus needs t > 0 and ε > 0");
    let lo = t * t;
    let hi = (t + eps) * (t + eps);
    (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let z = mu.atom(i);
            mu.atoms()
                .zip(mu.weights())
                .filter(|(p, _)| {
                    let d2 = dist2(p, z);
                    d2 >= lo && d2 <= hi
                })
                .map(|(_, w)| *w)
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{cantor_measure, dirac, lebesgue_box};

    #[test]
    fn dirac_is_divergent_and_pairless() {
        let d = dirac(&[0.0, 0.0, 0.0]).unwrap();
        let e = energy_integral(&d, 1.0).unwrap();
        assert!(e.divergent);
        assert_eq!(annulus_pair_mass(&d, 0.5, 0.1), 0.0);
        assert_eq!(chain_triple_mass(&d, 0.5, 0.1), 0.0);
    }

    #[test]
    fn two_atoms_by_hand() {
        let m = DiscreteMeasure::new(
            1,
            vec![0.0, 0.5],
            vec![0.25, 0.75],
            crate::measures::Construction::Custom,
            None,
        )
        .unwrap();
        let e = energy_integral(&m, 1.0).unwrap();
        assert!((e.value - 2.0 * 0.25 * 0.75 * 2.0).abs() < 1e-15);
        assert!((annulus_pair_mass(&m, 0.5, 0.01) - 2.0 * 0.25 * 0.75).abs() < 1e-15);
    }

    #[test]
    fn saturated_annulus() {
        let m = lebesgue_box(2, 0.0, 1.0, 12).unwrap().normalized();
        let t = 0.3;
        let all: f64 = (0..m.len())
            .flat_map(|i| (0..m.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| dist2(m.atom(i), m.atom(j)) >= t * t)
            .map(|(i, j)| m.weights()[i] * m.weights()[j])
            .sum();
        assert!((annulus_pair_mass(&m, t, 10.0) - all).abs() < 1e-12);
    }

    #[test]
    fn cantor_energy_below_dimension_is_stable() {
        let levels: Vec<_> = (10..=13).map(|k| cantor_measure(1.0 / 3.0, k).unwrap()).collect();
        let r = energy_refinement(&levels, 0.5, 1.05).unwrap();
        assert!((r.ratios.last().unwrap() - 1.0).abs() < 0.05, "{r:?}");
        assert!(!r.divergent);
    }
}
