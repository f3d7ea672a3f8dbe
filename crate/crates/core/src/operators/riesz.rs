use serde::{Deserialize, Serialize};

use crate::fit::log2_fit;
use crate::measures::DiscreteMeasure;

/// Dyadic row sum of the Riesz kernel around one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSumReport {
    /// `contributions[m] = 2^{m(d−α)} μ{y : 2^{-m} ≤ |x−y| < 2^{-m+1}}`;
    /// level 0 also collects everything at distance at least 1.
    pub contributions: Vec<f64>,
    pub total: f64,
    /// `2^{slope}` of a least-squares fit of `log₂` contributions over the
    /// levels `1..=level_cap` that carry mass.
    pub level_ratio: Option<f64>,
}

/// `Σ_{m ≤ level_cap} 2^{m(d−α)} μ(shell_m(x))`. Atoms closer to `x` than
/// `2^{-level_cap}` are left out.
pub fn riesz_row_sum(mu: &DiscreteMeasure, alpha: f64, x: &[f64], level_cap: u32) -> RowSumReport {
    let d = mu.dim() as f64;
    let cap = level_cap as usize;
    let mut mass = vec![0.0; cap + 1];
    for (p, w) in mu.atoms().zip(mu.weights()) {
        let r = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if r == 0.0 {
            continue;
        }
        let m = if r >= 1.0 { 0 } else { (-r.log2()).floor() as usize + 1 };
        if m <= cap {
            mass[m] += w;
        }
    }
    let contributions: Vec<f64> = mass
        .iter()
        .enumerate()
        .map(|(m, v)| 2f64.powf(m as f64 * (d - alpha)) * v)
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (1..=cap)
        .filter(|m| contributions[*m] > 0.0)
        .map(|m| (m as f64, contributions[m]))
        .unzip();
    let level_ratio = if xs.len() >= 3 {
        log2_fit(&xs, &ys).ok().map(|f| 2f64.powf(f.slope))
    } else {
        None
    };
    RowSumReport {
        total: contributions.iter().sum(),
        contributions,
        level_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{cantor_measure, product_measure};

    #[test]
    fn full_exponent_counts_mass() {
        let c = cantor_measure(0.25, 5).unwrap();
        let m = product_measure(&[c.clone(), c]).unwrap();
        let x = m.atom(0).to_vec();
        let r = riesz_row_sum(&m, 2.0, &x, 30);
        assert!((r.total - (1.0 - m.weights()[0])).abs() < 1e-12);
    }
}
