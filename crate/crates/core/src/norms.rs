//! Empirical `L^p(μ) → L^p(ν)` operator-norm lower bounds.
//!
//! Every estimate is the ratio `‖Tf‖_{L^p(ν)}/‖f‖_{L^p(μ)}` of an explicit
//! witness `f`, so it is a certified lower bound for the operator norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::fit::{log2_fit, FitReport};
use crate::measures::{dist2, DiscreteMeasure};
use crate::operators::{KernelSpec, Source, SpatialProfile};
use crate::spectral::SpectralGrid;

/// `(Σ w_i |v_i|^p)^{1/p}`; `p = ∞` gives the maximum over atoms of
/// positive weight.
pub fn lp_norm(values: &[f64], mu: &DiscreteMeasure, p: f64) -> f64 {
    assert_eq!(values.len(), mu.len());
    assert!(p >= 1.0, "p must be at least 1");
    if p.is_infinite() {
        return values
            .iter()
            .zip(mu.weights())
            .filter(|(_, w)| **w > 0.0)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max);
    }
    let s: f64 = values
        .iter()
        .zip(mu.weights())
        .map(|(v, w)| w * v.abs().powf(p))
        .sum();
    s.powf(1.0 / p)
}

/// Linear map from functions on the atoms of `source()` to functions on
/// the atoms of `target()`.
pub trait Operator: Sync {
    fn source(&self) -> &DiscreteMeasure;
    fn target(&self) -> &DiscreteMeasure;
    fn apply(&self, f: &[f64]) -> Result<Vec<f64>>;
    /// Adjoint for the `L²(μ)`, `L²(ν)` pairings.
    fn adjoint(&self, g: &[f64]) -> Result<Vec<f64>>;
}

/// `f ↦ f` on a single measure.
pub struct Identity<'a> {
    pub mu: &'a DiscreteMeasure,
}

impl Operator for Identity<'_> {
    fn source(&self) -> &DiscreteMeasure {
        self.mu
    }
    fn target(&self) -> &DiscreteMeasure {
        self.mu
    }
    fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(f.to_vec())
    }
    fn adjoint(&self, g: &[f64]) -> Result<Vec<f64>> {
        Ok(g.to_vec())
    }
}

/// `T f(y) = (λ^ε∗(fμ))(y)` for `y` in the support of `ν`, computed through
/// the spectral path.
pub struct Convolution<'a> {
    pub mu: &'a DiscreteMeasure,
    pub nu: &'a DiscreteMeasure,
    pub grid: SpectralGrid,
    multiplier: Vec<f64>,
    reach: Option<f64>,
}

impl<'a> Convolution<'a> {
    pub fn new(
        kernel: &KernelSpec,
        mu: &'a DiscreteMeasure,
        nu: &'a DiscreteMeasure,
        grid: SpectralGrid,
    ) -> Result<Self> {
        if mu.dim() != grid.dim() || nu.dim() != grid.dim() {
            return param("measure and grid dimensions differ");
        }
        Ok(Convolution {
            mu,
            nu,
            grid,
            multiplier: kernel.mollified_multiplier(&grid)?,
            reach: kernel.support_radius().map(|r| r + 2.0 * kernel.eps(&grid)),
        })
    }

    fn run(&self, f: &[f64], from: &DiscreteMeasure, to: &DiscreteMeasure) -> Result<Vec<f64>> {
        let src = Source::from_measure(f, from, &self.grid)?;
        if let Some(r) = self.reach {
            src.check_reach(r)?;
        }
        Ok(src.apply_at(&self.multiplier, to.coords()))
    }
}

impl Operator for Convolution<'_> {
    fn source(&self) -> &DiscreteMeasure {
        self.mu
    }
    fn target(&self) -> &DiscreteMeasure {
        self.nu
    }
    fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.run(f, self.mu, self.nu)
    }
    fn adjoint(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.run(g, self.nu, self.mu)
    }
}

/// Dense direct-summation operator `T f(y_j) = Σ_i K(|y_j − x_i|) f_i w_i`
/// over pairs of distinct points.
pub struct DirectKernel<'a> {
    pub mu: &'a DiscreteMeasure,
    pub nu: &'a DiscreteMeasure,
    /// Row-major `len(ν) × len(μ)`.
    matrix: Vec<f64>,
}

impl<'a> DirectKernel<'a> {
    pub fn new(profile: &SpatialProfile, mu: &'a DiscreteMeasure, nu: &'a DiscreteMeasure) -> Result<Self> {
        let cells = mu.len().saturating_mul(nu.len());
        if cells > 40_000_000 {
            return Err(Error::Resource(format!(
                "dense kernel with {cells} entries is too large"
            )));
        }
        let rows: Vec<Vec<f64>> = (0..nu.len())
            .into_par_iter()
            .map(|j| {
                let y = nu.atom(j);
                mu.atoms()
                    .zip(mu.weights())
                    .map(|(x, w)| {
                        let r = dist2(x, y).sqrt();
                        if r == 0.0 {
                            0.0
                        } else {
                            profile.eval(r) * w
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(DirectKernel {
            mu,
            nu,
            matrix: rows.concat(),
        })
    }
}

impl Operator for DirectKernel<'_> {
    fn source(&self) -> &DiscreteMeasure {
        self.mu
    }
    fn target(&self) -> &DiscreteMeasure {
        self.nu
    }
    fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = self.mu.len();
        Ok(self
            .matrix
            .par_chunks(n)
            .map(|row| row.iter().zip(f).map(|(k, v)| k * v).sum())
            .collect())
    }
    fn adjoint(&self, g: &[f64]) -> Result<Vec<f64>> {
        // K(x_i, y_j) w^ν_j, from the stored K w^μ_i
        let n = self.mu.len();
        let mut out = vec![0.0; n];
        for (j, row) in self.matrix.chunks(n).enumerate() {
            let gj = g[j] * self.nu.weights()[j];
            for (o, k) in out.iter_mut().zip(row) {
                *o += k * gj;
            }
        }
        for (o, w) in out.iter_mut().zip(self.mu.weights()) {
            *o = if *w > 0.0 { *o / w } else { 0.0 };
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    RandomAtoms,
    Bumps,
    PaperExtremizer,
    PowerIterationP2,
}

/// Witness families.
#[derive(Debug, Clone)]
pub enum Family {
    /// 512 seeded witnesses of `±1` on atom subsets.
    RandomAtoms,
    /// Gaussians at 32 seeded support points with 4 widths.
    Bumps,
    /// Caller-supplied witnesses, typically the extremal functions of the
    /// counterexample constructions.
    Extremizers(Vec<Vec<f64>>),
    /// Power iteration on `T*T` (`p = 2` only).
    PowerIteration,
}

impl Family {
    pub fn tag(&self) -> FamilyTag {
        match self {
            Family::RandomAtoms => FamilyTag::RandomAtoms,
            Family::Bumps => FamilyTag::Bumps,
            Family::Extremizers(_) => FamilyTag::PaperExtremizer,
            Family::PowerIteration => FamilyTag::PowerIterationP2,
        }
    }
}

pub const RANDOM_WITNESSES: usize = 512;
pub const BUMP_CENTERS: usize = 32;
pub const BUMP_WIDTHS: usize = 4;
pub const POWER_MAX_ITERATIONS: usize = 200;
pub const POWER_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpNormEstimate {
    pub p: f64,
    pub value: f64,
    pub family: FamilyTag,
    pub iterations: usize,
    pub seed: u64,
    /// Index of the best witness within the family.
    pub witness_index: usize,
    pub witness: Vec<f64>,
    /// `(index, ratio)` for every witness with nonzero norm.
    pub ratios: Vec<(usize, f64)>,
}

impl OpNormEstimate {
    /// CSV rows `family,seed,index,ratio`.
    pub fn csv(&self) -> String {
        let tag = serde_json::to_value(self.family).unwrap();
        let tag = tag.as_str().unwrap();
        let mut s = String::from("family,seed,index,ratio\n");
        for (i, r) in &self.ratios {
            s.push_str(&format!("{tag},{},{i},{r:e}\n", self.seed));
        }
        s
    }
}

/// `‖Tf‖_{L^p(ν)}/‖f‖_{L^p(μ)}`, or `None` for a zero witness.
pub fn ratio(op: &dyn Operator, f: &[f64], p: f64) -> Result<Option<f64>> {
    let den = lp_norm(f, op.source(), p);
    if den == 0.0 || !den.is_finite() {
        return Ok(None);
    }
    let tf = op.apply(f)?;
    Ok(Some(lp_norm(&tf, op.target(), p) / den))
}

fn random_witness(mu: &DiscreteMeasure, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let n = mu.len();
    let center = mu.atom(rng.gen_range(0..n)).to_vec();
    let diam = mu.bbox().diameter().max(f64::MIN_POSITIVE);
    let radius = diam * 2f64.powf(-rng.gen_range(0.0..8.0));
    let signed = index % 2 == 1;
    mu.atoms()
        .map(|x| {
            let inside = dist2(x, &center) <= radius * radius;
            let s = if signed && rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            if inside {
                s
            } else {
                0.0
            }
        })
        .collect()
}

fn bump_witnesses(mu: &DiscreteMeasure, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diam = mu.bbox().diameter().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(BUMP_CENTERS * BUMP_WIDTHS);
    for _ in 0..BUMP_CENTERS {
        let c = mu.atom(rng.gen_range(0..mu.len())).to_vec();
        for w in 0..BUMP_WIDTHS {
            let width = diam * 2f64.powi(-(2 * w as i32 + 1));
            out.push(
                mu.atoms()
                    .map(|x| (-dist2(x, &c) / (2.0 * width * width)).exp())
                    .collect(),
            );
        }
    }
    out
}

/// Best witness ratio over a family.
pub fn opnorm_lower(op: &dyn Operator, p: f64, family: &Family, seed: u64) -> Result<OpNormEstimate> {
    if !(p >= 1.0) {
        return param(format!("p = {p} must be at least 1"));
    }
    if op.source().is_empty() {
        return Err(Error::Estimation("source measure has no atoms".into()));
    }
    if let Family::PowerIteration = family {
        return power_iteration(op, p, seed);
    }
    let witnesses: Vec<Vec<f64>> = match family {
        Family::RandomAtoms => (0..RANDOM_WITNESSES)
            .map(|q| random_witness(op.source(), seed, q))
            .collect(),
        Family::Bumps => bump_witnesses(op.source(), seed),
        Family::Extremizers(w) => {
            if let Some(bad) = w.iter().find(|v| v.len() != op.source().len()) {
                return param(format!(
                    "witness of length {} for {} atoms",
                    bad.len(),
                    op.source().len()
                ));
            }
            w.clone()
        }
        Family::PowerIteration => unreachable!(),
    };
    let results: Vec<Option<f64>> = witnesses
        .par_iter()
        .map(|f| ratio(op, f, p))
        .collect::<Result<_>>()?;
    let ratios: Vec<(usize, f64)> = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|v| (i, v)))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for &(i, r) in &ratios {
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((i, r));
        }
    }
    let (witness_index, value) =
        best.ok_or_else(|| Error::Estimation("every witness has zero norm".into()))?;
    Ok(OpNormEstimate {
        p,
        value,
        family: family.tag(),
        iterations: witnesses.len(),
        seed,
        witness_index,
        witness: witnesses[witness_index].clone(),
        ratios,
    })
}

fn power_iteration(op: &dyn Operator, p: f64, seed: u64) -> Result<OpNormEstimate> {
    if p != 2.0 {
        return param("power iteration estimates the p = 2 norm only");
    }
    let mu = op.source();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f: Vec<f64> = (0..mu.len()).map(|_| 1.0 + 0.1 * rng.gen::<f64>()).collect();
    let mut ratios = Vec::new();
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    let mut last = f64::NAN;
    let mut iterations = 0;
    for it in 0..POWER_MAX_ITERATIONS {
        iterations = it + 1;
        let norm = lp_norm(&f, mu, 2.0);
        if norm == 0.0 {
            break;
        }
        f.iter_mut().for_each(|v| *v /= norm);
        let tf = op.apply(&f)?;
        let r = lp_norm(&tf, op.target(), 2.0);
        ratios.push((it, r));
        if best.as_ref().is_none_or(|(_, b, _)| r > *b) {
            best = Some((it, r, f.clone()));
        }
        if (r - last).abs() <= POWER_TOLERANCE * r {
            break;
        }
        last = r;
        f = op.adjoint(&tf)?;
    }
    let (witness_index, value, witness) =
        best.ok_or_else(|| Error::Estimation("power iteration hit a zero vector".into()))?;
    if value == 0.0 {
        return Err(Error::Estimation("operator annihilates the start vector".into()));
    }
    Ok(OpNormEstimate {
        p,
        value,
        family: FamilyTag::PowerIterationP2,
        iterations,
        seed,
        witness_index,
        witness,
        ratios,
    })
}

/// Re-evaluates the stored witness of an estimate.
pub fn certify(op: &dyn Operator, est: &OpNormEstimate) -> Result<f64> {
    ratio(op, &est.witness, est.p)?
        .ok_or_else(|| Error::Estimation("stored witness has zero norm".into()))
}

/// Least-squares slope of `log₂` norms against `j`.
pub fn growth_rate(j_values: &[i64], norms: &[f64]) -> Result<FitReport> {
    if j_values.len() < 3 || norms.len() != j_values.len() {
        return Err(Error::Fit(format!(
            "growth rate needs at least 3 matching points, got {} and {}",
            j_values.len(),
            norms.len()
        )));
    }
    let xs: Vec<f64> = j_values.iter().map(|j| *j as f64).collect();
    log2_fit(&xs, norms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{cantor_measure, lebesgue_box};

    #[test]
    fn lp_norm_basics() {
        let m = lebesgue_box(1, 0.0, 2.0, 10).unwrap();
        let ones = vec![1.0; 10];
        for p in [1.0, 2.0, 3.5] {
            assert!((lp_norm(&ones, &m, p) - 2f64.powf(1.0 / p)).abs() < 1e-14);
        }
        assert_eq!(lp_norm(&ones, &m, f64::INFINITY), 1.0);
        let mut a = vec![0.0; 10];
        let mut b = vec![0.0; 10];
        a[..4].copy_from_slice(&[1.0, -2.0, 0.5, 3.0]);
        b[6..].copy_from_slice(&[2.0, 1.0, -1.0, 0.25]);
        let v: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let l = |x: &[f64]| lp_norm(x, &m, 2.0).powi(2);
        assert!((l(&v) - l(&a) - l(&b)).abs() < 1e-12);
    }

    #[test]
    fn identity_and_scaling() {
        let m = cantor_measure(0.25, 6).unwrap();
        let op = Identity { mu: &m };
        for fam in [Family::RandomAtoms, Family::Bumps] {
            let e = opnorm_lower(&op, 2.0, &fam, 3).unwrap();
            assert!(e.value >= 1.0 - 1e-6);
            assert_eq!(certify(&op, &e).unwrap(), e.value);
        }
        let f = random_witness(&m, 1, 1);
        let g: Vec<f64> = f.iter().map(|v| 7.5 * v).collect();
        let (a, b) = (ratio(&op, &f, 3.0).unwrap().unwrap(), ratio(&op, &g, 3.0).unwrap().unwrap());
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn zero_family_is_estimation_error() {
        let m = cantor_measure(0.25, 3).unwrap();
        let op = Identity { mu: &m };
        let fam = Family::Extremizers(vec![vec![0.0; m.len()]]);
        assert!(matches!(opnorm_lower(&op, 2.0, &fam, 0), Err(Error::Estimation(_))));
    }

    #[test]
    fn growth_rate_examples() {
        let js = [1, 2, 3, 4];
        let n: Vec<f64> = js.iter().map(|j| 2f64.powf(*j as f64 / 2.0)).collect();
        assert!((growth_rate(&js, &n).unwrap().slope - 0.5).abs() < 1e-12);
        assert!(growth_rate(&js, &[3.0; 4]).unwrap().slope.abs() < 1e-12);
        assert!(growth_rate(&[1, 2], &[1.0, 2.0]).is_err());
    }
}
