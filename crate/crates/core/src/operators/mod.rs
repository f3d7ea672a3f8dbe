//! Convolution operators applied to `fμ` through the frequency domain:
//! spherical averages, the single-scale maximal function, dyadic low-pass
//! operators, mollified distributions and Riesz-type kernels.

mod kernel;
mod riesz;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, param, Result};
use crate::measures::{BoundingBox, DiscreteMeasure};
use crate::spectral::{measure_fourier, nufft_type2, ComplexField, FieldDomain, SpectralGrid};

pub use kernel::{default_eps, KernelKind, KernelSpec, MultiplierFn, SpatialProfile, DEFAULT_EPS_CELLS};
pub use riesz::{riesz_row_sum, RowSumReport};

/// Transform of a source `fμ` on a grid, together with the box containing
/// the atoms that carry mass.
#[derive(Debug, Clone)]
pub struct Source {
    pub fhat: ComplexField,
    pub support: BoundingBox,
}

impl Source {
    pub fn from_measure(f: &[f64], mu: &DiscreteMeasure, grid: &SpectralGrid) -> Result<Self> {
        let fhat = measure_fourier(f, mu, grid)?;
        let d = mu.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for ((p, w), v) in mu.atoms().zip(mu.weights()).zip(f) {
            if w * v != 0.0 {
                for k in 0..d {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        if lo[0] > hi[0] {
            lo.fill(0.0);
            hi.fill(0.0);
        }
        Ok(Source {
            fhat,
            support: BoundingBox { lo, hi },
        })
    }

    /// Source for an absolutely continuous `fμ` given by its density at the
    /// grid points (the lattice measure with weights `h^d`).
    pub fn from_density(grid: &SpectralGrid, density: &[f64]) -> Result<Self> {
        let field = ComplexField::from_real(*grid, density, FieldDomain::Space)?;
        let d = grid.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (i, v) in density.iter().enumerate() {
            if *v != 0.0 {
                let x = grid.point(i);
                for k in 0..d {
                    lo[k] = lo[k].min(x[k]);
                    hi[k] = hi[k].max(x[k]);
                }
            }
        }
        if lo[0] > hi[0] {
            lo.fill(0.0);
            hi.fill(0.0);
        }
        Ok(Source {
            fhat: field.to_frequency(),
            support: BoundingBox { lo, hi },
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.fhat.grid
    }

    /// Fails if a kernel of spatial reach `reach` would wrap around the
    /// periodic box.
    pub fn check_reach(&self, reach: f64) -> Result<()> {
        let l = self.grid().box_half_width();
        let lo = self.support.lo.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        let hi = self.support.hi.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        if lo - reach < -l || hi + reach > l {
            return domain(format!(
                "support [{lo}, {hi}] widened by the kernel reach {reach} leaves the box [-{l}, {l}]^d; \
                 the periodic transform would wrap around"
            ));
        }
        Ok(())
    }

    /// `F⁻¹[m·f̂μ]` on the grid.
    pub fn apply(&self, m: &[f64]) -> ComplexField {
        self.fhat.multiplied(m).to_space()
    }

    /// Evaluates `F⁻¹[m·f̂μ]` at arbitrary points.
    pub fn apply_at(&self, m: &[f64], coords: &[f64]) -> Vec<f64> {
        let g = self.grid();
        let prod: Vec<Complex64> = self.fhat.values.iter().zip(m).map(|(v, w)| v * w).collect();
        let c = g.freq_spacing().powi(g.dim() as i32);
        nufft_type2(g, &prod, coords).iter().map(|v| v.re * c).collect()
    }

    /// `A_t(fμ)` mollified at scale `eps`.
    pub fn spherical_average(&self, t: f64, eps: f64) -> Result<ComplexField> {
        let l = self.grid().box_half_width();
        if !(t > 0.0 && t <= 0.5 * l) {
            return domain(format!("radius {t} outside (0, L/2] for the box half width {l}"));
        }
        self.check_reach(t + 2.0 * eps)?;
        let k = KernelSpec::sphere(t).with_eps(eps);
        Ok(self.apply(&k.mollified_multiplier(self.grid())?))
    }

    pub fn maximal_function(&self, t_grid: &[f64], eps: f64) -> Result<ComplexField> {
        check_t_grid(t_grid)?;
        let mut out: Option<Vec<f64>> = None;
        for &t in t_grid {
            let a = self.spherical_average(t, eps)?;
            match &mut out {
                None => out = Some(a.values.iter().map(|v| v.norm()).collect()),
                Some(acc) => acc
                    .iter_mut()
                    .zip(&a.values)
                    .for_each(|(m, v)| *m = m.max(v.norm())),
            }
        }
        ComplexField::from_real(*self.grid(), &out.unwrap(), FieldDomain::Space)
    }

    pub fn dyadic_operator(&self, j: u32) -> Result<ComplexField> {
        let g = self.grid();
        if 2f64.powi(j as i32) > g.freq_max() / 4.0 {
            return domain(format!(
                "scale 2^{j} exceeds a quarter of the Nyquist frequency {}",
                g.freq_max()
            ));
        }
        self.check_reach(2f64.powi(-(j as i32)))?;
        Ok(self.apply(&KernelSpec::lowpass(j).multiplier(g)?))
    }

    pub fn convolve(&self, kernel: &KernelSpec) -> Result<ComplexField> {
        let g = self.grid();
        if let Some(r) = kernel.support_radius() {
            self.check_reach(r + 2.0 * kernel.eps(g))?;
        }
        Ok(self.apply(&kernel.mollified_multiplier(g)?))
    }
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return param("empty radius grid");
    }
    if t_grid.windows(2).any(|w| w[0] > w[1]) {
        return param("radius grid must be sorted");
    }
    if t_grid.iter().any(|t| !(1.0..=2.0).contains(t)) {
        return param("radii of the maximal function must lie in [1, 2]");
    }
    Ok(())
}

/// `count` radii in `[1, 2]` in geometric progression.
pub fn geometric_t_grid(count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![1.0],
        _ => (0..count)
            .map(|k| 2f64.powf(k as f64 / (count - 1) as f64))
            .collect(),
    }
}

/// Default number of radii for the maximal function.
pub const DEFAULT_T_SAMPLES: usize = 64;

/// `A_t f = σ_t∗(fμ)` on the grid, mollified at the default scale.
pub fn spherical_average(
    f: &[f64],
    mu: &DiscreteMeasure,
    t: f64,
    grid: &SpectralGrid,
) -> Result<ComplexField> {
    Source::from_measure(f, mu, grid)?.spherical_average(t, default_eps(grid))
}

/// `max_{t ∈ t_grid} |A_t f|` pointwise.
pub fn maximal_function(
    f: &[f64],
    mu: &DiscreteMeasure,
    t_grid: &[f64],
    grid: &SpectralGrid,
) -> Result<ComplexField> {
    check_t_grid(t_grid)?;
    Source::from_measure(f, mu, grid)?.maximal_function(t_grid, default_eps(grid))
}

/// `D_j f = φ_j∗(fμ)`.
pub fn dyadic_operator(
    f: &[f64],
    mu: &DiscreteMeasure,
    j: u32,
    grid: &SpectralGrid,
) -> Result<ComplexField> {
    Source::from_measure(f, mu, grid)?.dyadic_operator(j)
}

/// `T_{λ^ε} f = (λ∗ρ_ε)∗(fμ)`.
pub fn convolve_distribution(
    kernel: &KernelSpec,
    f: &[f64],
    mu: &DiscreteMeasure,
    grid: &SpectralGrid,
) -> Result<ComplexField> {
    Source::from_measure(f, mu, grid)?.convolve(kernel)
}

/// Direct summation `Σ_i f_i w_i K(|x − x_i|)` at the given points.
pub fn direct_sum(profile: &SpatialProfile, f: &[f64], mu: &DiscreteMeasure, points: &[Vec<f64>]) -> Vec<f64> {
    use rayon::prelude::*;
    points
        .par_iter()
        .map(|x| {
            mu.atoms()
                .zip(mu.weights())
                .zip(f)
                .filter(|((_, w), v)| **w * **v != 0.0)
                .map(|((p, w), v)| {
                    let r = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    w * v * profile.eval(r)
                })
                .sum()
        })
        .collect()
}

/// `(∫ |f̂μ(ξ)|² |σ̂(tξ)|² dξ)^{1/2} = ‖σ_t∗(fμ)‖_{L²}` over the grid
/// frequencies.
pub fn sphere_l2_norm(fhat: &ComplexField, t: f64) -> Result<f64> {
    if fhat.domain != FieldDomain::Frequency {
        return param("sphere L² norm needs a frequency field");
    }
    let m = KernelSpec::sphere(t).multiplier(&fhat.grid)?;
    let s: f64 = fhat
        .values
        .iter()
        .zip(&m)
        .map(|(v, w)| v.norm_sqr() * w * w)
        .sum();
    Ok((s * fhat.cell_volume()).sqrt())
}

/// Self-describing record of one operator run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub operator: String,
    pub kernel: Option<KernelSpec>,
    pub parameters: serde_json::Value,
    pub grid: SpectralGrid,
    pub eps: f64,
    pub measure_digest: String,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
