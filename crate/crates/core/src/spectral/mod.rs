//! Fourier analysis of measures on uniform periodic grids.
//!
//! Convention: `f̂(ξ) = ∫ e^{-2πi x·ξ} f(x) dx`. A grid with `n` points per
//! axis on `[-L, L)^d` has spacing `h = 2L/n`, frequencies `ξ_k = k/(2L)` for
//! `k ∈ [-n/2, n/2)` and Nyquist frequency `n/(4L)`. Values of both spatial and
//! frequency fields are stored row-major, last axis fastest; spatial index `m`
//! is the point `-L + m·h` and frequency index `k` uses standard FFT order.

mod analysis;
mod cutoff;
mod fft;
pub mod io;
mod nufft;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

pub use analysis::{
    annulus_energy, annulus_energy_field, annulus_energy_growth, decay_fit, littlewood_paley,
    measure_fourier, measure_fourier_direct, strichartz_energy, strichartz_energy_field,
};
pub use cutoff::{
    beta, beta0_field, lowpass_hat, lowpass_spatial, mollifier_hat, mollifier_spatial,
    CutoffKind, CutoffSpec,
};
pub(crate) use cutoff::finest_level;
pub(crate) use nufft::{nufft_type1, nufft_type2};

/// Uniform periodic grid on `[-L, L)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    dim: usize,
    n_per_axis: usize,
    box_half_width: f64,
}

impl SpectralGrid {
    pub fn new(dim: usize, n_per_axis: usize, box_half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return param(format!("grid dimension must be 1, 2 or 3, got {dim}"));
        }
        if !n_per_axis.is_power_of_two() || n_per_axis < 4 {
            return param(format!("points per axis must be a power of two ≥ 4, got {n_per_axis}"));
        }
        if !(box_half_width > 0.0 && box_half_width.is_finite()) {
            return param(format!("box half width must be positive, got {box_half_width}"));
        }
        let total = (n_per_axis as u128).pow(dim as u32);
        if total > 1 << 26 {
            return Err(crate::Error::Resource(format!(
                "{n_per_axis}^{dim} grid points exceed the supported field size"
            )));
        }
        Ok(SpectralGrid {
            dim,
            n_per_axis,
            box_half_width,
        })
    }

    /// 4096 points on `[-2, 2]` in one dimension, `1024²` in two and `128³`
    /// in three, all on the box `[-2, 2]^d`.
    pub fn default_for(dim: usize) -> Result<Self> {
        let n = match dim {
            1 => 4096,
            2 => 1024,
            3 => 128,
            _ => return param(format!("grid dimension must be 1, 2 or 3, got {dim}")),
        };
        Self::new(dim, n, 2.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn box_half_width(&self) -> f64 {
        self.box_half_width
    }

    pub fn freq_max(&self) -> f64 {
        self.n_per_axis as f64 / (4.0 * self.box_half_width)
    }

    /// Spatial spacing `h`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.box_half_width / self.n_per_axis as f64
    }

    /// Frequency spacing `1/(2L)`.
    pub fn freq_spacing(&self) -> f64 {
        0.5 / self.box_half_width
    }

    pub fn len(&self) -> usize {
        self.n_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis indices of a flat index (unused trailing axes are zero).
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let n = self.n_per_axis;
        let mut out = [0; 3];
        let mut rest = idx;
        for a in (0..self.dim).rev() {
            out[a] = rest % n;
            rest /= n;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi[..self.dim]
            .iter()
            .fold(0, |acc, m| acc * self.n_per_axis + m)
    }

    /// Signed frequency index of an FFT-order index.
    pub fn signed(&self, k: usize) -> i64 {
        let n = self.n_per_axis as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = -self.box_half_width + m[a] as f64 * h;
        }
        x
    }

    pub fn frequency(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let dxi = self.freq_spacing();
        let mut xi = [0.0; 3];
        for a in 0..self.dim {
            xi[a] = self.signed(m[a]) as f64 * dxi;
        }
        xi
    }

    /// Integer squared frequency radius `|k|²`.
    pub fn k2(&self, idx: usize) -> i64 {
        let m = self.multi_index(idx);
        (0..self.dim).map(|a| self.signed(m[a]).pow(2)).sum()
    }

    pub fn freq_norm(&self, idx: usize) -> f64 {
        (self.k2(idx) as f64).sqrt() * self.freq_spacing()
    }

    /// Samples a radial multiplier `m(|ξ|)` on every frequency, evaluating
    /// `m` once per distinct radius.
    pub fn radial_multiplier(&self, m: impl Fn(f64) -> f64) -> Vec<f64> {
        let half = (self.n_per_axis / 2) as i64;
        let max_k2 = self.dim as i64 * half * half;
        let mut present = vec![false; max_k2 as usize + 1];
        let k2s: Vec<i64> = (0..self.len()).map(|i| self.k2(i)).collect();
        for k in &k2s {
            present[*k as usize] = true;
        }
        let dxi = self.freq_spacing();
        let cache: Vec<f64> = present
            .iter()
            .enumerate()
            .map(|(k2, p)| if *p { m((k2 as f64).sqrt() * dxi) } else { 0.0 })
            .collect();
        k2s.iter().map(|k| cache[*k as usize]).collect()
    }

    /// Samples a spatial function on every grid point.
    pub fn sample_space(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| f(&self.point(i)[..self.dim]))
            .collect()
    }

    pub(crate) fn inside_box(&self, x: &[f64]) -> bool {
        x.iter()
            .all(|v| *v >= -self.box_half_width && *v <= self.box_half_width)
    }
}

/// Whether a field holds spatial samples or frequency samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldDomain {
    Space,
    Frequency,
}

/// Complex samples on a [`SpectralGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: SpectralGrid,
    pub values: Vec<Complex64>,
    pub domain: FieldDomain,
}

impl ComplexField {
    pub fn new(grid: SpectralGrid, values: Vec<Complex64>, domain: FieldDomain) -> Result<Self> {
        if values.len() != grid.len() {
            return param(format!(
                "{} values do not fill a grid of {} points",
                values.len(),
                grid.len()
            ));
        }
        Ok(ComplexField {
            grid,
            values,
            domain,
        })
    }

    pub fn zeros(grid: SpectralGrid, domain: FieldDomain) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            domain,
        }
    }

    pub fn from_real(grid: SpectralGrid, values: &[f64], domain: FieldDomain) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
            domain,
        )
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Cell volume of the domain the values live on.
    pub fn cell_volume(&self) -> f64 {
        let c = match self.domain {
            FieldDomain::Space => self.grid.spacing(),
            FieldDomain::Frequency => self.grid.freq_spacing(),
        };
        c.powi(self.grid.dim() as i32)
    }

    /// Discrete `L²` norm `(Σ |v|² · cell)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise product with a real multiplier.
    pub fn multiplied(&self, m: &[f64]) -> ComplexField {
        assert_eq!(m.len(), self.values.len());
        ComplexField {
            grid: self.grid,
            values: self.values.iter().zip(m).map(|(v, w)| v * w).collect(),
            domain: self.domain,
        }
    }

    pub fn scaled(&self, c: Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            domain: self.domain,
        }
    }

    pub fn added(&self, other: &ComplexField) -> ComplexField {
        assert_eq!(self.grid, other.grid);
        assert_eq!(self.domain, other.domain);
        ComplexField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            domain: self.domain,
        }
    }

    /// Continuous-normalized transform of a spatial field.
    pub fn to_frequency(&self) -> ComplexField {
        match self.domain {
            FieldDomain::Frequency => self.clone(),
            FieldDomain::Space => {
                let mut v = self.values.clone();
                fft::fft_nd(&mut v, self.grid.dim(), self.grid.n_per_axis(), false);
                let c = self.grid.spacing().powi(self.grid.dim() as i32);
                apply_parity(&self.grid, &mut v, c);
                ComplexField {
                    grid: self.grid,
                    values: v,
                    domain: FieldDomain::Frequency,
                }
            }
        }
    }

    /// Inverse of [`ComplexField::to_frequency`].
    pub fn to_space(&self) -> ComplexField {
        match self.domain {
            FieldDomain::Space => self.clone(),
            FieldDomain::Frequency => {
                let mut v = self.values.clone();
                let c = self.grid.freq_spacing().powi(self.grid.dim() as i32);
                apply_parity(&self.grid, &mut v, c);
                fft::fft_nd(&mut v, self.grid.dim(), self.grid.n_per_axis(), true);
                ComplexField {
                    grid: self.grid,
                    values: v,
                    domain: FieldDomain::Space,
                }
            }
        }
    }
}

/// Multiplies by `c·(-1)^{k_1+…+k_d}`, the phase from the box offset `-L`.
fn apply_parity(grid: &SpectralGrid, v: &mut [Complex64], c: f64) {
    for (i, x) in v.iter_mut().enumerate() {
        let m = grid.multi_index(i);
        let odd = m[..grid.dim()].iter().sum::<usize>() % 2 == 1;
        *x *= if odd { -c } else { c };
    }
}
