//! Radial frequency cutoffs: the Littlewood–Paley bump `β`, its completion
//! `β₀`, the low-pass profile `φ̂` and the Gaussian mollifier.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::SpectralGrid;
use crate::special::{gauss_legendre, sphere_area, sphere_multiplier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    LittlewoodPaleyAnnulus,
    LowPass,
    Mollifier,
}

/// A radial frequency profile; every profile here is `C^∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub kind: CutoffKind,
    /// Radii outside of which the profile vanishes (`∞` for the mollifier).
    pub support: (f64, f64),
}

impl CutoffSpec {
    pub fn littlewood_paley() -> Self {
        CutoffSpec {
            kind: CutoffKind::LittlewoodPaleyAnnulus,
            support: (0.5, 4.0),
        }
    }

    pub fn low_pass() -> Self {
        CutoffSpec {
            kind: CutoffKind::LowPass,
            support: (0.0, LOWPASS_TABLE_MAX),
        }
    }

    pub fn mollifier() -> Self {
        CutoffSpec {
            kind: CutoffKind::Mollifier,
            support: (0.0, f64::INFINITY),
        }
    }

    pub fn profile(&self, dim: usize, r: f64) -> f64 {
        match self.kind {
            CutoffKind::LittlewoodPaleyAnnulus => beta(r),
            CutoffKind::LowPass => lowpass_hat(dim, r),
            CutoffKind::Mollifier => mollifier_hat(r, 1.0),
        }
    }
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Annular bump: `1` on `[1, 2]`, zero outside `(1/2, 4)`.
pub fn beta(r: f64) -> f64 {
    if r <= 1.0 {
        smooth_step(2.0 * r - 1.0)
    } else if r <= 2.0 {
        1.0
    } else {
        1.0 - smooth_step(0.5 * (r - 2.0))
    }
}

/// Largest `j` with `2^{j+2} ≤ freq_max`, i.e. the finest annulus the grid
/// represents without aliasing (0 if none fits).
pub(crate) fn finest_level(grid: &SpectralGrid) -> u32 {
    let mut j = 0;
    while 2f64.powi(j as i32 + 3) <= grid.freq_max() {
        j += 1;
    }
    j
}

/// `β₀ = 1 − Σ_{j=1}^{J} β(2^{-j}|ξ|)` on the grid, `J` the finest level.
pub fn beta0_field(grid: &SpectralGrid) -> Vec<f64> {
    let top = finest_level(grid);
    grid.radial_multiplier(|r| {
        let mut acc = 0.0;
        for j in 1..=top {
            acc += beta(r * 2f64.powi(-(j as i32)));
        }
        1.0 - acc
    })
}

/// `ρ̂(εr) = e^{-π ε² r²}`.
pub fn mollifier_hat(r: f64, eps: f64) -> f64 {
    (-PI * eps * eps * r * r).exp()
}

/// `ρ_ε(x) = ε^{-d} e^{-π|x|²/ε²}` at `|x| = r`.
pub fn mollifier_spatial(dim: usize, r: f64, eps: f64) -> f64 {
    eps.powi(-(dim as i32)) * (-PI * r * r / (eps * eps)).exp()
}

/// Radial bump supported in `|x| < 1/2`.
fn psi(r: f64) -> f64 {
    let q = 4.0 * r * r;
    if q >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - q)).exp()
    }
}

const LOWPASS_TABLE_MAX: f64 = 64.0;
const HAT_STEP: f64 = 1.0 / 64.0;
const SPACE_STEP: f64 = 1.0 / 1024.0;

struct LowPassTables {
    psi_hat: Vec<f64>,
    phi: Vec<f64>,
}

fn tables(dim: usize) -> &'static LowPassTables {
    static T: [OnceLock<LowPassTables>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    T[dim - 1].get_or_init(|| build_tables(dim))
}

fn build_tables(dim: usize) -> LowPassTables {
    let (x, w) = gauss_legendre(12);
    let area = sphere_area(dim);
    let hat = |rho: f64| -> f64 {
        let panels = 4 + rho.ceil() as usize;
        let dr = 0.5 / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let c = (p as f64 + 0.5) * dr;
            for (xi, wi) in x.iter().zip(&w) {
                let r = c + 0.5 * dr * xi;
                acc += wi * 0.5 * dr * psi(r) * r.powi(dim as i32 - 1) * sphere_multiplier(dim, rho * r);
            }
        }
        area * acc
    };
    let n_hat = (LOWPASS_TABLE_MAX / HAT_STEP) as usize + 3;
    let raw: Vec<f64> = (0..n_hat).map(|i| hat(i as f64 * HAT_STEP)).collect();
    let mass = raw[0];
    let psi_hat: Vec<f64> = raw.iter().map(|v| v / mass).collect();

    let (gx, gw) = gauss_legendre(64);
    let quad = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        if b <= a {
            return 0.0;
        }
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        gx.iter().zip(&gw).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
    };
    let conv = |r: f64| -> f64 {
        match dim {
            1 => quad((r - 0.5).max(-0.5), (r + 0.5).min(0.5), &|y| psi(y) * psi(r - y)),
            2 => quad((r - 0.5).max(0.0), 0.5, &|rho| {
                let cmax = if r * rho == 0.0 {
                    PI
                } else {
                    ((r * r + rho * rho - 0.25) / (2.0 * r * rho)).clamp(-1.0, 1.0).acos()
                };
                let inner = quad(0.0, cmax, &|th| {
                    psi((r * r + rho * rho - 2.0 * r * rho * th.cos()).max(0.0).sqrt())
                });
                2.0 * rho * psi(rho) * inner
            }),
            _ => quad((r - 0.5).max(0.0), 0.5, &|rho| {
                let inner = if r == 0.0 {
                    2.0 * psi(rho)
                } else {
                    quad((r - rho).abs(), (r + rho).min(0.5), &|q| psi(q) * q) / (r * rho)
                };
                2.0 * PI * rho * rho * psi(rho) * inner
            }),
        }
    };
    let n_sp = (1.0 / SPACE_STEP) as usize + 3;
    let phi: Vec<f64> = (0..n_sp)
        .map(|i| conv(i as f64 * SPACE_STEP) / (mass * mass))
        .collect();
    LowPassTables { psi_hat, phi }
}

/// Four-point Lagrange interpolation on a uniform table starting at 0.
fn interp(table: &[f64], step: f64, r: f64) -> f64 {
    let u = r / step;
    let i = (u.floor() as usize).clamp(1, table.len() - 3);
    let t = u - i as f64;
    let (a, b, c, d) = (table[i - 1], table[i], table[i + 1], table[i + 2]);
    let (tm, t1, t2) = (t + 1.0, t - 1.0, t - 2.0);
    -a * t * t1 * t2 / 6.0 + b * tm * t1 * t2 / 2.0 - c * tm * t * t2 / 2.0 + d * tm * t * t1 / 6.0
}

/// Low-pass multiplier `φ̂(r) = (ψ̂(r)/ψ̂(0))² ≥ 0` with `φ̂(0) = 1`, where
/// `ψ` is a radial bump on the ball of radius `1/2`; `φ = ψ∗ψ/(∫ψ)²` is
/// therefore supported in the unit ball.
pub fn lowpass_hat(dim: usize, r: f64) -> f64 {
    let r = r.abs();
    if r == 0.0 {
        return 1.0;
    }
    if r >= LOWPASS_TABLE_MAX {
        return 0.0;
    }
    let v = interp(&tables(dim).psi_hat, HAT_STEP, r);
    v * v
}

/// Spatial low-pass kernel `φ` at `|x| = r`.
pub fn lowpass_spatial(dim: usize, r: f64) -> f64 {
    let r = r.abs();
    if r >= 1.0 {
        return 0.0;
    }
    interp(&tables(dim).phi, SPACE_STEP, r).max(0.0)
}
