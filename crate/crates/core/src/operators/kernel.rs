use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{bessel_i0_scaled, gauss_legendre, sphere_area, sphere_multiplier};
use crate::spectral::{lowpass_hat, lowpass_spatial, mollifier_hat, mollifier_spatial, SpectralGrid};

/// Default mollification scale in units of `1/freq_max`. At three cells the
/// mollifier multiplier has fallen to `e^{-9π} ≈ 5·10^{-13}` at the Nyquist
/// frequency.
pub const DEFAULT_EPS_CELLS: f64 = 3.0;

/// Standard mollification scale for a grid.
pub fn default_eps(grid: &SpectralGrid) -> f64 {
    DEFAULT_EPS_CELLS / grid.freq_max()
}

pub type MultiplierFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// Probability measure on the sphere of radius `t`.
    Sphere { t: f64 },
    /// `φ_j` with `φ̂_j(ξ) = φ̂(2^{-j}ξ)`.
    LowpassDyadic { j: u32 },
    /// Multiplier `|ξ|^{-α}`.
    Riesz { alpha: f64 },
    /// Spatial kernel `|x|^{-d+α}` on the unit ball.
    TruncatedRieszSpatial { alpha: f64 },
    /// Point mass at the origin (multiplier `1`).
    Dirac,
    CustomMultiplier { label: String },
}

/// A convolution kernel `λ` with its mollification scale `ε`.
#[derive(Clone, Serialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub kind: KernelKind,
    /// `None` selects [`default_eps`]; `Some(0.0)` disables mollification.
    pub mollify_eps: Option<f64>,
    #[serde(skip)]
    pub custom: Option<MultiplierFn>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("kind", &self.kind)
            .field("mollify_eps", &self.mollify_eps)
            .finish()
    }
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        KernelSpec {
            kind,
            mollify_eps: None,
            custom: None,
        }
    }

    pub fn sphere(t: f64) -> Self {
        Self::new(KernelKind::Sphere { t })
    }

    pub fn lowpass(j: u32) -> Self {
        Self::new(KernelKind::LowpassDyadic { j })
    }

    pub fn riesz(alpha: f64) -> Self {
        Self::new(KernelKind::Riesz { alpha })
    }

    pub fn truncated_riesz(alpha: f64) -> Self {
        Self::new(KernelKind::TruncatedRieszSpatial { alpha })
    }

    pub fn dirac() -> Self {
        Self::new(KernelKind::Dirac)
    }

    pub fn custom(label: &str, m: MultiplierFn) -> Self {
        KernelSpec {
            kind: KernelKind::CustomMultiplier {
                label: label.to_string(),
            },
            mollify_eps: None,
            custom: Some(m),
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.mollify_eps = Some(eps);
        self
    }

    pub fn eps(&self, grid: &SpectralGrid) -> f64 {
        self.mollify_eps.unwrap_or_else(|| default_eps(grid))
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        match self.kind {
            KernelKind::Sphere { t } if !(t > 0.0) => bad(format!("sphere radius {t} must be positive")),
            KernelKind::Riesz { alpha } | KernelKind::TruncatedRieszSpatial { alpha }
                if !(alpha > 0.0 && alpha < dim as f64) =>
            {
                bad(format!("Riesz exponent {alpha} outside (0, {dim})"))
            }
            _ => match self.mollify_eps {
                Some(e) if !(e >= 0.0 && e.is_finite()) => bad(format!("mollification scale {e} invalid")),
                _ => Ok(()),
            },
        }
    }

    /// Radius of the kernel's spatial support before mollification, if
    /// compact.
    pub fn support_radius(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Sphere { t } => Some(t),
            KernelKind::LowpassDyadic { j } => Some(2f64.powi(-(j as i32))),
            KernelKind::TruncatedRieszSpatial { .. } => Some(1.0),
            KernelKind::Dirac => Some(0.0),
            KernelKind::Riesz { .. } | KernelKind::CustomMultiplier { .. } => None,
        }
    }

    /// `λ̂` on every grid frequency, without the mollifier.
    pub fn multiplier(&self, grid: &SpectralGrid) -> Result<Vec<f64>> {
        self.validate(grid.dim())?;
        let d = grid.dim();
        let m = match &self.kind {
            KernelKind::Sphere { t } => grid.radial_multiplier(|r| sphere_multiplier(d, t * r)),
            KernelKind::LowpassDyadic { j } => {
                let s = 2f64.powi(-(*j as i32));
                grid.radial_multiplier(|r| lowpass_hat(d, s * r))
            }
            KernelKind::Riesz { alpha } => {
                let center = riesz_center_mean(d, *alpha, grid.freq_spacing());
                grid.radial_multiplier(|r| if r == 0.0 { center } else { r.powf(-alpha) })
            }
            KernelKind::TruncatedRieszSpatial { alpha } => {
                let table = TruncatedRieszHat::new(d, *alpha, grid.freq_max() * (d as f64).sqrt());
                grid.radial_multiplier(|r| table.eval(r))
            }
            KernelKind::Dirac => vec![1.0; grid.len()],
            KernelKind::CustomMultiplier { label } => {
                let f = self.custom.as_ref().ok_or_else(|| {
                    Error::Configuration(format!("custom multiplier '{label}' has no function"))
                })?;
                let m: Vec<f64> = (0..grid.len())
                    .map(|i| f(&grid.frequency(i)[..d]))
                    .collect();
                if let Some(i) = m.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Configuration(format!(
                        "multiplier '{label}' is singular at ξ = {:?} and has no principal-value rule",
                        &grid.frequency(i)[..d]
                    )));
                }
                m
            }
        };
        Ok(m)
    }

    /// `λ̂(ξ)·ρ̂(εξ)` on the grid.
    pub fn mollified_multiplier(&self, grid: &SpectralGrid) -> Result<Vec<f64>> {
        let eps = self.eps(grid);
        let mut m = self.multiplier(grid)?;
        if eps > 0.0 {
            let damp = grid.radial_multiplier(|r| mollifier_hat(r, eps));
            m.iter_mut().zip(&damp).for_each(|(a, b)| *a *= b);
        }
        Ok(m)
    }

    /// Radial profile of `λ∗ρ_ε` for the direct-summation path, or a
    /// configuration error for kernels without a spatial form.
    pub fn spatial_profile(&self, dim: usize, eps: f64) -> Result<SpatialProfile> {
        self.validate(dim)?;
        let need_eps = |what: &str| {
            Err(Error::Configuration(format!(
                "{what} has no pointwise spatial form without mollification"
            )))
        };
        Ok(match self.kind {
            KernelKind::Sphere { t } => {
                if eps == 0.0 {
                    return need_eps("the sphere measure");
                }
                SpatialProfile::MollifiedSphere { dim, t, eps }
            }
            KernelKind::Dirac => {
                if eps == 0.0 {
                    return need_eps("the point mass");
                }
                SpatialProfile::Closed(Arc::new(move |r| mollifier_spatial(dim, r, eps)))
            }
            KernelKind::LowpassDyadic { j } => {
                let s = 2f64.powi(j as i32);
                let base = move |r: f64| s.powi(dim as i32) * lowpass_spatial(dim, s * r);
                if eps == 0.0 {
                    SpatialProfile::Closed(Arc::new(base))
                } else {
                    SpatialProfile::table(dim, eps, 1.0 / s, 0.0, base)
                }
            }
            KernelKind::TruncatedRieszSpatial { alpha } => {
                let base = move |r: f64| if r <= 1.0 { r.powf(alpha - dim as f64) } else { 0.0 };
                if eps == 0.0 {
                    SpatialProfile::Closed(Arc::new(base))
                } else {
                    SpatialProfile::table(dim, eps, 1.0, alpha - 1.0, base)
                }
            }
            KernelKind::Riesz { .. } | KernelKind::CustomMultiplier { .. } => {
                return Err(Error::Configuration(
                    "kernel is defined by its multiplier only and has no spatial form".into(),
                ))
            }
        })
    }
}

/// Radial spatial kernel `K(|x|)`.
#[derive(Clone)]
pub enum SpatialProfile {
    MollifiedSphere { dim: usize, t: f64, eps: f64 },
    Closed(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Table { step: f64, values: Vec<f64>, r_max: f64 },
}

/// `e^{-z}` times the mean of `e^{z ω₁}` over the unit sphere.
fn sphere_exp_mean_scaled(dim: usize, z: f64) -> f64 {
    match dim {
        1 => 0.5 * (1.0 + (-2.0 * z).exp()),
        2 => bessel_i0_scaled(z),
        _ => {
            if z < 1e-8 {
                1.0 - z
            } else {
                -(-2.0 * z).exp_m1() / (2.0 * z)
            }
        }
    }
}

impl SpatialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            SpatialProfile::MollifiedSphere { dim, t, eps } => {
                let b = PI / (eps * eps);
                eps.powi(-(*dim as i32))
                    * (-b * (r - t) * (r - t)).exp()
                    * sphere_exp_mean_scaled(*dim, 2.0 * b * r * t)
            }
            SpatialProfile::Closed(f) => f(r),
            SpatialProfile::Table {
                step,
                values,
                r_max,
            } => {
                if r >= *r_max {
                    return 0.0;
                }
                let u = r / step;
                let i = (u.floor() as usize).min(values.len() - 2);
                let t = u - i as f64;
                values[i] * (1.0 - t) + values[i + 1] * t
            }
        }
    }

    /// Tabulates `λ∗ρ_ε` for a radial `λ` supported in `[0, q_max]` whose
    /// radial integrand behaves like `q^γ` at the origin.
    fn table(
        dim: usize,
        eps: f64,
        q_max: f64,
        gamma: f64,
        lambda: impl Fn(f64) -> f64,
    ) -> SpatialProfile {
        let reach = 7.0 * eps;
        let r_max = q_max + reach;
        let step = eps / 64.0;
        let npts = (r_max / step).ceil() as usize + 2;
        let (gx, gw) = gauss_legendre(8);
        let b = PI / (eps * eps);
        let area = sphere_area(dim);
        let integrand = |r: f64, q: f64| -> f64 {
            lambda(q)
                * q.powi(dim as i32 - 1)
                * (-b * (r - q) * (r - q)).exp()
                * sphere_exp_mean_scaled(dim, 2.0 * b * r * q)
        };
        let panel = |a: f64, c: f64, f: &dyn Fn(f64) -> f64| -> f64 {
            let n = ((c - a) / (0.25 * eps)).ceil().max(1.0) as usize;
            let h = (c - a) / n as f64;
            let mut acc = 0.0;
            for p in 0..n {
                let mid = a + (p as f64 + 0.5) * h;
                for (x, w) in gx.iter().zip(&gw) {
                    acc += w * 0.5 * h * f(mid + 0.5 * h * x);
                }
            }
            acc
        };
        let values = (0..npts)
            .map(|i| {
                let r = i as f64 * step;
                let lo = (r - reach).max(0.0);
                let hi = (r + reach).min(q_max);
                if hi <= lo {
                    return 0.0;
                }
                let total = if lo == 0.0 && gamma < 0.0 {
                    // q = hi·u^κ removes the q^γ singularity
                    let k = 1.0 / (gamma + 1.0);
                    panel(0.0, 1.0, &|u: f64| {
                        let q = hi * u.powf(k);
                        integrand(r, q) * hi * k * u.powf(k - 1.0)
                    })
                } else {
                    panel(lo, hi, &|q| integrand(r, q))
                };
                area * eps.powi(-(dim as i32)) * total
            })
            .collect();
        SpatialProfile::Table {
            step,
            values,
            r_max,
        }
    }
}

/// Mean of `|ξ|^{-α}` over the grid's central frequency cell
/// `[-Δ/2, Δ/2]^d`.
fn riesz_center_mean(dim: usize, alpha: f64, dxi: f64) -> f64 {
    let a = 0.5 * dxi;
    // mean of |u|^{-α} over [0, 1]^d, by integrating the radial part exactly
    let c = match dim {
        1 => 1.0 / (1.0 - alpha),
        2 => {
            let (x, w) = gauss_legendre(64);
            let h = PI / 8.0;
            2.0 * x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let th = h + h * xi;
                    wi * h * (1.0 / th.cos()).powf(2.0 - alpha) / (2.0 - alpha)
                })
                .sum::<f64>()
        }
        _ => {
            // octant in spherical angles; R(ω) = 1/max ω_i, split at the kinks
            let (x, w) = gauss_legendre(48);
            let quad = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
                let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                x.iter().zip(&w).map(|(xi, wi)| wi * h * f(c + h * xi)).sum::<f64>()
            };
            let radial = |th: f64, ph: f64| {
                let o = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                let m = o[0].max(o[1]).max(o[2]);
                m.powf(alpha - 3.0) / (3.0 - alpha) * th.sin()
            };
            let inner = |ph: f64| {
                // θ where the z-component stops being the largest
                let xy = ph.cos().max(ph.sin());
                let kink = (1.0 / xy).atan();
                quad(0.0, kink, &|th| radial(th, ph)) + quad(kink, PI / 2.0, &|th| radial(th, ph))
            };
            quad(0.0, PI / 4.0, &inner) + quad(PI / 4.0, PI / 2.0, &inner)
        }
    };
    c * a.powf(-alpha)
}

/// Tabulated radial transform of `|x|^{-d+α}χ_{|x|≤1}`.
struct TruncatedRieszHat {
    step: f64,
    values: Vec<f64>,
}

impl TruncatedRieszHat {
    fn new(dim: usize, alpha: f64, rho_max: f64) -> Self {
        let step = 1.0 / 32.0;
        let n = (rho_max / step).ceil() as usize + 4;
        let (gx, gw) = gauss_legendre(10);
        let area = sphere_area(dim);
        let panel = |a: f64, b: f64, n: usize, f: &dyn Fn(f64) -> f64| -> f64 {
            let h = (b - a) / n as f64;
            let mut acc = 0.0;
            for p in 0..n {
                let mid = a + (p as f64 + 0.5) * h;
                for (x, w) in gx.iter().zip(&gw) {
                    acc += w * 0.5 * h * f(mid + 0.5 * h * x);
                }
            }
            acc
        };
        // ∫_0^1 r^{α-1} σ̂(ρr) dr: r = r0·u^{1/α} on [0, r0], plain panels after
        let values = (0..n)
            .map(|i| {
                let rho = i as f64 * step;
                let r0 = 1.0 / (rho + 1.0);
                let head = panel(0.0, 1.0, 4, &|u| sphere_multiplier(dim, rho * r0 * u.powf(1.0 / alpha)))
                    * r0.powf(alpha)
                    / alpha;
                let tail = panel(r0, 1.0, 4 + rho.ceil() as usize, &|r| {
                    r.powf(alpha - 1.0) * sphere_multiplier(dim, rho * r)
                });
                area * (head + tail)
            })
            .collect();
        TruncatedRieszHat { step, values }
    }

    fn eval(&self, r: f64) -> f64 {
        let u = r / self.step;
        let i = (u.floor() as usize).clamp(1, self.values.len() - 3);
        let t = u - i as f64;
        let v = &self.values;
        let (tm, t1, t2) = (t + 1.0, t - 1.0, t - 2.0);
        -v[i - 1] * t * t1 * t2 / 6.0 + v[i] * tm * t1 * t2 / 2.0 - v[i + 1] * tm * t * t2 / 2.0
            + v[i + 2] * tm * t * t1 / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::integrate;

    #[test]
    fn riesz_center_mean_by_subsampling() {
        for (dim, alpha) in [(1, 0.4), (2, 1.2), (2, 0.8), (3, 1.5)] {
            let n: usize = [4000, 600, 80][dim - 1];
            let mut acc = 0.0;
            let total = n.pow(dim as u32);
            for idx in 0..total {
                let mut rest = idx;
                let mut r2 = 0.0;
                for _ in 0..dim {
                    let u = ((rest % n) as f64 + 0.5) / n as f64;
                    rest /= n;
                    r2 += u * u;
                }
                acc += r2.powf(-alpha / 2.0);
            }
            let sub = acc / total as f64;
            let exact = riesz_center_mean(dim, alpha, 2.0);
            assert!(((sub - exact) / exact).abs() < 2e-3, "d={dim}: {sub} vs {exact}");
        }
    }

    #[test]
    fn truncated_riesz_hat_at_zero_is_its_mass() {
        for (dim, alpha) in [(2, 1.2), (3, 0.6)] {
            let t = TruncatedRieszHat::new(dim, alpha, 10.0);
            assert!((t.eval(0.0) - sphere_area(dim) / alpha).abs() < 1e-10);
        }
    }

    #[test]
    fn mollified_profiles_integrate_to_kernel_mass() {
        for dim in 1..=3 {
            let eps = 0.05;
            let mass = |p: &SpatialProfile, rmax: f64| {
                integrate(|r| sphere_area(dim) * r.powi(dim as i32 - 1) * p.eval(r), 0.0, rmax, 2000)
            };
            let s = KernelSpec::sphere(0.5).spatial_profile(dim, eps).unwrap();
            assert!((mass(&s, 1.0) - 1.0).abs() < 1e-8, "sphere d={dim}");
            let l = KernelSpec::lowpass(1).spatial_profile(dim, eps).unwrap();
            assert!((mass(&l, 1.0) - 1.0).abs() < 1e-5, "lowpass d={dim}");
        }
        let r = KernelSpec::truncated_riesz(1.2).spatial_profile(2, 0.05).unwrap();
        let m = integrate(|q| 2.0 * PI * q * r.eval(q), 0.0, 1.4, 4000);
        assert!((m - 2.0 * PI / 1.2).abs() < 1e-3, "{m}");
        assert!(KernelSpec::riesz(1.0).spatial_profile(2, 0.1).is_err());
        assert!(KernelSpec::sphere(1.0).spatial_profile(2, 0.0).is_err());
    }
}
