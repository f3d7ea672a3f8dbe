use std::f64::consts::PI;

use num_complex::Complex64;

use super::cutoff::{beta, beta0_field, finest_level, lowpass_hat, mollifier_hat};
use super::{nufft_type1, ComplexField, CutoffKind, CutoffSpec, FieldDomain, SpectralGrid};
use crate::error::{domain, param, Error, Result};
use crate::fit::{least_squares, FitReport};
use crate::measures::DiscreteMeasure;

pub(crate) fn check_source(f: &[f64], mu: &DiscreteMeasure, grid: &SpectralGrid) -> Result<()> {
    if mu.dim() != grid.dim() {
        return param(format!(
            "measure dimension {} does not match grid dimension {}",
            mu.dim(),
            grid.dim()
        ));
    }
    if f.len() != mu.len() {
        return param(format!("{} function values for {} atoms", f.len(), mu.len()));
    }
    if let Some(i) = mu.atoms().position(|p| !grid.inside_box(p)) {
        return domain(format!(
            "atom {i} at {:?} lies outside the grid box [-{L}, {L}]^d",
            mu.atom(i),
            L = grid.box_half_width()
        ));
    }
    Ok(())
}

/// `ξ ↦ Σ_i f(x_i) w_i e^{-2πi x_i·ξ}` on every grid frequency, through a
/// nonuniform FFT. Agrees with [`measure_fourier_direct`] to about `1e-8`
/// relative to `Σ|f_i| w_i`.
pub fn measure_fourier(f: &[f64], mu: &DiscreteMeasure, grid: &SpectralGrid) -> Result<ComplexField> {
    check_source(f, mu, grid)?;
    let c: Vec<Complex64> = f
        .iter()
        .zip(mu.weights())
        .map(|(v, w)| Complex64::new(v * w, 0.0))
        .collect();
    let values = nufft_type1(grid, mu.coords(), &c);
    ComplexField::new(*grid, values, FieldDomain::Frequency)
}

/// Direct nonuniform sum at arbitrary frequencies.
pub fn measure_fourier_direct(f: &[f64], mu: &DiscreteMeasure, xis: &[Vec<f64>]) -> Vec<Complex64> {
    xis.iter()
        .map(|xi| {
            mu.atoms()
                .zip(mu.weights())
                .zip(f)
                .map(|((x, w), v)| {
                    let ph: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
                    Complex64::from_polar(v * w, -2.0 * PI * ph)
                })
                .sum()
        })
        .collect()
}

fn require_frequency(field: &ComplexField) -> Result<()> {
    if field.domain != FieldDomain::Frequency {
        return param("operation needs a field in frequency representation");
    }
    Ok(())
}

/// Fits the log of the maximum modulus on the dyadic shells
/// `2^m ≤ |ξ| < 2^{m+1}` against `log 2^m`, using the `shell_count` finest
/// shells that lie below the Nyquist frequency. The reported slope is the
/// decay exponent `α̂` (the negated regression slope).
pub fn decay_fit(field: &ComplexField, shell_count: usize) -> Result<FitReport> {
    require_frequency(field)?;
    let g = field.grid;
    let mut top = 0usize;
    while 2f64.powi(top as i32 + 1) <= g.freq_max() {
        top += 1;
    }
    let first = top.saturating_sub(shell_count);
    let mut maxes = vec![0.0f64; top];
    for (i, v) in field.values.iter().enumerate() {
        let r = g.freq_norm(i);
        if r < 1.0 {
            continue;
        }
        let m = r.log2().floor() as usize;
        if m < top {
            maxes[m] = maxes[m].max(v.norm());
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = (first..top)
        .filter(|m| maxes[*m] > 0.0)
        .map(|m| (m as f64, maxes[m].log2()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::Fit(format!("only {} usable frequency shells", xs.len())));
    }
    let mut fit = least_squares(&xs, &ys)?;
    fit.slope = -fit.slope;
    Ok(fit)
}

/// `r^{-(d−s)} ∫_{|ξ|≤r} |F(ξ)|² dξ` as a midpoint sum.
pub fn strichartz_energy_field(field: &ComplexField, r: f64, s: f64) -> Result<f64> {
    require_frequency(field)?;
    let g = field.grid;
    if r < 1.0 {
        return param(format!("Strichartz radius must be ≥ 1, got {r}"));
    }
    if r > g.freq_max() {
        return domain(format!("radius {r} exceeds the Nyquist frequency {}", g.freq_max()));
    }
    let dk = r / g.freq_spacing();
    let limit = dk * dk * (1.0 + 1e-12);
    let sum: f64 = field
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| (g.k2(*i) as f64) <= limit)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    Ok(sum * field.cell_volume() * r.powf(-(g.dim() as f64 - s)))
}

pub fn strichartz_energy(
    f: &[f64],
    mu: &DiscreteMeasure,
    grid: &SpectralGrid,
    r: f64,
    s: f64,
) -> Result<f64> {
    if r > grid.freq_max() {
        return domain(format!("radius {r} exceeds the Nyquist frequency {}", grid.freq_max()));
    }
    strichartz_energy_field(&measure_fourier(f, mu, grid)?, r, s)
}

/// Multiplier of the `j`-th projection for a cutoff family on `grid`.
pub(crate) fn projection_multiplier(
    grid: &SpectralGrid,
    j: u32,
    cutoff: &CutoffSpec,
) -> Result<Vec<f64>> {
    let scale = 2f64.powi(-(j as i32));
    match cutoff.kind {
        CutoffKind::LittlewoodPaleyAnnulus => {
            let top = finest_level(grid);
            if j > top {
                return domain(format!(
                    "annulus 2^{j}·[1/2, 4] exceeds the Nyquist frequency {} (finest level {top})",
                    grid.freq_max()
                ));
            }
            if j == 0 {
                Ok(beta0_field(grid))
            } else {
                Ok(grid.radial_multiplier(|r| beta(r * scale)))
            }
        }
        CutoffKind::LowPass => {
            if 2f64.powi(j as i32) > grid.freq_max() / 4.0 {
                return domain(format!(
                    "low-pass scale 2^{j} exceeds a quarter of the Nyquist frequency {}",
                    grid.freq_max()
                ));
            }
            let d = grid.dim();
            Ok(grid.radial_multiplier(|r| lowpass_hat(d, r * scale)))
        }
        CutoffKind::Mollifier => Ok(grid.radial_multiplier(|r| mollifier_hat(r * scale, 1.0))),
    }
}

/// `P̂_j F(ξ) = F(ξ)·β(2^{-j}ξ)`, with `β₀` completing the partition of unity
/// over the levels the grid resolves at `j = 0`.
pub fn littlewood_paley(field: &ComplexField, j: u32, cutoff: &CutoffSpec) -> Result<ComplexField> {
    require_frequency(field)?;
    Ok(field.multiplied(&projection_multiplier(&field.grid, j, cutoff)?))
}

/// `∫ |F(ξ)|² β(2^{-j}ξ) dξ`.
pub fn annulus_energy_field(field: &ComplexField, j: u32) -> Result<f64> {
    require_frequency(field)?;
    let m = projection_multiplier(&field.grid, j, &CutoffSpec::littlewood_paley())?;
    Ok(field
        .values
        .iter()
        .zip(&m)
        .map(|(v, b)| v.norm_sqr() * b)
        .sum::<f64>()
        * field.cell_volume())
}

pub fn annulus_energy(f: &[f64], nu: &DiscreteMeasure, grid: &SpectralGrid, j: u32) -> Result<f64> {
    if j > finest_level(grid) {
        return domain(format!("level {j} is not resolved by the grid"));
    }
    annulus_energy_field(&measure_fourier(f, nu, grid)?, j)
}

/// Least-squares growth exponent of `log₂` annulus energies against `j`.
pub fn annulus_energy_growth(field: &ComplexField, levels: &[u32]) -> Result<(Vec<f64>, FitReport)> {
    let energies = levels
        .iter()
        .map(|j| annulus_energy_field(field, *j))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = levels.iter().map(|j| *j as f64).collect();
    let fit = crate::fit::log2_fit(&xs, &energies)?;
    Ok((energies, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{dirac, lebesgue_box, sphere_measure};

    #[test]
    fn dirac_transform_is_one() {
        let g = SpectralGrid::new(2, 64, 1.0).unwrap();
        let d = dirac(&[0.0, 0.0]).unwrap();
        let f = measure_fourier(&[1.0], &d, &g).unwrap();
        for v in &f.values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-7);
        }
        let fit = decay_fit(&f, 4).unwrap();
        assert!(fit.slope.abs() < 0.02);
    }

    #[test]
    fn outside_box_is_domain_error() {
        let g = SpectralGrid::new(1, 64, 1.0).unwrap();
        let d = dirac(&[1.5]).unwrap();
        assert!(matches!(measure_fourier(&[1.0], &d, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn unit_interval_sinc() {
        let g = SpectralGrid::new(1, 256, 2.0).unwrap();
        let m = lebesgue_box(1, 0.0, 1.0, 20000).unwrap();
        let f = measure_fourier(&vec![1.0; m.len()], &m, &g).unwrap();
        for i in 0..g.len() {
            let xi = g.frequency(i)[0];
            if xi.abs() > g.freq_max() / 4.0 {
                continue;
            }
            let want = if xi == 0.0 { 1.0 } else { ((PI * xi).sin() / (PI * xi)).abs() };
            // midpoint cells h = 5e-5 give a relative sinc error of (πξh)²/24
            assert!((f.values[i].norm() - want).abs() < 1e-6, "xi={xi}");
        }
    }

    #[test]
    fn circle_decay() {
        let g = SpectralGrid::new(2, 256, 2.0).unwrap();
        let s = sphere_measure(2, 1.0, 4096).unwrap();
        let f = measure_fourier(&vec![1.0; s.len()], &s, &g).unwrap();
        let fit = decay_fit(&f, 6).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn strichartz_plancherel_and_zero() {
        let g = SpectralGrid::new(2, 256, 2.0).unwrap();
        let m = lebesgue_box(2, -0.5, 0.5, 128).unwrap();
        let ones = vec![1.0; m.len()];
        let e = strichartz_energy(&vec![0.0; m.len()], &m, &g, 4.0, 2.0).unwrap();
        assert_eq!(e, 0.0);
        let f = measure_fourier(&ones, &m, &g).unwrap();
        assert!(strichartz_energy_field(&f, 0.5, 2.0).is_err());
        assert!(strichartz_energy_field(&f, 100.0, 2.0).is_err());
        let e = strichartz_energy_field(&f, 30.0, 2.0).unwrap();
        assert!((e - 1.0).abs() < 0.02, "{e}");
    }

    #[test]
    fn partition_of_unity() {
        for (dim, n) in [(1, 4096), (2, 256), (3, 64)] {
            let g = SpectralGrid::new(dim, n, 2.0).unwrap();
            let top = finest_level(&g);
            let mut acc = beta0_field(&g);
            for j in 1..=top {
                let m = projection_multiplier(&g, j, &CutoffSpec::littlewood_paley()).unwrap();
                acc.iter_mut().zip(&m).for_each(|(a, b)| *a += b);
            }
            assert!(acc.iter().all(|v| (v - 1.0).abs() <= 1e-12));
            assert!(projection_multiplier(&g, top + 1, &CutoffSpec::littlewood_paley()).is_err());
        }
    }
}
