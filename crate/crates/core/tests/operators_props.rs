use num_complex::Complex64;
use proptest::prelude::*;
use sphmax_core::measures::*;
use sphmax_core::operators::*;
use sphmax_core::spectral::{lowpass_hat, ComplexField, SpectralGrid};

fn rel_l2(a: &ComplexField, b: &ComplexField) -> f64 {
    let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.values.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn cantor2(depth: u32) -> DiscreteMeasure {
    let c = cantor_measure(0.25, depth).unwrap();
    product_measure(&[c.clone(), c]).unwrap().translate(&[-0.5, -0.5])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn averages_are_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, seed in 0u64..50, t in 0.1..0.8f64) {
        let grid = SpectralGrid::new(2, 128, 2.0).unwrap();
        let mu = uniform_ball_sample(2, 0.6, 300, seed).unwrap();
        let f = mu.sample(|x| x[0] * x[1]);
        let g = mu.sample(|x| (4.0 * x[0]).cos());
        let h: Vec<f64> = f.iter().zip(&g).map(|(u, v)| a * u + b * v).collect();
        let eps = default_eps(&grid);
        let avg = |w: &[f64]| Source::from_measure(w, &mu, &grid).unwrap().spherical_average(t, eps).unwrap();
        let lhs = avg(&h);
        let rhs = avg(&f).scaled(Complex64::new(a, 0.0)).added(&avg(&g).scaled(Complex64::new(b, 0.0)));
        let err = lhs.added(&rhs.scaled(Complex64::new(-1.0, 0.0))).l2_norm();
        prop_assert!(err <= 1e-10 * (1.0 + rhs.l2_norm()));
    }

    #[test]
    fn dilation_identity(c in 0.3..2.5f64, t in 0.1..0.4f64) {
        // Grids with half widths L and cL share grid points up to the factor c.
        let g = SpectralGrid::new(2, 128, 2.0).unwrap();
        let gc = SpectralGrid::new(2, 128, 2.0 * c).unwrap();
        let mu = cantor2(4);
        let f = mu.sample(|x| 1.0 + x[0]);
        let eps = default_eps(&g);
        let base = Source::from_measure(&f, &mu, &g).unwrap().spherical_average(t, eps).unwrap();
        let dilated = Source::from_measure(&f, &mu.dilate(c), &gc)
            .unwrap()
            .spherical_average(c * t, c * eps)
            .unwrap();
        let rescaled = dilated.scaled(Complex64::new(c * c, 0.0));
        prop_assert!(rel_l2(&rescaled, &base) <= 1e-6, "{}", rel_l2(&rescaled, &base));
    }
}

#[test]
fn positive_kernels_preserve_sign() {
    let grid = SpectralGrid::new(2, 256, 2.0).unwrap();
    let mu = cantor2(5);
    let f = mu.sample(|x| 1.0 + x[0] * x[0]);
    let src = Source::from_measure(&f, &mu, &grid).unwrap();
    let eps = default_eps(&grid);
    let mut outputs = vec![src.spherical_average(0.3, eps).unwrap()];
    outputs.push(src.convolve(&KernelSpec::lowpass(3)).unwrap());
    // The bare low-pass multiplier is cut off at the Nyquist frequency; the
    // sign is kept once the discarded tail is negligible.
    for j in 0..=3 {
        if lowpass_hat(2, grid.freq_max() / 2f64.powi(j)) <= 1e-11 {
            outputs.push(src.dyadic_operator(j as u32).unwrap());
        }
    }
    assert_eq!(outputs.len(), 3);
    for (k, out) in outputs.iter().enumerate() {
        let min = out.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
        let max = out.values.iter().map(|v| v.re).fold(0.0, f64::max);
        assert!(min >= -1e-10, "{k}: {min} (max {max})");
    }
}

#[test]
fn constant_density_averages_to_one() {
    let grid = SpectralGrid::new(2, 256, 2.0).unwrap();
    let mu = lebesgue_box(2, -1.0, 1.0, 256).unwrap();
    let f = vec![4.0 / mu.total_mass(); mu.len()];
    let out = Source::from_measure(&f, &mu, &grid).unwrap().spherical_average(0.25, default_eps(&grid)).unwrap();
    // density 4·(1/4) = 1 on [-1, 1]², so A_t is 1 well inside the square
    for (i, v) in out.values.iter().enumerate() {
        let x = grid.point(i);
        if x[0].abs() < 0.5 && x[1].abs() < 0.5 {
            assert!((v.re - 1.0).abs() < 1e-3, "{x:?} {v}");
        }
    }
}

#[test]
fn spectral_path_matches_direct_quadrature() {
    let grid = SpectralGrid::new(2, 256, 2.0).unwrap();
    let mu = sphere_measure(2, 0.4, 400).unwrap();
    let f = mu.sample(|x| 2.0 + x[1]);
    let src = Source::from_measure(&f, &mu, &grid).unwrap();
    let eps = default_eps(&grid);
    for kernel in [KernelSpec::lowpass(2), KernelSpec::dirac(), KernelSpec::sphere(0.3)] {
        let k = kernel.clone().with_eps(eps);
        let fast = src.convolve(&k).unwrap();
        let profile = k.spatial_profile(2, eps).unwrap();
        let idx: Vec<usize> = (0..grid.len()).step_by(97).collect();
        let pts: Vec<Vec<f64>> = idx.iter().map(|&i| grid.point(i)[..2].to_vec()).collect();
        let slow = direct_sum(&profile, &f, &mu, &pts);
        let num: f64 = idx.iter().zip(&slow).map(|(&i, s)| (fast.values[i].re - s).powi(2)).sum();
        let den: f64 = slow.iter().map(|s| s * s).sum();
        assert!((num / den).sqrt() <= 1e-3, "{:?}: {}", k.kind, (num / den).sqrt());
    }
}

#[test]
fn maximal_function_dominates_each_average() {
    let grid = SpectralGrid::new(2, 256, 4.0).unwrap();
    let mu = cantor2(4).dilate(0.5);
    let f = vec![1.0; mu.len()];
    let src = Source::from_measure(&f, &mu, &grid).unwrap();
    let eps = default_eps(&grid);
    let ts = geometric_t_grid(8);
    let m = src.maximal_function(&ts, eps).unwrap();
    for &t in &[ts[0], ts[3], ts[7]] {
        let a = src.spherical_average(t, eps).unwrap();
        assert!(m.values.iter().zip(&a.values).all(|(x, y)| x.re >= y.norm() - 1e-15));
    }
    assert!(src.maximal_function(&[0.5], eps).is_err());
}

#[test]
fn reach_and_radius_checks() {
    let grid = SpectralGrid::new(2, 128, 1.0).unwrap();
    let mu = cantor2(3);
    let src = Source::from_measure(&vec![1.0; mu.len()], &mu, &grid).unwrap();
    assert!(src.spherical_average(0.6, 0.01).is_err());
    assert!(src.spherical_average(0.5, 0.05).is_err());
    assert!(src.spherical_average(0.2, default_eps(&grid)).is_ok());
}

#[test]
fn riesz_row_sum_levels() {
    // Row sums of the Riesz kernel on the planar Cantor set: contributions
    // 2^{m(d−α)} μ(annulus_m) behave like 2^{m(s−α)} with s = 1.
    let mu = cantor2(9);
    let x = mu.atom(0).to_vec();
    for (alpha, want) in [(0.7, 0.3), (1.3, -0.3)] {
        let rep = riesz_row_sum(&mu, alpha, &x, 16);
        let c = &rep.contributions;
        let lo = 2;
        let hi = 8;
        let slope = (c[hi] / c[lo]).log2() / (hi - lo) as f64;
        assert!((slope - want).abs() < 0.1, "alpha {alpha}: {slope} {c:?}");
    }
}
