use std::sync::Arc;

use proptest::prelude::*;
use sphmax_core::measures::*;
use sphmax_core::norms::*;
use sphmax_core::operators::{KernelSpec, SpatialProfile};
use sphmax_core::spectral::SpectralGrid;

fn cantor2(depth: u32) -> DiscreteMeasure {
    let c = cantor_measure(0.25, depth).unwrap();
    product_measure(&[c.clone(), c]).unwrap().translate(&[-0.5, -0.5])
}

fn riesz_profile(alpha: f64, d: usize) -> SpatialProfile {
    SpatialProfile::Closed(Arc::new(move |r: f64| r.powf(alpha - d as f64)))
}

fn pairing(u: &[f64], v: &[f64], m: &DiscreteMeasure) -> f64 {
    u.iter().zip(v).zip(m.weights()).map(|((a, b), w)| a * b * w).sum()
}

#[test]
fn estimates_are_certified_and_reproducible() {
    let mu = cantor2(3);
    let nu = uniform_ball_sample(2, 0.6, 80, 1).unwrap();
    let grid = SpectralGrid::new(2, 128, 2.0).unwrap();
    let conv = Convolution::new(&KernelSpec::sphere(0.3), &mu, &nu, grid).unwrap();
    let direct = DirectKernel::new(&riesz_profile(1.5, 2), &mu, &nu).unwrap();
    for op in [&conv as &dyn Operator, &direct] {
        for (family, p) in [(Family::RandomAtoms, 1.5), (Family::Bumps, 3.0), (Family::PowerIteration, 2.0)] {
            let est = opnorm_lower(op, p, &family, 11).unwrap();
            let again = certify(op, &est).unwrap();
            assert!((again - est.value).abs() <= 1e-10 * est.value, "{:?}", est.family);
            assert!(est.ratios.iter().all(|(_, r)| *r <= est.value));
            let repeat = opnorm_lower(op, p, &family, 11).unwrap();
            assert_eq!(repeat, est);
        }
    }
}

#[test]
fn extremizers_family_uses_given_witnesses() {
    let mu = cantor2(3);
    let op = Identity { mu: &mu };
    let ones = vec![1.0; mu.len()];
    let est = opnorm_lower(&op, 2.0, &Family::Extremizers(vec![ones.clone()]), 0).unwrap();
    assert_eq!(est.family, FamilyTag::PaperExtremizer);
    assert!((est.value - 1.0).abs() < 1e-14);
    assert!(opnorm_lower(&op, 2.0, &Family::Extremizers(vec![vec![1.0; 3]]), 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ratio_is_scale_invariant(c in 1e-3..1e3f64, p in 1.0..6.0f64, seed in 0u64..100) {
        let mu = uniform_ball_sample(2, 0.5, 60, seed).unwrap();
        let op = DirectKernel::new(&riesz_profile(1.2, 2), &mu, &mu).unwrap();
        let f = mu.sample(|x| 1.0 + x[0] - 0.3 * x[1]);
        let fc: Vec<f64> = f.iter().map(|v| c * v).collect();
        let a = ratio(&op, &f, p).unwrap().unwrap();
        let b = ratio(&op, &fc, p).unwrap().unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn direct_kernel_adjoint(seed in 0u64..100) {
        let mu = uniform_ball_sample(2, 0.5, 40, seed).unwrap();
        let nu = uniform_ball_sample(2, 0.7, 30, seed + 1).unwrap();
        let op = DirectKernel::new(&riesz_profile(0.8, 2), &mu, &nu).unwrap();
        let f = mu.sample(|x| x[0].cos());
        let g = nu.sample(|x| x[1] + 0.5);
        let lhs = pairing(&op.apply(&f).unwrap(), &g, &nu);
        let rhs = pairing(&f, &op.adjoint(&g).unwrap(), &mu);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
}

#[test]
fn lp_norm_of_constants() {
    let mu = cantor2(4);
    for p in [1.0, 2.0, 3.5] {
        let v = lp_norm(&vec![2.0; mu.len()], &mu, p);
        assert!((v - 2.0).abs() < 1e-12);
    }
}

// Riesz operators on the planar Cantor set (s_μ = s_ν = 1, d = 2): bounded
// on L² above the critical exponent d − s = 1, growing under refinement below.
#[test]
fn riesz_refinement_above_and_below_critical() {
    let levels = [2u32, 3, 4, 5];
    let estimate = |alpha: f64, k: u32| {
        let mu = cantor2(k);
        let op = DirectKernel::new(&riesz_profile(alpha, 2), &mu, &mu).unwrap();
        opnorm_lower(&op, 2.0, &Family::PowerIteration, 0).unwrap().value
    };
    let stable: Vec<f64> = levels.iter().map(|&k| estimate(1.4, k)).collect();
    for w in stable.windows(2) {
        let r = w[1] / w[0];
        assert!((0.5..=2.0).contains(&r), "{stable:?}");
    }
    let growing: Vec<f64> = levels.iter().map(|&k| estimate(0.6, k)).collect();
    let factor = growing[levels.len() - 1] / growing[0];
    assert!(factor >= 2f64.powf(0.05 * levels.len() as f64), "{growing:?}");
    assert!(growing.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn growth_rate_needs_three_points() {
    assert!(growth_rate(&[1, 2], &[1.0, 2.0]).is_err());
    let fit = growth_rate(&[2, 3, 4, 5], &[4.0, 8.0, 16.0, 32.0]).unwrap();
    assert!((fit.slope - 1.0).abs() < 1e-12);
}

#[test]
fn oversized_dense_kernel_is_a_resource_error() {
    let mu = uniform_ball_sample(2, 0.5, 7000, 0).unwrap();
    let e = DirectKernel::new(&riesz_profile(1.0, 2), &mu, &mu).err().unwrap();
    assert!(matches!(e, sphmax_core::Error::Resource(_)));
}
