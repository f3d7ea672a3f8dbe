use proptest::prelude::*;
use sphmax_core::exponents::*;

/// Printed large-p condition, evaluated directly in p.
fn holds(d: u32, s_mu: f64, s_nu: f64, p: f64) -> bool {
    let df = d as f64;
    df - s_mu + (s_mu - s_nu) / p < (df - 2.0) / p + eps_p(p).unwrap()
}

/// Bisection in ln p for the supremum of the p >= 2 where the condition holds.
fn p_upper_oracle(d: u32, s_mu: f64, s_nu: f64) -> Option<f64> {
    let big = 1e13;
    if !holds(d, s_mu, s_nu, 2.0 + 1e-12) {
        return None;
    }
    if holds(d, s_mu, s_nu, big) {
        return Some(f64::INFINITY);
    }
    let (mut lo, mut hi) = (2.0_f64.ln(), big.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if holds(d, s_mu, s_nu, mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((0.5 * (lo + hi)).exp())
}

fn case_i_params() -> impl Strategy<Value = (u32, f64, f64)> {
    (3u32..=6, 0.0..1.0f64, 0.0..1.0f64).prop_map(|(d, a, b)| {
        let df = d as f64;
        // s_mu in (2, d], s_nu in (d + 2 - s_mu, d]
        let s_mu = 2.0 + 1e-6 + a * (df - 2.0 - 1e-6);
        let lo = df + 2.0 - s_mu + 1e-6;
        let s_nu = lo + b * (df - lo);
        (d, s_mu, s_nu)
    })
}

fn case_iii_params() -> impl Strategy<Value = (u32, f64, f64)> {
    (2u32..=6, 1e-9..1.0f64, 1e-9..1.0f64).prop_map(|(d, a, b)| {
        let df = d as f64;
        let s_mu = df - 0.25 + a * 0.25;
        let lo = (3.0 * df + 1.5 - 3.0 * s_mu).max(0.0);
        let hi = (df + 2.0 - s_mu).min(df);
        let s_nu = lo + b * (hi - lo);
        (d, s_mu, s_nu)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, max_global_rejects: 1 << 20, ..ProptestConfig::default() })]

    #[test]
    fn conjugate_exponent(p in 1.0001..1e6f64, d in 2u32..6) {
        let params = Params::new(d, 1.0, 1.0, p).unwrap();
        let q = params.p_prime();
        prop_assert!((1.0 / p + 1.0 / q - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eps_nonnegative(p in 2.0..1e7f64) {
        prop_assert!(eps_p(p).unwrap() >= 0.0);
    }

    #[test]
    fn p_upper_matches_bisection((d, s_mu, s_nu) in case_i_params()) {
        let closed = p_upper(d, s_mu, s_nu);
        let oracle = p_upper_oracle(d, s_mu, s_nu);
        match (closed, oracle) {
            (Some(a), Some(b)) if a.is_infinite() || b.is_infinite() => {
                prop_assert!(a.is_infinite() && b.is_infinite(), "{a} vs {b}");
            }
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{a} vs {b}"),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn case_i_with_full_target((d, a) in (3u32..=6, 0.0..1.0f64)) {
        let s_mu = 2.0 + 1e-6 + a * (d as f64 - 2.0 - 1e-6);
        let iv = maximal_interval(d, s_mu, d as f64);
        prop_assert_eq!(iv.case_label, CaseLabel::I);
        prop_assert!((iv.lo - s_mu / (s_mu - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn case_iii_contains_four_not_two((d, s_mu, s_nu) in case_iii_params()) {
        let iv = maximal_interval(d, s_mu, s_nu);
        prop_assume!(iv.case_label == CaseLabel::Iii);
        prop_assert!(!iv.contains(2.0), "{:?}", iv);
        prop_assert!(iv.contains(4.0), "{:?}", iv);
    }

    #[test]
    fn no_contradiction_with_sharpness(d in 2u32..=6, a in 0.0..1.0f64, t in 0.001..0.999f64) {
        let df = d as f64;
        // only s above this floor yields a nonempty interval with mu = nu
        let floor = (df - 0.25).min((df + 2.0) / 2.0);
        let s = floor + a * (df - floor);
        let iv = maximal_interval(d, s, s);
        prop_assume!(!iv.is_empty());
        let hi = if iv.hi.is_finite() { iv.hi } else { iv.lo + 1e3 };
        let p = iv.lo + t * (hi - iv.lo);
        prop_assume!(iv.contains_interior(p));
        prop_assert!(!sharpness_excluded(d, s, p), "d={d} s={s} p={p} {:?}", iv);
    }

    #[test]
    fn fixed_time_branches_agree_at_two(d in 2u32..=6, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let df = d as f64;
        let (s_mu, s_nu) = (a * df, b * df);
        prop_assume!((s_mu + s_nu - (df + 1.0)).abs() > 1e-12);
        prop_assert_eq!(fixed_time_condition(d, s_mu, s_nu, 2.0), s_mu + s_nu > df + 1.0);
    }

    #[test]
    fn corollary_part_iii_below_floor(d in 2u32..=6, a in 1e-9..1.0f64) {
        let df = d as f64;
        let s_mu = df - 0.25 + a * 0.25;
        prop_assert!(3.0 * (df - s_mu) + 1.5 < df + 2.0 - s_mu);
    }

    #[test]
    fn s1_solves_defining_equation(d in 2u32..=6, a in 0.0..1.0f64, pf in 2.0001..100.0f64) {
        let df = d as f64;
        let s_mu = 1.0 + 1e-6 + a * (df - 1.0 - 1e-6);
        let s1 = blowup_s1(d, s_mu, pf).unwrap();
        let lhs = df - s_mu + (s_mu - s1) / pf;
        let rhs = (df - 2.0) / pf + eps_p(pf).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }
}

#[test]
fn lebesgue_limit_clamps_to_two() {
    for pf in [10.0, 1e3, 1e6] {
        let s1 = blowup_s1(3, 3.0, pf).unwrap();
        assert!(s1 < 2.0);
    }
    // without part iii) the clamp sits at d + 2 - s_mu
    let b = blowup_dim_maximal(3, 3.0, 3.5).unwrap();
    assert_eq!(b.dimension(), Some(2.0));
}

#[test]
fn fixed_time_critical_exponent() {
    for d in 2..=6u32 {
        let df = d as f64;
        let v = blowup_dim_fixed_time(d, df / (df - 1.0)).unwrap();
        assert!((v - (df - 1.0)).abs() < 1e-12);
    }
}

#[test]
fn falconer_boundary_is_excluded() {
    for d in 2..=6u32 {
        let df = d as f64;
        let s = (df + 1.0) / 2.0;
        assert!(!convolution_l2_condition(d, s, s, (df - 1.0) / 2.0).unwrap());
    }
}

#[test]
fn report_serializes_infinite_endpoint() {
    let r = report(&Params::new(3, 3.0, 3.0, 2.0).unwrap()).unwrap();
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"hi\":\"inf\""), "{json}");
    assert!(r.p_in_interval);
}
