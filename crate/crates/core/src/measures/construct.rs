use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundingBox, Construction, DiscreteMeasure};
use crate::error::{param, Error, Result};
use crate::special::{ball_volume, integrate, sphere_area};

/// Largest atom count any constructor will materialize.
pub const MAX_ATOMS: usize = 10_000_000;

/// Uniform self-similar measure on the depth-`depth` approximation of the
/// two-piece Cantor set with contraction `ratio`. Atoms sit at the left
/// endpoints of the level intervals, sorted ascending.
pub fn cantor_measure(ratio: f64, depth: u32) -> Result<DiscreteMeasure> {
    if !(ratio > 0.0 && ratio <= 0.5) {
        return param(format!("cantor ratio must lie in (0, 1/2], got {ratio}"));
    }
    if !(1..=24).contains(&depth) {
        return param(format!("cantor depth must lie in [1, 24], got {depth}"));
    }
    let mut pts = vec![0.0f64];
    let mut scale = 1.0;
    for _ in 0..depth {
        let offset = (1.0 - ratio) * scale;
        let mut next = Vec::with_capacity(pts.len() * 2);
        for &p in &pts {
            next.push(p);
            next.push(p + offset);
        }
        pts = next;
        scale *= ratio;
    }
    let w = 0.5f64.powi(depth as i32);
    let n = pts.len();
    let s = std::f64::consts::LN_2 / (1.0 / ratio).ln();
    DiscreteMeasure::with_bbox(
        1,
        pts,
        vec![w; n],
        Construction::Cantor,
        Some(s),
        BoundingBox {
            lo: vec![0.0],
            hi: vec![1.0],
        },
    )
}

/// Tensor product of the factors, first factor varying slowest.
pub fn product_measure(factors: &[DiscreteMeasure]) -> Result<DiscreteMeasure> {
    match factors.len() {
        0 => return param("product of zero factors"),
        1 => return Ok(factors[0].clone()),
        _ => {}
    }
    let dim: usize = factors.iter().map(|f| f.dim()).sum();
    if dim > 3 {
        return param(format!("product dimension {dim} exceeds 3"));
    }
    let count = factors
        .iter()
        .try_fold(1usize, |acc, f| acc.checked_mul(f.len()))
        .filter(|c| *c <= MAX_ATOMS)
        .ok_or_else(|| {
            Error::Resource(format!(
                "product of {:?} atoms exceeds {MAX_ATOMS}",
                factors.iter().map(|f| f.len()).collect::<Vec<_>>()
            ))
        })?;

    let mut atoms: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = vec![1.0];
    let mut cur_dim = 0usize;
    for f in factors {
        let fd = f.dim();
        let new_dim = cur_dim + fd;
        let mut na = Vec::with_capacity(weights.len() * f.len() * new_dim);
        let mut nw = Vec::with_capacity(weights.len() * f.len());
        for (i, w) in weights.iter().enumerate() {
            let base = &atoms[i * cur_dim..(i + 1) * cur_dim];
            for (j, fw) in f.weights().iter().enumerate() {
                na.extend_from_slice(base);
                na.extend_from_slice(f.atom(j));
                nw.push(w * fw);
            }
        }
        atoms = na;
        weights = nw;
        cur_dim = new_dim;
    }
    debug_assert_eq!(weights.len(), count);
    let nominal_s = factors
        .iter()
        .map(|f| f.nominal_s())
        .sum::<Option<f64>>();
    let bbox = BoundingBox {
        lo: factors.iter().flat_map(|f| f.bbox().lo.clone()).collect(),
        hi: factors.iter().flat_map(|f| f.bbox().hi.clone()).collect(),
    };
    DiscreteMeasure::with_bbox(dim, atoms, weights, Construction::Product, nominal_s, bbox)
}

/// Mass of `B(0, r)` under the radial density `|x|^{-d+s} log^{-u}(1/|x|)`.
pub(crate) fn radial_ball_mass(dim: usize, s: f64, log_u: Option<f64>, r: f64) -> f64 {
    let omega = sphere_area(dim);
    match log_u {
        None => omega * r.powf(s) / s,
        Some(u) => {
            let v0 = (1.0 / r).ln();
            if s == 0.0 {
                omega * v0.powf(1.0 - u) / (u - 1.0)
            } else {
                // ∫_{v0}^∞ e^{-s v} v^{-u} dv, split into unit-ish panels
                let span = 60.0 / s;
                let panels = 60;
                let hw = span / panels as f64;
                (0..panels)
                    .map(|k| {
                        let a = v0 + k as f64 * hw;
                        integrate(|v| (-s * v).exp() * v.powf(-u), a, a + hw, 16)
                    })
                    .sum::<f64>()
                    * omega
            }
        }
    }
}

/// Radial power density `|x|^{-d+s}` (optionally times `log^{-u}(1/|x|)`)
/// sampled at cell centers of a `grid_n^d` lattice over the support ball.
/// The support is the unit ball, or the ball of radius 1/2 for the
/// logarithmic variant. Cells within one cell width of the origin share the
/// exact mass of the ball of equal total volume.
pub fn radial_power_measure(
    dim: usize,
    s: f64,
    grid_n: usize,
    log_u: Option<f64>,
) -> Result<DiscreteMeasure> {
    if !(1..=3).contains(&dim) {
        return param(format!("dimension must be 1, 2 or 3, got {dim}"));
    }
    if !(0.0..=dim as f64).contains(&s) {
        return param(format!("exponent s = {s} outside [0, {dim}]"));
    }
    if !(2..=1024).contains(&grid_n) {
        return param(format!("grid_n must lie in [2, 1024], got {grid_n}"));
    }
    match log_u {
        None if s == 0.0 => return param("s = 0 requires a logarithmic factor (log_u > 1)"),
        Some(u) if !(u > 1.0) => return param(format!("log_u must exceed 1, got {u}")),
        _ => {}
    }
    let cells = grid_n
        .checked_pow(dim as u32)
        .filter(|c| *c <= MAX_ATOMS)
        .ok_or_else(|| Error::Resource(format!("{grid_n}^{dim} cells exceed {MAX_ATOMS}")))?;
    let radius = if log_u.is_some() { 0.5 } else { 1.0 };
    let h = 2.0 * radius / grid_n as f64;
    let cell_vol = h.powi(dim as i32);
    let density = |r: f64| {
        let base = r.powf(s - dim as f64);
        match log_u {
            Some(u) => base * (1.0 / r).ln().powf(-u),
            None => base,
        }
    };

    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    let mut inner = Vec::new();
    let mut idx = vec![0usize; dim];
    for _ in 0..cells {
        let c: Vec<f64> = idx
            .iter()
            .map(|&i| -radius + (i as f64 + 0.5) * h)
            .collect();
        let r = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r <= radius {
            if r <= h {
                inner.push(weights.len());
                weights.push(0.0);
            } else {
                weights.push(density(r) * cell_vol);
            }
            atoms.extend_from_slice(&c);
        }
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < grid_n {
                break;
            }
            idx[k] = 0;
        }
    }
    if !inner.is_empty() {
        let v = inner.len() as f64 * cell_vol;
        let r_eq = (v / ball_volume(dim)).powf(1.0 / dim as f64);
        let m = radial_ball_mass(dim, s, log_u, r_eq) / inner.len() as f64;
        for i in inner {
            weights[i] = m;
        }
    }
    DiscreteMeasure::with_bbox(
        dim,
        atoms,
        weights,
        Construction::RadialPower,
        Some(s),
        BoundingBox {
            lo: vec![-radius; dim],
            hi: vec![radius; dim],
        },
    )
}

/// Quasi-uniform atomic approximation of the probability surface measure on
/// the sphere of radius `t`: equispaced for `d = 2`, Fibonacci lattice for
/// `d = 3`.
pub fn sphere_measure(dim: usize, t: f64, n_points: usize) -> Result<DiscreteMeasure> {
    if !(dim == 2 || dim == 3) {
        return param(format!("sphere measure needs d in {{2, 3}}, got {dim}"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return param(format!("radius must be positive, got {t}"));
    }
    if n_points < 64 {
        return param(format!("need at least 64 sphere points, got {n_points}"));
    }
    if n_points > MAX_ATOMS {
        return Err(Error::Resource(format!("{n_points} sphere points exceed {MAX_ATOMS}")));
    }
    let mut atoms = Vec::with_capacity(n_points * dim);
    let tau = 2.0 * std::f64::consts::PI;
    if dim == 2 {
        for k in 0..n_points {
            let a = tau * k as f64 / n_points as f64;
            atoms.push(t * a.cos());
            atoms.push(t * a.sin());
        }
    } else {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        for k in 0..n_points {
            let z = 1.0 - (2 * k + 1) as f64 / n_points as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * k as f64;
            atoms.push(t * rho * a.cos());
            atoms.push(t * rho * a.sin());
            atoms.push(t * z);
        }
    }
    DiscreteMeasure::with_bbox(
        dim,
        atoms,
        vec![1.0 / n_points as f64; n_points],
        Construction::Sphere,
        Some((dim - 1) as f64),
        BoundingBox {
            lo: vec![-t; dim],
            hi: vec![t; dim],
        },
    )
}

/// Lebesgue measure (density one) on the cube `[lo, hi]^dim`, one atom at
/// the center of each of `cells^dim` cells.
pub fn lebesgue_box(dim: usize, lo: f64, hi: f64, cells: usize) -> Result<DiscreteMeasure> {
    if !(hi > lo) {
        return param(format!("empty box [{lo}, {hi}]"));
    }
    if cells == 0 {
        return param("need at least one cell per axis");
    }
    let count = cells
        .checked_pow(dim as u32)
        .filter(|c| *c <= MAX_ATOMS)
        .ok_or_else(|| Error::Resource(format!("{cells}^{dim} cells exceed {MAX_ATOMS}")))?;
    let h = (hi - lo) / cells as f64;
    let mut atoms = Vec::with_capacity(count * dim);
    let mut idx = vec![0usize; dim];
    for _ in 0..count {
        atoms.extend(idx.iter().map(|&i| lo + (i as f64 + 0.5) * h));
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < cells {
                break;
            }
            idx[k] = 0;
        }
    }
    DiscreteMeasure::with_bbox(
        dim,
        atoms,
        vec![h.powi(dim as i32); count],
        Construction::LebesgueBox,
        Some(dim as f64),
        BoundingBox {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        },
    )
}

/// Unit point mass.
pub fn dirac(point: &[f64]) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(
        point.len(),
        point.to_vec(),
        vec![1.0],
        Construction::Custom,
        Some(0.0),
    )
}

/// Lebesgue measure on the ball `B(0, radius)` represented by `n` uniform
/// random atoms of equal weight.
pub fn uniform_ball_sample(dim: usize, radius: f64, n: usize, seed: u64) -> Result<DiscreteMeasure> {
    if !(radius > 0.0) || n == 0 {
        return param("need a positive radius and at least one sample");
    }
    if n > MAX_ATOMS {
        return Err(Error::Resource(format!("{n} samples exceed {MAX_ATOMS}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms = Vec::with_capacity(n * dim);
    let mut p = vec![0.0; dim];
    let mut have = 0;
    while have < n {
        for x in p.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
        if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            atoms.extend(p.iter().map(|x| x * radius));
            have += 1;
        }
    }
    let w = ball_volume(dim) * radius.powi(dim as i32) / n as f64;
    DiscreteMeasure::with_bbox(
        dim,
        atoms,
        vec![w; n],
        Construction::Custom,
        Some(dim as f64),
        BoundingBox {
            lo: vec![-radius; dim],
            hi: vec![radius; dim],
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_third_depth_one() {
        let m = cantor_measure(1.0 / 3.0, 1).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atom(0), &[0.0]);
        assert!((m.atom(1)[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert!((m.nominal_s().unwrap() - 0.6309297535714574).abs() < 1e-12);
    }

    #[test]
    fn cantor_quarter_and_half() {
        for k in 1..=10 {
            let m = cantor_measure(0.25, k).unwrap();
            assert_eq!(m.len(), 1 << k);
            assert!((m.nominal_s().unwrap() - 0.5).abs() < 1e-15);
            assert!(m.weights().iter().all(|w| *w == m.weights()[0]));
            assert!((m.total_mass() - 1.0).abs() < 1e-12);
        }
        let m = cantor_measure(0.5, 6).unwrap();
        assert!((m.nominal_s().unwrap() - 1.0).abs() < 1e-15);
        for (i, p) in m.atoms().enumerate() {
            assert!((p[0] - i as f64 / 64.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cantor_rejects_bad_ratio() {
        assert!(matches!(cantor_measure(0.6, 3), Err(Error::Parameter(_))));
        assert!(matches!(cantor_measure(0.0, 3), Err(Error::Parameter(_))));
        assert!(matches!(cantor_measure(0.3, 25), Err(Error::Parameter(_))));
    }

    #[test]
    fn product_dimensions_add() {
        let a = cantor_measure(0.25, 4).unwrap();
        let p = product_measure(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.len(), 256);
        assert!((p.nominal_s().unwrap() - 1.0).abs() < 1e-15);

        let half = cantor_measure(0.5, 4).unwrap();
        let q = product_measure(&[half, a.clone()]).unwrap();
        assert!((q.nominal_s().unwrap() - 1.5).abs() < 1e-15);

        assert_eq!(product_measure(std::slice::from_ref(&a)).unwrap(), a);
    }

    #[test]
    fn product_overflow_is_resource_error() {
        let a = cantor_measure(0.25, 12).unwrap();
        assert!(matches!(product_measure(&[a.clone(), a]), Err(Error::Resource(_))));
    }

    #[test]
    fn radial_power_full_dimension_is_uniform() {
        let m = radial_power_measure(2, 2.0, 64, None).unwrap();
        let w0 = m.weights()[m.len() / 3];
        // outside the central cells the density is constant
        let h2 = (2.0f64 / 64.0).powi(2);
        assert!((w0 - h2).abs() < 1e-15);
        let area = std::f64::consts::PI;
        assert!((m.total_mass() - area).abs() / area < 0.02);
    }

    #[test]
    fn radial_power_parameter_errors() {
        assert!(radial_power_measure(2, 2.5, 64, None).is_err());
        assert!(radial_power_measure(2, -0.1, 64, None).is_err());
        assert!(radial_power_measure(2, 0.0, 64, None).is_err());
        assert!(radial_power_measure(3, 0.0, 32, Some(2.0)).is_ok());
    }

    #[test]
    fn sphere_points() {
        let m = sphere_measure(2, 1.0, 128).unwrap();
        assert_eq!(m.len(), 128);
        assert!(m.weights().iter().all(|w| (*w - 1.0 / 128.0).abs() < 1e-17));
        for p in m.atoms() {
            assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-14);
        }
        let m = sphere_measure(3, 2.0, 500).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
        for p in m.atoms() {
            assert!((super::super::dist2(p, &[0.0; 3]).sqrt() - 2.0).abs() < 1e-13);
        }
        assert!(sphere_measure(3, 1.0, 10).is_err());
        assert!(sphere_measure(1, 1.0, 100).is_err());
    }
}
