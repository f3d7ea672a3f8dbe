//! Closed-form exponent thresholds for the spherical maximal operator, the
//! fixed-time average and the fractional convolution operators.
//!
//! Everything here is exact arithmetic on the parameters. Strict inequalities
//! are strict: a parameter sitting exactly on a threshold is reported as not
//! satisfying it.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{domain, param, Result};

/// Slack used when testing the equality `s_mu + s_nu = d + 2` of case ii.
pub const CASE_II_TOLERANCE: f64 = 1e-12;

/// Parameter bundle shared by the calculators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub d: u32,
    pub s_mu: f64,
    pub s_nu: f64,
    pub p: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub p_f: Option<f64>,
}

impl Params {
    pub fn new(d: u32, s_mu: f64, s_nu: f64, p: f64) -> Result<Self> {
        let params = Self { d, s_mu, s_nu, p, alpha: None, p_f: None };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d as f64;
        if self.d < 2 {
            return param(format!("dimension must be at least 2, got {}", self.d));
        }
        for (name, s) in [("s_mu", self.s_mu), ("s_nu", self.s_nu)] {
            if !(0.0..=d).contains(&s) {
                return param(format!("{name} = {s} outside [0, {d}]"));
            }
        }
        if !(self.p >= 1.0) {
            return param(format!("p = {} must be at least 1", self.p));
        }
        Ok(())
    }

    /// Conjugate exponent; infinite at p = 1.
    pub fn p_prime(&self) -> f64 {
        conjugate(self.p)
    }
}

pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseLabel {
    I,
    Ii,
    Iii,
    None,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::I => "i",
            CaseLabel::Ii => "ii",
            CaseLabel::Iii => "iii",
            CaseLabel::None => "none",
        }
    }
}

/// Interval of exponents p. `hi` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    #[serde(with = "extended_real")]
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
    pub case_label: CaseLabel,
}

impl Interval {
    pub fn empty() -> Self {
        Self { lo: 0.0, hi: 0.0, lo_open: true, hi_open: true, case_label: CaseLabel::None }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, p: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let above = if self.lo_open { p > self.lo } else { p >= self.lo };
        let below = if self.hi_open { p < self.hi } else { p <= self.hi };
        above && below
    }

    /// Strict interior membership.
    pub fn contains_interior(&self, p: f64) -> bool {
        !self.is_empty() && p > self.lo && p < self.hi
    }
}

mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("bad extended real {other:?}"))),
            },
        }
    }
}

/// Local smoothing gain: `1/(2p)` for p ≥ 4 and `(1/2)(1/2 − 1/p)` on [2, 4].
pub fn eps_p(p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return domain(format!("eps_p requires p >= 2, got {p}"));
    }
    Ok(if p >= 4.0 { 0.5 / p } else { 0.5 * (0.5 - 1.0 / p) })
}

/// `lhs - rhs` of the large-p condition written in u = 1/p, u in (0, 1/2].
/// The condition holds where this is negative.
pub fn large_p_gap(d: u32, s_mu: f64, s_nu: f64, u: f64) -> f64 {
    let d = d as f64;
    let eps = if u <= 0.25 { 0.5 * u } else { 0.5 * (0.5 - u) };
    d - s_mu + (s_mu - s_nu) * u - (d - 2.0) * u - eps
}

/// Supremum of the p ≥ 2 for which the large-p condition holds, or `None` if
/// it fails for every p ≥ 2. Infinite when it holds for all large p.
pub fn p_upper(d: u32, s_mu: f64, s_nu: f64) -> Option<f64> {
    let df = d as f64;
    let g0 = df - s_mu;
    let c1 = s_mu - s_nu - df + 1.5;
    let g_quarter = g0 + 0.25 * c1;
    let c2 = s_mu - s_nu - df + 2.5;
    let g_half = (df - s_mu - 0.25) + 0.5 * c2;
    // The gap is affine on each of (0, 1/4] and [1/4, 1/2], nonnegative at 0.
    if g0 <= 0.0 && c1 < 0.0 {
        return Some(f64::INFINITY);
    }
    if g_quarter < 0.0 {
        // first crossing lies on the p ≥ 4 branch
        let u = g0 / -c1;
        return Some(1.0 / u);
    }
    if g_half < 0.0 {
        let u = (df - s_mu - 0.25) / -c2;
        return Some(1.0 / u.max(0.25));
    }
    None
}

fn case_of(d: u32, s_mu: f64, s_nu: f64) -> CaseLabel {
    let df = d as f64;
    let excess = s_mu + s_nu - (df + 2.0);
    if excess > CASE_II_TOLERANCE && s_mu > 1.0 {
        CaseLabel::I
    } else if excess.abs() <= CASE_II_TOLERANCE && s_mu > 1.0 && (2.0..2.25).contains(&s_nu) {
        CaseLabel::Ii
    } else if excess < -CASE_II_TOLERANCE && 3.0 * s_mu + s_nu > 3.0 * df + 1.5 {
        CaseLabel::Iii
    } else {
        CaseLabel::None
    }
}

/// Range of p for which the maximal operator is bounded from L^p(mu) to
/// L^p(nu), with the case whose hypotheses produced it.
pub fn maximal_interval(d: u32, s_mu: f64, s_nu: f64) -> Interval {
    let df = d as f64;
    match case_of(d, s_mu, s_nu) {
        CaseLabel::I => {
            let lo = (df + s_mu - s_nu) / (s_mu - 1.0);
            let hi = p_upper(d, s_mu, s_nu).unwrap_or(2.0);
            Interval { lo, hi, lo_open: true, hi_open: true, case_label: CaseLabel::I }
        }
        CaseLabel::Ii => {
            Interval { lo: 2.0, hi: 4.0, lo_open: true, hi_open: false, case_label: CaseLabel::Ii }
        }
        CaseLabel::Iii => {
            let lo = (s_nu - s_mu + df - 2.5) / (df - s_mu - 0.25);
            let num = s_nu - s_mu + df - 1.5;
            let den = df - s_mu;
            let hi = if den > 0.0 { num / den } else { f64::INFINITY };
            Interval { lo, hi, lo_open: true, hi_open: true, case_label: CaseLabel::Iii }
        }
        CaseLabel::None => Interval::empty(),
    }
}

/// Which negative result excludes boundedness, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub radial: bool,
    pub low_p: bool,
    pub planar: bool,
    pub higher: bool,
}

impl Exclusion {
    pub fn any(&self) -> bool {
        self.radial || self.low_p || self.planar || self.higher
    }
}

pub fn exclusion_clauses(d: u32, s_mu: f64, p: f64) -> Exclusion {
    let radial = if s_mu > 1.0 {
        p > 1.0 && p <= s_mu / (s_mu - 1.0)
    } else {
        s_mu >= 0.0 && p > 1.0 && p.is_finite()
    };
    let low_p = (1.0..=2.0).contains(&p) && s_mu < 1.0 + 2.0 / p;
    let planar = d == 2 && p >= 2.0 && s_mu < (3.0 - 2.0 / p) / (2.0 - 2.0 / p);
    let higher = d >= 3 && p >= 2.0 && s_mu < 2.0;
    Exclusion { radial, low_p, planar, higher }
}

/// True when boundedness of the maximal operator fails in general.
pub fn sharpness_excluded(d: u32, s_mu: f64, p: f64) -> bool {
    exclusion_clauses(d, s_mu, p).any()
}

/// Outcome of the blowup-set corollary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlowupBound {
    /// `dim E_f <= dimension`; when `measure_zero` also H^dimension(E_f) = 0.
    Bound { dimension: f64, measure_zero: bool, part: &'static str },
    NoBound { reason: &'static str },
}

impl BlowupBound {
    pub fn dimension(&self) -> Option<f64> {
        match self {
            BlowupBound::Bound { dimension, .. } => Some(*dimension),
            BlowupBound::NoBound { .. } => None,
        }
    }
}

/// Solution s_1 of the corollary's defining equation; requires p_f > 2.
pub fn blowup_s1(d: u32, s_mu: f64, p_f: f64) -> Result<f64> {
    let df = d as f64;
    if p_f.is_infinite() {
        return Ok(if s_mu < df { f64::INFINITY } else { f64::NEG_INFINITY });
    }
    let eps = eps_p(p_f)?;
    Ok(s_mu + p_f * (df - s_mu) - (df - 2.0) - p_f * eps)
}

/// Best dimension bound for the blowup set of the maximal function of a
/// datum f whose integrability supremum is `p_f`.
pub fn blowup_dim_maximal(d: u32, s_mu: f64, p_f: f64) -> Result<BlowupBound> {
    let df = d as f64;
    if !(p_f > 2.0) {
        return Ok(BlowupBound::NoBound { reason: "p_f must exceed 2" });
    }
    if !(s_mu > 1.0) {
        return Ok(BlowupBound::NoBound { reason: "s_mu must exceed 1" });
    }
    if s_mu > df {
        return param(format!("s_mu = {s_mu} exceeds d = {d}"));
    }
    let floor = df + 2.0 - s_mu;
    let s1 = blowup_s1(d, s_mu, p_f)?;
    let sf = s1.max(floor);
    let mut best = BlowupBound::Bound { dimension: sf, measure_zero: sf > floor, part: "i" };
    let thick = df - 0.25 < s_mu;
    if thick {
        // part ii) sharpens the floor to a null set
        if sf <= floor {
            best = BlowupBound::Bound { dimension: floor, measure_zero: true, part: "ii" };
        }
        if p_f > 4.0 {
            let s3 = 3.0 * (df - s_mu) + 1.5;
            if s3 < best.dimension().unwrap_or(f64::INFINITY) {
                best = BlowupBound::Bound { dimension: s3, measure_zero: false, part: "iii" };
            }
        }
    }
    Ok(best)
}

/// Fixed-time L^p(mu) -> L^p(nu) sufficient condition for the spherical average.
pub fn fixed_time_condition(d: u32, s_mu: f64, s_nu: f64, p: f64) -> bool {
    let df = d as f64;
    if !(p >= 1.0) {
        return false;
    }
    let lhs = if p == 1.0 { s_nu } else { s_mu / conjugate(p) + s_nu / p };
    if p >= 2.0 {
        lhs > df - (df - 1.0) / p
    } else {
        lhs > 1.0 + (df - 1.0) / p
    }
}

/// Dimension bound for the blowup set of a fixed-time average of f in L^p.
pub fn blowup_dim_fixed_time(d: u32, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return param(format!("p = {p} must be at least 1"));
    }
    let df = d as f64;
    Ok(if p <= 2.0 { df - (p - 1.0) * (df - 1.0) } else { 1.0 })
}

/// L^2(mu) -> L^2(nu) condition for convolution with a kernel whose Fourier
/// transform decays like |xi|^(-alpha).
pub fn convolution_l2_condition(d: u32, s_mu: f64, s_nu: f64, alpha: f64) -> Result<bool> {
    let df = d as f64;
    if !(alpha >= 0.0 && alpha < df / 2.0) {
        return domain(format!("alpha = {alpha} outside [0, {})", df / 2.0));
    }
    Ok(alpha > df - (s_mu + s_nu) / 2.0)
}

/// Full evaluation for one parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub params: Params,
    pub p_prime: f64,
    pub interval: Interval,
    pub p_in_interval: bool,
    pub excluded: Exclusion,
    pub sharpness_excluded: bool,
    pub fixed_time_bounded: bool,
    pub blowup_dim_fixed_time: f64,
    pub blowup_maximal: Option<BlowupBound>,
    pub convolution_l2: Option<bool>,
}

pub fn report(params: &Params) -> Result<ExponentReport> {
    params.validate()?;
    let Params { d, s_mu, s_nu, p, alpha, p_f } = *params;
    let interval = maximal_interval(d, s_mu, s_nu);
    let excluded = exclusion_clauses(d, s_mu, p);
    let blowup_maximal = match p_f {
        Some(pf) => Some(blowup_dim_maximal(d, s_mu, pf)?),
        None => None,
    };
    let convolution_l2 = match alpha {
        Some(a) => Some(convolution_l2_condition(d, s_mu, s_nu, a)?),
        None => None,
    };
    Ok(ExponentReport {
        params: *params,
        p_prime: params.p_prime(),
        interval,
        p_in_interval: interval.contains(p),
        excluded,
        sharpness_excluded: excluded.any(),
        fixed_time_bounded: fixed_time_condition(d, s_mu, s_nu, p),
        blowup_dim_fixed_time: blowup_dim_fixed_time(d, p)?,
        blowup_maximal,
        convolution_l2,
    })
}

/// Axes of a region raster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axes", rename_all = "snake_case")]
pub enum RegionAxes {
    /// Case labels over an (s_mu, s_nu) rectangle.
    Dimensions { s_mu: (f64, f64), s_nu: (f64, f64) },
    /// Boundedness over an (s, p) rectangle with s_mu = s_nu = s.
    Exponent { s: (f64, f64), p: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCell {
    pub x: f64,
    pub y: f64,
    pub case_label: CaseLabel,
    pub bounded: bool,
    pub excluded: bool,
}

fn lattice(range: (f64, f64), n: usize, i: usize) -> f64 {
    if n == 1 {
        range.0
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
    }
}

/// Evaluates the calculators on an `nx` by `ny` lattice including the corners.
pub fn region_raster(d: u32, axes: RegionAxes, nx: usize, ny: usize) -> Result<Vec<RegionCell>> {
    if d < 2 || nx == 0 || ny == 0 {
        return param("region raster needs d >= 2 and a nonempty lattice");
    }
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let cell = match axes {
                RegionAxes::Dimensions { s_mu, s_nu } => {
                    let x = lattice(s_mu, nx, i);
                    let y = lattice(s_nu, ny, j);
                    let iv = maximal_interval(d, x, y);
                    RegionCell { x, y, case_label: iv.case_label, bounded: !iv.is_empty(), excluded: false }
                }
                RegionAxes::Exponent { s, p } => {
                    let x = lattice(s, nx, i);
                    let y = lattice(p, ny, j);
                    let iv = maximal_interval(d, x, x);
                    RegionCell {
                        x,
                        y,
                        case_label: iv.case_label,
                        bounded: iv.contains(y),
                        excluded: y > 1.0 && sharpness_excluded(d, x, y),
                    }
                }
            };
            cells.push(cell);
        }
    }
    Ok(cells)
}

pub fn region_csv(axes: RegionAxes, cells: &[RegionCell]) -> String {
    let (xn, yn) = match axes {
        RegionAxes::Dimensions { .. } => ("s_mu", "s_nu"),
        RegionAxes::Exponent { .. } => ("s", "p"),
    };
    let mut out = format!("{xn},{yn},case,bounded,excluded\n");
    for c in cells {
        let _ = writeln!(out, "{},{},{},{},{}", c.x, c.y, c.case_label.as_str(), c.bounded as u8, c.excluded as u8);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_branches() {
        assert_eq!(eps_p(2.0).unwrap(), 0.0);
        assert!((eps_p(4.0).unwrap() - 0.125).abs() < 1e-15);
        assert!((0.5 * (0.5 - 0.25) - 0.125_f64).abs() < 1e-15);
        assert!((eps_p(8.0).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        assert!(eps_p(1.9).is_err());
        assert!(eps_p(1e6).unwrap() < 1e-6);
    }

    #[test]
    fn interval_examples() {
        let iv = maximal_interval(3, 3.0, 3.0);
        assert_eq!(iv.case_label, CaseLabel::I);
        assert!((iv.lo - 1.5).abs() < 1e-15);
        assert!(iv.hi.is_infinite());

        let iv = maximal_interval(2, 1.95, 1.95);
        assert_eq!(iv.case_label, CaseLabel::Iii);
        // the planar form 1/(2(s - 7/4)), 1/(2(2 - s))
        let s = 1.95;
        assert!((iv.lo - 1.0 / (2.0 * (s - 1.75))).abs() < 1e-12);
        assert!((iv.hi - 1.0 / (2.0 * (2.0 - s))).abs() < 1e-12);
        assert!((iv.lo - 2.5).abs() < 1e-12 && (iv.hi - 10.0).abs() < 1e-9);

        let iv = maximal_interval(3, 2.9, 2.1);
        assert_eq!(iv.case_label, CaseLabel::Ii);
        assert!(iv.contains(4.0) && !iv.contains(2.0));

        assert_eq!(maximal_interval(2, 1.0, 1.0).case_label, CaseLabel::None);
        assert!(maximal_interval(2, 1.0, 1.0).is_empty());
    }

    #[test]
    fn sharpness_examples() {
        assert!(sharpness_excluded(2, 1.5, 3.0));
        assert!(sharpness_excluded(3, 1.9, 5.0));
        assert!(!sharpness_excluded(2, 1.95, 3.0));
        assert!(maximal_interval(2, 1.95, 1.95).contains(3.0));
        assert!(sharpness_excluded(2, 0.8, 50.0));
    }

    #[test]
    fn blowup_examples() {
        // Lebesgue with p_f large: clamps to d + 2 - d = 2, then part iii) wins
        let b = blowup_dim_maximal(3, 3.0, 1e9).unwrap();
        assert_eq!(b.dimension(), Some(1.5));
        let b = blowup_dim_maximal(3, 3.0, 3.0).unwrap();
        match b {
            BlowupBound::Bound { dimension, measure_zero, part } => {
                assert_eq!(dimension, 2.0);
                assert!(measure_zero);
                assert_eq!(part, "ii");
            }
            _ => panic!("expected a bound"),
        }
        assert!(matches!(blowup_dim_maximal(3, 1.0, 3.0).unwrap(), BlowupBound::NoBound { .. }));
        assert!(matches!(blowup_dim_maximal(3, 2.0, 2.0).unwrap(), BlowupBound::NoBound { .. }));
        // s_1 above the floor for thin measures
        let b = blowup_dim_maximal(3, 2.0, 3.0).unwrap();
        let s1 = blowup_s1(3, 2.0, 3.0).unwrap();
        assert!(s1 > 3.0);
        assert_eq!(b.dimension(), Some(s1));
    }

    #[test]
    fn fixed_time_examples() {
        assert!(fixed_time_condition(3, 2.1, 2.1, 2.0));
        assert!(!fixed_time_condition(3, 2.0, 2.0, 2.0));
        assert_eq!(blowup_dim_fixed_time(3, 1.0).unwrap(), 3.0);
        assert_eq!(blowup_dim_fixed_time(3, 2.0).unwrap(), 1.0);
        assert!((blowup_dim_fixed_time(3, 1.5).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn convolution_examples() {
        assert!(convolution_l2_condition(3, 2.6, 2.6, 1.0).unwrap());
        assert!(!convolution_l2_condition(3, 2.0, 2.0, 1.0).unwrap());
        assert!(convolution_l2_condition(3, 3.0, 3.0, 0.1).unwrap());
        assert!(convolution_l2_condition(3, 3.0, 3.0, 1.5).is_err());
        assert!(convolution_l2_condition(3, 3.0, 3.0, -0.1).is_err());
    }

    #[test]
    fn raster_shapes() {
        let axes = RegionAxes::Dimensions { s_mu: (1.0, 3.0), s_nu: (1.0, 3.0) };
        let cells = region_raster(3, axes, 5, 4).unwrap();
        assert_eq!(cells.len(), 20);
        let csv = region_csv(axes, &cells);
        assert_eq!(csv.lines().count(), 21);
        assert!(csv.starts_with("s_mu,s_nu,case"));
        assert_eq!(cells.last().unwrap().case_label, CaseLabel::I);
    }
}
