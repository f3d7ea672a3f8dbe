//! Experiment configuration: one JSON document whose `experiment` field
//! names the subcommand it belongs to.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sphmax_core::exponents::RegionAxes;

use crate::CliError;

fn config_err(path: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Config { path: path.into(), msg: msg.into() }
}

/// Splits off the `experiment` discriminator and deserializes the rest,
/// reporting the JSON path of the first offending field.
pub fn parse<T: DeserializeOwned>(text: &str, expected: &str) -> Result<T, CliError> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| config_err("$", format!("not a JSON document: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| config_err("$", "config must be a JSON object"))?;
    match obj.remove("experiment") {
        None => return Err(config_err("experiment", "missing field")),
        Some(serde_json::Value::String(s)) if s == expected => {}
        Some(serde_json::Value::String(s)) => {
            return Err(config_err("experiment", format!("config is for `{s}`, not `{expected}`")))
        }
        Some(_) => return Err(config_err("experiment", "must be a string")),
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        config_err(if path == "." { "$".into() } else { path }, e.into_inner().to_string())
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Cantor { ratio: f64, depth: u32 },
    Product { factors: Vec<MeasureSpec> },
    RadialPower { d: usize, s: f64, grid_n: usize, log_u: Option<f64> },
    Sphere { d: usize, t: f64, n_points: usize },
    LebesgueBox { d: usize, lo: f64, hi: f64, cells: usize },
    Dirac { point: Vec<f64> },
    /// Uniform sample of the ball, seeded by `--seed`.
    BallSample { d: usize, radius: f64, n: usize },
    Translate { measure: Box<MeasureSpec>, shift: Vec<f64> },
    Dilate { measure: Box<MeasureSpec>, factor: f64 },
    /// Measure in the JSON or binary measure format.
    File { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    #[default]
    One,
    Gaussian { a: f64 },
    Linear { coeffs: Vec<f64>, offset: f64 },
    Cosine { freq: Vec<f64> },
    /// Seeded `±1` values.
    RandomSigns,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

fn planar_cantor(depth: u32) -> MeasureSpec {
    let c = MeasureSpec::Cantor { ratio: 0.25, depth };
    MeasureSpec::Translate {
        measure: Box::new(MeasureSpec::Product { factors: vec![c.clone(), c] }),
        shift: vec![-0.5, -0.5],
    }
}

fn grid2() -> Option<GridSpec> {
    Some(GridSpec { n: 256, half_width: 2.0 })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrostmanSpec {
    pub n_probes: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for FrostmanSpec {
    fn default() -> Self {
        FrostmanSpec { n_probes: 256, r_min: 1e-3, r_max: 0.25 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenMeasure {
    pub measure: MeasureSpec,
    pub frostman: Option<FrostmanSpec>,
}

impl Default for GenMeasure {
    fn default() -> Self {
        GenMeasure {
            measure: MeasureSpec::Cantor { ratio: 1.0 / 3.0, depth: 12 },
            frostman: Some(FrostmanSpec::default()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fourier {
    pub measure: MeasureSpec,
    pub f: FunctionSpec,
    pub grid: Option<GridSpec>,
    pub decay_shells: usize,
}

impl Default for Fourier {
    fn default() -> Self {
        Fourier {
            measure: MeasureSpec::Sphere { d: 2, t: 1.0, n_points: 4096 },
            f: FunctionSpec::One,
            grid: grid2(),
            decay_shells: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Strichartz {
    pub measure: MeasureSpec,
    pub f: FunctionSpec,
    pub grid: Option<GridSpec>,
    /// Defaults to the nominal dimension of the measure.
    pub s: Option<f64>,
    pub radii: Vec<f64>,
}

impl Default for Strichartz {
    fn default() -> Self {
        Strichartz {
            measure: planar_cantor(8),
            f: FunctionSpec::One,
            grid: grid2(),
            s: None,
            radii: vec![1.0, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Avg {
    pub measure: MeasureSpec,
    pub f: FunctionSpec,
    pub grid: Option<GridSpec>,
    pub t: f64,
    /// Mollification scale; defaults to three grid cells.
    pub eps: Option<f64>,
}

impl Default for Avg {
    fn default() -> Self {
        Avg { measure: planar_cantor(6), f: FunctionSpec::One, grid: grid2(), t: 0.5, eps: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Maximal {
    pub measure: MeasureSpec,
    pub f: FunctionSpec,
    pub grid: Option<GridSpec>,
    pub t_samples: usize,
}

impl Default for Maximal {
    fn default() -> Self {
        Maximal {
            measure: MeasureSpec::Dilate { measure: Box::new(planar_cantor(6)), factor: 0.5 },
            f: FunctionSpec::One,
            grid: Some(GridSpec { n: 256, half_width: 4.0 }),
            t_samples: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelChoice {
    Identity,
    Sphere { t: f64 },
    Lowpass { j: u32 },
    Riesz { alpha: f64 },
    TruncatedRiesz { alpha: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyChoice {
    RandomAtoms,
    Bumps,
    PowerIteration,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Opnorm {
    pub kernel: KernelChoice,
    pub mu: MeasureSpec,
    /// Defaults to `mu`.
    pub nu: Option<MeasureSpec>,
    pub grid: Option<GridSpec>,
    pub p: f64,
    pub family: FamilyChoice,
}

impl Default for Opnorm {
    fn default() -> Self {
        Opnorm {
            kernel: KernelChoice::Riesz { alpha: 1.2 },
            mu: planar_cantor(5),
            nu: None,
            grid: grid2(),
            p: 2.0,
            family: FamilyChoice::PowerIteration,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthQuantity {
    /// `‖σ_{2^{-j}}∗(fμ)‖_{L²}`.
    SphereL2,
    /// `∫ |f̂μ|² β(2^{-j}ξ) dξ`.
    AnnulusEnergy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Growth {
    pub measure: MeasureSpec,
    pub f: FunctionSpec,
    pub grid: Option<GridSpec>,
    pub quantity: GrowthQuantity,
    pub levels: Vec<u32>,
}

impl Default for Growth {
    fn default() -> Self {
        Growth {
            measure: planar_cantor(8),
            f: FunctionSpec::One,
            grid: Some(GridSpec { n: 1024, half_width: 1.0 }),
            quantity: GrowthQuantity::SphereL2,
            levels: (2..=7).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionSpec {
    #[serde(flatten)]
    pub axes: RegionAxes,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exponents {
    pub d: u32,
    pub s_mu: f64,
    pub s_nu: f64,
    pub p: f64,
    pub alpha: Option<f64>,
    pub p_f: Option<f64>,
    pub region: Option<RegionSpec>,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents { d: 3, s_mu: 3.0, s_nu: 3.0, p: 2.0, alpha: None, p_f: None, region: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Construction {
    Stein { d: usize, s: f64, p: f64 },
    FixedTime { d: usize, p: f64 },
    Riesz { d: usize, s: f64, alpha: f64, levels: u32 },
    Mattila { d: usize, alpha: f64, beta: f64, p: f64, eps: Option<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Counterexample {
    pub construction: Construction,
}

impl Default for Counterexample {
    fn default() -> Self {
        Counterexample { construction: Construction::Stein { d: 2, s: 1.5, p: 3.5 } }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Density {
    SmoothBump,
    FixedTimeSharpness,
    Ball { radius: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Thresholds {
    Absolute { values: Vec<f64> },
    RelativeToMax { fraction: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum WaveTask {
    Solution { density: Density, grid: GridSpec, t: f64 },
    Limit { density: Density, grid: GridSpec, times: Vec<f64> },
    Blowup {
        density: Density,
        t: f64,
        box_half_width: f64,
        refinements: Vec<usize>,
        thresholds: Thresholds,
        eps_cells: f64,
        stability: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Wave {
    pub run: WaveTask,
}

impl Default for Wave {
    fn default() -> Self {
        Wave {
            run: WaveTask::Blowup {
                density: Density::FixedTimeSharpness,
                t: 1.0,
                box_half_width: 2.0,
                refinements: vec![32, 64, 128],
                thresholds: Thresholds::RelativeToMax { fraction: 0.9 },
                eps_cells: 1.0,
                stability: 0.25,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Suite {
    /// Same as `--quick`.
    pub quick: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_path(e: CliError) -> String {
        match e {
            CliError::Config { path, .. } => path,
            other => panic!("not a config error: {other}"),
        }
    }

    // A manifest's materialized config must load back unchanged.
    fn round_trip<T: Serialize + DeserializeOwned + Default>(name: &str) {
        let mut v = serde_json::to_value(T::default()).unwrap();
        v.as_object_mut().unwrap().insert("experiment".into(), name.into());
        let back: T = parse(&v.to_string(), name).unwrap();
        v.as_object_mut().unwrap().remove("experiment");
        assert_eq!(serde_json::to_value(back).unwrap(), v, "{name}");
    }

    #[test]
    fn defaults_round_trip() {
        round_trip::<GenMeasure>("gen-measure");
        round_trip::<Fourier>("fourier");
        round_trip::<Strichartz>("strichartz");
        round_trip::<Avg>("avg");
        round_trip::<Maximal>("maximal");
        round_trip::<Opnorm>("opnorm");
        round_trip::<Growth>("growth");
        round_trip::<Exponents>("exponents");
        round_trip::<Counterexample>("counterexample");
        round_trip::<Wave>("wave");
        round_trip::<Suite>("suite");
    }

    #[test]
    fn error_paths() {
        assert_eq!(err_path(parse::<Avg>("[1]", "avg").unwrap_err()), "$");
        assert_eq!(err_path(parse::<Avg>(r#"{"experiment": 3}"#, "avg").unwrap_err()), "experiment");
        let nested = r#"{"experiment": "avg", "measure": {"kind": "translate", "shift": [0],
            "measure": {"kind": "cantor", "ratio": "x", "depth": 2}}}"#;
        // tagged enums are buffered, so the path stops at the enum
        match parse::<Avg>(nested, "avg").unwrap_err() {
            CliError::Config { path, msg } => {
                assert_eq!(path, "measure");
                assert!(msg.contains("invalid type"), "{msg}");
            }
            other => panic!("{other}"),
        }
        let unknown = r#"{"experiment": "avg", "measure": {"kind": "moon"}}"#;
        assert_eq!(err_path(parse::<Avg>(unknown, "avg").unwrap_err()), "measure.kind");
    }

    #[test]
    fn partial_configs_take_defaults() {
        let a: Avg = parse(r#"{"experiment": "avg", "t": 0.25}"#, "avg").unwrap();
        assert_eq!(a.t, 0.25);
        assert!(a.eps.is_none());
        let e: Exponents = parse(r#"{"experiment": "exponents", "s_mu": 2.5}"#, "exponents").unwrap();
        assert_eq!((e.d, e.s_mu, e.s_nu), (3, 2.5, 3.0));
    }
}
