//! Discretized measures and their ball-growth, energy and pair statistics.
//!
//! Every measure is a finite list of weighted atoms in `R^d` (`d ≤ 3`).
//! Constructors approximate the classical objects: self-similar Cantor
//! measures, tensor products, radial power densities, normalized sphere
//! measures and Lebesgue measure on boxes.

mod construct;
mod growth;
pub mod io;
mod pairs;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

pub use construct::{
    cantor_measure, dirac, lebesgue_box, product_measure, radial_power_measure, sphere_measure,
    uniform_ball_sample, MAX_ATOMS,
};
pub use growth::{ball_mass, ball_masses, frostman_fit, FrostmanOptions, FrostmanReport};
pub use pairs::{
    annulus_pair_mass, chain_triple_mass, energy_integral, energy_refinement, EnergyReport,
    RefinementReport,
};

/// Provenance of a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Cantor,
    Product,
    RadialPower,
    Sphere,
    LebesgueBox,
    Custom,
}

impl Construction {
    pub(crate) fn code(self) -> u64 {
        match self {
            Construction::Cantor => 0,
            Construction::Product => 1,
            Construction::RadialPower => 2,
            Construction::Sphere => 3,
            Construction::LebesgueBox => 4,
            Construction::Custom => 5,
        }
    }

    pub(crate) fn from_code(code: u64) -> Option<Self> {
        Some(match code {
            0 => Construction::Cantor,
            1 => Construction::Product,
            2 => Construction::RadialPower,
            3 => Construction::Sphere,
            4 => Construction::LebesgueBox,
            5 => Construction::Custom,
            _ => return None,
        })
    }
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    fn tight(dim: usize, atoms: &[f64]) -> Self {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in atoms.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if atoms.is_empty() {
            lo.fill(0.0);
            hi.fill(0.0);
        }
        BoundingBox { lo, hi }
    }
}

/// Finite atomic approximation of a compactly supported Borel measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<f64>,
    weights: Vec<f64>,
    total_mass: f64,
    nominal_s: Option<f64>,
    construction: Construction,
    bbox: BoundingBox,
}

impl DiscreteMeasure {
    /// Builds a measure from flat row-major atom coordinates. The bounding
    /// box is the tight box around the atoms.
    pub fn new(
        dim: usize,
        atoms: Vec<f64>,
        weights: Vec<f64>,
        construction: Construction,
        nominal_s: Option<f64>,
    ) -> Result<Self> {
        let bbox = BoundingBox::tight(dim, &atoms);
        Self::with_bbox(dim, atoms, weights, construction, nominal_s, bbox)
    }

    pub fn with_bbox(
        dim: usize,
        atoms: Vec<f64>,
        weights: Vec<f64>,
        construction: Construction,
        nominal_s: Option<f64>,
        bbox: BoundingBox,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return param(format!("dimension must be 1, 2 or 3, got {dim}"));
        }
        if atoms.len() != dim * weights.len() {
            return param(format!(
                "{} coordinates do not describe {} atoms in dimension {dim}",
                atoms.len(),
                weights.len()
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return param("weights must be finite and nonnegative");
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return param("atom coordinates must be finite");
        }
        if bbox.lo.len() != dim || bbox.hi.len() != dim {
            return param("bounding box dimension mismatch");
        }
        if let Some(bad) = atoms.chunks_exact(dim).position(|p| !bbox.contains(p)) {
            return param(format!("atom {bad} lies outside the declared bounding box"));
        }
        if let Some(s) = nominal_s {
            if !(0.0..=dim as f64).contains(&s) {
                return param(format!("nominal exponent {s} outside [0, {dim}]"));
            }
        }
        let total_mass = weights.iter().sum();
        Ok(DiscreteMeasure {
            dim,
            atoms,
            weights,
            total_mass,
            nominal_s,
            construction,
            bbox,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.atoms.chunks_exact(self.dim)
    }

    /// Flat row-major coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn nominal_s(&self) -> Option<f64> {
        self.nominal_s
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    /// Same atoms rescaled to unit total mass.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        if self.total_mass > 0.0 {
            out.weights.iter_mut().for_each(|w| *w /= self.total_mass);
            out.total_mass = out.weights.iter().sum();
        }
        out
    }

    /// Push-forward under `x ↦ c·x` (mass preserving), `c > 0`.
    pub fn dilate(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.atoms.iter_mut().for_each(|x| *x *= c);
        out.bbox.lo.iter_mut().for_each(|x| *x *= c);
        out.bbox.hi.iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Push-forward under `x ↦ x + shift`.
    pub fn translate(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for p in out.atoms.chunks_exact_mut(self.dim) {
            p.iter_mut().zip(shift).for_each(|(x, s)| *x += s);
        }
        for ((lo, hi), s) in out.bbox.lo.iter_mut().zip(out.bbox.hi.iter_mut()).zip(shift) {
            *lo += s;
            *hi += s;
        }
        out
    }

    /// Evaluates `f` at every atom.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        self.atoms().map(f).collect()
    }

    /// Stable digest of atoms and weights, used in run manifests.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for x in &self.atoms {
            h.update(x.to_le_bytes());
        }
        for w in &self.weights {
            h.update(w.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
