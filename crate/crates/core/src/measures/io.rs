//! Measure serialization: a versioned JSON document and the compact
//! little-endian `FMEAS001` binary layout
//!
//! ```text
//! magic "FMEAS001" | dim u64 | count u64 | nominal_s f64 (NaN = none)
//! | construction u64 | atoms f64[count*dim] | weights f64[count]
//! | bbox lo f64[dim] | bbox hi f64[dim]
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{BoundingBox, Construction, DiscreteMeasure};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const MAGIC: &[u8; 8] = b"FMEAS001";

#[derive(Serialize, Deserialize)]
struct MeasureDoc {
    version: u32,
    dim: usize,
    nominal_s: Option<f64>,
    construction: Construction,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bbox: Option<BoundingBox>,
}

pub fn to_json(mu: &DiscreteMeasure) -> Result<String> {
    let doc = MeasureDoc {
        version: FORMAT_VERSION,
        dim: mu.dim(),
        nominal_s: mu.nominal_s(),
        construction: mu.construction(),
        atoms: mu.atoms().map(|p| p.to_vec()).collect(),
        weights: mu.weights().to_vec(),
        bbox: Some(mu.bbox().clone()),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn from_json(text: &str) -> Result<DiscreteMeasure> {
    let doc: MeasureDoc = serde_json::from_str(text)?;
    if doc.version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported measure version {}", doc.version)));
    }
    if let Some(bad) = doc.atoms.iter().position(|p| p.len() != doc.dim) {
        return Err(Error::Format(format!("atom {bad} does not have {} coordinates", doc.dim)));
    }
    let atoms = doc.atoms.concat();
    match doc.bbox {
        Some(b) => DiscreteMeasure::with_bbox(
            doc.dim,
            atoms,
            doc.weights,
            doc.construction,
            doc.nominal_s,
            b,
        ),
        None => DiscreteMeasure::new(doc.dim, atoms, doc.weights, doc.construction, doc.nominal_s),
    }
}

pub fn write_binary(mu: &DiscreteMeasure, mut w: impl Write) -> Result<()> {
    let mut buf = Vec::with_capacity(40 + 8 * (mu.coords().len() + mu.len() + 2 * mu.dim()));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(mu.dim() as u64).to_le_bytes());
    buf.extend_from_slice(&(mu.len() as u64).to_le_bytes());
    buf.extend_from_slice(&mu.nominal_s().unwrap_or(f64::NAN).to_le_bytes());
    buf.extend_from_slice(&mu.construction().code().to_le_bytes());
    let b = mu.bbox();
    for x in mu.coords().iter().chain(mu.weights()).chain(&b.lo).chain(&b.hi) {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<DiscreteMeasure> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 40 || &bytes[..8] != MAGIC {
        return Err(Error::Format("missing FMEAS001 header".into()));
    }
    let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().unwrap() };
    let dim = u64::from_le_bytes(word(1)) as usize;
    let count = u64::from_le_bytes(word(2)) as usize;
    let nominal = f64::from_le_bytes(word(3));
    let code = u64::from_le_bytes(word(4));
    let construction = Construction::from_code(code)
        .ok_or_else(|| Error::Format(format!("unknown construction code {code}")))?;
    if dim == 0 || dim > 3 {
        return Err(Error::Format(format!("bad dimension {dim}")));
    }
    let floats = count
        .checked_mul(dim + 1)
        .and_then(|n| n.checked_add(2 * dim))
        .ok_or_else(|| Error::Format("atom count overflow".into()))?;
    if bytes.len() != 40 + 8 * floats {
        return Err(Error::Format(format!(
            "expected {} bytes for {count} atoms, found {}",
            40 + 8 * floats,
            bytes.len()
        )));
    }
    let vals: Vec<f64> = (5..5 + floats).map(|k| f64::from_le_bytes(word(k))).collect();
    let (atoms, rest) = vals.split_at(count * dim);
    let (weights, bb) = rest.split_at(count);
    DiscreteMeasure::with_bbox(
        dim,
        atoms.to_vec(),
        weights.to_vec(),
        construction,
        (!nominal.is_nan()).then_some(nominal),
        BoundingBox {
            lo: bb[..dim].to_vec(),
            hi: bb[dim..].to_vec(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{cantor_measure, product_measure, sphere_measure};

    #[test]
    fn json_round_trip() {
        let m = product_measure(&[cantor_measure(0.25, 3).unwrap(), cantor_measure(0.5, 2).unwrap()])
            .unwrap();
        let back = from_json(&to_json(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn binary_round_trip() {
        let m = sphere_measure(3, 2.0, 100).unwrap();
        let mut buf = Vec::new();
        write_binary(&m, &mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(read_binary(buf.as_slice()).unwrap(), m);
        buf.pop();
        assert!(read_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn rejects_bad_json() {
        assert!(from_json("{}").is_err());
        let bad = r#"{"version":1,"dim":2,"nominal_s":null,"construction":"custom","atoms":[[0.0]],"weights":[1.0]}"#;
        assert!(from_json(bad).is_err());
    }
}
