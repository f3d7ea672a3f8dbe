//! Field export: CSV rows `coords…, re, im, modulus` and the little-endian
//! `FFLD0001` binary layout
//!
//! ```text
//! magic "FFLD0001" | dim u64 | n_per_axis u64 | box_half_width f64
//! | domain u64 (0 space, 1 frequency) | (re f64, im f64)[n^d]
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{ComplexField, FieldDomain, SpectralGrid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"FFLD0001";

pub fn write_csv(field: &ComplexField, mut w: impl Write) -> Result<()> {
    let g = field.grid;
    let axis = match field.domain {
        FieldDomain::Space => "x",
        FieldDomain::Frequency => "xi",
    };
    let mut out = String::new();
    for a in 0..g.dim() {
        out.push_str(&format!("{axis}{},", a + 1));
    }
    out.push_str("re,im,modulus\n");
    for (i, v) in field.values.iter().enumerate() {
        let c = match field.domain {
            FieldDomain::Space => g.point(i),
            FieldDomain::Frequency => g.frequency(i),
        };
        for x in &c[..g.dim()] {
            out.push_str(&format!("{x:e},"));
        }
        out.push_str(&format!("{:e},{:e},{:e}\n", v.re, v.im, v.norm()));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_binary(field: &ComplexField, mut w: impl Write) -> Result<()> {
    let g = field.grid;
    let mut buf = Vec::with_capacity(40 + 16 * field.values.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(g.dim() as u64).to_le_bytes());
    buf.extend_from_slice(&(g.n_per_axis() as u64).to_le_bytes());
    buf.extend_from_slice(&g.box_half_width().to_le_bytes());
    let tag: u64 = match field.domain {
        FieldDomain::Space => 0,
        FieldDomain::Frequency => 1,
    };
    buf.extend_from_slice(&tag.to_le_bytes());
    for v in &field.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<ComplexField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 40 || &bytes[..8] != MAGIC {
        return Err(Error::Format("missing FFLD0001 header".into()));
    }
    let word = |k: usize| -> [u8; 8] { bytes[k..k + 8].try_into().unwrap() };
    let dim = u64::from_le_bytes(word(8)) as usize;
    let n = u64::from_le_bytes(word(16)) as usize;
    let half = f64::from_le_bytes(word(24));
    let domain = match u64::from_le_bytes(word(32)) {
        0 => FieldDomain::Space,
        1 => FieldDomain::Frequency,
        t => return Err(Error::Format(format!("unknown field domain tag {t}"))),
    };
    let grid = SpectralGrid::new(dim, n, half).map_err(|e| Error::Format(e.to_string()))?;
    if bytes.len() != 40 + 16 * grid.len() {
        return Err(Error::Format(format!(
            "expected {} bytes of field data, found {}",
            16 * grid.len(),
            bytes.len() - 40
        )));
    }
    let values = (0..grid.len())
        .map(|i| {
            let o = 40 + 16 * i;
            Complex64::new(f64::from_le_bytes(word(o)), f64::from_le_bytes(word(o + 8)))
        })
        .collect();
    ComplexField::new(grid, values, domain)
}
