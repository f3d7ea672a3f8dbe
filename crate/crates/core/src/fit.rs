//! Ordinary least-squares line fits used for every scaling-exponent estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of a straight-line fit `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Smallest and largest abscissa used.
    pub range: (f64, f64),
    pub n_points: usize,
}

impl FitReport {
    pub const CSV_HEADER: &'static str = "slope,intercept,residual,range_lo,range_hi";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.slope, self.intercept, self.residual, self.range.0, self.range.1
        )
    }
}

/// Fits a line through `(xs[i], ys[i])`. Non-finite points are rejected.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<FitReport> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!(
            "length mismatch: {} abscissae, {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite sample in fit input".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitReport {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        range: (lo, hi),
        n_points: xs.len(),
    })
}

/// Fits `log2(values)` against `xs`; entries with nonpositive values are skipped.
pub fn log2_fit(xs: &[f64], values: &[f64]) -> Result<FitReport> {
    let (fx, fy): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(x, v)| (*x, v.log2()))
        .unzip();
    least_squares(&fx, &fy)
}
