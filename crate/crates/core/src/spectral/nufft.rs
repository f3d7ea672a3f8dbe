//! Gaussian-gridding nonuniform FFTs on a twice oversampled grid.
//!
//! Type 1 spreads `Σ_j c_j g(x − x_j)` onto the fine grid, transforms and
//! divides by `ĝ`; type 2 runs the same steps backwards. The kernel width in
//! fine cells is `s = (W/(π√2))^{1/2}`, which balances the truncation error
//! `e^{-W²/2s²}` against the aliasing error `e^{-π²s²}` at the Nyquist
//! frequency; both are about `2·10^{-8}` for `W = 8`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::fft_nd;
use super::SpectralGrid;

const OVERSAMPLE: usize = 2;
const HALF_WIDTH: usize = 8;

struct Plan {
    dim: usize,
    n: usize,
    fine: usize,
    half_width: f64,
    h_fine: f64,
    s: f64,
}

impl Plan {
    fn new(grid: &SpectralGrid) -> Self {
        let fine = OVERSAMPLE * grid.n_per_axis();
        Plan {
            dim: grid.dim(),
            n: grid.n_per_axis(),
            fine,
            half_width: grid.box_half_width(),
            h_fine: 2.0 * grid.box_half_width() / fine as f64,
            s: (HALF_WIDTH as f64 / (PI * 2f64.sqrt())).sqrt(),
        }
    }

    /// First fine index of the stencil and the `2W` kernel weights along one
    /// axis for coordinate `x`.
    fn stencil(&self, x: f64) -> (i64, [f64; 2 * HALF_WIDTH]) {
        let u = (x + self.half_width) / self.h_fine;
        let m0 = u.floor() as i64 - HALF_WIDTH as i64 + 1;
        let mut w = [0.0; 2 * HALF_WIDTH];
        let c = 0.5 / (self.s * self.s);
        for (o, wo) in w.iter_mut().enumerate() {
            let d = (m0 + o as i64) as f64 - u;
            *wo = (-c * d * d).exp();
        }
        (m0, w)
    }

    fn wrap(&self, m: i64) -> usize {
        m.rem_euclid(self.fine as i64) as usize
    }

    /// `1/ĝ` in fine-cell units, including the `h_fine` quadrature factor,
    /// for signed coarse index `k` along one axis.
    fn deconv(&self, k: i64) -> f64 {
        let xi_cells = k as f64 / self.fine as f64;
        (2.0 * PI * PI * self.s * self.s * xi_cells * xi_cells).exp()
            / (self.s * (2.0 * PI).sqrt())
    }

    fn signed(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    fn fine_len(&self) -> usize {
        self.fine.pow(self.dim as u32)
    }

    /// Fine flat index and combined factor for each coarse FFT-order index.
    fn coarse_map(&self) -> Vec<(usize, f64)> {
        let n = self.n;
        let len = n.pow(self.dim as u32);
        let factors: Vec<f64> = (0..n).map(|k| self.deconv(self.signed(k))).collect();
        (0..len)
            .map(|i| {
                let mut rest = i;
                let mut fidx = 0;
                let mut f = 1.0;
                let mut parity = 0i64;
                let mut mult = 1;
                for _ in 0..self.dim {
                    let k = rest % n;
                    rest /= n;
                    let ks = self.signed(k);
                    fidx += self.wrap(ks) * mult;
                    mult *= self.fine;
                    f *= factors[k];
                    parity += ks;
                }
                (fidx, if parity % 2 == 0 { f } else { -f })
            })
            .collect()
    }
}

/// `F(ξ_k) = Σ_j c_j e^{-2πi x_j·ξ_k}` for every frequency of `grid`, in FFT
/// order. Coordinates must lie in `[-L, L]^d`.
pub(crate) fn nufft_type1(grid: &SpectralGrid, coords: &[f64], c: &[Complex64]) -> Vec<Complex64> {
    let p = Plan::new(grid);
    let d = p.dim;
    let mut fine = vec![Complex64::new(0.0, 0.0); p.fine_len()];
    let nf = p.fine;
    for (x, cj) in coords.chunks_exact(d).zip(c) {
        if cj.re == 0.0 && cj.im == 0.0 {
            continue;
        }
        let st: Vec<(i64, [f64; 2 * HALF_WIDTH])> = x.iter().map(|v| p.stencil(*v)).collect();
        match d {
            1 => {
                for (o, w) in st[0].1.iter().enumerate() {
                    fine[p.wrap(st[0].0 + o as i64)] += cj * w;
                }
            }
            2 => {
                for (a, wa) in st[0].1.iter().enumerate() {
                    let row = p.wrap(st[0].0 + a as i64) * nf;
                    let ca = cj * wa;
                    for (b, wb) in st[1].1.iter().enumerate() {
                        fine[row + p.wrap(st[1].0 + b as i64)] += ca * wb;
                    }
                }
            }
            _ => {
                for (a, wa) in st[0].1.iter().enumerate() {
                    let pa = p.wrap(st[0].0 + a as i64) * nf;
                    for (b, wb) in st[1].1.iter().enumerate() {
                        let row = (pa + p.wrap(st[1].0 + b as i64)) * nf;
                        let cab = cj * (wa * wb);
                        for (e, we) in st[2].1.iter().enumerate() {
                            fine[row + p.wrap(st[2].0 + e as i64)] += cab * we;
                        }
                    }
                }
            }
        }
    }
    fft_nd(&mut fine, d, nf, false);
    p.coarse_map()
        .into_iter()
        .map(|(fi, f)| fine[fi] * f)
        .collect()
}

/// `S(y_j) = Σ_k G_k e^{2πi y_j·ξ_k}` for FFT-order coefficients `G`.
pub(crate) fn nufft_type2(grid: &SpectralGrid, freq: &[Complex64], coords: &[f64]) -> Vec<Complex64> {
    let p = Plan::new(grid);
    let d = p.dim;
    let nf = p.fine;
    let mut fine = vec![Complex64::new(0.0, 0.0); p.fine_len()];
    for ((fi, f), g) in p.coarse_map().into_iter().zip(freq) {
        fine[fi] = g * f;
    }
    fft_nd(&mut fine, d, nf, true);
    coords
        .chunks_exact(d)
        .map(|x| {
            let st: Vec<(i64, [f64; 2 * HALF_WIDTH])> = x.iter().map(|v| p.stencil(*v)).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            match d {
                1 => {
                    for (o, w) in st[0].1.iter().enumerate() {
                        acc += fine[p.wrap(st[0].0 + o as i64)] * w;
                    }
                }
                2 => {
                    for (a, wa) in st[0].1.iter().enumerate() {
                        let row = p.wrap(st[0].0 + a as i64) * nf;
                        let mut inner = Complex64::new(0.0, 0.0);
                        for (b, wb) in st[1].1.iter().enumerate() {
                            inner += fine[row + p.wrap(st[1].0 + b as i64)] * wb;
                        }
                        acc += inner * wa;
                    }
                }
                _ => {
                    for (a, wa) in st[0].1.iter().enumerate() {
                        let pa = p.wrap(st[0].0 + a as i64) * nf;
                        for (b, wb) in st[1].1.iter().enumerate() {
                            let row = (pa + p.wrap(st[1].0 + b as i64)) * nf;
                            let mut inner = Complex64::new(0.0, 0.0);
                            for (e, we) in st[2].1.iter().enumerate() {
                                inner += fine[row + p.wrap(st[2].0 + e as i64)] * we;
                            }
                            acc += inner * (wa * wb);
                        }
                    }
                }
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct1(grid: &SpectralGrid, coords: &[f64], c: &[Complex64], idx: usize) -> Complex64 {
        let xi = grid.frequency(idx);
        coords
            .chunks_exact(grid.dim())
            .zip(c)
            .map(|(x, cj)| {
                let ph: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
                cj * Complex64::from_polar(1.0, -2.0 * PI * ph)
            })
            .sum()
    }

    fn pseudo(k: usize) -> f64 {
        ((k as f64 * 12.9898).sin() * 43758.5453).fract()
    }

    #[test]
    fn type1_and_type2_match_direct_sums() {
        for dim in 1..=3 {
            let n = [64, 32, 16][dim - 1];
            let grid = SpectralGrid::new(dim, n, 1.5).unwrap();
            let m = 40;
            let coords: Vec<f64> = (0..m * dim).map(|k| 2.9 * pseudo(k).abs() - 1.45).collect();
            let c: Vec<Complex64> = (0..m)
                .map(|k| Complex64::new(pseudo(k + 1000), pseudo(k + 2000)))
                .collect();
            let scale: f64 = c.iter().map(|v| v.norm()).sum();
            let fast = nufft_type1(&grid, &coords, &c);
            for idx in (0..grid.len()).step_by(7) {
                let err = (fast[idx] - direct1(&grid, &coords, &c, idx)).norm() / scale;
                assert!(err < 1e-7, "type 1, dim {dim}: {err}");
            }
            let g: Vec<Complex64> = (0..grid.len())
                .map(|k| Complex64::new(pseudo(k + 3), pseudo(k + 5)))
                .collect();
            let gscale: f64 = g.iter().map(|v| v.norm()).sum();
            let s = nufft_type2(&grid, &g, &coords);
            for (j, y) in coords.chunks_exact(dim).enumerate() {
                let want: Complex64 = (0..grid.len())
                    .map(|k| {
                        let xi = grid.frequency(k);
                        let ph: f64 = y.iter().zip(&xi).map(|(a, b)| a * b).sum();
                        g[k] * Complex64::from_polar(1.0, 2.0 * PI * ph)
                    })
                    .sum();
                let err = (s[j] - want).norm() / gscale;
                assert!(err < 1e-7, "type 2, dim {dim}: {err}");
            }
        }
    }
}
