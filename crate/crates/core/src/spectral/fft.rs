use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

/// Unnormalized in-place `d`-dimensional DFT on a row-major cube with `n`
/// points per axis; `inverse` flips the exponent sign.
pub(crate) fn fft_nd(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    let dir = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    let fft = FftPlanner::new().plan_fft(n, dir);
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            data.par_chunks_mut(n * 64.min(data.len() / n))
                .for_each(|c| fft.process(c));
            continue;
        }
        let block = n * stride;
        data.par_chunks_mut(block).for_each(|b| {
            // columns of the block, gathered `group` at a time
            let group = stride.min(64);
            let mut buf = vec![Complex64::new(0.0, 0.0); group * n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for c0 in (0..stride).step_by(group) {
                let g = group.min(stride - c0);
                for r in 0..n {
                    let row = &b[r * stride + c0..r * stride + c0 + g];
                    for (c, v) in row.iter().enumerate() {
                        buf[c * n + r] = *v;
                    }
                }
                fft.process_with_scratch(&mut buf[..g * n], &mut scratch);
                for r in 0..n {
                    let row = &mut b[r * stride + c0..r * stride + c0 + g];
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = buf[c * n + r];
                    }
                }
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(data: &[Complex64], dim: usize, n: usize) -> Vec<Complex64> {
        let len = n.pow(dim as u32);
        let idx = |i: usize| -> Vec<usize> {
            let mut v = vec![0; dim];
            let mut r = i;
            for a in (0..dim).rev() {
                v[a] = r % n;
                r /= n;
            }
            v
        };
        (0..len)
            .map(|k| {
                let kk = idx(k);
                (0..len)
                    .map(|m| {
                        let mm = idx(m);
                        let ph: usize = kk.iter().zip(&mm).map(|(a, b)| a * b).sum();
                        data[m]
                            * Complex64::from_polar(
                                1.0,
                                -2.0 * std::f64::consts::PI * (ph % n) as f64 / n as f64,
                            )
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for dim in 1..=3 {
            let n: usize = 8;
            let len = n.pow(dim as u32);
            let data: Vec<Complex64> = (0..len)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut fast = data.clone();
            fft_nd(&mut fast, dim, n, false);
            for (a, b) in fast.iter().zip(naive(&data, dim, n)) {
                assert!((a - b).norm() < 1e-10, "dim {dim}");
            }
            fft_nd(&mut fast, dim, n, true);
            for (a, b) in fast.iter().zip(&data) {
                assert!((a / len as f64 - b).norm() < 1e-13);
            }
        }
    }
}
