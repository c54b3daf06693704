//! Direct discrete Fourier transform for short transform lengths.
//!
//! The Gram systems here are circulant of prime size (a handful of points),
//! so an O(N^2) transform with exactly reduced twiddle arguments is both
//! fast enough and more accurate than a general FFT would need to be.

use num_complex::Complex64;
use std::f64::consts::PI;

fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let angle = sign * 2.0 * PI * j as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// Forward transform `X_k = sum_n x_n e^{-2 pi i k n / N}`.
pub(crate) fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let w = twiddles(n, -1.0);
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &xj) in x.iter().enumerate() {
                acc += xj * w[k * j % n];
            }
            acc
        })
        .collect()
}

/// Inverse transform `x_n = (1/N) sum_k X_k e^{+2 pi i k n / N}`.
pub(crate) fn idft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let w = twiddles(n, 1.0);
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &xj) in x.iter().enumerate() {
                acc += xj * w[k * j % n];
            }
            acc / n as f64
        })
        .collect()
}

pub(crate) fn dft_real(x: &[f64]) -> Vec<Complex64> {
    let lifted: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft(&lifted)
}
