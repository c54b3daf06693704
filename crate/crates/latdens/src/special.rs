//! Even-degree Bernoulli polynomials and Riemann zeta values.
//!
//! Everything downstream needs only `B_2`, `B_4`, `B_6` and `B_8`: degrees 2
//! and 4 are the supported kernel smoothness orders, doubling them covers the
//! squared-weight kernel, and degree `alpha + 4` shows up in the closed form
//! of the mean embedding of the benchmark density. Coefficients are stored as
//! exact rationals and converted to `f64` once, so endpoint identities such
//! as `B_d(0) = B_d(1)` are not at the mercy of decimal transcription.

use crate::error::{Error, Result};

/// Monomial coefficients of `B_d`, highest power first, as exact rationals.
const B2_COEFFS: &[(i64, i64)] = &[(1, 1), (-1, 1), (1, 6)];
const B4_COEFFS: &[(i64, i64)] = &[(1, 1), (-2, 1), (1, 1), (0, 1), (-1, 30)];
const B6_COEFFS: &[(i64, i64)] = &[(1, 1), (-3, 1), (5, 2), (0, 1), (-1, 2), (0, 1), (1, 42)];
const B8_COEFFS: &[(i64, i64)] = &[
    (1, 1),
    (-4, 1),
    (14, 3),
    (0, 1),
    (-7, 3),
    (0, 1),
    (2, 3),
    (0, 1),
    (-1, 30),
];

pub(crate) fn rational_coefficients(degree: u32) -> Result<&'static [(i64, i64)]> {
    match degree {
        2 => Ok(B2_COEFFS),
        4 => Ok(B4_COEFFS),
        6 => Ok(B6_COEFFS),
        8 => Ok(B8_COEFFS),
        other => Err(Error::Config(format!(
            "unsupported Bernoulli degree {other}; supported degrees are 2, 4, 6, 8"
        ))),
    }
}

/// A Bernoulli polynomial of even degree 2, 4, 6 or 8.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliPoly {
    degree: u32,
    coeffs: Vec<f64>,
}

impl BernoulliPoly {
    pub fn new(degree: u32) -> Result<Self> {
        let coeffs = rational_coefficients(degree)?
            .iter()
            .map(|&(num, den)| num as f64 / den as f64)
            .collect();
        Ok(Self { degree, coeffs })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Horner evaluation. `x` is expected in `[0, 1]`; use [`bernoulli_eval`]
    /// for a checked entry point.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in &self.coeffs {
            acc = acc * x + c;
        }
        acc
    }
}

/// Evaluates `B_degree(x)` for `degree` in {2, 4, 6, 8} and `x` in `[0, 1]`.
///
/// Arguments outside the unit interval are rejected; callers working with
/// periodic extensions must reduce to the fractional part first.
pub fn bernoulli_eval(degree: u32, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "x = {x} lies outside [0, 1]; reduce to the fractional part first"
        )));
    }
    Ok(BernoulliPoly::new(degree)?.eval(x))
}

/// Riemann zeta `zeta(s)` for `s > 1`, to absolute error below 1e-12.
///
/// `s = 2` and `s = 4` return the closed forms `pi^2/6` and `pi^4/90`; other
/// arguments use direct summation of the first 999 terms (smallest first)
/// with an Euler-Maclaurin tail correction.
pub fn zeta_value(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("zeta requires s > 1, got s = {s}")));
    }
    use std::f64::consts::PI;
    if s == 2.0 {
        return Ok(PI * PI / 6.0);
    }
    if s == 4.0 {
        return Ok(PI.powi(4) / 90.0);
    }

    const K0: u64 = 1000;
    let mut sum = 0.0;
    for k in (1..K0).rev() {
        sum += (k as f64).powf(-s);
    }
    let a = K0 as f64;
    let t = a.powf(-s);
    // Tail sum_{k >= K0} k^{-s} by Euler-Maclaurin; the first omitted term is
    // O(K0^{-s-7}), far below the 1e-12 contract.
    let tail = a * t / (s - 1.0) + t / 2.0 + s * t / (12.0 * a)
        - s * (s + 1.0) * (s + 2.0) * t / (720.0 * a.powi(3))
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * t / (30240.0 * a.powi(5));
    Ok(sum + tail)
}
