//! Weighted Korobov kernels with product weights.
//!
//! The kernel on `[0,1]^d` is a product of one-dimensional factors
//!
//! ```text
//! K(x, y) = prod_j ( 1 + gamma_j * omega_alpha({x_j - y_j}) ),
//! omega_alpha(t) = sum_{h != 0} e^{2 pi i h t} / |h|^alpha,
//! ```
//!
//! where `{.}` is the fractional part. For even `alpha` in {2, 4, 6, 8} the
//! weight function has the closed Bernoulli form
//! `omega_alpha(t) = (-1)^{alpha/2+1} (2 pi)^alpha / alpha! * B_alpha(t)`;
//! otherwise a truncated cosine series is used. The companion kernel with
//! squared Fourier weights (`l2_` methods) represents the pairwise L2 inner
//! products `<K(x,.), K(y,.)>` and equals the kernel with exponent `2 alpha`
//! and weights `gamma_j^2`; it is exposed as an evaluation only.

use crate::error::{Error, Result};
use crate::special::BernoulliPoly;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Fractional part `t - floor(t)`, mapping exact integers to 0.
#[inline]
pub(crate) fn frac(t: f64) -> f64 {
    t - t.floor()
}

/// Reduces a coordinate difference to the canonical lag in `[0, 1/2]`.
///
/// All kernel weight functions here are even and 1-periodic, so
/// `omega({x-y}) = omega(min(u, 1-u))` with `u = {|x-y|}`. Routing every
/// evaluation through `|x - y|` makes swapping the arguments bit-exact, and
/// the `u >= 1/2` branch of `1 - u` is exact in floating point.
#[inline]
pub(crate) fn canonical_lag(diff: f64) -> f64 {
    let u = frac(diff.abs());
    u.min(1.0 - u)
}

/// Per-coordinate weight sequence of a product-weighted space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWeights {
    gamma: Vec<f64>,
}

impl ProductWeights {
    /// Weights must be positive and finite; the empty-set weight is
    /// implicitly 1 (the constant term of every kernel factor).
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::Config(
                "product weights need at least one coordinate".into(),
            ));
        }
        if let Some(g) = gamma.iter().find(|g| !g.is_finite() || **g <= 0.0) {
            return Err(Error::Config(format!(
                "product weights must be positive and finite, got {g}"
            )));
        }
        Ok(Self { gamma })
    }

    /// The default preset `gamma_j = j^{-alpha}`.
    pub fn polynomial_decay(dimension: usize, alpha: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        Self::new((1..=dimension).map(|j| (j as f64).powf(-alpha)).collect())
    }

    pub fn constant(dimension: usize, value: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        Self::new(vec![value; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Componentwise square: the weight sequence of the squared-weight kernel.
    pub fn squared(&self) -> Self {
        Self {
            gamma: self.gamma.iter().map(|g| g * g).collect(),
        }
    }
}

/// Closed Bernoulli form of the kernel weight function `omega_alpha` for even
/// `alpha` in {2, 4, 6, 8}.
#[derive(Debug, Clone)]
pub(crate) struct OmegaWeight {
    poly: BernoulliPoly,
    scale: f64,
}

impl OmegaWeight {
    pub(crate) fn new(alpha: u32) -> Result<Self> {
        let poly = BernoulliPoly::new(alpha)?;
        let factorial: f64 = (1..=alpha).map(|k| k as f64).product();
        let sign = if (alpha / 2 + 1) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(Self {
            poly,
            scale: sign * (2.0 * PI).powi(alpha as i32) / factorial,
        })
    }

    /// `omega_alpha(t)` for `t` in `[0, 1]`.
    #[inline]
    pub(crate) fn eval(&self, t: f64) -> f64 {
        self.scale * self.poly.eval(t)
    }
}

fn even_order(alpha: f64) -> Option<u32> {
    if alpha.fract() == 0.0 && alpha >= 2.0 && alpha <= 8.0 && (alpha as u32) % 2 == 0 {
        Some(alpha as u32)
    } else {
        None
    }
}

fn cosine_series(exponent: f64, terms: usize, t: f64) -> f64 {
    (1..=terms)
        .rev()
        .map(|h| (2.0 * PI * h as f64 * t).cos() / (h as f64).powf(exponent))
        .sum()
}

/// Default truncation of the cosine-series fallback for non-even smoothness.
/// The series tail is bounded by `2 gamma sum_{h > H} h^{-alpha}`.
pub const DEFAULT_SERIES_TRUNCATION: usize = 10_000;

/// Weighted Korobov kernel of smoothness `alpha > 1`.
///
/// Immutable after construction; evaluations are pure and safe to call
/// concurrently.
#[derive(Debug, Clone)]
pub struct KorobovKernel {
    alpha: f64,
    weights: ProductWeights,
    series_truncation: usize,
    omega: Option<OmegaWeight>,
    l2_omega: Option<OmegaWeight>,
}

impl KorobovKernel {
    pub fn new(alpha: f64, weights: ProductWeights) -> Result<Self> {
        Self::with_series_truncation(alpha, weights, DEFAULT_SERIES_TRUNCATION)
    }

    pub fn with_series_truncation(
        alpha: f64,
        weights: ProductWeights,
        series_truncation: usize,
    ) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::Config(format!(
                "kernel smoothness must satisfy alpha > 1, got {alpha}"
            )));
        }
        if series_truncation == 0 {
            return Err(Error::Config("series truncation must be positive".into()));
        }
        let omega = match even_order(alpha) {
            Some(a) => Some(OmegaWeight::new(a)?),
            None => None,
        };
        let l2_omega = match even_order(2.0 * alpha) {
            Some(a2) => Some(OmegaWeight::new(a2)?),
            None => None,
        };
        Ok(Self {
            alpha,
            weights,
            series_truncation,
            omega,
            l2_omega,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> &ProductWeights {
        &self.weights
    }

    pub fn dimension(&self) -> usize {
        self.weights.dimension()
    }

    /// True when both the kernel and its squared-weight companion evaluate
    /// through exact Bernoulli closed forms (`alpha` in {2, 4}).
    pub fn has_closed_forms(&self) -> bool {
        self.omega.is_some() && self.l2_omega.is_some()
    }

    fn check_pair(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let d = self.dimension();
        if x.len() != d || y.len() != d {
            return Err(Error::Domain(format!(
                "dimension mismatch: kernel has d = {d}, points have {} and {}",
                x.len(),
                y.len()
            )));
        }
        Ok(())
    }

    /// One-dimensional factor `1 + gamma_j omega_alpha({diff})` for
    /// coordinate `j`. `diff` may be any real; it is reduced periodically.
    #[inline]
    pub fn factor(&self, j: usize, diff: f64) -> f64 {
        let t = canonical_lag(diff);
        let g = self.weights.gamma[j];
        match &self.omega {
            Some(om) => 1.0 + g * om.eval(t),
            None => 1.0 + 2.0 * g * cosine_series(self.alpha, self.series_truncation, t),
        }
    }

    /// Squared-weight companion factor `1 + gamma_j^2 omega_{2 alpha}({diff})`.
    #[inline]
    pub fn l2_factor(&self, j: usize, diff: f64) -> f64 {
        let t = canonical_lag(diff);
        let g = self.weights.gamma[j];
        match &self.l2_omega {
            Some(om) => 1.0 + g * g * om.eval(t),
            None => 1.0 + 2.0 * g * g * cosine_series(2.0 * self.alpha, self.series_truncation, t),
        }
    }

    /// `K(x, y)`. Coordinates are treated 1-periodically.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(x.iter()
            .zip(y)
            .enumerate()
            .map(|(j, (&a, &b))| self.factor(j, a - b))
            .product())
    }

    /// `<K(x, .), K(y, .)>` in L2: the kernel with squared Fourier weights.
    pub fn l2_eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(x.iter()
            .zip(y)
            .enumerate()
            .map(|(j, (&a, &b))| self.l2_factor(j, a - b))
            .product())
    }

    /// `K` evaluated on a difference vector (unchecked hot path).
    #[inline]
    pub fn eval_lag(&self, lag: &[f64]) -> f64 {
        debug_assert_eq!(lag.len(), self.dimension());
        lag.iter()
            .enumerate()
            .map(|(j, &t)| self.factor(j, t))
            .product()
    }

    /// Squared-weight kernel on a difference vector (unchecked hot path).
    #[inline]
    pub fn l2_eval_lag(&self, lag: &[f64]) -> f64 {
        debug_assert_eq!(lag.len(), self.dimension());
        lag.iter()
            .enumerate()
            .map(|(j, &t)| self.l2_factor(j, t))
            .product()
    }

    /// Reciprocal Fourier weight `r(h, gamma)^{-1} = prod_{j in supp h}
    /// gamma_j |h_j|^{-alpha}`; the empty support gives 1.
    pub fn fourier_weight_recip(&self, h: &[i64]) -> Result<f64> {
        if h.len() != self.dimension() {
            return Err(Error::Domain(format!(
                "dimension mismatch: kernel has d = {}, multi-index has {}",
                self.dimension(),
                h.len()
            )));
        }
        Ok(h.iter()
            .zip(&self.weights.gamma)
            .filter(|(&hj, _)| hj != 0)
            .map(|(&hj, &g)| g * (hj.unsigned_abs() as f64).powf(-self.alpha))
            .product())
    }

    /// Exact mean embedding `x -> int K(x, y) f(y) dy` for a density given by
    /// finitely many Fourier coefficients, `f(y) = sum_h c_h e^{2 pi i h.y}`.
    ///
    /// Term by term the integral multiplies each coefficient by the
    /// reciprocal Fourier weight: the result is
    /// `x -> sum_h r(h, gamma)^{-1} c_h e^{2 pi i h.x}`.
    pub fn mean_embedding(&self, coeffs: &FourierMap) -> Result<MeanEmbedding> {
        if coeffs.is_empty() {
            return Err(Error::Domain("empty Fourier coefficient map".into()));
        }
        let d = self.dimension();
        let zero = vec![0i64; d];
        match coeffs.get(&zero) {
            Some(c0) if (c0 - Complex64::new(1.0, 0.0)).norm() <= 1e-12 => {}
            Some(c0) => {
                return Err(Error::Domain(format!(
                    "coefficient at h = 0 must be 1 (density normalization), got {c0}"
                )))
            }
            None => {
                return Err(Error::Domain(
                    "coefficient map must contain h = 0 with value 1".into(),
                ))
            }
        }
        let mut terms = Vec::with_capacity(coeffs.len());
        for (h, c) in coeffs {
            let w = self.fourier_weight_recip(h)?;
            terms.push((h.clone(), w * c));
        }
        Ok(MeanEmbedding { terms })
    }
}

/// Finitely supported Fourier coefficients of a density, keyed by
/// multi-index. Coefficients follow the synthesis convention
/// `f(y) = sum_h c_h e^{2 pi i h.y}`.
pub type FourierMap = BTreeMap<Vec<i64>, Complex64>;

/// The function `x -> int K(x, y) f(y) dy` produced by
/// [`KorobovKernel::mean_embedding`].
#[derive(Debug, Clone)]
pub struct MeanEmbedding {
    terms: Vec<(Vec<i64>, Complex64)>,
}

impl MeanEmbedding {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (h, c) in &self.terms {
            let phase: f64 = h.iter().zip(x).map(|(&hj, &xj)| hj as f64 * xj).sum();
            acc += c * Complex64::from_polar(1.0, 2.0 * PI * phase);
        }
        debug_assert!(
            acc.im.abs() <= 1e-9 * (1.0 + acc.re.abs()),
            "mean embedding produced a non-real value: {acc}"
        );
        acc.re
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }
}
