//! The benchmark product density and exact sampling from it.
//!
//! The density on `[0,1]^d` is `f(y) = prod_j (1 + a_j B_4(y_j))` with
//! amplitudes `a_j = j^{-4}` by default. Each factor integrates to 1 and
//! stays positive, the per-coordinate maximum sits at `y_j = 1/2`, and the
//! Fourier coefficients factor across coordinates, which makes the density a
//! convenient ground truth: it can be sampled exactly by rejection, evaluated
//! in closed form, and integrated against the Korobov kernel analytically.

use crate::error::{Error, Result};
use crate::kernel::FourierMap;
use crate::rng::derive_rng;
use crate::special::{rational_coefficients, BernoulliPoly};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// `B_4` ranges over `[-1/30, 7/240]` on the unit interval.
const B4_MIN: f64 = -1.0 / 30.0;
const B4_MAX: f64 = 7.0 / 240.0;

/// Rejection-sampler tallies; the expected acceptance rate is the reciprocal
/// of the envelope constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleStats {
    pub proposals: u64,
    pub accepted: u64,
}

impl SampleStats {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposals as f64
    }
}

/// Benchmark density `f(y) = prod_j (1 + a_j B_4(y_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestDensity {
    amplitudes: Vec<f64>,
    b4: BernoulliPoly,
}

impl TestDensity {
    /// The default amplitudes `a_j = j^{-4}`.
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        Self::with_amplitudes((1..=dimension).map(|j| (j as f64).powi(-4)).collect())
    }

    /// Custom amplitudes; each must keep `1 + a_j B_4` strictly positive,
    /// i.e. `a_j` in `(-240/7, 30)`. Zero amplitudes are allowed and give
    /// uniform coordinates.
    pub fn with_amplitudes(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        for &a in &amplitudes {
            if !a.is_finite() || 1.0 + a * B4_MIN <= 0.0 || 1.0 + a * B4_MAX <= 0.0 {
                return Err(Error::Config(format!(
                    "amplitude {a} makes the density non-positive"
                )));
            }
        }
        Ok(Self {
            amplitudes,
            b4: BernoulliPoly::new(4).expect("degree 4 is supported"),
        })
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// `f(y)`; rejects points outside the unit cube.
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dimension() {
            return Err(Error::Domain(format!(
                "dimension mismatch: density has d = {}, point has {}",
                self.dimension(),
                y.len()
            )));
        }
        if let Some(bad) = y.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!(
                "coordinate {bad} lies outside [0, 1]"
            )));
        }
        Ok(self.eval_unchecked(y))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, y: &[f64]) -> f64 {
        self.amplitudes
            .iter()
            .zip(y)
            .map(|(&a, &v)| 1.0 + a * self.b4.eval(v))
            .product()
    }

    /// Envelope constant `C = prod_j max_y (1 + a_j B_4(y))`; the rejection
    /// sampler accepts with probability `1/C`.
    pub fn envelope_constant(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|&a| 1.0 + a * if a >= 0.0 { B4_MAX } else { B4_MIN })
            .product()
    }

    /// Draws `count` exact samples by acceptance-rejection with uniform
    /// proposals: accept when `u C <= f(y)`. Deterministic for a fixed seed.
    pub fn sample(&self, count: usize, seed: u64) -> (Vec<Vec<f64>>, SampleStats) {
        self.sample_with(count, &mut derive_rng(seed, 0))
    }

    /// As [`sample`](Self::sample) but drawing from a caller-provided stream.
    pub fn sample_with(&self, count: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, SampleStats) {
        let d = self.dimension();
        let envelope = self.envelope_constant();
        let mut stats = SampleStats {
            proposals: 0,
            accepted: 0,
        };
        let mut out = Vec::with_capacity(count);
        let mut y = vec![0.0f64; d];
        while out.len() < count {
            for slot in y.iter_mut() {
                *slot = rng.gen::<f64>();
            }
            let u: f64 = rng.gen();
            stats.proposals += 1;
            if u * envelope <= self.eval_unchecked(&y) {
                stats.accepted += 1;
                out.push(y.clone());
            }
        }
        (out, stats)
    }

    /// Exact marginal CDF of coordinate `j`:
    /// `F_j(y) = y + a_j B_5(y) / 5` with `B_5` the antiderivative-matched
    /// Bernoulli polynomial (`B_5(0) = 0`).
    pub fn cdf(&self, j: usize, y: f64) -> Result<f64> {
        if j >= self.dimension() {
            return Err(Error::Domain(format!(
                "coordinate index {j} out of range for d = {}",
                self.dimension()
            )));
        }
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain(format!("argument {y} lies outside [0, 1]")));
        }
        Ok(y + self.amplitudes[j] * b5_eval(y) / 5.0)
    }

    /// Fourier coefficients of the density up to `|h_j| <= h_max`
    /// componentwise, in the synthesis convention
    /// `f(y) = sum_h c_h e^{2 pi i h.y}`. The support has
    /// `(2 h_max + 1)^d` entries, so this is an oracle for small dimensions.
    pub fn fourier_coefficients(&self, h_max: i64) -> Result<FourierMap> {
        if h_max < 0 {
            return Err(Error::Domain(format!("h_max must be >= 0, got {h_max}")));
        }
        let d = self.dimension();
        let width = 2 * h_max as u128 + 1;
        let mut support: u128 = 1;
        for _ in 0..d {
            support = support.saturating_mul(width);
            if support > 1 << 24 {
                return Err(Error::Config(format!(
                    "truncated Fourier support (2*{h_max}+1)^{d} is too large to enumerate"
                )));
            }
        }

        // One-dimensional factors c_j(h) = 1 at h = 0, else
        // a_j * (-1)^{4/2+1} 4! / (2 pi h)^4.
        let scale = -24.0 / (2.0 * PI).powi(4);
        let factor = |j: usize, h: i64| -> f64 {
            if h == 0 {
                1.0
            } else {
                self.amplitudes[j] * scale / (h as f64).powi(4)
            }
        };

        let mut map = FourierMap::new();
        let mut h = vec![-h_max; d];
        loop {
            let value: f64 = h.iter().enumerate().map(|(j, &hj)| factor(j, hj)).product();
            map.insert(h.clone(), Complex64::new(value, 0.0));
            let mut carry = d;
            for j in (0..d).rev() {
                if h[j] < h_max {
                    h[j] += 1;
                    carry = j;
                    break;
                }
                h[j] = -h_max;
            }
            if carry == d {
                break;
            }
        }
        Ok(map)
    }
}

/// `B_5(t) = t^5 - 5/2 t^4 + 5/3 t^3 - 1/6 t`, derived once from the exact
/// rational coefficients of `B_4` (termwise antiderivative times 5).
fn b5_eval(t: f64) -> f64 {
    static COEFFS: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
    let coeffs = COEFFS.get_or_init(|| {
        let b4 = rational_coefficients(4).expect("degree 4 is supported");
        let mut c: Vec<f64> = b4
            .iter()
            .enumerate()
            .map(|(i, &(num, den))| {
                let power = (b4.len() - 1 - i) as i64;
                5.0 * num as f64 / (den as f64 * (power + 1) as f64)
            })
            .collect();
        c.push(0.0);
        c
    });
    let mut acc = 0.0;
    for &c in coeffs {
        acc = acc * t + c;
    }
    acc
}

/// Writes points as CSV, one point per row, 17 significant digits.
pub fn write_sample_csv(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for point in points {
        let mut first = true;
        for v in point {
            if !first {
                write!(out, ",")?;
            }
            write!(out, "{v:.16e}")?;
            first = false;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a sample CSV: every row must have the same number of columns and
/// every value must be a real in `[0, 1]`. Errors carry the 1-based row and
/// column of the first offense.
pub fn read_sample_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (row_idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = row_idx + 1;
        let mut point = Vec::new();
        for (col_idx, field) in line.split(',').enumerate() {
            let col = col_idx + 1;
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {row}, column {col}: {e}")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Parse(format!(
                    "row {row}, column {col}: value {value} outside [0, 1]"
                )));
            }
            point.push(value);
        }
        if let Some(first) = points.first() {
            if point.len() != first.len() {
                return Err(Error::Parse(format!(
                    "row {row}: expected {} columns, found {}",
                    first.len(),
                    point.len()
                )));
            }
        }
        points.push(point);
    }
    if points.is_empty() {
        return Err(Error::Parse("sample CSV contains no rows".into()));
    }
    Ok(points)
}
