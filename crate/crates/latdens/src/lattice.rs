//! Rank-1 lattice point sets and component-by-component construction of
//! generating vectors.
//!
//! A rule with prime modulus `N` and generating vector `z` materializes the
//! points `{k z / N}`, `k = 1..N` (the last one is the origin). Differences
//! of lattice points depend only on `(j - k) mod N`, which is what makes the
//! estimator's Gram matrix circulant.
//!
//! The component-by-component search minimizes the worst-case integration
//! error criterion
//!
//! ```text
//! E_s^2(z) = -1 + (1/N) sum_k prod_{j<=s} (1 + gamma_j omega_alpha({k z_j / N}))
//! ```
//!
//! at each step, with ties broken toward the smallest candidate. An
//! L2-approximation-oriented search (squared weights, doubled exponent,
//! equal to the integration criterion of the companion kernel) is the other
//! standard choice; at the moduli this crate targets it picks vectors that
//! differ at most by coordinate order, with both criterion values within a
//! few percent, so the integration criterion is used throughout. The
//! doubled-exponent value of a vector is also the dual-lattice mass that
//! floors the estimator's squared bias as the regularization vanishes.

use crate::error::{Error, Result};
use crate::kernel::{OmegaWeight, ProductWeights};
use std::fmt::Write as _;
use std::path::Path;

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut k = 3;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

fn check_prime(n: u64) -> Result<()> {
    if !is_prime(n) {
        return Err(Error::Domain(format!("N must be prime, got {n}")));
    }
    Ok(())
}

/// A rank-1 lattice rule: prime modulus `N` and generating vector `z` with
/// components in `{1, .., N-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeRule {
    n: u64,
    z: Vec<u64>,
}

impl LatticeRule {
    pub fn new(n: u64, z: Vec<u64>) -> Result<Self> {
        check_prime(n)?;
        if z.is_empty() {
            return Err(Error::Domain(
                "generating vector needs at least one component".into(),
            ));
        }
        if let Some(bad) = z.iter().find(|&&zj| zj == 0 || zj >= n) {
            return Err(Error::Domain(format!(
                "generating vector components must lie in 1..={}, got {bad}",
                n - 1
            )));
        }
        Ok(Self { n, z })
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    /// Number of lattice points (equals the modulus).
    pub fn point_count(&self) -> usize {
        self.n as usize
    }

    pub fn dimension(&self) -> usize {
        self.z.len()
    }

    pub fn generating_vector(&self) -> &[u64] {
        &self.z
    }

    /// The k-th point `{k z / N}` for `k` in `1..=N`; `k = N` is the origin.
    pub fn point(&self, k: u64) -> Vec<f64> {
        debug_assert!(k >= 1 && k <= self.n);
        self.z
            .iter()
            .map(|&zj| (k % self.n * zj % self.n) as f64 / self.n as f64)
            .collect()
    }

    /// All `N` points in the order `k = 1..N`.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (1..=self.n).map(|k| self.point(k)).collect()
    }

    /// The lag vector `{m z / N}`, the common difference of every point pair
    /// `(x_{k+m}, x_k)`. Coordinates are exact rationals rounded once.
    pub fn lag(&self, m: u64) -> Vec<f64> {
        self.z
            .iter()
            .map(|&zj| (m % self.n * zj % self.n) as f64 / self.n as f64)
            .collect()
    }

    /// Plain-text form: first line `N d`, second line the components of `z`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.z.len());
        for (i, zj) in self.z.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{zj}");
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty generating-vector file".into()))?;
        let mut fields = header.split_whitespace();
        let n: u64 = fields
            .next()
            .ok_or_else(|| Error::Parse("line 1: missing N".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("line 1: bad N: {e}")))?;
        let d: usize = fields
            .next()
            .ok_or_else(|| Error::Parse("line 1: missing dimension".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("line 1: bad dimension: {e}")))?;
        if fields.next().is_some() {
            return Err(Error::Parse("line 1: expected exactly two fields".into()));
        }
        let body = lines
            .next()
            .ok_or_else(|| Error::Parse("line 2: missing generating vector".into()))?;
        let z: Vec<u64> = body
            .split_whitespace()
            .enumerate()
            .map(|(i, tok)| {
                tok.parse()
                    .map_err(|e| Error::Parse(format!("line 2, field {}: {e}", i + 1)))
            })
            .collect::<Result<_>>()?;
        if z.len() != d {
            return Err(Error::Parse(format!(
                "line 2: expected {d} components, found {}",
                z.len()
            )));
        }
        Self::new(n, z)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Tabulates `omega_alpha(r / N)` for `r = 0..N`, evaluating at the canonical
/// lag `min(r, N - r) / N` so that entries `r` and `N - r` are bit-identical.
fn omega_table(n: u64, alpha: u32) -> Result<Vec<f64>> {
    let omega = OmegaWeight::new(alpha)?;
    Ok((0..n)
        .map(|r| omega.eval(r.min(n - r) as f64 / n as f64))
        .collect())
}

fn check_cbc_inputs(n: u64, d: usize, alpha: u32, weights: &ProductWeights) -> Result<()> {
    check_prime(n)?;
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if alpha != 2 && alpha != 4 {
        return Err(Error::Config(format!(
            "component-by-component construction supports alpha in {{2, 4}}, got {alpha}"
        )));
    }
    if weights.dimension() < d {
        return Err(Error::Domain(format!(
            "weights cover {} coordinates but d = {d}",
            weights.dimension()
        )));
    }
    Ok(())
}

/// Greedy component-by-component construction of a generating vector.
///
/// `z_1 = 1`; each later component minimizes the squared criterion over all
/// candidates, with ties broken toward the smaller candidate. The search is
/// deterministic: identical inputs produce identical vectors.
pub fn cbc_construct(
    n: u64,
    d: usize,
    alpha: u32,
    weights: &ProductWeights,
) -> Result<LatticeRule> {
    check_cbc_inputs(n, d, alpha, weights)?;
    let table = omega_table(n, alpha)?;
    let gamma = weights.gamma();

    let mut z = vec![1u64];
    // Running products prod[k-1] = prod_{j<=s} (1 + gamma_j omega(k z_j / N)).
    let mut prod: Vec<f64> = (1..=n)
        .map(|k| 1.0 + gamma[0] * table[(k % n) as usize])
        .collect();

    for s in 1..d {
        let g = gamma[s];
        let mut best_z = 0u64;
        let mut best_crit = f64::INFINITY;
        for cand in 1..n {
            let mut sum = 0.0;
            for (k, p) in (1..=n).zip(&prod) {
                sum += p * (1.0 + g * table[(k * cand % n) as usize]);
            }
            let crit = -1.0 + sum / n as f64;
            if crit < best_crit {
                best_crit = crit;
                best_z = cand;
            }
        }
        z.push(best_z);
        for (k, p) in (1..=n).zip(prod.iter_mut()) {
            *p *= 1.0 + g * table[(k * best_z % n) as usize];
        }
    }

    LatticeRule::new(n, z)
}

/// Squared worst-case error criterion of a full prefix `z`, evaluated
/// directly (no running products). `cbc_construct` minimizes this value
/// coordinate by coordinate; exhaustive searches in tests use it as the
/// independent route.
pub fn cbc_criterion(n: u64, alpha: u32, weights: &ProductWeights, z: &[u64]) -> Result<f64> {
    check_cbc_inputs(n, z.len(), alpha, weights)?;
    if let Some(bad) = z.iter().find(|&&zj| zj == 0 || zj >= n) {
        return Err(Error::Domain(format!(
            "generating vector components must lie in 1..={}, got {bad}",
            n - 1
        )));
    }
    let table = omega_table(n, alpha)?;
    let gamma = weights.gamma();
    let mut sum = 0.0;
    for k in 1..=n {
        let mut term = 1.0;
        for (zj, g) in z.iter().zip(gamma) {
            term *= 1.0 + g * table[(k * zj % n) as usize];
        }
        sum += term;
    }
    Ok(-1.0 + sum / n as f64)
}
