//! The regularized lattice-RKHS density estimator.
//!
//! Fitting solves the kernel least-squares problem in the span of
//! `K(x_k, .)` over the lattice points: the normal equations are
//! `(G~ + lambda G) c = b` where `G~` and `G` are the Gram matrices of the
//! squared-weight and plain kernels and `b_j` averages `K(x_j, Y_m)` over the
//! sample. On a rank-1 lattice both Grams depend only on point-index
//! differences, so the system matrix is symmetric circulant and one discrete
//! Fourier transform of its first row diagonalizes it.
//!
//! Spectral components whose eigenvalue falls below a relative threshold are
//! treated as numerical null directions and zeroed, which realizes the
//! minimum-norm solution orthogonal to the null space up to the numerical
//! rank decision. For the kernels in this crate the eigenvalues are sums of
//! positive Fourier weights, so the guard only matters in pathological
//! configurations.

use crate::dft::{dft, dft_real, idft};
use crate::error::{Error, Result};
use crate::kernel::{KorobovKernel, OmegaWeight};
use crate::lattice::LatticeRule;
use crate::sampling::TestDensity;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Eigenvalues at or below this fraction of the largest modulus count as
/// numerical null directions.
pub const NULL_SPACE_EPS_REL: f64 = 1e-12;

/// Solves the circulant system `A c = b` where `A` has first row
/// `first_row`, via a length-N Fourier transform. Null directions (relative
/// eigenvalue modulus at most [`NULL_SPACE_EPS_REL`]) get coefficient zero,
/// so the solution is orthogonal to the numerical null space. The imaginary
/// residue of the back transform (at most ~1e-12 for real data) is
/// discarded.
pub fn circulant_solve(first_row: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if first_row.is_empty() || first_row.len() != b.len() {
        return Err(Error::Domain(format!(
            "circulant solve needs matching nonzero lengths, got {} and {}",
            first_row.len(),
            b.len()
        )));
    }
    let eigs = dft_real(first_row);
    let max_mod = eigs.iter().map(|e| e.norm()).fold(0.0f64, f64::max);
    if max_mod == 0.0 {
        return Err(Error::SingularSystem(
            "all circulant eigenvalues are zero".into(),
        ));
    }
    let threshold = NULL_SPACE_EPS_REL * max_mod;
    let mut kept = 0usize;
    let mut min_kept = f64::INFINITY;
    let b_hat = dft_real(b);
    let c_hat: Vec<Complex64> = eigs
        .iter()
        .zip(&b_hat)
        .map(|(&e, &bh)| {
            if e.norm() <= threshold {
                Complex64::new(0.0, 0.0)
            } else {
                kept += 1;
                min_kept = min_kept.min(e.norm());
                bh / e
            }
        })
        .collect();
    if kept == 0 {
        return Err(Error::SingularSystem(
            "every circulant eigenvalue fell below the null-space threshold".into(),
        ));
    }
    let c = idft(&c_hat);
    // Rounding noise through the spectral division scales with the
    // condition number of the kept spectrum.
    #[cfg(debug_assertions)]
    {
        let kappa = max_mod / min_kept;
        let scale = c.iter().fold(1.0f64, |a, v| a.max(v.re.abs()));
        let max_im = c.iter().fold(0.0f64, |a, v| a.max(v.im.abs()));
        debug_assert!(
            max_im <= 1e-12 * kappa.max(1.0) * scale,
            "imaginary residue {max_im} too large for condition {kappa}"
        );
    }
    Ok(c.into_iter().map(|v| v.re).collect())
}

/// The circulant normal-equation system `G~ + lambda G` on a lattice.
#[derive(Debug, Clone)]
pub struct GramSystem {
    first_row: Vec<f64>,
    eigenvalues: Vec<f64>,
    lambda: f64,
    rule: LatticeRule,
    kernel: KorobovKernel,
}

fn check_estimator_inputs(rule: &LatticeRule, kernel: &KorobovKernel) -> Result<()> {
    if kernel.dimension() != rule.dimension() {
        return Err(Error::Domain(format!(
            "dimension mismatch: lattice has d = {}, kernel has d = {}",
            rule.dimension(),
            kernel.dimension()
        )));
    }
    if !kernel.has_closed_forms() {
        return Err(Error::Config(
            "Gram assembly needs closed-form kernels: alpha must be 2 or 4".into(),
        ));
    }
    Ok(())
}

/// Assembles the system from the lag representation: entry `m` of the first
/// row is the kernel combination at the lag point `{m z / N}`, costing
/// O(N d) total.
pub fn assemble_system(
    rule: &LatticeRule,
    kernel: &KorobovKernel,
    lambda: f64,
) -> Result<GramSystem> {
    check_estimator_inputs(rule, kernel)?;
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "regularization parameter must be positive, got {lambda}"
        )));
    }
    let n = rule.point_count();
    let mut first_row = Vec::with_capacity(n);
    for m in 0..n as u64 {
        let lag = rule.lag(m);
        first_row.push(kernel.l2_eval_lag(&lag) + lambda * kernel.eval_lag(&lag));
    }
    let eigenvalues = dft_real(&first_row)
        .into_iter()
        .map(|e| {
            debug_assert!(e.im.abs() <= 1e-9 * (1.0 + e.re.abs()));
            e.re
        })
        .collect();
    Ok(GramSystem {
        first_row,
        eigenvalues,
        lambda,
        rule: rule.clone(),
        kernel: kernel.clone(),
    })
}

impl GramSystem {
    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    /// Real spectrum of the symmetric circulant (the transform of the first
    /// row).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rule(&self) -> &LatticeRule {
        &self.rule
    }

    pub fn kernel(&self) -> &KorobovKernel {
        &self.kernel
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        circulant_solve(&self.first_row, b)
    }
}

/// Sample side of the normal equations:
/// `b_j = (1/M) sum_m K(x_j, Y_m)`, O(N M d).
pub fn assemble_rhs(
    rule: &LatticeRule,
    kernel: &KorobovKernel,
    sample: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if kernel.dimension() != rule.dimension() {
        return Err(Error::Domain(format!(
            "dimension mismatch: lattice has d = {}, kernel has d = {}",
            rule.dimension(),
            kernel.dimension()
        )));
    }
    if sample.is_empty() {
        return Err(Error::Domain("sample must be nonempty".into()));
    }
    let d = rule.dimension();
    if let Some(bad) = sample.iter().position(|y| y.len() != d) {
        return Err(Error::Domain(format!(
            "sample point {bad} has {} coordinates, expected {d}",
            sample[bad].len()
        )));
    }
    let points = rule.points();
    let n = points.len();
    let mut b = vec![0.0f64; n];
    for y in sample {
        for (acc, x) in b.iter_mut().zip(&points) {
            let mut prod = 1.0;
            for c in 0..d {
                prod *= kernel.factor(c, x[c] - y[c]);
            }
            *acc += prod;
        }
    }
    let scale = 1.0 / sample.len() as f64;
    for v in &mut b {
        *v *= scale;
    }
    Ok(b)
}

/// Exact expectation of the sample side under the benchmark density:
/// `b_j = int K(x_j, y) f(y) dy`, in closed form.
///
/// Per coordinate the integral of the kernel factor against
/// `1 + a B_4(y)` contracts the Fourier weights, giving
/// `1 - gamma a (24 / (2 pi)^4) omega_{alpha+4}(x)`; the product over
/// coordinates needs only the degree `alpha + 4` Bernoulli polynomial.
pub fn exact_rhs(
    rule: &LatticeRule,
    kernel: &KorobovKernel,
    density: &TestDensity,
) -> Result<Vec<f64>> {
    check_estimator_inputs(rule, kernel)?;
    if density.dimension() != rule.dimension() {
        return Err(Error::Domain(format!(
            "dimension mismatch: lattice has d = {}, density has d = {}",
            rule.dimension(),
            density.dimension()
        )));
    }
    let alpha = kernel.alpha() as u32;
    let omega = OmegaWeight::new(alpha + 4)?;
    let scale = -24.0 / (2.0 * PI).powi(4);
    let gamma = kernel.weights().gamma();
    let amp = density.amplitudes();
    Ok(rule
        .points()
        .iter()
        .map(|x| {
            x.iter()
                .enumerate()
                .map(|(c, &xc)| 1.0 + gamma[c] * amp[c] * scale * omega.eval(xc))
                .product()
        })
        .collect())
}

/// A fitted density estimate `f(x) ~ sum_k c_k K(x_k, x)`.
///
/// Immutable after fitting; evaluation is pure and safe to share across
/// threads.
#[derive(Debug, Clone)]
pub struct DensityEstimator {
    rule: LatticeRule,
    kernel: KorobovKernel,
    lambda: f64,
    coefficients: Vec<f64>,
}

/// Fits the estimator to a sample.
pub fn fit(
    rule: &LatticeRule,
    kernel: &KorobovKernel,
    lambda: f64,
    sample: &[Vec<f64>],
) -> Result<DensityEstimator> {
    let system = assemble_system(rule, kernel, lambda)?;
    let b = assemble_rhs(rule, kernel, sample)?;
    fit_from_rhs(&system, &b)
}

/// Fits against the exact mean embedding of the benchmark density instead of
/// a sample: the result is the noise-free (infinite-sample) estimator, which
/// is also the expectation of [`fit`] over fresh samples.
pub fn fit_exact(
    rule: &LatticeRule,
    kernel: &KorobovKernel,
    lambda: f64,
    density: &TestDensity,
) -> Result<DensityEstimator> {
    let system = assemble_system(rule, kernel, lambda)?;
    let b = exact_rhs(rule, kernel, density)?;
    fit_from_rhs(&system, &b)
}

/// Fits from a caller-supplied right-hand side (any vector of functional
/// values at the lattice points).
pub fn fit_from_rhs(system: &GramSystem, b: &[f64]) -> Result<DensityEstimator> {
    let coefficients = system.solve(b)?;
    Ok(DensityEstimator {
        rule: system.rule.clone(),
        kernel: system.kernel.clone(),
        lambda: system.lambda,
        coefficients,
    })
}

impl DensityEstimator {
    pub fn rule(&self) -> &LatticeRule {
        &self.rule
    }

    pub fn kernel(&self) -> &KorobovKernel {
        &self.kernel
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Pointwise evaluation `sum_k c_k K(x_k, x)`, O(N d).
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.rule.dimension() {
            return Err(Error::Domain(format!(
                "dimension mismatch: estimator has d = {}, point has {}",
                self.rule.dimension(),
                x.len()
            )));
        }
        let d = x.len();
        let mut acc = 0.0;
        for (k, c) in (1..=self.rule.modulus()).zip(&self.coefficients) {
            let xk = self.rule.point(k);
            let mut prod = 1.0;
            for j in 0..d {
                prod *= self.kernel.factor(j, xk[j] - x[j]);
            }
            acc += c * prod;
        }
        Ok(acc)
    }

    /// Values at all lattice points through the circulant route: one kernel
    /// row plus a length-N circular correlation, instead of N pointwise
    /// sums.
    pub fn evaluate_on_lattice(&self) -> Vec<f64> {
        self.evaluate_shifted_grid_row(None)
    }

    /// Values on the shifted-lattice grid `{x_n + p}` for each shift `p`,
    /// one length-N circular correlation per shift. Row `l` of the output
    /// holds `f(x_1 + p_l) .. f(x_N + p_l)`.
    pub fn evaluate_grid(&self, shifts: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let d = self.rule.dimension();
        if let Some(bad) = shifts.iter().position(|p| p.len() != d) {
            return Err(Error::Domain(format!(
                "shift {bad} has {} coordinates, expected {d}",
                shifts[bad].len()
            )));
        }
        Ok(shifts
            .iter()
            .map(|p| self.evaluate_shifted_grid_row(Some(p)))
            .collect())
    }

    fn evaluate_shifted_grid_row(&self, shift: Option<&[f64]>) -> Vec<f64> {
        let n = self.rule.point_count();
        let d = self.rule.dimension();
        // w[m] = K at the difference (lag m) - p; then
        // f(x_n + p) = sum_k c_k w[(k - n) mod N].
        let mut w = Vec::with_capacity(n);
        let mut diff = vec![0.0f64; d];
        for m in 0..n as u64 {
            let lag = self.rule.lag(m);
            for c in 0..d {
                diff[c] = lag[c] - shift.map_or(0.0, |p| p[c]);
            }
            w.push(self.kernel.eval_lag(&diff));
        }
        (0..n)
            .map(|j| {
                let mut acc = 0.0;
                for (i, c) in self.coefficients.iter().enumerate() {
                    acc += c * w[(i + n - j) % n];
                }
                acc
            })
            .collect()
    }

    /// `int f_hat = sum_k c_k`, exact because every kernel translate
    /// integrates to one.
    pub fn integral(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// Squared RKHS norm `c' G c` through the kernel-only circulant.
    pub fn rkhs_norm_squared(&self) -> f64 {
        let n = self.rule.point_count();
        let row: Vec<f64> = (0..n as u64)
            .map(|m| self.kernel.eval_lag(&self.rule.lag(m)))
            .collect();
        let mut acc = 0.0;
        for (j, cj) in self.coefficients.iter().enumerate() {
            for (k, ck) in self.coefficients.iter().enumerate() {
                acc += cj * ck * row[(k + n - j) % n];
            }
        }
        acc
    }

    /// Relative residual of the normal equations, recomputed by direct
    /// substitution with dense kernel evaluations (independent of the
    /// circulant solve path).
    pub fn galerkin_residual(&self, rhs: &[f64]) -> Result<f64> {
        let n = self.rule.point_count();
        if rhs.len() != n {
            return Err(Error::Domain(format!(
                "right-hand side has length {}, expected {n}",
                rhs.len()
            )));
        }
        let points = self.rule.points();
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..n {
            let mut lhs = 0.0;
            for j in 0..n {
                let l2 = self.kernel.l2_eval(&points[j], &points[k])?;
                let plain = self.kernel.eval(&points[j], &points[k])?;
                lhs += self.coefficients[j] * (l2 + self.lambda * plain);
            }
            num += (lhs - rhs[k]).powi(2);
            den += rhs[k].powi(2);
        }
        Ok((num / den.max(f64::MIN_POSITIVE)).sqrt())
    }

    /// Fourier coefficients of `c` (diagnostic: null-space components of the
    /// system show up as zeros here).
    pub fn coefficient_spectrum(&self) -> Vec<Complex64> {
        dft(&self
            .coefficients
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect::<Vec<_>>())
    }

    /// Plain-text artifact: header (d, alpha, N, lambda), generating vector,
    /// weights, coefficients, every real printed with 17 significant digits
    /// so reloading reproduces the exact binary values.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "latdens-estimator v1");
        let _ = writeln!(out, "dimension {}", self.rule.dimension());
        let _ = writeln!(out, "alpha {:.16e}", self.kernel.alpha());
        let _ = writeln!(out, "modulus {}", self.rule.modulus());
        let _ = writeln!(out, "lambda {:.16e}", self.lambda);
        let z: Vec<String> = self
            .rule
            .generating_vector()
            .iter()
            .map(|v| v.to_string())
            .collect();
        let _ = writeln!(out, "z {}", z.join(" "));
        let gamma: Vec<String> = self
            .kernel
            .weights()
            .gamma()
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect();
        let _ = writeln!(out, "gamma {}", gamma.join(" "));
        let coeffs: Vec<String> = self
            .coefficients
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect();
        let _ = writeln!(out, "coefficients {}", coeffs.join(" "));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let magic = lines
            .next()
            .ok_or_else(|| Error::Parse("empty estimator artifact".into()))?;
        if magic.trim() != "latdens-estimator v1" {
            return Err(Error::Parse(format!(
                "unrecognized estimator artifact header: {magic:?}"
            )));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing field {name}")))?;
            line.strip_prefix(name)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| Error::Parse(format!("expected field {name}, found {line:?}")))
        };
        let dimension: usize = field("dimension")?
            .parse()
            .map_err(|e| Error::Parse(format!("dimension: {e}")))?;
        let alpha: f64 = field("alpha")?
            .parse()
            .map_err(|e| Error::Parse(format!("alpha: {e}")))?;
        let modulus: u64 = field("modulus")?
            .parse()
            .map_err(|e| Error::Parse(format!("modulus: {e}")))?;
        let lambda: f64 = field("lambda")?
            .parse()
            .map_err(|e| Error::Parse(format!("lambda: {e}")))?;
        let parse_list = |name: &str, text: String| -> Result<Vec<f64>> {
            text.split_whitespace()
                .enumerate()
                .map(|(i, tok)| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("{name}, entry {}: {e}", i + 1)))
                })
                .collect()
        };
        let z: Vec<u64> = field("z")?
            .split_whitespace()
            .enumerate()
            .map(|(i, tok)| {
                tok.parse::<u64>()
                    .map_err(|e| Error::Parse(format!("z, entry {}: {e}", i + 1)))
            })
            .collect::<Result<_>>()?;
        let gamma = parse_list("gamma", field("gamma")?)?;
        let coefficients = parse_list("coefficients", field("coefficients")?)?;

        if z.len() != dimension || gamma.len() != dimension {
            return Err(Error::Parse(format!(
                "inconsistent dimensions: header says {dimension}, z has {}, gamma has {}",
                z.len(),
                gamma.len()
            )));
        }
        if coefficients.len() != modulus as usize {
            return Err(Error::Parse(format!(
                "coefficient count {} does not match modulus {modulus}",
                coefficients.len()
            )));
        }
        let rule = LatticeRule::new(modulus, z)?;
        let kernel = KorobovKernel::new(alpha, crate::kernel::ProductWeights::new(gamma)?)?;
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Parse(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            rule,
            kernel,
            lambda,
            coefficients,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
