//! Monte-Carlo estimation of the mean integrated squared error.
//!
//! One replication draws a fresh sample of size `M` from the benchmark
//! density, fits the estimator, and averages the squared error over the
//! Sobol-shifted lattice grid `{x_n + p_l}` of `N L` points. Replications
//! repeat with a doubling schedule (8, 16, 32, ...) until the 95%
//! normal-approximation confidence half-width drops below a fixed fraction
//! of the running mean or the replication cap is hit.
//!
//! Replications are independent: each owns an RNG stream derived from
//! `(rng_seed, replication index)`, and aggregation sums in replication
//! order, so reports are bit-reproducible regardless of how the rayon pool
//! schedules them.

use crate::error::{Error, Result};
use crate::estimator::{assemble_rhs, assemble_system, fit_from_rhs, GramSystem};
use crate::kernel::{frac, KorobovKernel, ProductWeights};
use crate::lattice::{cbc_construct, LatticeRule};
use crate::rng::{derive_rng, derive_seed};
use crate::sampling::TestDensity;
use crate::sobol::generate_shifts;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

fn default_shift_count() -> usize {
    100
}
fn default_max_replications() -> usize {
    512
}
fn default_ci_ratio_target() -> f64 {
    0.1
}

/// One grid point of the experiment: problem size, regularization, and
/// seeding. Fields with defaults can be omitted in JSON grid files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiseConfig {
    pub dimension: usize,
    pub alpha: f64,
    /// Lattice size N (prime).
    pub modulus: u64,
    pub lambda: f64,
    /// Sample size M per replication.
    pub sample_size: usize,
    /// Shifts L in the evaluation grid.
    #[serde(default = "default_shift_count")]
    pub shift_count: usize,
    /// Replication cap S_max.
    #[serde(default = "default_max_replications")]
    pub max_replications: usize,
    /// Stop once the 95% half-width is at most this fraction of the mean.
    #[serde(default = "default_ci_ratio_target")]
    pub ci_ratio_target: f64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Generating vector override; constructed component by component when
    /// absent.
    #[serde(default)]
    pub generating_vector: Option<Vec<u64>>,
}

impl MiseConfig {
    pub fn new(
        dimension: usize,
        alpha: f64,
        modulus: u64,
        lambda: f64,
        sample_size: usize,
    ) -> Self {
        Self {
            dimension,
            alpha,
            modulus,
            lambda,
            sample_size,
            shift_count: default_shift_count(),
            max_replications: default_max_replications(),
            ci_ratio_target: default_ci_ratio_target(),
            rng_seed: 0,
            generating_vector: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if self.alpha != 2.0 && self.alpha != 4.0 {
            return Err(Error::Config(format!(
                "the experiment needs alpha 2 or 4, got {}",
                self.alpha
            )));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::Config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.sample_size == 0 {
            return Err(Error::Config("sample size must be at least 1".into()));
        }
        if self.shift_count == 0 {
            return Err(Error::Config("shift count must be at least 1".into()));
        }
        if self.max_replications == 0 {
            return Err(Error::Config("replication cap must be at least 1".into()));
        }
        if !(self.ci_ratio_target > 0.0 && self.ci_ratio_target < 1.0) {
            return Err(Error::Config(format!(
                "CI ratio target must lie in (0, 1), got {}",
                self.ci_ratio_target
            )));
        }
        if let Some(z) = &self.generating_vector {
            if z.len() != self.dimension {
                return Err(Error::Config(format!(
                    "generating vector has {} components, expected {}",
                    z.len(),
                    self.dimension
                )));
            }
        }
        Ok(())
    }
}

/// Result of one MISE estimation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiseReport {
    pub config: MiseConfig,
    pub mise_estimate: f64,
    pub ci_half_width: f64,
    /// Replications actually used (S).
    pub replications_used: usize,
    /// Mean of the estimator integral over replications; for a density
    /// target it should sit near 1.
    pub integral_mean: f64,
    pub wall_time_s: f64,
    /// False when the cap was reached before the half-width met the target;
    /// the estimate is still reported.
    pub ci_target_met: bool,
}

/// Average squared difference over grid rows of equal shape.
fn grid_squared_error(rows: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    debug_assert_eq!(rows.len(), truth.len());
    let mut acc = 0.0;
    let mut count = 0usize;
    for (row, t) in rows.iter().zip(truth) {
        debug_assert_eq!(row.len(), t.len());
        for (a, b) in row.iter().zip(t) {
            let e = a - b;
            acc += e * e;
        }
        count += row.len();
    }
    acc / count as f64
}

fn mean_and_half_width(values: &[f64]) -> (f64, f64) {
    let s = values.len();
    let mean = values.iter().sum::<f64>() / s as f64;
    if s < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s - 1) as f64;
    (mean, 1.96 * (var / s as f64).sqrt())
}

struct Problem {
    rule: LatticeRule,
    kernel: KorobovKernel,
    system: GramSystem,
    density: TestDensity,
}

fn build_problem(cfg: &MiseConfig) -> Result<Problem> {
    let weights = ProductWeights::polynomial_decay(cfg.dimension, cfg.alpha)?;
    let kernel = KorobovKernel::new(cfg.alpha, weights.clone())?;
    let rule = match &cfg.generating_vector {
        Some(z) => LatticeRule::new(cfg.modulus, z.clone())?,
        None => cbc_construct(cfg.modulus, cfg.dimension, cfg.alpha as u32, &weights)?,
    };
    let system = assemble_system(&rule, &kernel, cfg.lambda)?;
    let density = TestDensity::new(cfg.dimension)?;
    Ok(Problem {
        rule,
        kernel,
        system,
        density,
    })
}

/// Exact density values on the shifted-lattice grid, one row per shift.
fn exact_grid_values(
    rule: &LatticeRule,
    density: &TestDensity,
    shifts: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let points = rule.points();
    shifts
        .iter()
        .map(|p| {
            points
                .iter()
                .map(|x| {
                    let y: Vec<f64> = x.iter().zip(p).map(|(a, b)| frac(a + b)).collect();
                    density.eval(&y)
                })
                .collect()
        })
        .collect()
}

/// Estimates the MISE with the standard Sobol shift grid.
pub fn estimate_mise(cfg: &MiseConfig) -> Result<MiseReport> {
    cfg.validate()?;
    let shifts = generate_shifts(cfg.shift_count, cfg.dimension)?;
    estimate_mise_with_shifts(cfg, shifts.points())
}

/// Estimates the MISE on a caller-supplied evaluation grid of shifts. The
/// single zero shift reduces the grid to the raw lattice points.
pub fn estimate_mise_with_shifts(cfg: &MiseConfig, shifts: &[Vec<f64>]) -> Result<MiseReport> {
    let start = Instant::now();
    cfg.validate()?;
    if shifts.is_empty() {
        return Err(Error::Config("need at least one evaluation shift".into()));
    }
    if let Some(bad) = shifts.iter().position(|p| p.len() != cfg.dimension) {
        return Err(Error::Config(format!(
            "shift {bad} has {} coordinates, expected {}",
            shifts[bad].len(),
            cfg.dimension
        )));
    }
    let problem = build_problem(cfg)?;
    let truth = exact_grid_values(&problem.rule, &problem.density, shifts)?;

    let mut errors: Vec<f64> = Vec::new();
    let mut integrals: Vec<f64> = Vec::new();
    let mut target = 8.min(cfg.max_replications);
    let (mise_estimate, ci_half_width, ci_target_met) = loop {
        let batch: Vec<Result<(f64, f64)>> = (errors.len()..target)
            .into_par_iter()
            .map(|k| {
                let mut rng = derive_rng(cfg.rng_seed, k as u64 + 1);
                let (sample, _) = problem.density.sample_with(cfg.sample_size, &mut rng);
                let b = assemble_rhs(&problem.rule, &problem.kernel, &sample)?;
                let est = fit_from_rhs(&problem.system, &b)?;
                let rows = est.evaluate_grid(shifts)?;
                Ok((grid_squared_error(&rows, &truth), est.integral()))
            })
            .collect();
        for item in batch {
            let (err, integral) = item?;
            errors.push(err);
            integrals.push(integral);
        }
        let (mean, half) = mean_and_half_width(&errors);
        if half <= cfg.ci_ratio_target * mean {
            break (mean, half, true);
        }
        if errors.len() >= cfg.max_replications {
            break (mean, half, false);
        }
        target = (target * 2).min(cfg.max_replications);
    };

    let integral_mean = integrals.iter().sum::<f64>() / integrals.len() as f64;
    Ok(MiseReport {
        config: cfg.clone(),
        mise_estimate,
        ci_half_width,
        replications_used: errors.len(),
        integral_mean,
        wall_time_s: start.elapsed().as_secs_f64(),
        ci_target_met,
    })
}

/// Runs every grid point in order, invoking `sink` as each report (or
/// failure) completes so callers can stream results to disk. Per-point
/// failures do not abort the sweep.
pub fn sweep<F>(configs: &[MiseConfig], mut sink: F) -> Result<Vec<Result<MiseReport>>>
where
    F: FnMut(usize, &Result<MiseReport>),
{
    if configs.is_empty() {
        return Err(Error::Config(
            "parameter sweep needs at least one point".into(),
        ));
    }
    Ok(configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            let report = estimate_mise(cfg);
            sink(i, &report);
            report
        })
        .collect())
}

/// The four sweep families of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepPreset {
    /// Moderate regularization levels crossed with sample sizes.
    LambdaCoarse,
    /// Small regularization levels crossed with sample sizes.
    LambdaFine,
    /// Geometric lambda scan 0.7^k, k = 0..70, at fixed M = 10^4, N = 11.
    LambdaScan,
    /// Theory-rate schedule lambda = c M^{-1/(1+1/alpha)} along sample
    /// sizes.
    RateSchedule,
}

impl std::str::FromStr for SweepPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda-coarse" => Ok(Self::LambdaCoarse),
            "lambda-fine" => Ok(Self::LambdaFine),
            "lambda-scan" => Ok(Self::LambdaScan),
            "rate-schedule" => Ok(Self::RateSchedule),
            other => Err(Error::Config(format!(
                "unknown preset {other:?}; expected lambda-coarse, lambda-fine, \
                 lambda-scan, or rate-schedule"
            ))),
        }
    }
}

const PRESET_SAMPLE_SIZES: [usize; 4] = [1_000, 10_000, 100_000, 1_000_000];

/// Expands a preset into configs, each with its own seed derived from
/// `base_seed` and the point index.
pub fn preset_grid(
    preset: SweepPreset,
    dimension: usize,
    alpha: f64,
    modulus: u64,
    base_seed: u64,
) -> Result<Vec<MiseConfig>> {
    let lambda_cross = |lambdas: &[f64]| -> Vec<(f64, usize)> {
        lambdas
            .iter()
            .flat_map(|&l| PRESET_SAMPLE_SIZES.iter().map(move |&m| (l, m)))
            .collect()
    };
    let points: Vec<(f64, usize, u64)> = match preset {
        SweepPreset::LambdaCoarse => lambda_cross(&[0.8, 0.4, 0.2, 0.1, 0.05, 0.01])
            .into_iter()
            .map(|(l, m)| (l, m, modulus))
            .collect(),
        SweepPreset::LambdaFine => lambda_cross(&[0.1, 0.01, 0.001, 0.0001])
            .into_iter()
            .map(|(l, m)| (l, m, modulus))
            .collect(),
        SweepPreset::LambdaScan => {
            let mut lambda = 1.0f64;
            (0..=70)
                .map(|_| {
                    let current = lambda;
                    lambda *= 0.7;
                    (current, 10_000, 11)
                })
                .collect()
        }
        SweepPreset::RateSchedule => {
            let c = match alpha {
                a if a == 2.0 => 1000.0,
                a if a == 4.0 => 5000.0,
                other => {
                    return Err(Error::Config(format!(
                        "rate schedule is defined for alpha 2 or 4, got {other}"
                    )))
                }
            };
            let exponent = -1.0 / (1.0 + 1.0 / alpha);
            PRESET_SAMPLE_SIZES
                .iter()
                .map(|&m| (c * (m as f64).powf(exponent), m, modulus))
                .collect()
        }
    };
    let configs = points
        .into_iter()
        .enumerate()
        .map(|(i, (lambda, m, n))| {
            let mut cfg = MiseConfig::new(dimension, alpha, n, lambda, m);
            cfg.rng_seed = derive_seed(base_seed, i as u64);
            cfg
        })
        .collect::<Vec<_>>();
    for cfg in &configs {
        cfg.validate()?;
    }
    Ok(configs)
}

pub const CSV_HEADER: &str =
    "d,alpha,N,lambda,M,S_used,mise,ci_half_width,integral_mean,seed,wall_time_s";

/// One CSV row; every column except wall time is reproducible bit for bit
/// under a fixed seed.
pub fn csv_row(report: &MiseReport) -> String {
    let c = &report.config;
    format!(
        "{},{},{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{},{:.3}",
        c.dimension,
        c.alpha,
        c.modulus,
        c.lambda,
        c.sample_size,
        report.replications_used,
        report.mise_estimate,
        report.ci_half_width,
        report.integral_mean,
        c.rng_seed,
        report.wall_time_s
    )
}

/// Appends header and rows to `writer` in the fixed column order.
pub fn write_csv<W: Write>(writer: &mut W, reports: &[MiseReport]) -> Result<()> {
    writeln!(writer, "{CSV_HEADER}")?;
    for report in reports {
        writeln!(writer, "{}", csv_row(report))?;
    }
    Ok(())
}

/// One JSON object per line mirroring the full config echo.
pub fn write_jsonl<W: Write>(writer: &mut W, reports: &[MiseReport]) -> Result<()> {
    for report in reports {
        let line = serde_json::to_string(report)
            .map_err(|e| Error::Config(format!("serializing report: {e}")))?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}
