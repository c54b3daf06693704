//! Command-line frontend.
//!
//! Five subcommands cover the workflow: `cbc` constructs generating
//! vectors, `sample` exports draws from the benchmark density, `fit` trains
//! an estimator from a sample CSV, `eval` evaluates a stored estimator, and
//! `mise` runs the Monte-Carlo error sweeps.
//!
//! Parameter precedence is flags, then `--config` key=value file, then
//! built-in defaults. Relative output paths land in `$LATDENS_OUT_DIR` when
//! that variable is set. Every run that writes files leaves a sibling
//! `<file>.manifest.json` recording the resolved parameters.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use crate::error::{Error, Result};
use crate::estimator::{self, DensityEstimator};
use crate::kernel::{KorobovKernel, ProductWeights};
use crate::lattice::{cbc_construct, LatticeRule};
use crate::mise::{csv_row, MiseConfig, MiseReport, SweepPreset, CSV_HEADER};
use crate::sampling::{read_sample_csv, write_sample_csv, TestDensity};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Debug, Parser)]
#[command(
    name = "latdens",
    version,
    about = "Regularized density estimation on rank-1 lattices",
    long_about = "Regularized density estimation in weighted Korobov spaces on rank-1 \
                  lattices.\n\nAny long flag can also be supplied through --config as a \
                  key=value line (flag name without dashes); explicit flags win. Relative \
                  output paths are placed under $LATDENS_OUT_DIR when set."
)]
pub struct Cli {
    /// Key=value file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Cap the worker-thread count for parallel sections.
    #[arg(long, global = true, value_name = "T")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a generating vector component by component.
    Cbc(CbcArgs),
    /// Draw from the benchmark density and export a CSV.
    Sample(SampleArgs),
    /// Fit an estimator to a sample CSV and store the artifact.
    Fit(FitArgs),
    /// Evaluate a stored estimator at explicit points.
    Eval(EvalArgs),
    /// Monte-Carlo MISE sweeps over parameter grids or presets.
    Mise(MiseArgs),
}

#[derive(Debug, Args)]
pub struct CbcArgs {
    /// Lattice size (prime).
    #[arg(long)]
    pub n: Option<u64>,
    /// Dimension of the generating vector.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Kernel smoothness (2 or 4).
    #[arg(long)]
    pub alpha: Option<u32>,
    /// Coordinate weights: "decay" for j^-alpha or "constant".
    #[arg(long, value_name = "PRESET")]
    pub weights_preset: Option<String>,
    /// Weight value for the constant preset.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Output path for the generating-vector file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Number of draws.
    #[arg(long)]
    pub count: Option<usize>,
    /// Dimension of the density.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Base RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sample CSV (one point per row, coordinates in [0,1]).
    #[arg(long, value_name = "FILE")]
    pub sample_csv: Option<PathBuf>,
    /// Lattice size (prime); read from --z-file when that is given.
    #[arg(long)]
    pub n: Option<u64>,
    /// Generating-vector file; constructed on the fly when omitted.
    #[arg(long, value_name = "FILE")]
    pub z_file: Option<PathBuf>,
    /// Construct the generating vector component by component (the default
    /// when --z-file is absent).
    #[arg(long)]
    pub cbc: bool,
    /// Kernel smoothness (2 or 4).
    #[arg(long)]
    pub alpha: Option<u32>,
    /// Regularization parameter (positive).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Coordinate weights: "decay" for j^-alpha or "constant".
    #[arg(long, value_name = "PRESET")]
    pub weights_preset: Option<String>,
    /// Weight value for the constant preset.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Output path for the estimator artifact.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Estimator artifact written by `fit`.
    #[arg(long, value_name = "FILE")]
    pub estimator: Option<PathBuf>,
    /// Evaluation point as comma-separated coordinates; repeatable.
    #[arg(long = "at", value_name = "X1,X2,...")]
    pub points: Vec<String>,
}

#[derive(Debug, Args)]
pub struct MiseArgs {
    /// Sweep preset: lambda-coarse, lambda-fine, lambda-scan, or
    /// rate-schedule.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// JSON-lines file of sweep configurations (alternative to --preset).
    #[arg(long, value_name = "FILE")]
    pub grid_file: Option<PathBuf>,
    /// Dimension for preset grids.
    #[arg(long)]
    pub d: Option<usize>,
    /// Kernel smoothness for preset grids (2 or 4).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Lattice size for preset grids (prime).
    #[arg(long)]
    pub n: Option<u64>,
    /// Base RNG seed; each grid point derives its own seed from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shift count of the evaluation grid (overrides every point).
    #[arg(long)]
    pub l: Option<usize>,
    /// Replication cap (overrides every point).
    #[arg(long)]
    pub s_max: Option<usize>,
    /// CI half-width target as a fraction of the mean (overrides every
    /// point).
    #[arg(long)]
    pub ci_ratio: Option<f64>,
    /// Output CSV path; a JSON-lines mirror is written next to it.
    #[arg(long, value_name = "FILE")]
    pub out_csv: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    pub gnuplot: bool,
}

/// Defaults loaded from the key=value config file.
struct Settings(BTreeMap<String, String>);

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = with_path(fs::read_to_string(path).map_err(Error::Io), path)?;
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::Parse(format!(
                        "config line {}: expected key=value, found {line:?}",
                        idx + 1
                    ))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self(map))
    }

    fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::Parse(format!("config key {key}: {e}"))),
        }
    }

    /// Flag value, then config value, then nothing.
    fn resolve<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    fn resolve_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.resolve(flag, key)?.unwrap_or(default))
    }

    fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.resolve(flag, key)?
            .ok_or_else(|| Error::Config(format!("missing required --{key} (or config key {key})")))
    }
}

/// Prefixes I/O failures with the path being read so errors are actionable.
fn with_path<T>(result: Result<T>, path: &Path) -> Result<T> {
    result.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

/// Relative outputs land under `$LATDENS_OUT_DIR` when set.
fn resolve_out_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("LATDENS_OUT_DIR") {
        Some(dir) => Path::new(&dir).join(path),
        None => path.to_path_buf(),
    }
}

/// Sidecar record of one run; sits next to each primary output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub version: String,
}

fn write_manifest(primary_output: &Path, manifest: &RunManifest) -> Result<()> {
    let mut name = primary_output
        .file_name()
        .unwrap_or_default()
        .to_os_string();
    name.push(".manifest.json");
    let path = primary_output.with_file_name(name);
    let body = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Config(format!("serializing manifest: {e}")))?;
    fs::write(path, body)?;
    Ok(())
}

fn build_weights(preset: &str, dimension: usize, alpha: f64, gamma: f64) -> Result<ProductWeights> {
    match preset {
        "decay" => ProductWeights::polynomial_decay(dimension, alpha),
        "constant" => ProductWeights::constant(dimension, gamma),
        other => Err(Error::Config(format!(
            "unknown weights preset {other:?}; expected decay or constant"
        ))),
    }
}

fn cmd_cbc(args: CbcArgs, settings: &Settings) -> Result<()> {
    let n = settings.require(args.n, "n")?;
    let dim = settings.require(args.dim, "dim")?;
    let alpha: u32 = settings.resolve_or(args.alpha, "alpha", 2)?;
    let preset = settings.resolve_or(args.weights_preset, "weights-preset", "decay".to_string())?;
    let gamma = settings.resolve_or(args.gamma, "gamma", 1.0)?;
    let out = resolve_out_path(&settings.resolve_or(
        args.out,
        "out",
        PathBuf::from(format!("z-n{n}-d{dim}.txt")),
    )?);

    let weights = build_weights(&preset, dim, alpha as f64, gamma)?;
    let rule = cbc_construct(n, dim, alpha, &weights)?;
    rule.save(&out)?;
    write_manifest(
        &out,
        &RunManifest {
            subcommand: "cbc".into(),
            parameters: serde_json::json!({
                "n": n, "dim": dim, "alpha": alpha,
                "weights_preset": preset, "gamma": gamma,
            }),
            seed: None,
            outputs: vec![out.display().to_string()],
            version: env!("CARGO_PKG_VERSION").into(),
        },
    )?;
    println!("wrote z file: {}", out.display());
    println!(
        "z {}",
        rule.generating_vector()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    Ok(())
}

fn cmd_sample(args: SampleArgs, settings: &Settings) -> Result<()> {
    let count = settings.require(args.count, "count")?;
    let dim = settings.require(args.dim, "dim")?;
    let seed = settings.resolve_or(args.seed, "seed", 0)?;
    let out = resolve_out_path(&settings.resolve_or(
        args.out,
        "out",
        PathBuf::from(format!("sample-d{dim}-m{count}.csv")),
    )?);

    let density = TestDensity::new(dim)?;
    let (points, stats) = density.sample(count, seed);
    write_sample_csv(&out, &points)?;
    write_manifest(
        &out,
        &RunManifest {
            subcommand: "sample".into(),
            parameters: serde_json::json!({ "count": count, "dim": dim, "seed": seed }),
            seed: Some(seed),
            outputs: vec![out.display().to_string()],
            version: env!("CARGO_PKG_VERSION").into(),
        },
    )?;
    println!("wrote sample: {}", out.display());
    println!("acceptance_rate {:.6}", stats.acceptance_rate());
    Ok(())
}

fn cmd_fit(args: FitArgs, settings: &Settings) -> Result<()> {
    let sample_csv: PathBuf = settings.require(args.sample_csv, "sample-csv")?;
    let n_flag: Option<u64> = settings.resolve(args.n, "n")?;
    let alpha: u32 = settings.resolve_or(args.alpha, "alpha", 2)?;
    let lambda = settings.require(args.lambda, "lambda")?;
    let preset = settings.resolve_or(args.weights_preset, "weights-preset", "decay".to_string())?;
    let gamma = settings.resolve_or(args.gamma, "gamma", 1.0)?;
    let z_file: Option<PathBuf> = settings.resolve(args.z_file, "z-file")?;
    let out =
        resolve_out_path(&settings.resolve_or(args.out, "out", PathBuf::from("estimator.txt"))?);

    let sample = with_path(read_sample_csv(&sample_csv), &sample_csv)?;
    let dim = sample[0].len();
    let weights = build_weights(&preset, dim, alpha as f64, gamma)?;
    // A z file carries N in its header, so --n is only needed to construct.
    let rule = match &z_file {
        Some(path) => with_path(LatticeRule::load(path), path)?,
        None => cbc_construct(settings.require(n_flag, "n")?, dim, alpha, &weights)?,
    };
    if let Some(n) = n_flag {
        if rule.modulus() != n {
            return Err(Error::Config(format!(
                "--n is {n} but the z file has N = {}",
                rule.modulus()
            )));
        }
    }
    if rule.dimension() != dim {
        return Err(Error::Config(format!(
            "sample has dimension {dim} but the z file has dimension {}",
            rule.dimension()
        )));
    }
    let kernel = KorobovKernel::new(alpha as f64, weights)?;
    let system = estimator::assemble_system(&rule, &kernel, lambda)?;
    let b = estimator::assemble_rhs(&rule, &kernel, &sample)?;
    let est = estimator::fit_from_rhs(&system, &b)?;
    est.save(&out)?;
    write_manifest(
        &out,
        &RunManifest {
            subcommand: "fit".into(),
            parameters: serde_json::json!({
                "sample_csv": sample_csv.display().to_string(),
                "n": rule.modulus(), "alpha": alpha, "lambda": lambda,
                "weights_preset": preset, "gamma": gamma,
                "z_file": z_file.as_ref().map(|p| p.display().to_string()),
                "m": sample.len(), "dim": dim,
            }),
            seed: None,
            outputs: vec![out.display().to_string()],
            version: env!("CARGO_PKG_VERSION").into(),
        },
    )?;
    println!("wrote estimator: {}", out.display());
    println!("integral {:.16e}", est.integral());
    println!("galerkin_residual {:.3e}", est.galerkin_residual(&b)?);
    Ok(())
}

fn cmd_eval(args: EvalArgs, settings: &Settings) -> Result<()> {
    let path: PathBuf = settings.require(args.estimator, "estimator")?;
    if args.points.is_empty() {
        return Err(Error::Config("need at least one --at point".into()));
    }
    let est = with_path(DensityEstimator::load(&path), &path)?;
    for spec in &args.points {
        let point: Vec<f64> = spec
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("point {spec:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        println!("{:.16e}", est.evaluate(&point)?);
    }
    Ok(())
}

fn load_grid_file(path: &Path) -> Result<Vec<MiseConfig>> {
    let text = with_path(fs::read_to_string(path).map_err(Error::Io), path)?;
    let mut configs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cfg: MiseConfig = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("grid file line {}: {e}", idx + 1)))?;
        configs.push(cfg);
    }
    if configs.is_empty() {
        return Err(Error::Config(format!(
            "grid file {} holds no configurations",
            path.display()
        )));
    }
    Ok(configs)
}

fn write_gnuplot_script(csv: &Path) -> Result<PathBuf> {
    let path = csv.with_extension("gnuplot");
    let csv_name = csv
        .file_name()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned();
    let script = format!(
        "set datafile separator ','\n\
         set logscale xy\n\
         set xlabel 'M'\n\
         set ylabel 'MISE'\n\
         set key outside\n\
         plot '{csv_name}' skip 1 using 5:7 with linespoints title 'MISE'\n"
    );
    fs::write(&path, script)?;
    Ok(path)
}

fn cmd_mise(args: MiseArgs, settings: &Settings) -> Result<()> {
    let preset: Option<String> = settings.resolve(args.preset, "preset")?;
    let grid_file: Option<PathBuf> = settings.resolve(args.grid_file, "grid-file")?;
    let d = settings.resolve_or(args.d, "d", 6)?;
    let alpha = settings.resolve_or(args.alpha, "alpha", 2.0)?;
    let n = settings.resolve_or(args.n, "n", 11)?;
    let seed = settings.resolve_or(args.seed, "seed", 0)?;
    let l_override = settings.resolve(args.l, "l")?;
    let s_max_override = settings.resolve(args.s_max, "s-max")?;
    let ci_override = settings.resolve(args.ci_ratio, "ci-ratio")?;
    let out_csv = resolve_out_path(&settings.resolve_or(
        args.out_csv,
        "out-csv",
        PathBuf::from("mise.csv"),
    )?);

    let mut configs = match (&preset, &grid_file) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "--preset and --grid-file are mutually exclusive".into(),
            ))
        }
        (Some(name), None) => {
            let preset: SweepPreset = name.parse()?;
            crate::mise::preset_grid(preset, d, alpha, n, seed)?
        }
        (None, Some(path)) => load_grid_file(path)?,
        (None, None) => return Err(Error::Config("need either --preset or --grid-file".into())),
    };
    for cfg in &mut configs {
        if let Some(l) = l_override {
            cfg.shift_count = l;
        }
        if let Some(s) = s_max_override {
            cfg.max_replications = s;
        }
        if let Some(r) = ci_override {
            cfg.ci_ratio_target = r;
        }
    }

    let jsonl_path = {
        let mut name = out_csv.file_stem().unwrap_or_default().to_os_string();
        name.push(".jsonl");
        out_csv.with_file_name(name)
    };
    let mut csv = std::io::BufWriter::new(fs::File::create(&out_csv)?);
    let mut jsonl = std::io::BufWriter::new(fs::File::create(&jsonl_path)?);
    writeln!(csv, "{CSV_HEADER}")?;

    let total = configs.len();
    let mut failures = 0usize;
    let mut stream = |idx: usize, result: &Result<MiseReport>| match result {
        Ok(report) => {
            let _ = writeln!(csv, "{}", csv_row(report));
            let _ = csv.flush();
            if let Ok(line) = serde_json::to_string(report) {
                let _ = writeln!(jsonl, "{line}");
                let _ = jsonl.flush();
            }
            eprintln!(
                "[{}/{total}] lambda={:.6e} M={} mise={:.6e} (S={}{})",
                idx + 1,
                report.config.lambda,
                report.config.sample_size,
                report.mise_estimate,
                report.replications_used,
                if report.ci_target_met {
                    ""
                } else {
                    ", CI target unmet"
                },
            );
        }
        Err(e) => {
            eprintln!("[{}/{total}] failed: {e}", idx + 1);
        }
    };
    let results = crate::mise::sweep(&configs, &mut stream)?;
    failures += results.iter().filter(|r| r.is_err()).count();
    drop(stream);
    csv.flush()?;
    jsonl.flush()?;

    let mut outputs = vec![
        out_csv.display().to_string(),
        jsonl_path.display().to_string(),
    ];
    if args.gnuplot {
        let script = write_gnuplot_script(&out_csv)?;
        outputs.push(script.display().to_string());
        println!("wrote gnuplot script: {}", outputs[2]);
    }
    write_manifest(
        &out_csv,
        &RunManifest {
            subcommand: "mise".into(),
            parameters: serde_json::json!({
                "preset": preset,
                "grid_file": grid_file.as_ref().map(|p| p.display().to_string()),
                "d": d, "alpha": alpha, "n": n,
                "l": l_override, "s_max": s_max_override, "ci_ratio": ci_override,
                "points": total,
            }),
            seed: Some(seed),
            outputs,
            version: env!("CARGO_PKG_VERSION").into(),
        },
    )?;
    println!("wrote mise csv: {}", out_csv.display());
    println!("wrote mise jsonl: {}", jsonl_path.display());
    if failures > 0 {
        return Err(Error::SingularSystem(format!(
            "{failures} of {total} grid points failed; completed rows were kept"
        )));
    }
    Ok(())
}

/// Dispatches a parsed invocation.
pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Cbc(args) => cmd_cbc(args, &settings),
        Command::Sample(args) => cmd_sample(args, &settings),
        Command::Fit(args) => cmd_fit(args, &settings),
        Command::Eval(args) => cmd_eval(args, &settings),
        Command::Mise(args) => cmd_mise(args, &settings),
    }
}

/// Entry point used by the binary: parses, runs, and maps errors to exit
/// codes (1 runtime, 2 usage).
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_precedence_flag_over_file_over_default() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg");
        fs::write(&path, "# comment\nn = 7\nlambda=0.25\n").unwrap();
        let settings = Settings::load(Some(&path)).unwrap();

        assert_eq!(settings.require(Some(11u64), "n").unwrap(), 11);
        assert_eq!(settings.require::<u64>(None, "n").unwrap(), 7);
        assert_eq!(settings.resolve_or(None, "lambda", 1.0).unwrap(), 0.25);
        assert_eq!(settings.resolve_or(None, "seed", 5u64).unwrap(), 5);
        assert!(settings.require::<u64>(None, "dim").is_err());
    }

    #[test]
    fn settings_report_parse_failures() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg");
        fs::write(&path, "n=abc\n").unwrap();
        let settings = Settings::load(Some(&path)).unwrap();
        assert!(matches!(settings.get::<u64>("n"), Err(Error::Parse(_))));

        fs::write(&path, "just-a-token\n").unwrap();
        assert!(matches!(Settings::load(Some(&path)), Err(Error::Parse(_))));
    }

    #[test]
    fn out_dir_redirects_relative_paths() {
        // Serialized through a lock-free convention: this test is the only
        // writer of the variable in the suite.
        std::env::set_var("LATDENS_OUT_DIR", "/tmp/latdens-test-out");
        assert_eq!(
            resolve_out_path(Path::new("a.csv")),
            PathBuf::from("/tmp/latdens-test-out/a.csv")
        );
        assert_eq!(
            resolve_out_path(Path::new("/abs/a.csv")),
            PathBuf::from("/abs/a.csv")
        );
        std::env::remove_var("LATDENS_OUT_DIR");
        assert_eq!(resolve_out_path(Path::new("a.csv")), PathBuf::from("a.csv"));
    }

    #[test]
    fn grid_files_parse_json_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.jsonl");
        fs::write(
            &path,
            "# header comment\n\
             {\"dimension\":1,\"alpha\":2.0,\"modulus\":5,\"lambda\":0.1,\"sample_size\":50}\n\
             {\"dimension\":2,\"alpha\":4.0,\"modulus\":7,\"lambda\":0.5,\"sample_size\":60,\"rng_seed\":9}\n",
        )
        .unwrap();
        let configs = load_grid_file(&path).unwrap();
        assert_eq!(configs.len(), 2);
        assert_eq!(configs[0].shift_count, 100);
        assert_eq!(configs[1].rng_seed, 9);

        fs::write(&path, "\n# only comments\n").unwrap();
        assert!(matches!(load_grid_file(&path), Err(Error::Config(_))));
        fs::write(&path, "{broken\n").unwrap();
        assert!(matches!(load_grid_file(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn manifest_lands_next_to_output() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("result.csv");
        fs::write(&out, "stub").unwrap();
        write_manifest(
            &out,
            &RunManifest {
                subcommand: "demo".into(),
                parameters: serde_json::json!({"k": 1}),
                seed: Some(3),
                outputs: vec![out.display().to_string()],
                version: "0.0.0".into(),
            },
        )
        .unwrap();
        let manifest_path = dir.path().join("result.csv.manifest.json");
        let value: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(manifest_path).unwrap()).unwrap();
        assert_eq!(value["subcommand"], "demo");
        assert_eq!(value["seed"], 3);
        assert_eq!(value["parameters"]["k"], 1);
    }

    #[test]
    fn cli_arg_tree_parses() {
        let cli = Cli::try_parse_from(["latdens", "cbc", "--n", "5", "--dim", "2", "--alpha", "2"])
            .unwrap();
        assert!(matches!(cli.command, Command::Cbc(_)));
        let cli = Cli::try_parse_from([
            "latdens",
            "--threads",
            "2",
            "mise",
            "--preset",
            "rate-schedule",
            "--d",
            "6",
            "--alpha",
            "2",
            "--seed",
            "42",
        ])
        .unwrap();
        assert_eq!(cli.threads, Some(2));
        assert!(matches!(cli.command, Command::Mise(_)));
        assert!(Cli::try_parse_from(["latdens", "nope"]).is_err());
    }
}
