//! Command-line experiment driver.
//!
//! Every subcommand accepts the same flag set; the same fields may instead
//! come from a JSON file given with `--config`. A field set in both places
//! is a conflict and rejected. Validation collects every violation before
//! reporting.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::Error;
use crate::exact::{
    aa_distribution, dspfs_distribution, spacs_distribution, InputFamily, InputSpec,
    OutputDistribution,
};
use crate::io::{fmt_f64, json_array, parse_complex, JsonObject};
use crate::numerics::{haar_random_unitary, UnitaryMatrix};
use crate::oracle::run_pipeline;
use crate::permanent::bench_sweep;
use crate::sampling::{draw, empirical_distribution, total_variation};
use crate::transition::{limit_sweep, sweep_csv, ScalingRule};
use crate::wigner::{
    major_axis_slice, negativity_metrics, wigner_grid, WignerKind, Window, DEFAULT_RESOLUTION,
};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "LINOPT_THREADS";
/// Largest oracle/closed-form total variation distance `oracle-check` accepts.
pub const ORACLE_TVD_TOL: f64 = 1e-6;
const NORMALIZATION_TOL: f64 = 1e-9;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "linopt",
    version,
    about = "Exact linear-optical sampling experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Subcommand, Debug)]
enum CommandArgs {
    /// Write the exact output distribution.
    Distribution(Flags),
    /// Draw samples from the exact output distribution.
    Sample(Flags),
    /// Compare the truncated-Fock simulation with the closed form.
    OracleCheck(Flags),
    /// Sweep post-selection probabilities under an |α|² scaling rule.
    Transition(Flags),
    /// Evaluate Wigner functions on a grid or along the major axis.
    Wigner(Flags),
    /// Time the permanent engine over a size sweep.
    Bench(Flags),
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct Flags {
    /// JSON file with any of the fields below
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// fock | dspfs | spacs
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// One complex amplitude for every mode, or a comma-separated list
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    haar_seed: Option<u64>,
    #[arg(long)]
    unitary_file: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// inv-n | inv-n2 | n2
    #[arg(long)]
    rule: Option<String>,
    /// Comma-separated problem sizes for `transition`
    #[arg(long)]
    n_values: Option<String>,
    /// spacs | coherent
    #[arg(long)]
    kind: Option<String>,
    /// grid | slice
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Comma-separated matrix sizes for `bench`
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident, $conflicts:ident; $($field:ident),* $(,)?) => {
        $(
            match (&$dst.$field, $src.$field) {
                (Some(_), Some(_)) => $conflicts.push(format!(
                    "--{} is set both on the command line and in the config file",
                    stringify!($field).replace('_', "-")
                )),
                (None, Some(v)) => $dst.$field = Some(v),
                _ => {}
            }
        )*
    };
}

impl Flags {
    fn merge_file(&mut self, file: Flags) -> Vec<String> {
        let mut conflicts = Vec::new();
        merge_fields!(self, file, conflicts;
            family, n, m, alpha, haar_seed, unitary_file, samples, seed, cutoff, out, format,
            rule, n_values, kind, mode, x_min, x_max, half_width, resolution, sizes, reps, threads);
        conflicts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Distribution,
    Sample,
    OracleCheck,
    Transition,
    Wigner,
    Bench,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Distribution => "distribution",
            Self::Sample => "sample",
            Self::OracleCheck => "oracle-check",
            Self::Transition => "transition",
            Self::Wigner => "wigner",
            Self::Bench => "bench",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum UnitarySource {
    Haar(u64),
    File(PathBuf),
}

impl UnitarySource {
    pub fn load(&self, m: usize) -> crate::Result<UnitaryMatrix> {
        let u = match self {
            Self::Haar(seed) => haar_random_unitary(m, *seed)?,
            Self::File(path) => UnitaryMatrix::from_json(&std::fs::read_to_string(path)?)?,
        };
        if u.dim() != m {
            return Err(Error::InvalidDimension(format!(
                "unitary is {0}x{0} but m = {m}",
                u.dim()
            )));
        }
        Ok(u)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WignerMode {
    Grid {
        half_width: f64,
        resolution: usize,
    },
    Slice {
        x_range: (f64, f64),
        resolution: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    Distribution {
        input: InputSpec,
        unitary: UnitarySource,
    },
    Sample {
        input: InputSpec,
        unitary: UnitarySource,
        samples: usize,
        seed: u64,
    },
    OracleCheck {
        input: InputSpec,
        unitary: UnitarySource,
        cutoff: Option<usize>,
    },
    Transition {
        rule: ScalingRule,
        n_values: Vec<u64>,
    },
    Wigner {
        alpha: Complex64,
        kind: WignerKind,
        mode: WignerMode,
    },
    Bench {
        sizes: Vec<usize>,
        reps: usize,
        threads: usize,
    },
}

/// A validated run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub job: Job,
}

#[derive(Debug)]
pub enum ConfigError {
    /// Rendered clap error (also covers `--help` and `--version`).
    Usage(clap::Error),
    Violations(Vec<String>),
}

impl ConfigError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(e) if !e.use_stderr() => EXIT_OK,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(e) => write!(f, "{e}"),
            Self::Violations(v) => {
                writeln!(f, "invalid configuration:")?;
                for line in v {
                    writeln!(f, "  - {line}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses `argv` (including the program name) into a validated config.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ConfigError::Usage)?;
    let (command, mut flags) = match cli.command {
        CommandArgs::Distribution(f) => (Command::Distribution, f),
        CommandArgs::Sample(f) => (Command::Sample, f),
        CommandArgs::OracleCheck(f) => (Command::OracleCheck, f),
        CommandArgs::Transition(f) => (Command::Transition, f),
        CommandArgs::Wigner(f) => (Command::Wigner, f),
        CommandArgs::Bench(f) => (Command::Bench, f),
    };
    let mut violations = Vec::new();
    if let Some(path) = flags.config.clone() {
        match std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| serde_json::from_str::<Flags>(&text).map_err(|e| e.to_string()))
        {
            Ok(file) => violations.extend(flags.merge_file(file)),
            Err(e) => violations.push(format!("cannot read config file {}: {e}", path.display())),
        }
    }
    let config = validate(command, &flags, &mut violations);
    match config {
        Some(c) if violations.is_empty() => Ok(c),
        _ => Err(ConfigError::Violations(violations)),
    }
}

fn require<T: Clone>(
    value: &Option<T>,
    name: &str,
    command: Command,
    violations: &mut Vec<String>,
) -> Option<T> {
    if value.is_none() {
        violations.push(format!("missing required field --{name} for `{command}`"));
    }
    value.clone()
}

fn parse_list<T: std::str::FromStr>(
    text: &str,
    name: &str,
    violations: &mut Vec<String>,
) -> Option<Vec<T>> {
    let parsed: Result<Vec<T>, _> = text.split(',').map(|s| s.trim().parse::<T>()).collect();
    match parsed {
        Ok(v) if !v.is_empty() => Some(v),
        _ => {
            violations.push(format!(
                "--{name} must be a comma-separated list, got {text:?}"
            ));
            None
        }
    }
}

fn validate_input(
    command: Command,
    flags: &Flags,
    violations: &mut Vec<String>,
) -> Option<InputSpec> {
    let family = match require(&flags.family, "family", command, violations)?.as_str() {
        "fock" => InputFamily::Fock,
        "dspfs" => InputFamily::Dspfs,
        "spacs" => InputFamily::Spacs,
        other => {
            violations.push(format!(
                "unknown --family {other:?} (expected fock, dspfs or spacs)"
            ));
            return None;
        }
    };
    let m = require(&flags.m, "m", command, violations);
    let alphas = match (&flags.alpha, family) {
        (Some(_), InputFamily::Fock) => {
            violations.push("--alpha is not allowed with --family fock".into());
            None
        }
        (None, InputFamily::Fock) => Some(Vec::new()),
        (None, _) => {
            violations.push(format!(
                "missing required field --alpha for family {}",
                family.name()
            ));
            None
        }
        (Some(text), _) => {
            let parsed: Result<Vec<Complex64>, _> = text.split(',').map(parse_complex).collect();
            match parsed {
                Ok(v) => Some(v),
                Err(e) => {
                    violations.push(e.to_string());
                    None
                }
            }
        }
    };
    let n = match (family, flags.n, &alphas) {
        (InputFamily::Fock, None, _) => {
            violations.push(format!("missing required field --n for `{command}`"));
            None
        }
        (_, Some(n), _) => Some(n),
        (_, None, Some(a)) if a.len() > 1 => Some(a.len()),
        (_, None, _) => {
            violations.push("--n is required unless --alpha lists one amplitude per mode".into());
            None
        }
    };
    let (m, n, mut alphas) = (m?, n?, alphas?);
    if family != InputFamily::Fock && alphas.len() == 1 {
        alphas = vec![alphas[0]; n];
    }
    match InputSpec::new(family, n, m, alphas) {
        Ok(spec) => Some(spec),
        Err(e) => {
            violations.push(e.to_string());
            None
        }
    }
}

fn validate_unitary(
    command: Command,
    flags: &Flags,
    violations: &mut Vec<String>,
) -> Option<UnitarySource> {
    match (flags.haar_seed, &flags.unitary_file) {
        (Some(_), Some(_)) => {
            violations.push("--haar-seed and --unitary-file are mutually exclusive".into());
            None
        }
        (Some(seed), None) => Some(UnitarySource::Haar(seed)),
        (None, Some(path)) => {
            if !path.exists() {
                violations.push(format!("unitary file {} does not exist", path.display()));
            }
            Some(UnitarySource::File(path.clone()))
        }
        (None, None) => {
            violations.push(format!("`{command}` needs --haar-seed or --unitary-file"));
            None
        }
    }
}

fn validate(command: Command, flags: &Flags, violations: &mut Vec<String>) -> Option<RunConfig> {
    let default_format = match command {
        Command::Distribution | Command::Sample | Command::OracleCheck => Format::Json,
        _ => Format::Csv,
    };
    let format = match flags.format.as_deref() {
        None => Some(default_format),
        Some("csv") => Some(Format::Csv),
        Some("json") => Some(Format::Json),
        Some(other) => {
            violations.push(format!("unknown --format {other:?} (expected csv or json)"));
            None
        }
    };
    let job = match command {
        Command::Distribution => {
            let input = validate_input(command, flags, violations);
            let unitary = validate_unitary(command, flags, violations);
            Some(Job::Distribution {
                input: input?,
                unitary: unitary?,
            })
        }
        Command::Sample => {
            let input = validate_input(command, flags, violations);
            let unitary = validate_unitary(command, flags, violations);
            let samples = require(&flags.samples, "samples", command, violations);
            let seed = require(&flags.seed, "seed", command, violations);
            if samples == Some(0) {
                violations.push("--samples must be positive".into());
            }
            Some(Job::Sample {
                input: input?,
                unitary: unitary?,
                samples: samples?,
                seed: seed?,
            })
        }
        Command::OracleCheck => {
            let input = validate_input(command, flags, violations);
            let unitary = validate_unitary(command, flags, violations);
            Some(Job::OracleCheck {
                input: input?,
                unitary: unitary?,
                cutoff: flags.cutoff,
            })
        }
        Command::Transition => {
            let rule = match require(&flags.rule, "rule", command, violations)?.as_str() {
                "inv-n" => ScalingRule::InverseN,
                "inv-n2" => ScalingRule::InverseNSquared,
                "n2" => ScalingRule::NSquared,
                other => {
                    violations.push(format!(
                        "unknown --rule {other:?} (expected inv-n, inv-n2 or n2)"
                    ));
                    return None;
                }
            };
            let n_values = match &flags.n_values {
                Some(text) => parse_list::<u64>(text, "n-values", violations)?,
                None => vec![10, 100, 1000, 10_000],
            };
            if n_values.contains(&0) {
                violations.push("--n-values must be positive".into());
            }
            Some(Job::Transition { rule, n_values })
        }
        Command::Wigner => {
            let alpha = match require(&flags.alpha, "alpha", command, violations) {
                Some(text) => match parse_complex(&text) {
                    Ok(a) => Some(a),
                    Err(e) => {
                        violations.push(e.to_string());
                        None
                    }
                },
                None => None,
            };
            let kind = match flags.kind.as_deref() {
                None | Some("spacs") => Some(WignerKind::Spacs),
                Some("coherent") => Some(WignerKind::Coherent),
                Some(other) => {
                    violations.push(format!(
                        "unknown --kind {other:?} (expected spacs or coherent)"
                    ));
                    None
                }
            };
            let resolution = flags.resolution.unwrap_or(DEFAULT_RESOLUTION);
            let mode = match flags.mode.as_deref() {
                None | Some("grid") => Some(WignerMode::Grid {
                    half_width: flags.half_width.unwrap_or(5.0),
                    resolution,
                }),
                Some("slice") => {
                    let a = alpha.map_or(0.0, |a| a.norm());
                    let x_range = (
                        flags.x_min.unwrap_or(a / 2.0 - 3.0),
                        flags.x_max.unwrap_or(a + 3.0),
                    );
                    if kind == Some(WignerKind::Coherent) {
                        violations.push("slices are only defined for --kind spacs".into());
                    }
                    if alpha.is_some_and(|a| a.im != 0.0) {
                        violations.push("slices need a real --alpha".into());
                    }
                    Some(WignerMode::Slice {
                        x_range,
                        resolution,
                    })
                }
                Some(other) => {
                    violations.push(format!("unknown --mode {other:?} (expected grid or slice)"));
                    None
                }
            };
            Some(Job::Wigner {
                alpha: alpha?,
                kind: kind?,
                mode: mode?,
            })
        }
        Command::Bench => {
            let sizes = match &flags.sizes {
                Some(text) => parse_list::<usize>(text, "sizes", violations)?,
                None => vec![8, 10, 12, 14, 16, 18, 20],
            };
            Some(Job::Bench {
                sizes,
                reps: flags.reps.unwrap_or(3),
                threads: flags.threads.unwrap_or(1),
            })
        }
    };
    Some(RunConfig {
        command,
        output_path: flags.out.clone(),
        format: format?,
        job: job?,
    })
}

/// Failure of a validated run.
#[derive(Debug)]
pub enum RunError {
    /// A numerical check failed (truncation leakage, TVD, normalization).
    Tolerance(String),
    Other(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Tolerance(_) => EXIT_TOLERANCE,
            Self::Other(Error::InvalidInput(_) | Error::InvalidDimension(_) | Error::Parse(_)) => {
                EXIT_USAGE
            }
            Self::Other(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tolerance(msg) => write!(f, "tolerance failure: {msg}"),
            Self::Other(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::CutoffTooSmall { .. } => Self::Tolerance(e.to_string()),
            other => Self::Other(other),
        }
    }
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub summary: String,
    /// The artifact text, also written to `output_path` when set.
    pub artifact: String,
}

fn exact_distribution(input: &InputSpec, u: &UnitaryMatrix) -> crate::Result<OutputDistribution> {
    match input.family() {
        InputFamily::Fock => aa_distribution(u, input.n()),
        InputFamily::Dspfs => dspfs_distribution(u, input.alphas()),
        InputFamily::Spacs => Ok(spacs_distribution(u, input.alphas())?.joint()),
    }
}

fn render(dist: &OutputDistribution, format: Format) -> String {
    match format {
        Format::Json => dist.to_json(),
        Format::Csv => dist.to_csv(),
    }
}

fn write_artifact(path: Option<&Path>, text: &str) -> Result<(), RunError> {
    if let Some(path) = path {
        std::fs::write(path, text).map_err(|e| RunError::Other(e.into()))?;
    }
    Ok(())
}

fn retained_mass(dist: &OutputDistribution, n: usize) -> f64 {
    dist.iter()
        .filter(|(c, _)| c.total() == n as u64)
        .map(|(_, o)| o.probability)
        .sum()
}

/// Executes a validated config and writes its artifact.
pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let out = config.output_path.as_deref();
    let (summary, artifact, failure) = match &config.job {
        Job::Distribution { input, unitary } => {
            let u = unitary.load(input.m())?;
            let dist = exact_distribution(input, &u)?;
            let mass = dist.total_mass();
            let summary = format!(
                "distribution family={} n={} m={} outcomes={} total_mass={} retained_mass(total={})={}",
                input.family().name(),
                input.n(),
                input.m(),
                dist.len(),
                fmt_f64(mass),
                input.n(),
                fmt_f64(retained_mass(&dist, input.n()))
            );
            let failure = ((mass - 1.0).abs() > NORMALIZATION_TOL).then(|| {
                format!(
                    "distribution mass {mass} deviates from 1 by more than {NORMALIZATION_TOL:e}"
                )
            });
            (summary, render(&dist, config.format), failure)
        }
        Job::Sample {
            input,
            unitary,
            samples,
            seed,
        } => {
            let u = unitary.load(input.m())?;
            let dist = exact_distribution(input, &u)?;
            let batch = draw(&dist, *samples, *seed)?;
            let empirical = empirical_distribution(&batch)?;
            let tvd = total_variation(&empirical, &dist)?;
            let kept = batch
                .draws
                .iter()
                .filter(|d| d.total() == input.n() as u64)
                .count();
            let summary = format!(
                "sample family={} samples={} seed={} tvd_to_exact={} retained_mass(total={})={}",
                input.family().name(),
                samples,
                seed,
                fmt_f64(tvd),
                input.n(),
                fmt_f64(kept as f64 / *samples as f64)
            );
            let artifact = match config.format {
                Format::Json => batch.to_json(),
                Format::Csv => batch.to_csv(),
            };
            (summary, artifact, None)
        }
        Job::OracleCheck {
            input,
            unitary,
            cutoff,
        } => {
            let u = unitary.load(input.m())?;
            let expected = exact_distribution(input, &u)?;
            let oracle = run_pipeline(input, &u, *cutoff)?;
            let tvd = total_variation(&oracle.distribution, &expected)?;
            let summary = format!(
                "oracle-check family={} n={} m={} cutoff={} leakage={} tvd={} tol={}",
                input.family().name(),
                input.n(),
                input.m(),
                oracle.cutoff,
                fmt_f64(oracle.leakage),
                fmt_f64(tvd),
                fmt_f64(ORACLE_TVD_TOL)
            );
            let failure = (!(tvd < ORACLE_TVD_TOL))
                .then(|| format!("oracle TVD {tvd:e} >= {ORACLE_TVD_TOL:e}"));
            (
                summary,
                render(&oracle.distribution, config.format),
                failure,
            )
        }
        Job::Transition { rule, n_values } => {
            let reports = limit_sweep(*rule, n_values)?;
            let last = reports.last().expect("n_values is non-empty");
            let summary = format!(
                "transition rule={} rows={} last_n={} p_n={} p_0={} regime={}",
                rule.name(),
                reports.len(),
                last.n,
                fmt_f64(last.p_n),
                fmt_f64(last.p_0),
                last.regime
            );
            let artifact = match config.format {
                Format::Csv => sweep_csv(&reports),
                Format::Json => json_array(reports.iter().map(|r| {
                    JsonObject::new()
                        .int("n", r.n)
                        .num("alpha_sq", r.alpha_sq)
                        .num("p_n", r.p_n)
                        .num("p_0", r.p_0)
                        .string("regime", &r.regime.to_string())
                        .finish()
                })),
            };
            (summary, artifact, None)
        }
        Job::Wigner { alpha, kind, mode } => match mode {
            WignerMode::Grid {
                half_width,
                resolution,
            } => {
                let grid = wigner_grid(
                    *alpha,
                    Window::centered(*alpha, *half_width),
                    *resolution,
                    *kind,
                )?;
                let metrics = negativity_metrics(&grid);
                let summary = format!(
                    "wigner kind={} resolution={} min={} at=({},{}) negative_volume={} integral={}",
                    kind.name(),
                    resolution,
                    fmt_f64(metrics.min_value),
                    fmt_f64(metrics.min_location.re),
                    fmt_f64(metrics.min_location.im),
                    fmt_f64(metrics.negative_volume),
                    fmt_f64(grid.integral())
                );
                let artifact = match config.format {
                    Format::Csv => grid.to_csv(),
                    Format::Json => grid.to_json(),
                };
                (summary, artifact, None)
            }
            WignerMode::Slice {
                x_range,
                resolution,
            } => {
                let slice = major_axis_slice(alpha.re, *x_range, *resolution)?;
                let (xmin, wmin) =
                    slice
                        .iter()
                        .copied()
                        .fold((0.0, f64::INFINITY), |a, p| if p.1 < a.1 { p } else { a });
                let summary = format!(
                    "wigner slice alpha={} points={} min_W={} at_x={}",
                    fmt_f64(alpha.re),
                    slice.len(),
                    fmt_f64(wmin),
                    fmt_f64(xmin)
                );
                let artifact = match config.format {
                    Format::Csv => {
                        let mut w = csv::Writer::from_writer(Vec::new());
                        w.write_record(["x", "W"]).map_err(Error::from)?;
                        for (x, v) in &slice {
                            w.write_record([fmt_f64(*x), fmt_f64(*v)])
                                .map_err(Error::from)?;
                        }
                        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
                    }
                    Format::Json => JsonObject::new()
                        .num("alpha", alpha.re)
                        .raw(
                            "points",
                            &json_array(
                                slice
                                    .iter()
                                    .map(|(x, v)| format!("[{},{}]", fmt_f64(*x), fmt_f64(*v))),
                            ),
                        )
                        .finish(),
                };
                (summary, artifact, None)
            }
        },
        Job::Bench {
            sizes,
            reps,
            threads,
        } => {
            let rows = bench_sweep(sizes, *reps, *threads, 0)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "threads", "rep", "nanoseconds"])
                .map_err(Error::from)?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    r.threads.to_string(),
                    r.rep.to_string(),
                    r.nanos.to_string(),
                ])
                .map_err(Error::from)?;
            }
            let artifact =
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
            let slowest = rows.iter().map(|r| r.nanos).max().unwrap_or(0);
            let summary =
                format!("bench sizes={sizes:?} reps={reps} threads={threads} slowest_ns={slowest}");
            (summary, artifact, None)
        }
    };
    write_artifact(out, &artifact)?;
    match failure {
        Some(msg) => Err(RunError::Tolerance(format!("{msg} ({summary})"))),
        None => Ok(RunOutcome { summary, artifact }),
    }
}
