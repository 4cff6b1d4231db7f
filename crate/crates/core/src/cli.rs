//! Command-line front end. Every command writes machine-readable output
//! (CSV with a header row, or JSON) to stdout or `--output`.
//!
//! Exit codes: 0 success, 1 numerical failure or failed verification,
//! 2 invalid configuration.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::background::{self, Curvature, EtaRange};
use crate::error::Error;
use crate::fit;
use crate::mode_dynamics::{integrate, ModeParams, PerturbationState};
use crate::ode::Tolerances;
use crate::transform::{self, PsiInput, PsiSeries};
use crate::verifier::{self, InitialData, SuiteConfig, TheoremCheck, VerificationReport};
use crate::wavefield::{self, RadialMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "frw-acoustic", version, about = "Acoustic perturbations of the radiation-dominated FRW universe")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that Psi of an integrated mode solves the wave equation
    Verify(VerifyArgs),
    /// Integrate one mode and tabulate lambda, mu, delta and Psi
    Evolve(EvolveArgs),
    /// Tabulate omega(k) and the group velocity
    Dispersion(DispersionArgs),
    /// Tabulate a radial eigenfunction of the Laplacian
    Modes(ModesArgs),
    /// Rebuild delta from Psi (analytic or sampled) up to gauge terms
    Reconstruct(ReconstructArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Default,
}

/// Options shared by all commands. Flags override values from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Curvature index K (-1, 0 or 1)
    #[arg(long, allow_hyphen_values = true)]
    pub curvature: Option<i32>,
    /// JSON file with default values for any option
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EtaArgs {
    #[arg(long)]
    pub eta_min: Option<f64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub eta: EtaArgs,
    /// Wave number of the mode
    #[arg(long)]
    pub k: Option<f64>,
    /// Run a predefined batch of (K, k) cases instead of one mode
    #[arg(long, value_enum)]
    pub suite: Option<SuiteName>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Explicit initial state lambda,dlambda,mu,dmu (overrides --seed)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub initial: Option<Vec<f64>>,
    /// Relative RMS residual tolerance of the harmonic fit
    #[arg(long)]
    pub tol: Option<f64>,
    /// Admit the homogeneous K=+1, k=1 mode
    #[arg(long)]
    pub degenerate: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub eta: EtaArgs,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub initial: Option<Vec<f64>>,
    #[arg(long)]
    pub degenerate: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DispersionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Explicit comma-separated wave numbers
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<f64>>,
    #[arg(long)]
    pub k_min: Option<f64>,
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ModesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub k: Option<f64>,
    /// Multipole order (0 or 1)
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub chi_min: Option<f64>,
    #[arg(long)]
    pub chi_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub eta: EtaArgs,
    /// Cosine amplitude of an analytic Psi
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Sine amplitude of an analytic Psi
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Frequency of an analytic Psi (0 gives A + B*eta)
    #[arg(long)]
    pub omega: Option<f64>,
    /// Wave number; sets omega from the dispersion relation
    #[arg(long)]
    pub k: Option<f64>,
    /// CSV with columns eta and psi (e.g. the output of `evolve`)
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub c1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<f64>,
    /// Also report the projection onto the gauge pair (JSON on stderr)
    #[arg(long)]
    pub decompose: bool,
}

/// Values accepted in a `--config` JSON file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub curvature: Option<i32>,
    pub k: Option<f64>,
    pub k_list: Option<Vec<f64>>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub eta_min: Option<f64>,
    pub eta_max: Option<f64>,
    pub samples: Option<usize>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub initial: Option<Vec<f64>>,
    pub suite: Option<SuiteName>,
    pub format: Option<Format>,
    pub l: Option<u32>,
    pub chi_min: Option<f64>,
    pub chi_max: Option<f64>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub omega: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub input: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Supercurvature { .. } | Error::Unsupported(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Numerical(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Numerical(format!("csv error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

/// Process entry point.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with_args(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(err, "{}", e.render());
            return if code == 0 { EXIT_OK } else { EXIT_CONFIG };
        }
    };
    match run(&cli, out, err) {
        Ok(code) => code,
        Err(CliError::Config(msg)) => {
            let _ = writeln!(err, "error: invalid configuration: {msg}");
            EXIT_CONFIG
        }
        Err(CliError::Numerical(msg)) => {
            let _ = writeln!(err, "error: numerical failure: {msg}");
            EXIT_NUMERICAL
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let common = match &cli.command {
        Command::Verify(a) => &a.common,
        Command::Evolve(a) => &a.common,
        Command::Dispersion(a) => &a.common,
        Command::Modes(a) => &a.common,
        Command::Reconstruct(a) => &a.common,
    };
    let file = load_config(common.config.as_deref())?;
    let mut buf: Vec<u8> = Vec::new();
    let code = match &cli.command {
        Command::Verify(a) => cmd_verify(a, &file, &mut buf)?,
        Command::Evolve(a) => cmd_evolve(a, &file, &mut buf)?,
        Command::Dispersion(a) => cmd_dispersion(a, &file, &mut buf)?,
        Command::Modes(a) => cmd_modes(a, &file, &mut buf)?,
        Command::Reconstruct(a) => cmd_reconstruct(a, &file, &mut buf, err)?,
    };
    match &common.output {
        Some(path) => fs::write(path, &buf)?,
        None => match out.write_all(&buf).and_then(|_| out.flush()) {
            // a closed pipe (e.g. `| head`) is not a failure
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(code)
}

fn curvature_of(common: &Common, file: &FileConfig) -> CliResult<Curvature> {
    match common.curvature.or(file.curvature) {
        Some(k) => Ok(Curvature::try_from(k)?),
        None => config_err("--curvature is required"),
    }
}

fn format_of(common: &Common, file: &FileConfig) -> Format {
    common.format.or(file.format).unwrap_or(Format::Csv)
}

fn eta_range_of(eta: &EtaArgs, file: &FileConfig, k: Curvature) -> CliResult<EtaRange> {
    let d = EtaRange::default_for(k);
    let r = EtaRange::new(
        eta.eta_min.or(file.eta_min).unwrap_or(d.min),
        eta.eta_max.or(file.eta_max).unwrap_or(d.max),
    );
    let model = background::BackgroundModel::new(k, r)?;
    if !model.is_transform_safe() {
        return config_err(format!(
            "eta range [{}, {}] contains the singular point eta = pi/2 of the Psi-transform for K=+1",
            r.min, r.max
        ));
    }
    Ok(r)
}

fn tolerances_of(eta: &EtaArgs, file: &FileConfig) -> CliResult<Tolerances> {
    let d = Tolerances::default();
    Ok(Tolerances::new(
        eta.rtol.or(file.rtol).unwrap_or(d.rtol),
        eta.atol.or(file.atol).unwrap_or(d.atol),
    )?)
}

fn samples_of(samples: Option<usize>, file: &FileConfig, default: usize, min: usize) -> CliResult<usize> {
    let n = samples.or(file.samples).unwrap_or(default);
    if n < min {
        return config_err(format!("--samples must be >= {min} (got {n})"));
    }
    Ok(n)
}

fn mode_of(k: Option<f64>, file: &FileConfig, curv: Curvature, degenerate: bool) -> CliResult<ModeParams> {
    let Some(k) = k.or(file.k) else {
        return config_err("--k is required");
    };
    Ok(if degenerate {
        ModeParams::new_allow_degenerate(curv, k)?
    } else {
        ModeParams::new(curv, k)?
    })
}

fn initial_of(initial: &Option<Vec<f64>>, seed: Option<u64>, file: &FileConfig) -> CliResult<InitialData> {
    match initial.as_ref().or(file.initial.as_ref()) {
        Some(v) if v.len() == 4 => Ok(InitialData::State(PerturbationState::new(v[0], v[1], v[2], v[3]))),
        Some(v) => config_err(format!("--initial needs 4 values (got {})", v.len())),
        None => Ok(InitialData::Seed(seed.or(file.seed).unwrap_or(0))),
    }
}

/// Formats with 17 significant digits, enough to round-trip an f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn write_csv(buf: &mut Vec<u8>, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(buf: &mut Vec<u8>, value: &impl serde::Serialize) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *buf, value)
        .map_err(|e| CliError::Numerical(format!("json error: {e}")))?;
    buf.push(b'\n');
    Ok(())
}

fn report_row(r: &VerificationReport) -> Vec<String> {
    vec![
        r.curvature.to_string(),
        fmt_f64(r.k),
        fmt_f64(r.kappa2),
        fmt_f64(r.omega),
        fmt_f64(r.fit.a),
        fmt_f64(r.fit.b),
        fmt_f64(r.rms_residual),
        fmt_f64(r.max_residual),
        fmt_opt(r.freq_estimate),
        r.kernel_case.to_string(),
        r.pass.to_string(),
    ]
}

const REPORT_HEADER: [&str; 11] = [
    "curvature", "k", "kappa2", "omega", "A", "B", "rms_residual", "max_residual", "freq_estimate",
    "kernel_case", "pass",
];

fn cmd_verify(a: &VerifyArgs, file: &FileConfig, buf: &mut Vec<u8>) -> CliResult<i32> {
    let format = a.common.format.or(file.format).unwrap_or(Format::Json);
    let tol = a.tol.or(file.tol).unwrap_or(verifier::RESIDUAL_TOL);
    if !(tol > 0.0) {
        return config_err(format!("--tol must be positive (got {tol})"));
    }
    let tolerances = tolerances_of(&a.eta, file)?;
    let samples = samples_of(a.eta.samples, file, verifier::DEFAULT_SAMPLES, 8)?;

    let reports: Vec<VerificationReport>;
    let single;
    if let Some(SuiteName::Default) = a.suite.or(file.suite) {
        let mut cfg = SuiteConfig::default_suite(a.seed.or(file.seed).unwrap_or(0));
        cfg.samples = samples;
        cfg.tolerances = tolerances;
        cfg.residual_tol = tol;
        if a.eta.eta_min.or(file.eta_min).is_some() || a.eta.eta_max.or(file.eta_max).is_some() {
            return config_err("--suite uses the default eta window of each curvature; drop --eta-min/--eta-max");
        }
        reports = verifier::run_suite(&cfg)?.cases;
        single = false;
    } else {
        let curv = curvature_of(&a.common, file)?;
        let params = mode_of(a.k, file, curv, a.degenerate)?;
        let mut check = TheoremCheck::new(params, initial_of(&a.initial, a.seed, file)?);
        check.eta_range = eta_range_of(&a.eta, file, curv)?;
        check.samples = samples;
        check.tolerances = tolerances;
        check.residual_tol = tol;
        reports = vec![verifier::run_theorem_check(&check)?];
        single = true;
    }
    let pass = reports.iter().all(|r| r.pass);
    match format {
        Format::Json if single => write_json(buf, &reports[0])?,
        Format::Json => write_json(buf, &json!({ "cases": reports, "pass": pass }))?,
        Format::Csv => write_csv(buf, &REPORT_HEADER, reports.iter().map(report_row))?,
    }
    Ok(if pass { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_evolve(a: &EvolveArgs, file: &FileConfig, buf: &mut Vec<u8>) -> CliResult<i32> {
    let curv = curvature_of(&a.common, file)?;
    let params = mode_of(a.k, file, curv, a.degenerate)?;
    let range = eta_range_of(&a.eta, file, curv)?;
    let tol = tolerances_of(&a.eta, file)?;
    let samples = samples_of(a.eta.samples, file, verifier::DEFAULT_SAMPLES, 2)?;
    let initial = initial_of(&a.initial, a.seed, file)?.resolve();

    let traj = integrate(initial, &params, range, tol, samples)?;
    let delta = traj.density_contrast()?;
    let psi = transform::psi_trajectory(&traj)?;
    let header = ["eta", "lambda", "dlambda", "mu", "dmu", "delta", "psi"];
    match format_of(&a.common, file) {
        Format::Csv => write_csv(
            buf,
            &header,
            (0..traj.len()).map(|i| {
                let s = traj.states[i];
                [traj.grid[i], s.lambda, s.dlambda, s.mu, s.dmu, delta[i], psi.values[i]]
                    .into_iter()
                    .map(fmt_f64)
                    .collect()
            }),
        )?,
        Format::Json => {
            let rows: Vec<_> = (0..traj.len())
                .map(|i| {
                    let s = traj.states[i];
                    json!({"eta": traj.grid[i], "lambda": s.lambda, "dlambda": s.dlambda, "mu": s.mu,
                           "dmu": s.dmu, "delta": delta[i], "psi": psi.values[i]})
                })
                .collect();
            write_json(buf, &rows)?
        }
    }
    Ok(EXIT_OK)
}

fn cmd_dispersion(a: &DispersionArgs, file: &FileConfig, buf: &mut Vec<u8>) -> CliResult<i32> {
    let curv = curvature_of(&a.common, file)?;
    let ks: Vec<f64> = if let Some(list) = a.k.clone().or(file.k_list.clone()) {
        list
    } else if let Some(k) = file.k.filter(|_| a.k_min.or(file.k_min).is_none()) {
        vec![k]
    } else {
        let (lo, hi) = match (a.k_min.or(file.k_min), a.k_max.or(file.k_max)) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return config_err("give --k or both --k-min and --k-max"),
        };
        let n = samples_of(a.samples, file, 101, 1)?;
        if n == 1 {
            vec![lo]
        } else {
            EtaRange::new(lo, hi).linspace(n)
        }
    };
    if ks.is_empty() {
        return config_err("no wave numbers given");
    }
    let points = ks
        .iter()
        .map(|&k| {
            if !(k > 0.0 && k * k - curv.as_f64() > 0.0) {
                return config_err(format!(
                    "k = {k} rejected for K={curv}: acoustic modes require real k > 0 with k^2 - K > 0 (supercurvature and k^2 <= 0 excluded)"
                ));
            }
            Ok(wavefield::dispersion_point(k, curv)?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    match format_of(&a.common, file) {
        Format::Csv => write_csv(
            buf,
            &["k", "omega", "v_g"],
            points.iter().map(|p| vec![fmt_f64(p.k), fmt_f64(p.omega), fmt_f64(p.v_g)]),
        )?,
        Format::Json => write_json(buf, &points)?,
    }
    Ok(EXIT_OK)
}

fn cmd_modes(a: &ModesArgs, file: &FileConfig, buf: &mut Vec<u8>) -> CliResult<i32> {
    let curv = curvature_of(&a.common, file)?;
    let Some(k) = a.k.or(file.k) else {
        return config_err("--k is required");
    };
    if !(k >= 0.0 && k * k - curv.as_f64() >= 0.0) {
        return config_err(format!("k = {k} rejected for K={curv}: requires k >= 0 with k^2 - K >= 0"));
    }
    let l = a.l.or(file.l).unwrap_or(0);
    if l > 1 {
        return Err(Error::Unsupported(format!("radial modes with l = {l} (only l = 0 and l = 1)")).into());
    }
    let default_max = if curv == Curvature::Closed { 3.0 } else { 10.0 };
    let lo = a.chi_min.or(file.chi_min).unwrap_or(0.0);
    let hi = a.chi_max.or(file.chi_max).unwrap_or(default_max);
    let chi_limit = if curv == Curvature::Closed { std::f64::consts::PI } else { f64::INFINITY };
    if !(lo >= 0.0 && lo < hi && hi < chi_limit) {
        return config_err(format!("chi range [{lo}, {hi}] must satisfy 0 <= chi_min < chi_max (< pi for K=+1)"));
    }
    let n = samples_of(a.samples, file, 201, 2)?;
    let mode = RadialMode::sample(curv, k, l, EtaRange::new(lo, hi).linspace(n))?;
    match format_of(&a.common, file) {
        Format::Csv => {
            writeln!(buf, "# eigenvalue = {}", fmt_f64(mode.eigenvalue()))?;
            write_csv(
                buf,
                &["chi", "phi"],
                mode.chi.iter().zip(&mode.values).map(|(c, v)| vec![fmt_f64(*c), fmt_f64(*v)]),
            )?
        }
        Format::Json => write_json(
            buf,
            &json!({"curvature": curv.value(), "k": k, "l": l, "eigenvalue": mode.eigenvalue(),
                    "chi": mode.chi, "phi": mode.values}),
        )?,
    }
    Ok(EXIT_OK)
}

type PsiColumns = (Vec<f64>, Vec<f64>, Option<Vec<f64>>);

/// Reads `eta`, `psi` and, if present, `delta` columns from a CSV file.
fn read_psi_csv(path: &Path) -> CliResult<PsiColumns> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ie), Some(ip)) = (col("eta"), col("psi")) else {
        return config_err(format!("{} needs columns 'eta' and 'psi'", path.display()));
    };
    let id = col("delta");
    let (mut eta, mut psi, mut delta) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> CliResult<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("bad number in {} line {:?}", path.display(), rec.position().map(|p| p.line()))))
        };
        eta.push(num(ie)?);
        psi.push(num(ip)?);
        if let Some(i) = id {
            delta.push(num(i)?);
        }
    }
    Ok((eta, psi, id.map(|_| delta)))
}

fn cmd_reconstruct(a: &ReconstructArgs, file: &FileConfig, buf: &mut Vec<u8>, err: &mut dyn Write) -> CliResult<i32> {
    let curv = curvature_of(&a.common, file)?;
    let c1 = a.c1.or(file.c1).unwrap_or(0.0);
    let c2 = a.c2.or(file.c2).unwrap_or(0.0);

    let input_path = a.input.clone().or(file.input.clone());
    let (rebuilt, reference) = if let Some(path) = input_path {
        if a.a.is_some() || a.b.is_some() {
            return config_err("--input cannot be combined with --A/--B");
        }
        let (eta, psi, delta) = read_psi_csv(&path)?;
        if eta.len() < 4 {
            return config_err("input needs at least 4 rows");
        }
        for &e in &eta {
            background::check_transform_domain(e, curv)
                .map_err(|e| CliError::Config(format!("input grid: {e}")))?;
        }
        let series = PsiSeries::new(curv, eta, psi).map_err(|e| CliError::Config(format!("input grid: {e}")))?;
        crate::quadrature::uniform_spacing(&series.grid).map_err(|e| CliError::Config(format!("input grid: {e}")))?;
        (transform::reconstruct_delta(PsiInput::Series(&series), c1, c2)?, delta)
    } else {
        let amp_a = a.a.or(file.a).unwrap_or(0.0);
        let amp_b = a.b.or(file.b).unwrap_or(0.0);
        let omega = match (a.omega.or(file.omega), a.k.or(file.k)) {
            (Some(w), _) if w >= 0.0 => w,
            (Some(w), _) => return config_err(format!("--omega must be >= 0 (got {w})")),
            (None, Some(k)) => wavefield::omega(k, curv)?,
            (None, None) if amp_a == 0.0 && amp_b == 0.0 => 0.0,
            (None, None) => return config_err("give --omega or --k with --A/--B, or --input"),
        };
        let range = eta_range_of(&a.eta, file, curv)?;
        let n = samples_of(a.eta.samples, file, verifier::DEFAULT_SAMPLES, 4)?;
        let grid = range.linspace(n);
        let input = PsiInput::Harmonic { curvature: curv, grid: &grid, a: amp_a, b: amp_b, omega };
        (transform::reconstruct_delta(input, c1, c2)?, None)
    };

    let mut extra: Option<(Vec<f64>, Vec<f64>)> = None;
    if a.decompose {
        let target: Vec<f64> = match &reference {
            Some(d) => rebuilt.values.iter().zip(d).map(|(r, d)| r - d).collect(),
            None => rebuilt.values.clone(),
        };
        let proj = transform::project_onto_gauge(curv, &rebuilt.grid, &target)?;
        let scale = match &reference {
            Some(d) => fit::max_abs(d),
            None => fit::max_abs(&rebuilt.values),
        };
        let rel = if scale > 0.0 { proj.residual_max / scale } else { proj.residual_max };
        let summary = json!({
            "target": if reference.is_some() { "reconstructed_minus_input_delta" } else { "reconstructed_delta" },
            "g1": proj.coef[0],
            "g2": proj.coef[1],
            "residual_max": proj.residual_max,
            "residual_rms": proj.residual_rms,
            "relative_residual": rel,
        });
        writeln!(err, "{summary}")?;
        let gauge: Vec<f64> = target.iter().zip(&proj.residual).map(|(t, r)| t - r).collect();
        extra = Some((gauge, proj.residual));
    }

    match format_of(&a.common, file) {
        Format::Csv => match &extra {
            None => write_csv(
                buf,
                &["eta", "delta"],
                rebuilt.grid.iter().zip(&rebuilt.values).map(|(e, d)| vec![fmt_f64(*e), fmt_f64(*d)]),
            )?,
            Some((gauge, resid)) => write_csv(
                buf,
                &["eta", "delta", "gauge_part", "non_gauge_part"],
                (0..rebuilt.grid.len()).map(|i| {
                    vec![fmt_f64(rebuilt.grid[i]), fmt_f64(rebuilt.values[i]), fmt_f64(gauge[i]), fmt_f64(resid[i])]
                }),
            )?,
        },
        Format::Json => write_json(buf, &json!({"eta": rebuilt.grid, "delta": rebuilt.values}))?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["frw-acoustic"];
        full.extend_from_slice(args);
        let code = run_with_args(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn negative_curvature_flag_parses() {
        let (code, out, _) = run(&["dispersion", "--curvature", "-1", "--k", "1"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("k,omega,v_g\n"));
    }

    #[test]
    fn missing_curvature_is_config_error() {
        let (code, _, err) = run(&["evolve", "--k", "1"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("--curvature is required"));
    }

    #[test]
    fn unknown_flag_is_config_error() {
        let (code, _, _) = run(&["verify", "--bogus"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn straddling_range_rejected() {
        let (code, _, err) = run(&["evolve", "--curvature", "1", "--k", "3", "--eta-max", "2.0"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("pi/2"), "{err}");
    }

    #[test]
    fn unsupported_l_rejected() {
        let (code, _, err) = run(&["modes", "--curvature", "0", "--k", "1", "--l", "3"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("l = 3"));
    }
}
