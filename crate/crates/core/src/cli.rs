//! The `sim` command-line front end.
//!
//! Angles are degrees at the interface and radians everywhere else; the
//! token `magic` stands for the exact atan(√2)/4 while a literal `13.68` is
//! taken at face value.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::fock::{FockError, PureState};
use crate::harness::{
    run_scan, simulate_counts, write_csv, write_json, HarnessError, RateModel, RunManifest,
    ScanKind, ScanResult, ScanSpec,
};
use crate::projection::{
    analytic_a4f_continuous, detection_probability, magic_angle, solve_second_angle,
    ProjectionError, ProjectionSetting,
};
use crate::states::{identify_bell_state, NamedState, StateError};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 978;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SIM_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Computation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Computation(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        match e {
            StateError::Fock(_) => CliError::Computation(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ProjectionError> for CliError {
    fn from(e: ProjectionError) -> Self {
        match e {
            ProjectionError::InvalidOverlap(_) | ProjectionError::NotTwoBiphotons => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::InvalidSpec(_) | HarnessError::InvalidModel(_) => CliError::Usage(e.to_string()),
            HarnessError::Projection(p) => p.into(),
            HarnessError::Io(_) | HarnessError::Csv(_) => CliError::Io(e.to_string()),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        CliError::Computation(e.to_string())
    }
}

/// An angle flag: degrees, or `magic`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("magic") {
            return Ok(Angle(magic_angle()));
        }
        let deg: f64 = s.parse().map_err(|_| format!("'{s}' is neither degrees nor 'magic'"))?;
        if !deg.is_finite() {
            return Err(format!("angle '{s}' is not finite"));
        }
        Ok(Angle(deg.to_radians()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "sim", version, about = "Biphoton qutrit projection simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump a named state as JSON.
    State(StateArgs),
    /// Fourfold detection probability for one setting.
    Project(ProjectArgs),
    /// Second wave-plate angle with tan 4θ1 · tan 4θ2 = 2.
    Angles(AnglesArgs),
    /// Theory curve over a parameter grid.
    Scan(ScanArgs),
    /// Poisson counts on top of a scan.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// psi00 .. psi22, or phi2
    pub name: String,
    /// Source phase for phi2 (degrees)
    #[arg(long, default_value = "0")]
    pub delta: Angle,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub state: String,
    /// Source phase for phi2 (degrees)
    #[arg(long, default_value = "0")]
    pub delta: Angle,
    #[arg(long)]
    pub theta1: Angle,
    #[arg(long)]
    pub theta2: Angle,
    /// Retardance on arm a before the PBS (degrees)
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub pre_phase: Angle,
    /// Temporal overlap in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AnglesArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: Angle,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Delta,
    Delay,
    Overlap,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Grid start (degrees for delta scans)
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,
    /// Grid end, inclusive
    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,
    /// Number of intervals; the grid has steps + 1 points
    #[arg(long)]
    pub steps: usize,
    /// State for delay/overlap scans (delta scans always use phi2)
    #[arg(long, default_value = "psi00")]
    pub state: String,
    /// Source phase of phi2 in delay/overlap scans (degrees)
    #[arg(long, default_value = "0")]
    pub delta: Angle,
    /// Both wave plates (degrees or 'magic'); overridden by --theta1/--theta2
    #[arg(long, default_value = "magic")]
    pub theta: Angle,
    #[arg(long)]
    pub theta1: Option<Angle>,
    #[arg(long)]
    pub theta2: Option<Angle>,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub pre_phase: Angle,
    /// Fixed overlap for delta scans
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Delay-to-overlap width for delay scans
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Output stem; `.csv`/`.json` and `.manifest.json` are appended
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    /// Scan manifest (or bare scan spec) JSON
    #[arg(long)]
    pub scan_file: PathBuf,
    /// Rate in Hz per unit fourfold probability
    #[arg(long)]
    pub peak_rate: f64,
    /// Additive background rate (Hz)
    #[arg(long, default_value_t = 0.0)]
    pub background: f64,
    /// Integration time per point (seconds)
    #[arg(long)]
    pub integration: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Runs one command and returns what should go to stdout.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::State(a) => cmd_state(&a),
        Command::Project(a) => cmd_project(&a),
        Command::Angles(a) => cmd_angles(&a),
        Command::Scan(a) => cmd_scan(&a),
        Command::Montecarlo(a) => cmd_montecarlo(&a),
    }
}

pub fn cmd_state(args: &StateArgs) -> Result<String, CliError> {
    let named = NamedState::parse(&args.name, args.delta.0)?;
    let state = named.build();
    let norm = state.norm_sqr().sqrt();
    let matches = identify_bell_state(&state, 1e-12).map(|i| i.to_string());
    let doc = json!({
        "name": named.name(),
        "delta_deg": matches!(named, NamedState::Phi2 { .. }).then(|| args.delta.0.to_degrees()),
        "photons": state.photon_number(),
        "norm": norm,
        "normalized": (norm - 1.0).abs() < 1e-12,
        "equals_up_to_phase": matches,
        "state": state,
    });
    to_pretty(&doc)
}

/// Closed-form fourfold probability where it applies: equal plates, full
/// overlap and a state from the m = 0 family.
fn analytic_probability(named: &NamedState, setting: &ProjectionSetting) -> Option<f64> {
    if (setting.theta1 - setting.theta2).abs() > 1e-15 || setting.overlap != 1.0 {
        return None;
    }
    let delta = match named {
        NamedState::Phi2 { delta } => *delta,
        NamedState::Bell { index } if index.m() == 0 => 2.0 * std::f64::consts::PI * index.n() as f64 / 3.0,
        NamedState::Bell { .. } => return None,
    };
    Some(analytic_a4f_continuous(setting.theta1, delta + setting.pre_pbs_phase).norm_sqr())
}

pub fn cmd_project(args: &ProjectArgs) -> Result<String, CliError> {
    let named = NamedState::parse(&args.state, args.delta.0)?;
    let setting = ProjectionSetting {
        theta1: args.theta1.0,
        theta2: args.theta2.0,
        pre_pbs_phase: args.pre_phase.0,
        overlap: args.gamma,
    };
    let propagated = detection_probability(&named.build(), &setting)?;
    let analytic = analytic_probability(&named, &setting);
    let difference = analytic.map(|a| (a - propagated).abs());
    if args.format == Format::Json {
        return to_pretty(&json!({
            "state": named.name(),
            "theta1_deg": setting.theta1.to_degrees(),
            "theta2_deg": setting.theta2.to_degrees(),
            "pre_phase_deg": setting.pre_pbs_phase.to_degrees(),
            "gamma": setting.overlap,
            "analytic": analytic,
            "propagated": propagated,
            "difference": difference,
        }));
    }
    let mut out = String::new();
    let na = "n/a".to_string();
    let _ = writeln!(out, "state        {}", named.name());
    let _ = writeln!(out, "theta1_deg   {}", setting.theta1.to_degrees());
    let _ = writeln!(out, "theta2_deg   {}", setting.theta2.to_degrees());
    let _ = writeln!(out, "pre_phase    {}", setting.pre_pbs_phase.to_degrees());
    let _ = writeln!(out, "gamma        {}", setting.overlap);
    let _ = writeln!(out, "analytic     {}", analytic.map_or(na.clone(), |a| format!("{a:.15}")));
    let _ = writeln!(out, "propagated   {propagated:.15}");
    let _ = writeln!(out, "difference   {}", difference.map_or(na, |d| format!("{d:.3e}")));
    Ok(out)
}

pub fn cmd_angles(args: &AnglesArgs) -> Result<String, CliError> {
    let theta2 = solve_second_angle(args.theta1.0)?;
    let product = (4.0 * args.theta1.0).tan() * (4.0 * theta2).tan();
    if args.format == Format::Json {
        return to_pretty(&json!({
            "theta1_deg": args.theta1.0.to_degrees(),
            "theta2_deg": theta2.to_degrees(),
            "tan_product": product,
        }));
    }
    Ok(format!(
        "theta1_deg   {}\ntheta2_deg   {}\ntan_product  {}\n",
        args.theta1.0.to_degrees(),
        theta2.to_degrees(),
        product
    ))
}

fn linear_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::Usage("grid bounds must be finite".into()));
    }
    Ok((0..=steps)
        .map(|k| {
            if k == steps {
                to
            } else {
                from + (to - from) * k as f64 / steps as f64
            }
        })
        .collect())
}

pub fn scan_spec_from_args(args: &ScanArgs) -> Result<ScanSpec, CliError> {
    let mut grid = linear_grid(args.from, args.to, args.steps)?;
    let kind = match args.kind {
        KindArg::Delta => ScanKind::Delta,
        KindArg::Delay => ScanKind::Delay,
        KindArg::Overlap => ScanKind::Overlap,
    };
    if kind == ScanKind::Delta {
        grid.iter_mut().for_each(|d| *d = d.to_radians());
    }
    let source = match kind {
        ScanKind::Delta => NamedState::Phi2 { delta: 0.0 },
        _ => NamedState::parse(&args.state, args.delta.0)?,
    };
    let setting = ProjectionSetting {
        theta1: args.theta1.unwrap_or(args.theta).0,
        theta2: args.theta2.unwrap_or(args.theta).0,
        pre_pbs_phase: args.pre_phase.0,
        overlap: args.gamma,
    };
    Ok(ScanSpec {
        kind,
        grid,
        setting,
        source,
        coherence_sigma: (kind == ScanKind::Delay).then_some(args.sigma),
    })
}

pub fn cmd_scan(args: &ScanArgs) -> Result<String, CliError> {
    let started = unix_now();
    let spec = scan_spec_from_args(args)?;
    let result = run_scan(&spec)?;
    let stem = output_stem(args.output.as_deref(), "scan");
    let written = write_outputs(&result, &stem, args.format)?;
    let manifest = RunManifest {
        tool: "sim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "scan".into(),
        spec,
        model: None,
        integration_seconds: None,
        seed: None,
        started_unix: started,
        finished_unix: unix_now(),
        outputs: vec![written.display().to_string()],
    };
    let manifest_path = write_manifest(&manifest, &stem)?;
    Ok(format!("{}\n{}\n", written.display(), manifest_path.display()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScanFile {
    Manifest(Box<RunManifest>),
    Spec(ScanSpec),
}

pub fn cmd_montecarlo(args: &MonteCarloArgs) -> Result<String, CliError> {
    let started = unix_now();
    let text = std::fs::read_to_string(&args.scan_file)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.scan_file.display())))?;
    let spec = match serde_json::from_str::<ScanFile>(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a scan manifest or spec: {e}", args.scan_file.display())))?
    {
        ScanFile::Manifest(m) => m.spec,
        ScanFile::Spec(s) => s,
    };
    let model = RateModel::new(args.peak_rate, args.background)?;
    let theory = run_scan(&spec)?;
    let result = simulate_counts(&theory, &model, args.integration, args.seed)?;
    let stem = output_stem(args.output.as_deref(), "montecarlo");
    let written = write_outputs(&result, &stem, args.format)?;
    let manifest = RunManifest {
        tool: "sim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "montecarlo".into(),
        spec,
        model: Some(model),
        integration_seconds: Some(args.integration),
        seed: Some(args.seed),
        started_unix: started,
        finished_unix: unix_now(),
        outputs: vec![written.display().to_string()],
    };
    let manifest_path = write_manifest(&manifest, &stem)?;
    Ok(format!("{}\n{}\n", written.display(), manifest_path.display()))
}

fn output_stem(output: Option<&Path>, default: &str) -> PathBuf {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    match (output, dir) {
        (Some(p), Some(d)) if p.is_relative() && p.parent().is_none_or(|q| q.as_os_str().is_empty()) => d.join(p),
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) => d.join(default),
        (None, None) => PathBuf::from(default),
    }
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_outputs(result: &ScanResult, stem: &Path, format: Format) -> Result<PathBuf, CliError> {
    let (path, is_json) = match format {
        Format::Json => (with_suffix(stem, ".json"), true),
        Format::Csv | Format::Text => (with_suffix(stem, ".csv"), false),
    };
    let out = create(&path)?;
    if is_json {
        write_json(result, out)?;
    } else {
        write_csv(result, out)?;
    }
    Ok(path)
}

fn write_manifest(manifest: &RunManifest, stem: &Path) -> Result<PathBuf, CliError> {
    let path = with_suffix(stem, ".manifest.json");
    let mut out = create(&path)?;
    serde_json::to_writer_pretty(&mut out, manifest).map_err(|e| CliError::Io(e.to_string()))?;
    std::io::Write::write_all(&mut out, b"\n").map_err(|e| CliError::Io(e.to_string()))?;
    Ok(path)
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Computation(e.to_string()))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Re-reads the `state` field of a `sim state` dump.
pub fn parse_state_dump(text: &str) -> Result<PureState, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
    serde_json::from_value(value["state"].clone()).map_err(|e| CliError::Usage(e.to_string()))
}
