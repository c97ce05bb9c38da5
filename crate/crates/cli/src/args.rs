use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "beatdelay",
    version,
    about = "Delay estimation from frequency-resolved two-photon beats"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outcome densities P(Δω, A) and P(Δω, B) over a frequency grid.
    BeatCurve(BeatCurveArgs),
    /// Fisher information relative to the quantum limit versus delay.
    FisherScan(FisherScanArgs),
    /// Monte Carlo MLE convergence study with the 1 + a/N fit.
    Simulate(SimulateArgs),
    /// CRB-limited timing precision of a measurement campaign.
    Budget(BudgetArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Master seed.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Worker threads for parallel stages (defaults to all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// TOML file whose keys mirror the long flag names (`_` or `-`); flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Photon temporal width in femtoseconds. When given, time-valued flags
    /// are read in femtoseconds instead of units of sigma_t.
    #[arg(long)]
    pub sigma_t_fs: Option<f64>,
}

impl Common {
    /// Converts a time-valued flag into units of sigma_t.
    pub fn to_sigma_units(&self, value: f64) -> f64 {
        match self.sigma_t_fs {
            Some(fs) => value / fs,
            None => value,
        }
    }
}

#[derive(Debug, Args)]
pub struct BeatCurveArgs {
    #[arg(long, default_value_t = 8.0)]
    pub delta_t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tau_r: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 1201)]
    pub points: usize,
    /// Half-width of the Δω grid in units of sigma_omega.
    #[arg(long, default_value_t = 6.0)]
    pub range: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FisherScanArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.95, 0.98, 1.0])]
    pub nu: Vec<f64>,
    /// Direct-detection resolutions T.
    #[arg(long, value_delimiter = ',', default_values_t = vec![5.0, 10.0])]
    pub resolutions: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 6.0)]
    pub dt_max: f64,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.8)]
    pub delta_t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1000, 2000, 5000, 10000])]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 4000)]
    pub trials: usize,
    /// Upper end of the delay search in units of sigma_t.
    #[arg(long, default_value_t = 10.0)]
    pub search_max: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Detected pair rate in Hz.
    #[arg(long, default_value_t = 1e6)]
    pub rate_hz: f64,
    /// Measurement time in seconds.
    #[arg(long, default_value_t = 4.0 * 3600.0)]
    pub duration_s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::BeatCurve(a) => &a.common,
            Command::FisherScan(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Budget(a) => &a.common,
        }
    }
}

const SUBCOMMANDS: [&str; 4] = ["beat-curve", "fisher-scan", "simulate", "budget"];

/// Parses the command line, splicing in flags from `--config` when present.
/// File-derived flags are inserted right after the subcommand name so that
/// anything given explicitly on the command line overrides them.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, CliError> {
    let first = Cli::try_parse_from(&argv)?;
    let Some(path) = first.command.common().config.clone() else {
        return Ok(first);
    };
    let injected = config_flags(&path)?;
    let position = argv
        .iter()
        .position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)))
        .expect("subcommand was parsed");
    let mut merged = argv[..=position].to_vec();
    merged.extend(injected.into_iter().map(OsString::from));
    merged.extend_from_slice(&argv[position + 1..]);
    Ok(Cli::try_parse_from(merged)?)
}

fn config_flags(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut flags = Vec::new();
    for (key, value) in table {
        // TOML favours snake_case; flags are kebab-case.
        let key = key.replace('_', "-");
        if key == "config" {
            return Err(CliError::Config("a config file cannot name another config file".into()));
        }
        let rendered = match value {
            toml::Value::Array(items) => items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(","),
            other => scalar(&other)?,
        };
        flags.push(format!("--{key}={rendered}"));
    }
    Ok(flags)
}

fn scalar(value: &toml::Value) -> Result<String, CliError> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        other => Err(CliError::Config(format!("unsupported config value {other}"))),
    }
}
