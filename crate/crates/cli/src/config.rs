//! Command-line and JSON configuration.
//!
//! Every subcommand option is an `Option` so that a value given on the
//! command line wins over the config file, which wins over the built-in
//! default applied at execution time.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Fills unset fields from a lower-precedence source.
pub trait Merge {
    fn merge_from(&mut self, lower: Self);
}

macro_rules! options {
    (
        $(#[$meta:meta])*
        pub struct $name:ident {
            $( $(#[$fmeta:meta])* pub $field:ident : Option<$ty:ty>, )*
        }
    ) => {
        $(#[$meta])*
        #[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
        #[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
        pub struct $name {
            $( $(#[$fmeta])* pub $field: Option<$ty>, )*
        }

        impl Merge for $name {
            fn merge_from(&mut self, lower: Self) {
                $( if self.$field.is_none() { self.$field = lower.$field; } )*
            }
        }
    };
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum NormChoice {
    Linf,
    L2,
}

options! {
    pub struct PackCountArgs {
        /// Root quadruple, e.g. -1,2,2,3.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        pub root: Option<Vec<i64>>,
        /// Largest curvature counted.
        #[arg(long)]
        pub tmax: Option<f64>,
        /// First grid point (default 10).
        #[arg(long)]
        pub tmin: Option<f64>,
        /// Grid points per decade (default 20).
        #[arg(long)]
        pub per_decade: Option<usize>,
        /// Require (or forbid) a strip packing with two zero curvatures.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub periodic: Option<bool>,
        /// Count the bounding circle as well.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub include_bounding: Option<bool>,
        /// Restrict to the ideal triangle opposite a letter, S1..S4.
        #[arg(long)]
        pub ideal_triangle: Option<String>,
        #[arg(long, value_enum)]
        pub format: Option<Format>,
        #[arg(long)]
        pub out: Option<PathBuf>,
        /// Frontier size cap (exit 3 when exceeded).
        #[arg(long)]
        pub cap: Option<usize>,
    }
}

options! {
    pub struct FitDeltaArgs {
        /// A T,N table.
        #[arg(long)]
        pub input: Option<PathBuf>,
        #[arg(long)]
        pub out: Option<PathBuf>,
        /// Fail with exit 2 unless |δ - expect| <= tol.
        #[arg(long)]
        pub expect_delta: Option<f64>,
        #[arg(long)]
        pub tol: Option<f64>,
        /// Fail with exit 2 when N/T^δ varies by more than this over the top decade.
        #[arg(long)]
        pub max_band: Option<f64>,
    }
}

options! {
    pub struct VectorCountArgs {
        /// Start vector on the Descartes cone.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        pub vector: Option<Vec<i64>>,
        #[arg(long)]
        pub tmax: Option<f64>,
        #[arg(long)]
        pub tmin: Option<f64>,
        #[arg(long)]
        pub per_decade: Option<usize>,
        #[arg(long, value_enum)]
        pub norm: Option<NormChoice>,
        /// Expansion slack factor (default 2).
        #[arg(long)]
        pub slack: Option<f64>,
        #[arg(long)]
        pub cap: Option<usize>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

options! {
    pub struct BallArgs {
        /// Lorentz-norm bound.
        #[arg(long)]
        pub tmax: Option<f64>,
        /// Axis of the conjugating boost.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        pub boost_dir: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        pub boost_t: Option<f64>,
        /// Rotate so the measure's mean direction sits 45 degrees off the pole.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub align: Option<bool>,
        /// Measure exponent used for alignment.
        #[arg(long)]
        pub s: Option<f64>,
        #[arg(long)]
        pub safety: Option<f64>,
        #[arg(long)]
        pub cap: Option<usize>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

options! {
    pub struct PsMomentsArgs {
        #[arg(long)]
        pub tmax: Option<f64>,
        /// Highest harmonic degree.
        #[arg(long)]
        pub amax: Option<i32>,
        /// Exponent of the weights e^{-s t}.
        #[arg(long)]
        pub s: Option<f64>,
        /// Number of halvings of T in the convergence series.
        #[arg(long)]
        pub halvings: Option<u32>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        pub boost_dir: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        pub boost_t: Option<f64>,
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub align: Option<bool>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

options! {
    pub struct BisectorArgs {
        /// a,b,a',b',c
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        pub index: Option<Vec<i32>>,
        #[arg(long)]
        pub tmax: Option<f64>,
        /// Number of doublings of T leading up to tmax.
        #[arg(long)]
        pub doublings: Option<u32>,
        #[arg(long)]
        pub delta: Option<f64>,
        #[arg(long)]
        pub s: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        pub boost_dir: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        pub boost_t: Option<f64>,
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub align: Option<bool>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

options! {
    pub struct CpEstimateArgs {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        pub root: Option<Vec<i64>>,
        /// Lorentz-norm bound of the ball behind the measure.
        #[arg(long)]
        pub tmax: Option<f64>,
        /// Curvature bound for the direct count N/T^δ used for comparison.
        #[arg(long)]
        pub count_tmax: Option<f64>,
        #[arg(long, value_enum)]
        pub norm: Option<NormChoice>,
        #[arg(long)]
        pub delta: Option<f64>,
        #[arg(long)]
        pub s: Option<f64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

options! {
    pub struct LineVerifyArgs {
        #[arg(long)]
        pub s: Option<f64>,
        #[arg(long)]
        pub lmax: Option<i32>,
        /// Largest tolerated relative residual.
        #[arg(long)]
        pub tol: Option<f64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

options! {
    pub struct KakArgs {
        /// 4x4 Lorentz matrix as a row-major JSON array, inline or a file path.
        #[arg(long, allow_hyphen_values = true)]
        pub matrix: Option<String>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

options! {
    pub struct RenderSvgArgs {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        pub root: Option<Vec<i64>>,
        #[arg(long)]
        pub tmax: Option<i64>,
        /// Image side in pixels.
        #[arg(long)]
        pub size: Option<f64>,
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub labels: Option<bool>,
        /// Skip circles with a smaller pixel radius.
        #[arg(long)]
        pub min_px: Option<f64>,
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Count circles of a packing up to curvature T.
    PackCount(PackCountArgs),
    /// Count circles in one ideal triangle (default: opposite S4).
    IdealCount(PackCountArgs),
    /// Fit the growth exponent to a T,N table.
    FitDelta(FitDeltaArgs),
    /// Count orbit vectors below a norm bound.
    VectorCount(VectorCountArgs),
    /// Enumerate a group ball with its Cartan coordinates.
    Ball(BallArgs),
    /// Harmonic moments of the empirical limit measure.
    PsMoments(PsMomentsArgs),
    /// Bisector sums with main-term comparison.
    Bisector(BisectorArgs),
    /// Estimate the packing constant from the limit measure.
    #[command(name = "c-p-estimate")]
    CPEstimate(CpEstimateArgs),
    /// Check the line-model identities.
    LineVerify(LineVerifyArgs),
    /// Cartan decomposition of a Lorentz matrix.
    Kak(KakArgs),
    /// Draw a packing as SVG.
    RenderSvg(RenderSvgArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::PackCount(_) => "pack-count",
            Command::IdealCount(_) => "ideal-count",
            Command::FitDelta(_) => "fit-delta",
            Command::VectorCount(_) => "vector-count",
            Command::Ball(_) => "ball",
            Command::PsMoments(_) => "ps-moments",
            Command::Bisector(_) => "bisector",
            Command::CPEstimate(_) => "c-p-estimate",
            Command::LineVerify(_) => "line-verify",
            Command::Kak(_) => "kak",
            Command::RenderSvg(_) => "render-svg",
        }
    }
}

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(name = "bisector", version, about = "Apollonian orbit counting and bisector asymptotics")]
pub struct Cli {
    /// JSON file with option values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel reductions.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Config file contents after the shared keys are split off.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub workers: Option<usize>,
    pub command: Option<String>,
    pub options: Map<String, Value>,
}

pub fn read_config_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    parse_config(&text)
}

/// Splits off `schema` (must be 1 when present), `workers` and `command`.
pub fn parse_config(text: &str) -> Result<FileConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))?;
    let Value::Object(mut map) = value else {
        return Err(CliError::Config("config file must hold a JSON object".into()));
    };
    if let Some(v) = map.remove("schema") {
        if v.as_u64() != Some(1) {
            return Err(CliError::Config(format!("unsupported config schema {v}")));
        }
    }
    let workers = match map.remove("workers") {
        None => None,
        Some(v) => Some(
            v.as_u64()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Config(format!("workers must be a positive integer, got {v}")))? as usize,
        ),
    };
    let command = match map.remove("command") {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(v) => return Err(CliError::Config(format!("command must be a string, got {v}"))),
    };
    Ok(FileConfig { workers, command, options: map })
}

fn from_file<T: for<'de> Deserialize<'de>>(options: &Map<String, Value>) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(options.clone())).map_err(|e| CliError::Config(format!("config file: {e}")))
}

/// Applies config-file values below the command-line ones.
pub fn merge_command(cmd: &mut Command, file: &FileConfig) -> Result<(), CliError> {
    if let Some(name) = &file.command {
        if name != cmd.name() {
            return Err(CliError::Config(format!("config file is for `{name}`, not `{}`", cmd.name())));
        }
    }
    let o = &file.options;
    match cmd {
        Command::PackCount(a) | Command::IdealCount(a) => a.merge_from(from_file(o)?),
        Command::FitDelta(a) => a.merge_from(from_file(o)?),
        Command::VectorCount(a) => a.merge_from(from_file(o)?),
        Command::Ball(a) => a.merge_from(from_file(o)?),
        Command::PsMoments(a) => a.merge_from(from_file(o)?),
        Command::Bisector(a) => a.merge_from(from_file(o)?),
        Command::CPEstimate(a) => a.merge_from(from_file(o)?),
        Command::LineVerify(a) => a.merge_from(from_file(o)?),
        Command::Kak(a) => a.merge_from(from_file(o)?),
        Command::RenderSvg(a) => a.merge_from(from_file(o)?),
    }
    Ok(())
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
        let mut command = cli.command;
        let mut workers = cli.workers;
        if let Some(path) = &cli.config {
            let file = read_config_file(path)?;
            merge_command(&mut command, &file)?;
            workers = workers.or(file.workers);
        }
        if workers == Some(0) {
            return Err(CliError::Config("workers must be positive".into()));
        }
        Ok(RunConfig { command, workers })
    }
}
