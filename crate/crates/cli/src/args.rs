use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use funroot_core::stats::{AdfSpec, DetSpec, ScoreCentering, SignificanceLevel};
use funroot_core::unitroot::TolProfile;

use crate::config::{parse_formats, Format};
use crate::ingest::{IngestOptions, Layout};

#[derive(Debug, Parser)]
#[command(name = "funroot", version, about = "Unit roots in functional time series")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration (seed, grid_size, tolerance, out, formats).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory; FUNROOT_OUT takes precedence.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of json, csv, svg.
    #[arg(long, global = true, value_name = "LIST", value_parser = parse_format_list)]
    pub format: Option<FormatList>,
    /// Nodes of the uniform grid used by `model`.
    #[arg(long, global = true, value_name = "N")]
    pub grid_size: Option<usize>,
    /// Unit-eigenvalue tolerance profile.
    #[arg(long, global = true, value_parser = parse_tol)]
    pub tolerance: Option<TolProfile>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatList(pub Vec<Format>);

fn parse_format_list(s: &str) -> Result<FormatList, String> {
    parse_formats(s).map(FormatList).map_err(|e| e.message)
}

/// A square matrix given on the command line.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct MatrixArg(pub Vec<Vec<f64>>);

fn parse_tol(s: &str) -> Result<TolProfile, String> {
    s.parse().map_err(|e: funroot_core::Error| e.to_string())
}

fn parse_level(s: &str) -> Result<SignificanceLevel, String> {
    s.parse().map_err(|e: funroot_core::Error| e.to_string())
}

fn parse_adf_spec(s: &str) -> Result<AdfSpec, String> {
    s.parse().map_err(|e: funroot_core::Error| e.to_string())
}

fn parse_det(s: &str) -> Result<DetSpec, String> {
    s.parse().map_err(|e: funroot_core::Error| e.to_string())
}

fn parse_centering(s: &str) -> Result<ScoreCentering, String> {
    match s {
        "raw" => Ok(ScoreCentering::Raw),
        "centered" | "centred" => Ok(ScoreCentering::Centered),
        other => Err(format!("unknown centring '{other}' (expected raw or centered)")),
    }
}

/// `re` or `re,im`.
fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| format!("'{p}' is not a number"));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(format!("expected re or re,im, got '{s}'")),
    }
}

/// Rows separated by `;`, entries by `,`.
fn parse_matrix(s: &str) -> Result<MatrixArg, String> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(|r| {
            r.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", v.trim())))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(format!("matrix must be square, got {n} rows of lengths {:?}", rows.iter().map(Vec::len).collect::<Vec<_>>()));
    }
    Ok(MatrixArg(rows))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a built-in model file.
    Model(ModelArgs),
    /// Simulate a path from a model file.
    Simulate(SimulateArgs),
    /// Eigenvalues and unit-root classification of a model or operator file.
    Spectrum(OperatorArgs),
    /// Fredholm determinant det(I − zρ).
    Fredholm(FredholmArgs),
    /// Split into random-walk and stationary parts.
    Decompose(OperatorArgs),
    /// Functional principal components of a series.
    Fpca(FpcaArgs),
    /// Augmented Dickey–Fuller test on one column.
    Adf(AdfArgs),
    /// Johansen trace test on several columns.
    Johansen(JohansenArgs),
    /// FPCA, then ADF per component, then Johansen on the trend components.
    Detect(DetectArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Model(_) => "model",
            Command::Simulate(_) => "simulate",
            Command::Spectrum(_) => "spectrum",
            Command::Fredholm(_) => "fredholm",
            Command::Decompose(_) => "decompose",
            Command::Fpca(_) => "fpca",
            Command::Adf(_) => "adf",
            Command::Johansen(_) => "johansen",
            Command::Detect(_) => "detect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// The two-dimensional coupling with Fibonacci powers.
    Fibonacci,
    /// `ρ(v)(t) = e^{−θt} v(1)`.
    Ou,
    /// Diagonal in a Fourier basis.
    Spectral,
    /// Arbitrary matrix on a Fourier range basis.
    Matrix,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct ModelArgs {
    #[arg(value_enum)]
    pub kind: ModelKind,
    /// Coupling of the fibonacci model; defaults to the unit-root value.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Eigenvalues of the spectral model.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eigenvalues: Vec<f64>,
    /// Second-lag eigenvalues; makes the spectral model order 2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ar2_eigenvalues: Vec<f64>,
    /// Matrix of the matrix model, e.g. "1,0.3;0,0.5".
    #[arg(long, value_parser = parse_matrix, allow_hyphen_values = true)]
    pub matrix: Option<MatrixArg>,
    /// Innovation standard deviations along the Fourier basis.
    #[arg(long, value_delimiter = ',')]
    pub noise_sd: Vec<f64>,
    /// File name of the written model inside the output directory.
    #[arg(long, default_value = "model.json")]
    pub name: String,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SimulateArgs {
    #[serde(skip)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub length: usize,
    /// Defaults to 200 for stationary models and 0 otherwise.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Independent stream of the same seed.
    #[arg(long, default_value_t = 0)]
    pub replication: u64,
    /// File name of the series inside the output directory.
    #[arg(long, default_value = "series.csv")]
    pub name: String,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct OperatorArgs {
    /// Model file or bare operator file.
    #[serde(skip)]
    pub model: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct FredholmArgs {
    #[serde(skip)]
    pub model: PathBuf,
    /// Evaluation point `re` or `re,im`; repeatable.
    #[arg(long = "z", value_parser = parse_complex, allow_hyphen_values = true)]
    pub z: Vec<[f64; 2]>,
}

#[derive(Debug, Args, Clone, serde::Serialize)]
pub struct SeriesArgs {
    #[serde(skip)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Layout::Dataset)]
    pub layout: Layout,
    #[arg(long, allow_hyphen_values = true)]
    pub age_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub age_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub year_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub year_max: Option<i64>,
    /// Natural log of each cell before analysis.
    #[arg(long)]
    pub log: bool,
}

impl SeriesArgs {
    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            age_min: self.age_min,
            age_max: self.age_max,
            year_min: self.year_min,
            year_max: self.year_max,
            log: self.log,
        }
    }
}

#[derive(Debug, Args, serde::Serialize)]
pub struct FpcaArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(short, long, default_value_t = 3)]
    pub k: usize,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct AdfArgs {
    #[serde(skip)]
    pub input: PathBuf,
    /// Column name or 1-based position.
    #[arg(long, default_value = "1")]
    pub column: String,
    #[arg(long, default_value_t = 0)]
    pub lags: usize,
    #[arg(long, value_parser = parse_adf_spec, default_value = "none")]
    pub spec: AdfSpec,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct JohansenArgs {
    #[serde(skip)]
    pub input: PathBuf,
    /// Column names or positions; all columns when omitted.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub lags: usize,
    #[arg(long, value_parser = parse_det, default_value = "none")]
    pub det: DetSpec,
    #[arg(long, value_parser = parse_level, default_value = "5%")]
    pub level: SignificanceLevel,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct DetectArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(short, long, default_value_t = 3)]
    pub k: usize,
    /// Level of the per-component ADF decisions.
    #[arg(long, value_parser = parse_level, default_value = "5%")]
    pub level: SignificanceLevel,
    #[arg(long, default_value_t = 0)]
    pub adf_lags: usize,
    #[arg(long, value_parser = parse_adf_spec, default_value = "none")]
    pub adf_spec: AdfSpec,
    /// Test raw projections `<X_n, φ_k>` or centred FPCA scores.
    #[arg(long, value_parser = parse_centering, default_value = "raw")]
    pub centering: ScoreCentering,
    #[arg(long, default_value_t = 1)]
    pub johansen_lags: usize,
    #[arg(long, value_parser = parse_det, default_value = "none")]
    pub johansen_det: DetSpec,
    #[arg(long, value_parser = parse_level, default_value = "1%")]
    pub johansen_level: SignificanceLevel,
}
