use std::path::{Path, PathBuf};

use funroot_core::funcspace::DEFAULT_GRID_SIZE;
use funroot_core::unitroot::TolProfile;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable that takes precedence over `--out`.
pub const OUT_ENV: &str = "FUNROOT_OUT";

pub const DEFAULT_OUT_DIR: &str = "funroot-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(CliError::usage(format!("unknown format '{other}' (expected json, csv or svg)"))),
        }
    }
}

/// Parses `json,csv,svg` into a sorted set.
pub fn parse_formats(s: &str) -> CliResult<Vec<Format>> {
    let mut out = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<CliResult<Vec<Format>>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(CliError::usage("--format needs at least one of json, csv, svg"));
    }
    Ok(out)
}

/// Contents of a `--config` file. Every field is optional; command-line
/// flags win over the file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub grid_size: Option<usize>,
    pub tolerance: Option<TolProfile>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }
}

/// Effective settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub grid_size: usize,
    pub tolerance: TolProfile,
    #[serde(skip)]
    pub out: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            grid_size: DEFAULT_GRID_SIZE,
            tolerance: TolProfile::Exact,
            out: PathBuf::from(DEFAULT_OUT_DIR),
            formats: vec![Format::Json],
        }
    }
}

/// Command-line values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid_size: Option<usize>,
    pub tolerance: Option<TolProfile>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    /// Value of [`OUT_ENV`], if set and non-empty.
    pub out_env: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(file: Option<ConfigFile>, cli: Overrides) -> CliResult<Self> {
        let file = file.unwrap_or_default();
        let base = RunConfig::default();
        let cfg = RunConfig {
            seed: cli.seed.or(file.seed),
            grid_size: cli.grid_size.or(file.grid_size).unwrap_or(base.grid_size),
            tolerance: cli.tolerance.or(file.tolerance).unwrap_or(base.tolerance),
            out: cli.out_env.or(cli.out).or(file.out).unwrap_or(base.out),
            formats: {
                let mut f = cli.formats.or(file.formats).unwrap_or(base.formats);
                f.sort();
                f.dedup();
                f
            },
        };
        if cfg.grid_size < 3 {
            return Err(CliError::usage(format!("grid_size must be at least 3, got {}", cfg.grid_size)));
        }
        if cfg.formats.is_empty() {
            return Err(CliError::usage("at least one output format is required"));
        }
        Ok(cfg)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn tol_unit(&self) -> f64 {
        self.tolerance.tol_unit()
    }
}
