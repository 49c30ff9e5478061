//! Command-line front end: CSV ingestion, model files, one subcommand per
//! analysis, JSON reports with a fixed header, optional CSV tables and SVG
//! charts.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod report;
pub mod svg;

use std::path::PathBuf;

use serde::Serialize;

use crate::args::{Cli, Command};
use crate::commands::Ctx;
use crate::config::{ConfigFile, Format, Overrides, RunConfig};
use crate::error::CliResult;
use crate::report::Report;

pub use crate::error::{CliError, ErrorKind};
pub use crate::ingest::{ingest_csv, read_series_csv, write_series_csv, IngestOptions};

/// Resolves the configuration for a parsed command line. `out_env` is the
/// value of `FUNROOT_OUT`.
pub fn resolve_config(cli: &Cli, out_env: Option<PathBuf>) -> CliResult<RunConfig> {
    let file = cli.global.config.as_deref().map(ConfigFile::load).transpose()?;
    RunConfig::resolve(
        file,
        Overrides {
            seed: cli.global.seed,
            grid_size: cli.global.grid_size,
            tolerance: cli.global.tolerance,
            out: cli.global.out.clone(),
            formats: cli.global.format.clone().map(|f| f.0),
            out_env: out_env.filter(|p| !p.as_os_str().is_empty()),
        },
    )
}

fn finish<B: Serialize>(ctx: &mut Ctx, command: &str, params: &impl Serialize, body: B) -> CliResult<String> {
    #[derive(Serialize)]
    struct Params<'a, P: Serialize> {
        args: &'a P,
        config: &'a RunConfig,
    }
    ctx.digest.params(&Params { args: params, config: &ctx.cfg })?;
    let json = Report::new(command, &ctx.digest, body).to_json()?;
    if ctx.cfg.wants(Format::Json) {
        let name = commands::report_name(command);
        ctx.out.write(&name.to_string_lossy(), json.as_bytes())?;
    }
    Ok(json)
}

/// Runs one command and returns its JSON report.
pub fn run(cli: &Cli, out_env: Option<PathBuf>) -> CliResult<String> {
    let cfg = resolve_config(cli, out_env)?;
    let mut ctx = Ctx::new(cfg);
    let name = cli.command.name();
    match &cli.command {
        Command::Model(a) => {
            let body = commands::cmd_model(&mut ctx, a)?;
            finish(&mut ctx, name, a, body)
        }
        Command::Simulate(a) => {
            let body = commands::cmd_simulate(&mut ctx, a)?;
            finish(&mut ctx, name, a, body)
        }
        Command::Spectrum(a) => {
            let body = commands::cmd_spectrum(&mut ctx, a)?;
            finish(&mut ctx, name, a, body)
        }
        Command::Fredholm(a) => {
            let body = commands::cmd_fredholm(&mut ctx, a)?;
            finish(&mut ctx, name, a, body)
        }
        Command::Decompose(a) => {
            let body = commands::cmd_decompose(&mut ctx, a)?;
            finish(&mut ctx, name, a, body)
        }
        Command::Fpca(a) => {
            let body = commands::cmd_fpca(&mut ctx, a)?;
            finish(&mut ctx, name, a, body)
        }
        Command::Adf(a) => {
            let body = commands::cmd_adf(&mut ctx, a)?;
            finish(&mut ctx, name, a, body)
        }
        Command::Johansen(a) => {
            let body = commands::cmd_johansen(&mut ctx, a)?;
            finish(&mut ctx, name, a, body)
        }
        Command::Detect(a) => {
            let body = commands::cmd_detect(&mut ctx, a)?;
            finish(&mut ctx, name, a, body)
        }
    }
}
