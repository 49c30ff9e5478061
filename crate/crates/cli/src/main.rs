use std::process::ExitCode;

use clap::Parser;
use funroot::args::Cli;
use funroot::config::OUT_ENV;
use funroot::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::usage(e.render().to_string().trim_end());
            eprintln!("{}", err.to_json(""));
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match funroot::run(&cli, std::env::var_os(OUT_ENV).map(Into::into)) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json(cli.command.name()));
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
