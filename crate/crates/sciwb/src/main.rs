use std::process::ExitCode;

use clap::Parser;

use sciwb::cli::{self, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Serve { bind } => cli::serve(&cli, *bind).map(|()| None),
        _ => cli::run(&cli).map(Some),
    };
    match result {
        Ok(Some(out)) => {
            print!("{}", out.render(cli.json));
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            if cli.json {
                eprintln!("{}", serde_json::to_string_pretty(&e).unwrap_or_default());
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::FAILURE
        }
    }
}
