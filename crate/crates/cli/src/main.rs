mod args;
mod commands;
mod config;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Format};
use commands::Output;

const EXIT_ASSERTION: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn parse(argv: Vec<String>) -> Result<Cli, ExitCode> {
    Cli::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                ExitCode::SUCCESS
            }
            _ => ExitCode::from(EXIT_INPUT),
        }
    })
}

fn write_output(out: &Output, format: Format, path: Option<&Path>) -> anyhow::Result<()> {
    let text = match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&out.json)?),
        Format::Csv => out.csv.clone(),
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let mut cli = match parse(argv.clone()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(path) = cli.global.config.clone() {
        let expanded = match config::expand(&path, &argv) {
            Ok(a) => a,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_INPUT);
            }
        };
        cli = match parse(expanded) {
            Ok(c) => c,
            Err(code) => return code,
        };
    }
    let Some(command) = cli.command else {
        eprintln!("error: no command given (see --help)");
        return ExitCode::from(EXIT_INPUT);
    };

    let limits = cli.global.limits();
    let out = match commands::run(&command, &limits) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    if let Err(e) = write_output(&out, cli.global.format, cli.global.output.as_deref()) {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_INPUT);
    }
    if cli.global.assert_violation {
        match out.violated {
            Some(true) => {}
            Some(false) => {
                eprintln!("assertion failed: no violation of the classical bound");
                return ExitCode::from(EXIT_ASSERTION);
            }
            None => {
                eprintln!("error: this command has no violation verdict to assert");
                return ExitCode::from(EXIT_INPUT);
            }
        }
    }
    ExitCode::SUCCESS
}
