//! `lpp`: command-line front end for the last-passage percolation experiments.
//!
//! Exit codes: 0 on success, 1 for numeric or domain failures (reported as one
//! JSON object on stderr), 2 for usage errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use commands::{Command, CommandError, Context};
use output::{emit, EmitError, Format, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "lpp", version, about = "Longest-path constants of random DAGs", arg_required_else_help = true)]
struct Cli {
    /// Master seed; replica i uses stream (seed, i).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo replicas; each command has its own default.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Output file; a manifest is written next to it. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Flat key=value file whose keys act as long flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error(transparent)]
    Emit(#[from] EmitError),
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Command(e) => e.kind(),
            Failure::Emit(EmitError::Empty) => "empty_output",
            Failure::Emit(EmitError::Io { .. }) => "io",
        }
    }
}

fn execute(cli: &Cli, argv: &[String]) -> Result<(), Failure> {
    let started = Instant::now();
    let ctx = Context { seed: cli.seed, replicas: cli.replicas };
    let table = commands::run(&cli.command, &ctx)?;
    let checksum = emit(&table, cli.format, cli.out.as_deref())?;
    if let Some(path) = &cli.out {
        let manifest = RunManifest {
            command_line: argv.to_vec(),
            seed: cli.seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: started.elapsed().as_secs_f64(),
            checksum,
            format: cli.format,
        };
        manifest.write(path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": { "kind": f.kind(), "message": f.to_string() } }));
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_follow_subcommands() {
        let cli = Cli::try_parse_from(["lpp", "euler", "rate", "--p", "0.5", "--seed", "4", "--format", "json"]).unwrap();
        assert_eq!(cli.seed, 4);
        assert_eq!(cli.format, Format::Json);
    }

    #[test]
    fn negative_charges_parse() {
        assert!(Cli::try_parse_from(["lpp", "charged", "witness", "--x", "-11/7"]).is_ok());
        assert!(Cli::try_parse_from(["lpp", "charged", "estimate", "--x", "-inf"]).is_ok());
    }
}
