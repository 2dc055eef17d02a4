mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hdfd::table::{Format, Table};

use args::{Cli, Command, OutputArgs};
use commands::Failure;

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn emit(table: &Table, out: &OutputArgs) -> Result<(), Failure> {
    let mut buf = Vec::new();
    table.write(Format::from(out.format), &mut buf)?;
    match &out.output {
        Some(path) => std::fs::write(path, &buf).map_err(|e| {
            Failure::Usage(args::UsageError {
                flag: "--output",
                message: format!("cannot write {}: {e}", path.display()),
            })
        }),
        None => std::io::stdout()
            .lock()
            .write_all(&buf)
            .map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Point(a) => emit(&commands::point(a)?, &a.output)?,
        Command::Sweep(a) => emit(&commands::sweep(a)?, &a.output)?,
        Command::Mc(a) => emit(&commands::mc(a)?, &a.output)?,
        Command::Validate(a) => {
            let (table, failed) = commands::validate(a)?;
            emit(&table, &a.output)?;
            if !failed.is_empty() {
                eprintln!("validation failed: {}", failed.join(", "));
                return Ok(ExitCode::from(EXIT_VALIDATION));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
        {
            eprintln!("error: invalid value for '--workers': cannot start {n} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            eprintln!("\nFor more information, try '--help'.");
            ExitCode::from(EXIT_USAGE)
        }
        // Inputs are checked up front, so anything left is reported as bad input too.
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
