mod args;
mod commands;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use fractalconv::{Budget, Error};

use args::Cli;
use commands::Context;
use output::Outputs;

const EXIT_VALIDATION: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;
const EXIT_USAGE: u8 = 64;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. } | Error::InvalidParameter { .. } => EXIT_VALIDATION,
        Error::Budget { .. } | Error::Overflow(_) | Error::Io(_) => EXIT_RESOURCE,
        Error::Degenerate(_) => EXIT_DEGENERATE,
    }
}

fn command_name(cli: &Cli) -> String {
    serde_json::to_value(&cli.command)
        .ok()
        .and_then(|v| v.get("command").and_then(|c| c.as_str()).map(str::to_string))
        .unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_RESOURCE);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(cli: &Cli) -> fractalconv::Result<()> {
    let start = Instant::now();
    let ctx = Context {
        seed: cli.global.seed,
        tol: cli.global.tol,
        format: cli.global.format,
        budget: Budget::from_env(),
    };
    let mut out = Outputs::create(&cli.global.out)?;
    commands::run(&cli.command, &ctx, &mut out)?;
    let parameters = serde_json::to_value(cli)?;
    out.finish(&command_name(cli), parameters, ctx.seed, rayon::current_num_threads(), start.elapsed())?;
    Ok(())
}
