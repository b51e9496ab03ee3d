//! `rw`: command-line front end for the belief engine.
//!
//! Exit status is 0 on success, 1 for bad input and 2 when a solver or a
//! capacity limit gives out.

mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<String> {
    let (rendered, out) = match &cli.command {
        Command::Check(a) => (commands::check(a)?, &a.out),
        Command::Canon(a) => (commands::canon(a)?, &a.out),
        Command::Constraints(a) => (commands::constraints(a)?, &a.common.out),
        Command::Maxent(a) => (commands::maxent(a)?, &a.common.out),
        Command::Believe(a) => (commands::believe_cmd(a)?, &a.common.out),
        Command::Oracle(a) => (commands::oracle(a)?, &a.common.out),
        Command::Probe(a) => (commands::probe(a)?, &a.common.out),
        Command::Defaults(a) => (commands::defaults(a)?, &a.out),
    };
    rendered.emit(out.format())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let solver = err.chain().any(|e| e.downcast_ref::<randworlds::Error>().is_some_and(|e| e.is_solver_failure()));
    if solver {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
