//! Batch driver for the `vofrac` library.
//!
//! `vofrac <op|verify|solve|selftest> --config run.json` evaluates operators
//! on a grid, runs identity convergence ladders, solves variational problems
//! and runs the bundled invariant suite. Tables go to standard output as CSV,
//! solver reports as JSON, diagnostics to standard error, and the process
//! status follows [`CliError::exit_code`].

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod instances;
pub mod output;
pub mod selftest;

use clap::Parser;
use config::{Command, RunConfig};
pub use error::{CliError, CliResult};
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "vofrac", version, about = "Variable-order fractional calculus driver")]
pub struct Args {
    /// Command to run. May also be given with --command or in the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// JSON run configuration; `-` reads standard input.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long = "command", value_enum, id = "command_flag")]
    pub command_flag: Option<Command>,

    /// Overrides the identity tolerance (verify) or the optimizer tolerance (solve).
    #[arg(long)]
    pub tolerance: Option<f64>,

    /// Worker threads for grid and outer-integral evaluation.
    #[arg(long)]
    pub threads: Option<usize>,

    /// Seed of the random instance generators used by selftest.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn load_config(path: &Option<PathBuf>) -> CliResult<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?
    };
    RunConfig::from_json(&text)
}

fn pick_command(args: &Args, cfg: &RunConfig) -> CliResult<Command> {
    match (args.command, args.command_flag) {
        (Some(a), Some(b)) if a != b => Err(CliError::config(format!(
            "positional command {a:?} conflicts with --command {b:?}"
        ))),
        (Some(c), _) | (None, Some(c)) => Ok(c),
        (None, None) => cfg
            .command
            .ok_or_else(|| CliError::config("no command given (op, verify, solve or selftest)")),
    }
}

fn dispatch(args: &Args, out: &mut dyn Write) -> CliResult<()> {
    let cfg = load_config(&args.config)?;
    if let Some(t) = args.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::config(format!("--tolerance must be positive, got {t}")));
        }
    }
    match pick_command(args, &cfg)? {
        Command::Op => commands::run_op(&cfg, out),
        Command::Verify => commands::run_verify(&cfg, args.tolerance, out),
        Command::Solve => commands::run_solve(&cfg, args.tolerance, out),
        Command::Selftest => {
            let checks = selftest::run_suite(args.seed.or(cfg.seed).unwrap_or(0));
            out.write_all(selftest::render(&checks).as_bytes())?;
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                failed => Err(CliError::SelftestFailed { failed }),
            }
        }
    }
}

/// Runs the driver on `argv` and returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = write!(err, "{e}");
            return e.exit_code();
        }
    };
    // Output is assembled in memory so the pool's closure stays `Send`.
    let mut buf = Vec::new();
    let result = match args.threads {
        None => dispatch(&args, &mut buf),
        Some(0) => Err(CliError::config("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&args, &mut buf)),
            Err(e) => Err(CliError::config(format!("cannot start {n} threads: {e}"))),
        },
    };
    // Failed commands still emit whatever table or report they produced.
    let written = out.write_all(&buf).and_then(|()| out.flush());
    let result = result.and_then(|()| written.map_err(CliError::from));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
