//! The `lieham` command line: list, describe, simulate, check and sweep.

pub mod check;
pub mod config;
pub mod run;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use lieham_core::catalog::{self, SYSTEMS};
use lieham_core::Status;

pub const VERSION: &str = env!("LIEHAM_VERSION");

/// Exit code for a run that stopped early.
pub const EXIT_INCOMPLETE: i32 = 2;
/// Exit code for a verification residual over tolerance.
pub const EXIT_CHECK_FAILED: i32 = 3;

pub fn status_code(s: Status) -> i32 {
    if s.is_completed() {
        0
    } else {
        EXIT_INCOMPLETE
    }
}

#[derive(Parser, Debug)]
#[command(name = "lieham", version = VERSION, about = "Time-dependent Lie-Hamilton systems: simulate, verify, sweep")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the registered systems.
    List,
    /// Show parameters, coefficients and default invariants of a system.
    Describe { name: String },
    /// Integrate a configuration and write the trajectory CSV plus manifest.
    Simulate {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run verification checks and print a residual table.
    ///
    /// TARGET is `all` (default), `algebra <name>`, `realization <system>`,
    /// `invariants <config>`, `tables`, `curvature` or `coalgebra`.
    Check {
        target: Vec<String>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a parameter sweep in parallel.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        workers: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::List => {
            for s in SYSTEMS {
                println!("{:<14} {}", s.name, s.summary);
            }
            Ok(0)
        }
        Command::Describe { name } => describe(&name),
        Command::Simulate { config, output } => run::simulate(&config::load(&config)?, output.as_deref()),
        Command::Check { target, samples, seed } => check_command(&target, &check::Options { samples, seed }),
        Command::Sweep {
            config,
            workers,
            output,
        } => run::sweep(&config::load(&config)?, output.as_deref(), workers),
    }
}

fn describe(name: &str) -> Result<i32> {
    let info = catalog::info(name).map_err(|e| anyhow!("{e}"))?;
    let p = catalog::default_params(name)?;
    println!("{}: {}", info.name, info.summary);
    println!("parameters:");
    for param in info.params {
        let v = match *param {
            "n" => p.n.to_string(),
            "c" => format!("{:?}", p.c),
            "kappa" => p.kappa.to_string(),
            "lambda" => p.lambda.to_string(),
            "eta" => p.eta.to_string(),
            "b" => p.b.to_string(),
            other => other.to_string(),
        };
        println!("  {param} = {v}");
    }
    println!("coefficients:");
    for (k, v) in info.coefficients {
        println!("  {k}(t) = {v}");
    }
    let sys = catalog::build_system(name, &p, &Default::default()).map_err(|e| anyhow!("{e}"))?;
    println!("default invariants: H, {}", sys.default_invariants().join(", "));
    Ok(0)
}

fn check_command(target: &[String], o: &check::Options) -> Result<i32> {
    let mut report = check::Report::default();
    let arg = |i: usize| -> Result<&str> {
        target
            .get(i)
            .map(String::as_str)
            .ok_or_else(|| anyhow!("check {} needs an argument", target[0]))
    };
    match target.first().map(String::as_str) {
        None | Some("all") => check::all(&mut report, o)?,
        Some("algebra") => check::algebra(&mut report, arg(1)?)?,
        Some("realization") => check::realization(&mut report, arg(1)?, o)?,
        Some("invariants") => {
            let loaded = config::load(Path::new(arg(1)?))?;
            let r = check::invariants(&mut report, &loaded)?;
            report.print();
            return Ok(match r {
                Some(status) => status_code(status),
                None if report.passed() => 0,
                None => EXIT_CHECK_FAILED,
            });
        }
        Some("tables") => check::tables(&mut report, o)?,
        Some("curvature") => check::curvature(&mut report)?,
        Some("coalgebra") => check::coalgebra(&mut report, o)?,
        Some(other) => return Err(anyhow!("unknown check target `{other}`")),
    }
    report.print();
    Ok(if report.passed() { 0 } else { EXIT_CHECK_FAILED })
}
