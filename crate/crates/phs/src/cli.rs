//! `phs simulate | verify | dump-operators`.
//!
//! Exit codes: 0 success, 1 failed verification, 2 invalid configuration,
//! 3 solver failure or residual above tolerance, 4 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use phs_core::audit::DEFAULT_SEED;

use crate::config::{self, ConfigError};
use crate::scenario;
use crate::suites::{self, Suite, VerifyOptions};
use crate::table::{ledger_table, trajectory_table};

/// Environment variable scaling every verification tolerance.
pub const TOL_ENV: &str = "PHS_TOL_MULTIPLIER";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "phs",
    version,
    about = "Port-Hamiltonian beam, rod and seepage simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write trajectory and ledger CSV files.
    Simulate { config: PathBuf },
    /// Run a verification suite and print its residual tables.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Also write each table to `<dir>/<table>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Write labeled text dumps of the operators of a scenario.
    DumpOperators { config: PathBuf, out_dir: PathBuf },
}

fn report_config(errors: &[ConfigError]) -> i32 {
    for e in errors {
        eprintln!("config error: {e}");
    }
    EXIT_CONFIG
}

fn tol_multiplier() -> Result<f64, String> {
    match std::env::var(TOL_ENV) {
        Err(_) => Ok(1.0),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            _ => Err(format!("{TOL_ENV} must be a positive number, got `{s}`")),
        },
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Simulate { config } => simulate(&config),
        Command::Verify { suite, out, seed } => verify(suite, out, seed),
        Command::DumpOperators { config, out_dir } => dump(&config, &out_dir),
    }
}

fn simulate(path: &std::path::Path) -> i32 {
    let cfg = match config::load(path) {
        Ok(c) => c,
        Err(errs) => return report_config(&errs),
    };
    let outcome = match scenario::run(&cfg) {
        Ok(o) => o,
        Err(e) => return report_config(&[e]),
    };
    let traj = trajectory_table(&outcome.desc, &outcome.trajectory);
    let ledger = ledger_table(&outcome.trajectory.ledger);
    for (table, file) in [
        (&traj, &cfg.outputs.trajectory),
        (&ledger, &cfg.outputs.ledger),
    ] {
        if let Err(e) = table.save(file) {
            eprintln!("cannot write {}: {e}", file.display());
            return EXIT_IO;
        }
    }
    let residual = outcome.max_residual();
    println!(
        "{}: {} steps of dt = {}, max relative balance residual {residual:e}",
        outcome.desc.name(),
        outcome.trajectory.ledger.len(),
        outcome.dt
    );
    if let Some(e) = &outcome.failure {
        eprintln!("solver failure: {e}");
        return EXIT_SOLVER;
    }
    if residual.is_nan() || residual > cfg.tolerance {
        eprintln!(
            "balance residual {residual:e} exceeds tolerance {:e}",
            cfg.tolerance
        );
        return EXIT_SOLVER;
    }
    EXIT_OK
}

fn verify(suite: Suite, out: Option<PathBuf>, seed: u64) -> i32 {
    let tol_mult = match tol_multiplier() {
        Ok(m) => m,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_CONFIG;
        }
    };
    println!("# seed = {seed}, tolerance multiplier = {tol_mult}");
    let reports = suites::run(suite, VerifyOptions { tol_mult, seed });
    if let Some(dir) = &out {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("cannot create {}: {e}", dir.display());
            return EXIT_IO;
        }
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let mut failed = false;
    for r in &reports {
        for t in &r.tables {
            let _ = writeln!(lock, "# table {} (seed {seed})", t.name);
            let _ = write!(lock, "{}", t.to_csv_string());
            if let Some(dir) = &out {
                let file = dir.join(format!("{}.csv", t.name));
                if let Err(e) = t.save(&file) {
                    eprintln!("cannot write {}: {e}", file.display());
                    return EXIT_IO;
                }
            }
        }
        for f in &r.failures {
            eprintln!("FAIL [{}] {f}", r.suite);
        }
        failed |= !r.passed();
        let _ = writeln!(
            lock,
            "# suite {}: {}",
            r.suite,
            if r.passed() { "PASS" } else { "FAIL" }
        );
    }
    if failed {
        EXIT_VERIFY
    } else {
        EXIT_OK
    }
}

fn dump(config_path: &std::path::Path, out_dir: &std::path::Path) -> i32 {
    let cfg = match config::load(config_path) {
        Ok(c) => c,
        Err(errs) => return report_config(&errs),
    };
    let desc = match scenario::build(&cfg) {
        Ok(d) => d,
        Err(e) => return report_config(&[e]),
    };
    match scenario::dump_operators(&desc, out_dir) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("cannot write dumps to {}: {e}", out_dir.display());
            EXIT_IO
        }
    }
}
