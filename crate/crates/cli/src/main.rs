//! `crackwave`: figure-data sweeps and the oracle suite for the steady
//! Mode III crack in couple-stress elasticity.

mod commands;
mod config;
mod table;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::config::RunConfig;
use crate::table::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure at {row}: {message}")]
    Numerical { row: String, message: String },
    #[error("regime violation at {row}: {message}")]
    Regime { row: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{failed} of {total} checks failed")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Regime { .. } => 4,
            CliError::Io(_) | CliError::Validation { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Subcommand {
    Dispersion,
    RegimeMap,
    Fields,
    TmaxSweep,
    ErrSweep,
    LimitStudy,
    Validate,
}

impl Subcommand {
    fn name(self) -> &'static str {
        match self {
            Subcommand::Dispersion => "dispersion",
            Subcommand::RegimeMap => "regime-map",
            Subcommand::Fields => "fields",
            Subcommand::TmaxSweep => "tmax-sweep",
            Subcommand::ErrSweep => "err-sweep",
            Subcommand::LimitStudy => "limit-study",
            Subcommand::Validate => "validate",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "crackwave", version, about = "Steady Mode III crack in couple-stress elasticity")]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,

    /// Run configuration (flat `section.key = value` file).
    #[arg(long)]
    config: PathBuf,

    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn write(table: &Table, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{name}.csv"));
    table.write(&path)?;
    Ok(path)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(&cli.config)?;
    let dir = cli.out.clone().unwrap_or_else(|| cfg.out.clone());
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let name = cli.subcommand.name();
    let table = match cli.subcommand {
        Subcommand::Dispersion => commands::dispersion(&cfg)?,
        Subcommand::RegimeMap => commands::regime_map(&cfg)?,
        Subcommand::Fields => commands::fields(&cfg)?,
        Subcommand::TmaxSweep => commands::tmax_sweep(&cfg)?,
        Subcommand::ErrSweep => commands::err_sweep(&cfg)?,
        Subcommand::LimitStudy => commands::limit_study(&cfg)?,
        Subcommand::Validate => {
            let v = validate::validate(&cfg)?;
            write(&v.data, &dir, name)?;
            let report = write(&v.report, &dir, "validate_report")?;
            println!("{:<72} {:>12} {:>12} {:>9}  result", "check", "target", "computed", "tol");
            for c in &v.checks {
                let result = if c.pass { "pass" } else { "FAIL" };
                println!("{:<72} {:>12.6e} {:>12.6e} {:>9.1e}  {result}", c.id, c.target, c.computed, c.tolerance);
            }
            for e in &v.errors {
                eprintln!("error: {e}");
            }
            let failed = v.checks.iter().filter(|c| !c.pass).count();
            println!("{} checks, {failed} failed; report in {}", v.checks.len(), report.display());
            if failed > 0 {
                return Err(CliError::Validation { failed, total: v.checks.len() });
            }
            return Ok(());
        }
    };
    let path = write(&table, &dir, name)?;
    println!("wrote {} rows to {}", table.len(), path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n.max(1));
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => Err(CliError::Io(format!("thread pool: {e}"))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crackwave: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
