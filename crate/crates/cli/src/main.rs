//! `zeropoint`: spectral Casimir experiments driven by TOML configs.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use zeropoint::{Error, ErrorClass};

use commands::Outcome;
use report::Format;

#[derive(Parser, Debug)]
#[command(name = "zeropoint", version, about = "Regularized vacuum energies from mode spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory. Overrides ZEROPOINT_OUT and the config's `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Check the two cutoff-decomposition identities on a grid.
    IdentityCheck,
    /// Regularized sum (or difference) over a cutoff grid, with extrapolation.
    Sweep,
    /// Fit heat-trace coefficients.
    HeatFit,
    /// Fit the divergent structure of a sweep.
    DivFit,
    /// Certify that two configurations have a finite energy difference.
    Certify,
    /// Build the two-mass reference for a potential.
    Refmodel,
    /// Recover the erfc-mixture weight of a cutoff.
    CutoffInvert,
    /// Piston energy difference against the zeta value.
    Piston,
}

/// Which output directory wins: flag, then environment, then config.
fn output_dir(flag: Option<&Path>, config: Option<&Path>, base: &Path) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os("ZEROPOINT_OUT").filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| config.map(|p| config::resolve(base, p)))
}

fn run_with<T, F>(path: &Path, base: &Path, output: fn(&T) -> Option<&PathBuf>, f: F) -> zeropoint::Result<(Outcome, Option<PathBuf>)>
where
    T: for<'de> Deserialize<'de>,
    F: FnOnce(&T, &Path) -> zeropoint::Result<Outcome>,
{
    let cfg: T = config::load(path)?;
    let out = output(&cfg).map(|p| config::resolve(base, p));
    Ok((f(&cfg, base)?, out))
}

fn dispatch(cmd: Command, path: &Path) -> zeropoint::Result<(Outcome, Option<PathBuf>)> {
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let base = base.as_path();
    use config::*;
    match cmd {
        Command::IdentityCheck => {
            run_with(path, base, |c: &IdentityConfig| c.output.as_ref(), |c, _| commands::identity_check(c))
        }
        Command::Sweep => run_with(path, base, |c: &SweepConfig| c.output.as_ref(), commands::run_sweep),
        Command::HeatFit => run_with(path, base, |c: &HeatFitConfig| c.output.as_ref(), commands::heat_fit),
        Command::DivFit => run_with(path, base, |c: &DivFitConfig| c.output.as_ref(), commands::div_fit),
        Command::Certify => run_with(path, base, |c: &CertifyConfig| c.output.as_ref(), |c, _| commands::certify(c)),
        Command::Refmodel => run_with(path, base, |c: &RefModelConfig| c.output.as_ref(), commands::refmodel),
        Command::CutoffInvert => {
            run_with(path, base, |c: &CutoffInvertConfig| c.output.as_ref(), commands::cutoff_invert)
        }
        Command::Piston => run_with(path, base, |c: &PistonConfig| c.output.as_ref(), commands::piston),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Config => 1,
        ErrorClass::Numerical => 2,
        ErrorClass::Resource => 3,
    }
}

fn run(cli: Cli) -> Result<Option<String>, Error> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--config <FILE> is required".into()))?;
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let (outcome, config_out) = pool.install(|| dispatch(cli.command, path))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let files = outcome.report.artifacts(cli.format);
    match output_dir(cli.out.as_deref(), config_out.as_deref(), base) {
        Some(dir) => report::write_all(&dir, &files)?,
        None => {
            for (name, contents) in &files {
                if files.len() > 1 {
                    println!("==> {name} <==");
                }
                print!("{contents}");
            }
        }
    }
    Ok(outcome.failed_check)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("error: check failed: {failure}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
