use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cavkerr::config::{ConfigFile, Scenario};
use cavkerr::Error;

mod scenarios;

/// Steady-state lineshapes, bistability and atomic-motion transients of an
/// atom-loaded cavity. Writes CSV.
#[derive(Parser, Debug)]
#[command(name = "cavkerr", version)]
struct Args {
    /// TOML run configuration; built-in defaults if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file, or output directory for `ringdown` and `trigger`.
    /// File scenarios print to stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master random seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Scenario to run (overrides the config): derived, lineshape,
    /// bistability-threshold, sweep, ringdown, trigger.
    #[arg(long)]
    scenario: Option<String>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 1;

fn load(args: &Args) -> cavkerr::Result<ConfigFile> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                key: "--config".into(),
                message: format!("{}: {e}", path.display()),
            })?;
            ConfigFile::from_toml(&text)?
        }
        None => ConfigFile::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(name) = &args.scenario {
        cfg.scenario = Scenario::parse(name)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load(&args).and_then(|c| scenarios::Resolved::new(c, args.out.clone())) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cavkerr: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match scenarios::run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavkerr: {e}");
            let code = match e {
                Error::Io(_) => EXIT_IO,
                Error::Config { .. } => EXIT_CONFIG,
                _ => EXIT_NUMERIC,
            };
            ExitCode::from(code)
        }
    }
}
