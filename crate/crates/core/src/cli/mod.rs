//! `abflux <experiment> --config <path> --out <dir>`.

pub mod config;
mod run;
pub mod svg;

use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, parse_config_for, ConfigError, Experiment, RunConfig};
pub use run::{run, RunError, RunReport};

#[derive(Debug, Parser)]
#[command(name = "abflux", version, about = "Aharonov-Bohm wave-packet lab")]
pub struct Args {
    pub experiment: Experiment,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

fn load(args: &Args) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        RunError::Config(ConfigError::Schema {
            line: None,
            key: None,
            message: format!("{}: {e}", args.config.display()),
        })
    })?;
    let mut cfg = parse_config_for(&text, Some(args.experiment))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Runs one invocation and returns the process exit code.
pub fn execute(args: &Args) -> i32 {
    match load(args).and_then(|cfg| run(&cfg, &args.out, args.threads)) {
        Ok(report) => {
            for path in &report.outputs {
                log::info!("wrote {}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("abflux: {e}");
            let record = serde_json::to_string_pretty(&e.record()).unwrap_or_default();
            if std::fs::create_dir_all(&args.out).is_ok() {
                let _ = std::fs::write(args.out.join("error.json"), record + "\n");
            }
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    execute(&args)
}
