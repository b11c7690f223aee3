//! `vqdqn` — experiment runner for the quantum Q-learning library.
//!
//! Exit codes: 0 on success, 1 for configuration problems (parse or
//! validation failures, unknown presets, bad flags), 2 for runtime failures
//! (I/O, training errors, unusable log directories).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use vqdqn_cli::config::{preset, presets, ConfigError, PRESET_NAMES};
use vqdqn_cli::runner::{aggregate_dir, output_root, run_config, RunnerError};

#[derive(Parser)]
#[command(
    name = "vqdqn",
    version,
    about = "Run variational Q-learning experiments from TOML configs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every variant of a TOML experiment config
    Run {
        /// Path to the config file
        config: PathBuf,
        /// Output root (falls back to $VQDQN_OUTPUT_ROOT, then ./runs)
        #[arg(long)]
        output_root: Option<PathBuf>,
    },
    /// List bundled presets, print one, or write them all out as TOML
    Presets {
        /// Print the named preset's TOML to stdout
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
        /// Write every preset as <name>.toml into this directory
        #[arg(long, value_name = "DIR")]
        write: Option<PathBuf>,
    },
    /// Rebuild a variant directory's aggregate files from its run-*.jsonl logs
    Aggregate {
        /// A variant output directory
        dir: PathBuf,
    },
}

fn unknown_preset(name: &str) -> RunnerError {
    RunnerError::Config(ConfigError::Invalid {
        field: "preset".into(),
        reason: format!("unknown preset '{name}'; `vqdqn presets` lists the bundled ones"),
    })
}

fn execute(cli: Cli) -> Result<(), RunnerError> {
    match cli.cmd {
        Cmd::Run {
            config,
            output_root: root_flag,
        } => {
            let root = output_root(root_flag);
            for dir in run_config(&config, &root)? {
                println!("{}", dir.display());
            }
        }
        Cmd::Presets { show, write } => {
            if let Some(name) = &show {
                let cfg = preset(name).ok_or_else(|| unknown_preset(name))?;
                let text = toml::to_string_pretty(&cfg).map_err(RunnerError::TomlSer)?;
                print!("{text}");
            } else if let Some(dir) = &write {
                std::fs::create_dir_all(dir).map_err(|source| RunnerError::Io {
                    path: dir.display().to_string(),
                    source,
                })?;
                for cfg in presets() {
                    let path = dir.join(format!("{}.toml", cfg.name));
                    let text = toml::to_string_pretty(&cfg).map_err(RunnerError::TomlSer)?;
                    std::fs::write(&path, text).map_err(|source| RunnerError::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    println!("{}", path.display());
                }
            } else {
                for name in PRESET_NAMES {
                    println!("{name}");
                }
            }
        }
        Cmd::Aggregate { dir } => {
            aggregate_dir(&dir)?;
            println!("{}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                RunnerError::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
