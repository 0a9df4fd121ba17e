use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mmw_cli::presets::PRESETS;
use mmw_cli::{load_config, output_dir, run_experiment, validate_config, CliError};

#[derive(Parser)]
#[command(
    name = "mmw",
    version,
    about = "Millimetre-wave impairment experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: the config's `output`, else out/<kind>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for Monte-Carlo loops.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config and list every violated invariant.
    Validate { config: PathBuf },
    /// Shipped parameter blocks.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Names and one-line descriptions.
    List,
    /// Print a preset's TOML.
    Show { name: String },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
            }
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            let dir = output_dir(&cfg, out.as_deref());
            log::info!("running {} into {}", cfg.kind.name(), dir.display());
            let m = run_experiment(&cfg, &dir)?;
            for o in &m.outputs {
                println!("{}", o.display());
            }
            eprintln!(
                "{} finished in {:.2} s (config {})",
                m.kind,
                m.wall_clock_s,
                &m.config_sha256[..12]
            );
            Ok(())
        }
        Command::Validate { config } => {
            let v = validate_config(&config)?;
            if v.is_empty() {
                println!("{}: valid", config.display());
                Ok(())
            } else {
                Err(CliError::Invalid(v))
            }
        }
        Command::Presets { action } => {
            match action {
                PresetAction::List => {
                    let w = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
                    for p in PRESETS {
                        println!("{:w$}  {}", p.name, p.summary);
                    }
                }
                PresetAction::Show { name } => match mmw_cli::presets::preset(&name) {
                    Some(p) => print!("{}", p.text),
                    None => return Err(CliError::Usage(format!("unknown preset `{name}`"))),
                },
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
