use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use capacity_lab::config::RunConfig;
use capacity_lab::output::write_artifacts;
use capacity_lab::verifier::{describe, EXPERIMENTS};
use clap::{Parser, Subcommand};

/// Runs capacity experiments from JSON configs.
#[derive(Parser)]
#[command(name = "capacity-lab", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// List registered experiments.
    #[arg(long)]
    list: bool,
    /// Describe one experiment.
    #[arg(long, value_name = "NAME")]
    describe: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment in a config file and write JSON and CSV artifacts.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: the config's out_dir, else ./out).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Overrides the config thread count.
        #[arg(long)]
        threads: Option<usize>,
    },
}

const USAGE: u8 = 2;

fn run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, threads: Option<usize>) -> anyhow::Result<ExitCode> {
    let mut cfg = match RunConfig::from_path(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(USAGE));
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = threads {
        cfg.threads = t;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return Ok(ExitCode::from(USAGE));
    }
    let dir = out.or_else(|| cfg.out_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    let result = cfg.run().with_context(|| format!("running {}", cfg.experiment.name()))?;
    let art = write_artifacts(&dir, &cfg, &result)?;
    for b in &result.bands {
        let status = match (b.passed, b.asserted) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "NOTE",
        };
        println!("{status} {} = {} (limit {})", b.name, b.value, b.limit);
    }
    println!("json {}", art.json_path.display());
    println!("csv  {}", art.csv_path.display());
    println!("hash {}", art.hash);
    Ok(if result.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for (name, _) in EXPERIMENTS {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    if let Some(name) = cli.describe {
        return match describe(&name) {
            Some(text) => {
                println!("{name}: {text}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown experiment `{name}` (see --list)");
                ExitCode::from(USAGE)
            }
        };
    }
    match cli.command {
        Some(Command::Run { config, seed, out, threads }) => match run(config, seed, out, threads) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(USAGE)
            }
        },
        None => {
            eprintln!("error: nothing to do; try `run --config PATH`, `--list` or `--describe NAME`");
            ExitCode::from(USAGE)
        }
    }
}
