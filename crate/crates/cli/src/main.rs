// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use notenet_cli::{cmd_evaluate, cmd_extract, cmd_features, cmd_pipeline, CliError, ConfigArgs};

/// Genre classification from note co-occurrence networks.
#[derive(Debug, Parser)]
#[command(name = "notenet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pitch-track every manifest entry into a note-sequence file.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the topological feature matrix from a note-sequence file.
    Features {
        #[arg(long)]
        sequences: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate the nearest-neighbour baseline on a feature CSV.
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        confusion: PathBuf,
    },
    /// Run extract, features and evaluate into one directory.
    Pipeline {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overwrite existing outputs.
        #[arg(long)]
        force: bool,
        /// Also evaluate T in {0..10, 15, 20, 25, 30}.
        #[arg(long)]
        threshold_sweep: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.config.resolve()?;
    match cli.command {
        Command::Extract { manifest, out } => {
            let outcome = cmd_extract(&manifest, &out, &config)?;
            println!(
                "{} sequences, {} failed sources",
                outcome.sequences.len(),
                outcome.failures.len()
            );
        }
        Command::Features { sequences, out } => {
            let m = cmd_features(&sequences, &out, &config)?;
            println!("{} rows x {} columns", m.len(), m.width());
        }
        Command::Evaluate {
            features,
            report,
            confusion,
        } => {
            let r = cmd_evaluate(&features, &report, &confusion, &config)?;
            println!("mean accuracy: {:.2}", r.mean_accuracy);
        }
        Command::Pipeline {
            manifest,
            out_dir,
            force,
            threshold_sweep,
        } => {
            let outcome = cmd_pipeline(&manifest, &out_dir, &config, force, threshold_sweep)?;
            for (t, acc) in outcome.accuracies {
                println!("T={t}: mean accuracy {acc:.2}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
