use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qheat::experiment::{
    reproduce, run_experiment, run_scan, CliError, ExperimentConfig, FigureId, GlobalOptions,
    ScanSpec, TableFormat,
};

#[derive(Parser)]
#[command(
    name = "qheat",
    version,
    about = "Quantum-heat statistics under repeated projective measurements"
)]
struct Cli {
    /// Master seed for Monte Carlo sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo sampling.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Table format: csv or json.
    #[arg(long, global = true)]
    format: Option<TableFormat>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Write the dataset of a figure.
    Reproduce {
        figure: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate β_eff over a parameter grid.
    Scan { spec: PathBuf },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn report_files(opts: &GlobalOptions, files: &[PathBuf]) {
    if !opts.quiet {
        for f in files {
            println!("wrote {}", f.display());
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let opts = GlobalOptions {
        seed: cli.seed,
        workers: cli.workers,
        format: cli.format,
        quiet: cli.quiet,
    };
    if opts.workers == Some(0) {
        return Err(CliError::Config("--workers: must be at least 1".into()));
    }
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_json(&read(&config)?)?;
            let report = run_experiment(&cfg, &opts)?;
            report_files(&opts, &report.files);
            if !opts.quiet {
                println!("beta_eff: {}", report.summary["beta_eff"]);
            }
            match report.numeric_failure {
                Some(e) => Err(CliError::Numeric(e)),
                None => Ok(()),
            }
        }
        Command::Reproduce { figure, out } => {
            let id: FigureId = figure.parse()?;
            let files = reproduce(id, &out, &opts)?;
            report_files(&opts, &files);
            Ok(())
        }
        Command::Scan { spec } => {
            let spec = ScanSpec::from_json(&read(&spec)?)?;
            let (table, path) = run_scan(&spec, &opts)?;
            if !opts.quiet {
                println!("{} points", table.rows.len());
            }
            report_files(&opts, &[path]);
            Ok(())
        }
        Command::Validate { config } => {
            let mut cfg = ExperimentConfig::from_json(&read(&config)?)?;
            cfg.apply_overrides(&opts);
            cfg.resolve()?;
            if !opts.quiet {
                println!("ok {}", cfg.hash());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qheat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
