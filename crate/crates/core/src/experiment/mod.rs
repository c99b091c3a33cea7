//! Configuration-driven experiments, figure recipes and parameter scans
//! behind the `qheat` command line.

mod config;
mod figures;
mod run;
mod scan;
mod table;

use std::fmt;

pub use config::{
    AnalysisSpec, Entry, ExperimentConfig, FirstEvolutionSpec, FormatSpec, Mode, ObservableSpec,
    OutputSpec, ProtocolSpec, ResolvedExperiment, RunSpec, StateSpec, SystemSpec, WaitingSpec,
};
pub use figures::{
    fig1_data, fig2_data, fig3_data, fig4_data, fig5a_data, fig5b_data, fig6_data,
    negative_alpha_slope, reproduce, Fig1Curve, Fig2Data, Fig3Data, FigureId, FIG1_DEFAULT_A2,
    FIG4_BETAS,
};
pub use run::{run_experiment, RunReport};
pub use scan::{run_scan, Evaluator, ScanOutput, ScanSpec, ScanVariable};
pub use table::{write_atomic, Cell, Table, TableFormat};

use crate::error::Error;

/// Options shared by every subcommand. `None` keeps the configured value.
#[derive(Debug, Clone, Default)]
pub struct GlobalOptions {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Option<TableFormat>,
    pub quiet: bool,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub(crate) fn config(key: &str, err: impl fmt::Display) -> Self {
        CliError::Config(format!("{key}: {err}"))
    }

    pub(crate) fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}
