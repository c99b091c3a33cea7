use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config::FormatSpec;
use super::{
    CliError, GlobalOptions, ObservableSpec, ProtocolSpec, StateSpec, SystemSpec, Table,
    WaitingSpec,
};
use crate::analysis::{
    beta_eff_closed_form, beta_eff_from_joint, BetaEffResult, DEFAULT_SEARCH_RANGE,
};
use crate::error::{Error, Result as CoreResult};
use crate::experiment::Cell;
use crate::linalg::eig_hermitian;
use crate::model::EnergySpectrum;
use crate::protocol::{exact_joint, ChainBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanVariable {
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "q")]
    Q,
    #[serde(rename = "E3")]
    E3,
    #[serde(rename = "tau")]
    Tau,
    #[serde(rename = "M")]
    M,
}

impl ScanVariable {
    pub fn name(self) -> &'static str {
        match self {
            ScanVariable::Alpha => "alpha",
            ScanVariable::Beta => "beta",
            ScanVariable::Q => "q",
            ScanVariable::E3 => "E3",
            ScanVariable::Tau => "tau",
            ScanVariable::M => "M",
        }
    }
}

/// `closed_form` is the large-`M` limit; `exact` runs the finite-`M` chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    #[default]
    ClosedForm,
    Exact,
}

fn default_scan_name() -> String {
    "scan".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOutput {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_scan_name")]
    pub name: String,
    #[serde(default)]
    pub format: FormatSpec,
}

impl Default for ScanOutput {
    fn default() -> Self {
        Self {
            dir: None,
            name: default_scan_name(),
            format: FormatSpec::Csv,
        }
    }
}

fn default_search_range() -> [f64; 2] {
    [DEFAULT_SEARCH_RANGE.0, DEFAULT_SEARCH_RANGE.1]
}

/// JSON document for `qheat scan`. The grid is either `values` or
/// `min`/`max`/`step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub variable: ScanVariable,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub evaluator: Evaluator,
    /// Energy levels for the closed-form evaluator.
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    /// Hamiltonian, required by the exact evaluator.
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub observable: ObservableSpec,
    #[serde(default)]
    pub protocol: ProtocolSpec,
    pub initial_state: StateSpec,
    #[serde(default = "default_search_range")]
    pub search_range: [f64; 2],
    #[serde(default)]
    pub output: ScanOutput,
}

/// `min, min + step, …` up to `max` inclusive (with a small tolerance).
pub(crate) fn step_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| min + i as f64 * step).collect()
}

/// `[β_eff, residual, degenerate, flag]`; failures leave the numbers empty
/// and name the failure in `flag`.
pub(crate) fn beta_cells(r: &CoreResult<BetaEffResult>) -> Vec<Cell> {
    match r {
        Ok(b) => vec![
            b.value.into(),
            b.residual.into(),
            b.degenerate.into(),
            if b.degenerate { "degenerate" } else { "" }.into(),
        ],
        Err(e) => vec!["".into(), "".into(), false.into(), failure_flag(e).into()],
    }
}

pub(crate) const BETA_COLUMNS: [&str; 4] = ["beta_eff", "residual", "degenerate", "flag"];

fn failure_flag(e: &Error) -> &'static str {
    match e {
        Error::BracketNotFound { .. } => "bracket_not_found",
        Error::ResidualTooLarge { .. } => "residual_too_large",
        Error::NotNormalized { .. } => "not_normalized",
        Error::ZeroPopulation { .. } => "zero_population",
        Error::DegenerateSpectrum { .. } => "degenerate_spectrum",
        Error::InvalidPopulations(_) | Error::InvalidSpec(_) => "invalid_input",
        _ => "numeric_error",
    }
}

impl ScanSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let grid = match (&self.values, self.min, self.max, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(min), Some(max), Some(step)) => {
                if !(step > 0.0 && min <= max && min.is_finite() && max.is_finite()) {
                    return Err(CliError::config("step", "need min <= max and step > 0"));
                }
                step_grid(min, max, step)
            }
            _ => {
                return Err(CliError::config(
                    "values",
                    "give either values or all of min, max and step",
                ))
            }
        };
        if grid.is_empty() {
            return Err(CliError::config("values", "grid is empty"));
        }
        if self.variable == ScanVariable::M && grid.iter().any(|&m| m < 0.0 || m.fract() != 0.0) {
            return Err(CliError::config(
                "values",
                "M must be a non-negative integer",
            ));
        }
        Ok(grid)
    }

    fn check(&self) -> Result<(), CliError> {
        let [lo, hi] = self.search_range;
        if !(lo < 0.0 && hi > 0.0) {
            return Err(CliError::config("search_range", "must contain zero"));
        }
        match (self.variable, &self.initial_state) {
            (ScanVariable::Alpha | ScanVariable::Beta, StateSpec::AlphaBeta { .. }) => {}
            (ScanVariable::Alpha | ScanVariable::Beta, _) => {
                return Err(CliError::config(
                    "initial_state",
                    "alpha and beta scans need an alpha_beta state",
                ))
            }
            (ScanVariable::Q, StateSpec::Edge { .. }) => {}
            (ScanVariable::Q, _) => {
                return Err(CliError::config(
                    "initial_state",
                    "q scans need an edge state",
                ))
            }
            _ => {}
        }
        match (self.variable, self.evaluator) {
            (ScanVariable::E3, Evaluator::ClosedForm) if self.levels.is_none() => {
                Err(CliError::config("levels", "E3 scans need explicit levels"))
            }
            (ScanVariable::E3, Evaluator::Exact) => Err(CliError::config(
                "evaluator",
                "E3 scans use the closed_form evaluator",
            )),
            (ScanVariable::Tau | ScanVariable::M, Evaluator::ClosedForm) => Err(CliError::config(
                "evaluator",
                "tau and M scans need the exact evaluator",
            )),
            (_, Evaluator::Exact) if self.system.is_none() => Err(CliError::config(
                "system",
                "the exact evaluator needs a system",
            )),
            (ScanVariable::Tau, _)
                if !matches!(self.protocol.waiting_time, WaitingSpec::Fixed { .. }) =>
            {
                Err(CliError::config(
                    "protocol.waiting_time",
                    "the exact evaluator needs a fixed waiting time",
                ))
            }
            (_, Evaluator::ClosedForm) if self.levels.is_none() && self.system.is_none() => {
                Err(CliError::config("levels", "give levels or a system"))
            }
            _ => Ok(()),
        }
    }

    fn state_at(&self, x: f64) -> StateSpec {
        match (self.variable, &self.initial_state) {
            (ScanVariable::Alpha, StateSpec::AlphaBeta { beta, .. }) => StateSpec::AlphaBeta {
                alpha: x,
                beta: *beta,
            },
            (ScanVariable::Beta, StateSpec::AlphaBeta { alpha, .. }) => StateSpec::AlphaBeta {
                alpha: *alpha,
                beta: x,
            },
            (ScanVariable::Q, StateSpec::Edge { pair, .. }) => StateSpec::Edge {
                q: x,
                pair: pair.clone(),
            },
            (_, s) => s.clone(),
        }
    }

    fn point(&self, x: f64) -> CoreResult<BetaEffResult> {
        let range = (self.search_range[0], self.search_range[1]);
        let state_spec = self.state_at(x);
        let resolve_state = |e: &EnergySpectrum| {
            state_spec.resolve(e).map_err(|err| match err {
                CliError::Numeric(e) => e,
                other => Error::InvalidPopulations(other.to_string()),
            })
        };
        match self.evaluator {
            Evaluator::ClosedForm => {
                let e = match (&self.levels, &self.system) {
                    (Some(levels), _) => {
                        let mut levels = levels.clone();
                        if self.variable == ScanVariable::E3 {
                            if levels.len() != 3 {
                                return Err(Error::RequiresThreeLevels(levels.len()));
                            }
                            levels[2] = x;
                        }
                        EnergySpectrum::new(levels)?
                    }
                    (None, Some(system)) => {
                        let h = system
                            .hamiltonian()
                            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
                        EnergySpectrum::from_eigensystem(&eig_hermitian(&h)?)?
                    }
                    (None, None) => unreachable!("checked"),
                };
                let s = resolve_state(&e)?;
                beta_eff_closed_form(&s, &e, range)
            }
            Evaluator::Exact => {
                let system = self.system.as_ref().expect("checked");
                let h = system
                    .hamiltonian()
                    .map_err(|e| Error::InvalidSpec(e.to_string()))?;
                let es = eig_hermitian(&h)?;
                let e = EnergySpectrum::from_eigensystem(&es)?;
                let o = self
                    .observable
                    .resolve(&es)
                    .map_err(|e| Error::InvalidSpec(e.to_string()))?;
                let s = resolve_state(&e)?;
                let mut tau = match self.protocol.waiting_time {
                    WaitingSpec::Fixed { tau } => tau,
                    _ => {
                        return Err(Error::InvalidSpec(
                            "the exact evaluator needs a fixed waiting time".into(),
                        ))
                    }
                };
                let mut m = self.protocol.m;
                match self.variable {
                    ScanVariable::Tau => tau = x,
                    ScanVariable::M => m = x as usize,
                    _ => {}
                }
                let builder = ChainBuilder::new(&es, &o, self.protocol.first_evolution.into())?;
                let p = exact_joint(&s, &builder.build(&vec![tau; m])?)?;
                beta_eff_from_joint(&p, &e, range)
            }
        }
    }

    /// One row per grid point, in grid order.
    pub fn table(&self) -> Result<Table, CliError> {
        self.check()?;
        let grid = self.grid()?;
        let mut header = vec!["index", self.variable.name()];
        header.extend(BETA_COLUMNS);
        let mut table = Table::new(header);
        for (i, &x) in grid.iter().enumerate() {
            let mut row: Vec<Cell> = vec![i.into(), x.into()];
            row.extend(beta_cells(&self.point(x)));
            table.push(row);
        }
        Ok(table)
    }
}

/// Runs a scan and writes its table; returns the table and output path.
pub fn run_scan(spec: &ScanSpec, opts: &GlobalOptions) -> Result<(Table, PathBuf), CliError> {
    let table = spec.table()?;
    let format = opts.format.unwrap_or(match spec.output.format {
        FormatSpec::Csv => super::TableFormat::Csv,
        FormatSpec::Json => super::TableFormat::Json,
    });
    let dir = spec
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    let path = table.write(&dir, &spec.output.name, format)?;
    Ok((table, path))
}
