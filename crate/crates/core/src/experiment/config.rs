use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CliError, GlobalOptions, TableFormat};
use crate::analysis::DEFAULT_SEARCH_RANGE;
use crate::linalg::{eig_hermitian, CMatrix, EigenSystem, HermitianMatrix};
use crate::model::{
    alphabeta_to_populations, edge_state, spin1_operators, spin1_sy, thermal_state, AlphaBeta,
    EnergySpectrum, InitialState, Observable,
};
use crate::protocol::{FirstEvolution, WaitingTimeSpec};

/// A matrix entry: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

fn hermitian_from_entries(key: &str, rows: &[Vec<Entry>]) -> Result<HermitianMatrix, CliError> {
    let rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|e| e.value()).collect())
        .collect();
    CMatrix::from_rows(&rows)
        .and_then(HermitianMatrix::new)
        .map_err(|e| CliError::config(key, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `w1·Sz + w2·Sx` for spin 1.
    SzSx { w1: f64, w2: f64 },
    /// `w1·Sz² + w2·Sx` for spin 1.
    Sz2Sx { w1: f64, w2: f64 },
    /// Explicit Hermitian matrix in the computational basis.
    Matrix { entries: Vec<Vec<Entry>> },
}

impl SystemSpec {
    pub fn hamiltonian(&self) -> Result<HermitianMatrix, CliError> {
        let (sz, sx) = spin1_operators();
        let combined = match self {
            SystemSpec::SzSx { w1, w2 } => sz.combine(*w1, &sx, *w2),
            SystemSpec::Sz2Sx { w1, w2 } => sz.square().combine(*w1, &sx, *w2),
            SystemSpec::Matrix { entries } => {
                return hermitian_from_entries("system.entries", entries)
            }
        };
        combined.map_err(|e| CliError::config("system", e))
    }
}

/// `"Sz"`, `"Sx"`, `"Sy"` (spin 1) or `"energy_basis"`; `{"matrix": …}` in
/// the computational basis; `{"mixing": |a|²}` for two levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Named(String),
    Matrix { matrix: Vec<Vec<Entry>> },
    Mixing { mixing: f64 },
}

impl Default for ObservableSpec {
    fn default() -> Self {
        ObservableSpec::Named("Sz".into())
    }
}

impl ObservableSpec {
    pub fn resolve(&self, h: &EigenSystem) -> Result<Observable, CliError> {
        let key = "observable";
        let err = |e| CliError::config(key, e);
        let spin1 = |op: HermitianMatrix| {
            if h.dim() != 3 {
                return Err(CliError::config(
                    key,
                    format!("spin-1 operators need a 3-level system, got {}", h.dim()),
                ));
            }
            Observable::from_operator(&op, h).map_err(err)
        };
        match self {
            ObservableSpec::Named(name) => match name.as_str() {
                "Sz" => spin1(spin1_operators().0),
                "Sx" => spin1(spin1_operators().1),
                "Sy" => spin1(spin1_sy()),
                "energy_basis" => {
                    Observable::commuting((0..h.dim()).map(|k| k as f64).collect()).map_err(err)
                }
                other => Err(CliError::config(
                    key,
                    format!("unknown observable {other:?}, expected Sz, Sx, Sy or energy_basis"),
                )),
            },
            ObservableSpec::Matrix { matrix } => {
                let op = hermitian_from_entries("observable.matrix", matrix)?;
                Observable::from_operator(&op, h).map_err(err)
            }
            ObservableSpec::Mixing { mixing } => {
                if h.dim() != 2 {
                    return Err(CliError::config(
                        "observable.mixing",
                        format!("needs a 2-level system, got {}", h.dim()),
                    ));
                }
                Observable::two_level_mixing(*mixing)
                    .map_err(|e| CliError::config("observable.mixing", e))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Populations { c: Vec<f64> },
    AlphaBeta { alpha: f64, beta: f64 },
    Thermal { beta: f64 },
    Edge { q: f64, pair: String },
}

impl StateSpec {
    pub fn resolve(&self, e: &EnergySpectrum) -> Result<InitialState, CliError> {
        let key = "initial_state";
        let state = match self {
            StateSpec::Populations { c } => InitialState::new(c.clone()),
            StateSpec::AlphaBeta { alpha, beta } => {
                AlphaBeta::new(*alpha, *beta).and_then(|ab| alphabeta_to_populations(ab, e))
            }
            StateSpec::Thermal { beta } => {
                if !beta.is_finite() {
                    return Err(CliError::config("initial_state.beta", "must be finite"));
                }
                Ok(thermal_state(*beta, e))
            }
            StateSpec::Edge { q, pair } => {
                if e.len() != 3 {
                    return Err(CliError::config(key, "edge states need a 3-level system"));
                }
                if !(0.0..=1.0).contains(q) {
                    return Err(CliError::config(
                        "initial_state.q",
                        format!("{q} outside [0, 1]"),
                    ));
                }
                let pair = pair
                    .parse()
                    .map_err(|e| CliError::config("initial_state.pair", e))?;
                edge_state(*q, pair)
            }
        }
        .map_err(|e| CliError::config(key, e))?;
        if state.len() != e.len() {
            return Err(CliError::config(
                key,
                format!("{} populations for a {}-level system", state.len(), e.len()),
            ));
        }
        Ok(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WaitingSpec {
    Fixed { tau: f64 },
    Uniform { min: f64, max: f64 },
    Exponential { mean: f64 },
}

impl Default for WaitingSpec {
    fn default() -> Self {
        WaitingSpec::Fixed { tau: 1.0 }
    }
}

impl From<WaitingSpec> for WaitingTimeSpec {
    fn from(w: WaitingSpec) -> Self {
        match w {
            WaitingSpec::Fixed { tau } => WaitingTimeSpec::Fixed(tau),
            WaitingSpec::Uniform { min, max } => WaitingTimeSpec::Uniform { min, max },
            WaitingSpec::Exponential { mean } => WaitingTimeSpec::Exponential { mean },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstEvolutionSpec {
    #[default]
    BeforeFirstMeasurement,
    BetweenMeasurementsOnly,
}

impl From<FirstEvolutionSpec> for FirstEvolution {
    fn from(f: FirstEvolutionSpec) -> Self {
        match f {
            FirstEvolutionSpec::BeforeFirstMeasurement => FirstEvolution::BeforeFirstMeasurement,
            FirstEvolutionSpec::BetweenMeasurementsOnly => FirstEvolution::BetweenMeasurementsOnly,
        }
    }
}

fn default_m() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    #[serde(rename = "M", alias = "m", default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub waiting_time: WaitingSpec,
    #[serde(default)]
    pub first_evolution: FirstEvolutionSpec,
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        Self {
            m: default_m(),
            waiting_time: WaitingSpec::default(),
            first_evolution: FirstEvolutionSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    #[serde(alias = "monte-carlo")]
    MonteCarlo,
    Both,
}

impl Mode {
    pub fn exact(self) -> bool {
        matches!(self, Mode::Exact | Mode::Both)
    }

    pub fn monte_carlo(self) -> bool {
        matches!(self, Mode::MonteCarlo | Mode::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub realizations: u64,
    pub master_seed: u64,
    pub workers: usize,
    pub mode: Mode,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            realizations: 100_000,
            master_seed: 0,
            workers: 1,
            mode: Mode::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    pub epsilon_min: f64,
    pub epsilon_max: f64,
    pub epsilon_points: usize,
    pub search_range: [f64; 2],
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            epsilon_min: -2.0,
            epsilon_max: 2.0,
            epsilon_points: 41,
            search_range: [DEFAULT_SEARCH_RANGE.0, DEFAULT_SEARCH_RANGE.1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatSpec {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
    pub format: FormatSpec,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            prefix: "qheat".into(),
            format: FormatSpec::Csv,
        }
    }
}

impl OutputSpec {
    pub fn table_format(&self) -> TableFormat {
        match self.format {
            FormatSpec::Csv => TableFormat::Csv,
            FormatSpec::Json => TableFormat::Json,
        }
    }
}

/// Top-level JSON document for `qheat run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub observable: ObservableSpec,
    pub initial_state: StateSpec,
    #[serde(default)]
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

/// Everything a run needs, validated.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub hamiltonian: EigenSystem,
    pub spectrum: EnergySpectrum,
    pub observable: Observable,
    pub state: InitialState,
    pub waiting: WaitingTimeSpec,
    pub placement: FirstEvolution,
    pub epsilons: Vec<f64>,
    pub search_range: (f64, f64),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply_overrides(&mut self, opts: &GlobalOptions) {
        if let Some(seed) = opts.seed {
            self.run.master_seed = seed;
        }
        if let Some(w) = opts.workers {
            self.run.workers = w;
        }
        if let Some(f) = opts.format {
            self.outputs.format = match f {
                TableFormat::Csv => FormatSpec::Csv,
                TableFormat::Json => FormatSpec::Json,
            };
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("serializable");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn resolve(&self) -> Result<ResolvedExperiment, CliError> {
        let h = self.system.hamiltonian()?;
        let hamiltonian = eig_hermitian(&h).map_err(|e| CliError::config("system", e))?;
        let spectrum = EnergySpectrum::from_eigensystem(&hamiltonian)
            .map_err(|e| CliError::config("system", e))?;
        let observable = self.observable.resolve(&hamiltonian)?;
        let state = self.initial_state.resolve(&spectrum)?;
        let waiting: WaitingTimeSpec = self.protocol.waiting_time.into();
        waiting
            .validate()
            .map_err(|e| CliError::config("protocol.waiting_time", e))?;
        if self.run.mode.exact() && waiting.is_random() {
            return Err(CliError::config(
                "run.mode",
                "the exact engine needs a fixed waiting time; use monte_carlo",
            ));
        }
        if self.run.mode.monte_carlo() && self.run.realizations == 0 {
            return Err(CliError::config("run.realizations", "must be at least 1"));
        }
        if self.run.workers == 0 {
            return Err(CliError::config("run.workers", "must be at least 1"));
        }
        let a = &self.analysis;
        if !(a.epsilon_min.is_finite()
            && a.epsilon_max.is_finite()
            && a.epsilon_min <= a.epsilon_max)
        {
            return Err(CliError::config(
                "analysis.epsilon_min",
                "epsilon range must be finite and ordered",
            ));
        }
        if a.epsilon_points == 0 {
            return Err(CliError::config(
                "analysis.epsilon_points",
                "must be at least 1",
            ));
        }
        let [lo, hi] = a.search_range;
        if !(lo < 0.0 && hi > 0.0) {
            return Err(CliError::config(
                "analysis.search_range",
                "must contain zero",
            ));
        }
        Ok(ResolvedExperiment {
            hamiltonian,
            spectrum,
            observable,
            state,
            waiting,
            placement: self.protocol.first_evolution.into(),
            epsilons: crate::analysis::epsilon_grid(a.epsilon_min, a.epsilon_max, a.epsilon_points),
            search_range: (lo, hi),
        })
    }
}
