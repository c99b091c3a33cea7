//! Datasets behind each figure, with the caption parameters fixed.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::json;

use super::scan::{beta_cells, step_grid, BETA_COLUMNS};
use super::{write_atomic, Cell, CliError, GlobalOptions, Table, TableFormat};
use crate::analysis::{
    beta_bar_asymptotic, beta_bar_bounds, beta_eff_closed_form, char_asymptotic, char_from_joint,
    empirical_characteristic, epsilon_grid, linear_fit, slope_r, DEFAULT_SEARCH_RANGE,
};
use crate::error::Result;
use crate::linalg::{eig_hermitian, EigenSystem, HermitianMatrix};
use crate::model::{
    alphabeta_to_populations, edge_state, populations_to_alphabeta, spin1_operators, AlphaBeta,
    EdgePair, EnergySpectrum, InitialState, Observable,
};
use crate::protocol::{
    build_chain, exact_joint, run_monte_carlo, JointOutcomeDistribution, MonteCarloConfig,
    WaitingTimeSpec,
};

pub const FIG1_DEFAULT_A2: [f64; 3] = [0.25, 0.5, 0.75];
pub const FIG4_BETAS: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5];

const FIG1_M: usize = 5;
const FIG1_TAU: f64 = 0.5;
const FIG1_BETA: f64 = 1.5;
const FIG1_REALIZATIONS: u64 = 2000;
const FIG1_POINTS: usize = 101;

const CHAIN_M: usize = 20;
const CHAIN_TAU: f64 = 1.0;
const CHAIN_REALIZATIONS: u64 = 300_000;
const REFERENCE_STATE: [f64; 3] = [0.8, 0.01, 0.19];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig5a,
    Fig5b,
    Fig6a,
    Fig6b,
    Fig6c,
}

impl FigureId {
    pub const ALL: [FigureId; 12] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig4a,
        FigureId::Fig4b,
        FigureId::Fig4c,
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig6a,
        FigureId::Fig6b,
        FigureId::Fig6c,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig4c => "fig4c",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig6a => "fig6a",
            FigureId::Fig6b => "fig6b",
            FigureId::Fig6c => "fig6c",
        }
    }

    /// Level sets of the `β_eff` panels: `E3 - E2` greater than, equal to
    /// and smaller than `E2 - E1`.
    fn panel_levels(self) -> Option<[f64; 3]> {
        match self {
            FigureId::Fig4a | FigureId::Fig6a => Some([-1.0, 0.0, 3.0]),
            FigureId::Fig4b | FigureId::Fig6b => Some([-1.0, 0.0, 1.0]),
            FigureId::Fig4c | FigureId::Fig6c => Some([-3.0, 0.0, 1.0]),
            _ => None,
        }
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> std::result::Result<Self, CliError> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = FigureId::ALL.iter().map(|f| f.as_str()).collect();
                CliError::config(
                    "figure",
                    format!("unknown id {s:?}, expected one of {}", known.join(", ")),
                )
            })
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn spectrum(levels: [f64; 3]) -> EnergySpectrum {
    EnergySpectrum::new(levels.to_vec()).expect("panel levels are ordered")
}

fn spin1_system(squared: bool) -> Result<(EigenSystem, Observable)> {
    let (sz, sx) = spin1_operators();
    let h = if squared {
        sz.square().combine(1.0, &sx, 0.5)?
    } else {
        sz.combine(1.0, &sx, 0.5)?
    };
    let es = eig_hermitian(&h)?;
    let o = Observable::from_operator(&sz, &es)?;
    Ok((es, o))
}

/// One `|a|²` curve of the two-level figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Curve {
    pub a2: f64,
    pub c1: Vec<f64>,
    pub g_mc: Vec<f64>,
    pub stderr: Vec<f64>,
    pub g_exact: Vec<f64>,
    /// Where a least-squares line through the sampled curve crosses one.
    pub crossing_fit: f64,
    /// Where the exact (affine in `c1`) curve crosses one.
    pub crossing_exact: f64,
}

/// `⟨e^{-βQ}⟩` against `c1` for `H = σx`, `M = 5`, `τ = 0.5`, `β = 3/2`, with
/// 2000 realizations per point. Point `k` uses master seed `seed + k`.
pub fn fig1_data(a2: f64, seed: u64, workers: usize) -> Result<Fig1Curve> {
    let h = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    let es = eig_hermitian(&h)?;
    let e = EnergySpectrum::from_eigensystem(&es)?;
    let o = Observable::two_level_mixing(a2)?;
    let chain = build_chain(&es, &o, &[FIG1_TAU; FIG1_M])?;
    let c1 = epsilon_grid(0.0, 1.0, FIG1_POINTS);
    let (mut g_mc, mut stderr, mut g_exact) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &c) in c1.iter().enumerate() {
        let s = InitialState::new(vec![c, 1.0 - c])?;
        let cfg = MonteCarloConfig {
            realizations: FIG1_REALIZATIONS,
            master_seed: seed.wrapping_add(k as u64),
            workers,
            ..Default::default()
        };
        let run = run_monte_carlo(&s, &es, &o, WaitingTimeSpec::Fixed(FIG1_TAU), FIG1_M, &cfg)?;
        let (g, se) = empirical_characteristic(&run.joint, &e, FIG1_BETA);
        g_mc.push(g);
        stderr.push(se);
        g_exact.push(char_from_joint(&exact_joint(&s, &chain)?, &e, FIG1_BETA));
    }
    let crossing = |ys: &[f64]| {
        let (slope, intercept) = linear_fit(&c1, ys);
        (1.0 - intercept) / slope
    };
    Ok(Fig1Curve {
        a2,
        crossing_fit: crossing(&g_mc),
        crossing_exact: crossing(&g_exact),
        c1,
        g_mc,
        stderr,
        g_exact,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Data {
    pub levels: Vec<f64>,
    pub monte_carlo: JointOutcomeDistribution,
    pub exact: JointOutcomeDistribution,
}

/// Initial and final energy statistics for `H = Sz + ½Sx`, `O = Sz`, `τ = 1`,
/// `M = 20`, `c = (0.8, 0.01, 0.19)`.
pub fn fig2_data(seed: u64, workers: usize, realizations: u64) -> Result<Fig2Data> {
    let (es, o) = spin1_system(false)?;
    let s = InitialState::new(REFERENCE_STATE.to_vec())?;
    let cfg = MonteCarloConfig {
        realizations,
        master_seed: seed,
        workers,
        ..Default::default()
    };
    let run = run_monte_carlo(
        &s,
        &es,
        &o,
        WaitingTimeSpec::Fixed(CHAIN_TAU),
        CHAIN_M,
        &cfg,
    )?;
    let exact = exact_joint(&s, &build_chain(&es, &o, &[CHAIN_TAU; CHAIN_M])?)?;
    Ok(Fig2Data {
        levels: es.values.clone(),
        monte_carlo: run.joint,
        exact,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Data {
    pub epsilons: Vec<f64>,
    pub g_mc: Vec<f64>,
    pub stderr: Vec<f64>,
    pub g_closed_form: Vec<f64>,
    pub g_exact: Vec<f64>,
    pub alpha_beta: AlphaBeta,
}

/// Sampled `G(ε)` at `M = 20` against the large-`M` closed form, on 41
/// points in `[-2, 2]`. Panel b uses `H = Sz² + ½Sx`.
pub fn fig3_data(squared: bool, seed: u64, workers: usize, realizations: u64) -> Result<Fig3Data> {
    let (es, o) = spin1_system(squared)?;
    let e = EnergySpectrum::from_eigensystem(&es)?;
    let s = InitialState::new(REFERENCE_STATE.to_vec())?;
    let ab = populations_to_alphabeta(&s, &e)?;
    let cfg = MonteCarloConfig {
        realizations,
        master_seed: seed,
        workers,
        ..Default::default()
    };
    let run = run_monte_carlo(
        &s,
        &es,
        &o,
        WaitingTimeSpec::Fixed(CHAIN_TAU),
        CHAIN_M,
        &cfg,
    )?;
    let exact = exact_joint(&s, &build_chain(&es, &o, &[CHAIN_TAU; CHAIN_M])?)?;
    let epsilons = epsilon_grid(-2.0, 2.0, 41);
    let (g_mc, stderr) = epsilons
        .iter()
        .map(|&x| empirical_characteristic(&run.joint, &e, x))
        .unzip();
    Ok(Fig3Data {
        g_closed_form: epsilons
            .iter()
            .map(|&x| char_asymptotic(ab, &e, x))
            .collect::<Result<_>>()?,
        g_exact: epsilons
            .iter()
            .map(|&x| char_from_joint(&exact, &e, x))
            .collect(),
        epsilons,
        g_mc,
        stderr,
        alpha_beta: ab,
    })
}

/// Closed-form `β_eff` against `α ∈ [-30, 30]` (step 0.25) at fixed `β`.
pub fn fig4_data(levels: [f64; 3], beta: f64) -> Table {
    let e = spectrum(levels);
    let mut header = vec!["alpha", "beta"];
    header.extend(BETA_COLUMNS);
    let mut t = Table::new(header);
    for alpha in step_grid(-30.0, 30.0, 0.25) {
        let r = AlphaBeta::new(alpha, beta)
            .and_then(|ab| alphabeta_to_populations(ab, &e))
            .and_then(|s| beta_eff_closed_form(&s, &e, DEFAULT_SEARCH_RANGE));
        let mut row: Vec<Cell> = vec![alpha.into(), beta.into()];
        row.extend(beta_cells(&r));
        t.push(row);
    }
    t
}

fn fig5_e3_grid() -> Vec<f64> {
    step_grid(1.0, 10.0, 0.05)
}

/// Plateau value at `α = 20` against `E3` (`E1 = -1`, `E2 = 0`), with the
/// root of the asymptotic equation and its bounds.
pub fn fig5a_data() -> Table {
    let mut header = vec![
        "E3",
        "beta_bar",
        "lower_bound",
        "upper_bound",
        "alpha",
        "beta",
    ];
    header.extend(BETA_COLUMNS);
    let mut t = Table::new(header);
    let ab = AlphaBeta::new(20.0, 1.0).expect("finite");
    for e3 in fig5_e3_grid() {
        let e = spectrum([-1.0, 0.0, e3]);
        let bar = beta_bar_asymptotic(&e).expect("three levels");
        let (lo, hi) = beta_bar_bounds(&e).expect("three levels");
        let r = alphabeta_to_populations(ab, &e)
            .and_then(|s| beta_eff_closed_form(&s, &e, DEFAULT_SEARCH_RANGE));
        let mut row: Vec<Cell> = vec![
            e3.into(),
            bar.into(),
            lo.into(),
            hi.into(),
            ab.alpha.into(),
            ab.beta.into(),
        ];
        row.extend(beta_cells(&r));
        t.push(row);
    }
    t
}

/// Least-squares slope of closed-form `β_eff` over `α ∈ [-30, -20]`
/// (step 0.5) at `β = 1`.
pub fn negative_alpha_slope(e: &EnergySpectrum) -> Result<f64> {
    let alphas = step_grid(-30.0, -20.0, 0.5);
    let values = alphas
        .iter()
        .map(|&a| {
            let s = alphabeta_to_populations(AlphaBeta::new(a, 1.0)?, e)?;
            Ok(beta_eff_closed_form(&s, e, DEFAULT_SEARCH_RANGE)?.value)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(linear_fit(&alphas, &values).0)
}

/// `r·v` against `E3`: fitted from the large-negative-`α` slope, and from
/// `E1 + E3 - 2E2`.
pub fn fig5b_data() -> Table {
    let mut t = Table::new(["E3", "rv_fit", "rv_formula", "flag"]);
    for e3 in fig5_e3_grid() {
        let e = spectrum([-1.0, 0.0, e3]);
        let v = e.norm_v().expect("three levels");
        let formula = slope_r(&e).expect("three levels") * v;
        let (fit, flag): (Cell, Cell) = match negative_alpha_slope(&e) {
            Ok(s) => ((s * v).into(), "".into()),
            Err(err) => ("".into(), err.to_string().into()),
        };
        t.push(vec![e3.into(), fit, formula.into(), flag]);
    }
    t
}

/// Closed-form `β_eff` against `q ∈ [0, 1]` for the three edge-state
/// families.
pub fn fig6_data(levels: [f64; 3]) -> Table {
    let e = spectrum(levels);
    let mut header = vec!["q".to_string()];
    for p in EdgePair::ALL {
        header.extend(BETA_COLUMNS.iter().map(|c| format!("{c}_{p}")));
    }
    let mut t = Table::new(header);
    for q in epsilon_grid(0.0, 1.0, 101) {
        let mut row: Vec<Cell> = vec![q.into()];
        for p in EdgePair::ALL {
            let r =
                edge_state(q, p).and_then(|s| beta_eff_closed_form(&s, &e, DEFAULT_SEARCH_RANGE));
            row.extend(beta_cells(&r));
        }
        t.push(row);
    }
    t
}

fn joint_table(parts: &[(&str, &JointOutcomeDistribution)], levels: &[f64]) -> Table {
    let mut t = Table::new([
        "source",
        "n",
        "m",
        "E_n",
        "E_m",
        "Q",
        "probability",
        "stderr",
    ]);
    for (label, p) in parts {
        for n in 0..p.dim() {
            for m in 0..p.dim() {
                t.push(vec![
                    (*label).into(),
                    (n + 1).into(),
                    (m + 1).into(),
                    levels[n].into(),
                    levels[m].into(),
                    (levels[m] - levels[n]).into(),
                    p.get(m, n).into(),
                    p.stderr(m, n).into(),
                ]);
            }
        }
    }
    t
}

/// Writes the datasets of `id` into `out` and returns their paths.
pub fn reproduce(
    id: FigureId,
    out: &Path,
    opts: &GlobalOptions,
) -> std::result::Result<Vec<PathBuf>, CliError> {
    let seed = opts.seed.unwrap_or(0);
    let workers = opts.workers.unwrap_or(1).max(1);
    let format = opts.format.unwrap_or(TableFormat::Csv);
    let name = id.as_str();
    let mut files = Vec::new();
    let mut params = json!({});
    match id {
        FigureId::Fig1 => {
            let mut t = Table::new(["a2", "c1", "G_mc", "stderr", "G_exact"]);
            let mut x = Table::new(["a2", "c1_crossing_fit", "c1_crossing_exact", "c1_thermal"]);
            let thermal = 1.0 / (1.0 + (-2.0 * FIG1_BETA).exp());
            for a2 in FIG1_DEFAULT_A2 {
                let c = fig1_data(a2, seed, workers)?;
                for k in 0..c.c1.len() {
                    t.push(vec![
                        a2.into(),
                        c.c1[k].into(),
                        c.g_mc[k].into(),
                        c.stderr[k].into(),
                        c.g_exact[k].into(),
                    ]);
                }
                x.push(vec![
                    a2.into(),
                    c.crossing_fit.into(),
                    c.crossing_exact.into(),
                    thermal.into(),
                ]);
            }
            files.push(t.write(out, name, format)?);
            files.push(x.write(out, &format!("{name}_crossings"), format)?);
            params = json!({
                "hamiltonian": "sigma_x", "levels": [-1.0, 1.0], "M": FIG1_M, "tau": FIG1_TAU,
                "beta": FIG1_BETA, "realizations_per_point": FIG1_REALIZATIONS,
                "a2": FIG1_DEFAULT_A2, "c1_points": FIG1_POINTS,
                "seed_rule": "master_seed + point index",
            });
        }
        FigureId::Fig2 => {
            let d = fig2_data(seed, workers, CHAIN_REALIZATIONS)?;
            let mut t = Table::new([
                "level",
                "E",
                "initial_mc",
                "final_mc",
                "initial_exact",
                "final_exact",
            ]);
            let (im, fm) = (
                d.monte_carlo.initial_marginal(),
                d.monte_carlo.final_marginal(),
            );
            let (ie, fe) = (d.exact.initial_marginal(), d.exact.final_marginal());
            for k in 0..d.levels.len() {
                t.push(vec![
                    (k + 1).into(),
                    d.levels[k].into(),
                    im[k].into(),
                    fm[k].into(),
                    ie[k].into(),
                    fe[k].into(),
                ]);
            }
            files.push(t.write(out, &format!("{name}_marginals"), format)?);
            let joint = joint_table(
                &[("monte-carlo", &d.monte_carlo), ("exact", &d.exact)],
                &d.levels,
            );
            files.push(joint.write(out, &format!("{name}_joint"), format)?);
            let e = EnergySpectrum::new(d.levels.clone())?;
            let mut h = Table::new(["Q", "probability", "count"]);
            for bin in d.monte_carlo.heat_histogram(&e) {
                h.push(vec![
                    bin.heat.into(),
                    bin.probability.into(),
                    (bin.count as usize).into(),
                ]);
            }
            files.push(h.write(out, &format!("{name}_heat"), format)?);
            params = reference_params(false);
        }
        FigureId::Fig3a | FigureId::Fig3b => {
            let squared = id == FigureId::Fig3b;
            let d = fig3_data(squared, seed, workers, CHAIN_REALIZATIONS)?;
            let mut t = Table::new(["epsilon", "G_mc", "stderr", "G_closed_form", "G_exact"]);
            for k in 0..d.epsilons.len() {
                t.push(vec![
                    d.epsilons[k].into(),
                    d.g_mc[k].into(),
                    d.stderr[k].into(),
                    d.g_closed_form[k].into(),
                    d.g_exact[k].into(),
                ]);
            }
            files.push(t.write(out, name, format)?);
            params = reference_params(squared);
            params["alpha"] = json!(d.alpha_beta.alpha);
            params["beta"] = json!(d.alpha_beta.beta);
        }
        FigureId::Fig4a | FigureId::Fig4b | FigureId::Fig4c => {
            let levels = id.panel_levels().expect("fig4 panel");
            for beta in FIG4_BETAS {
                let t = fig4_data(levels, beta);
                files.push(t.write(out, &format!("{name}_beta_{beta:.1}"), format)?);
            }
            params =
                json!({ "levels": levels, "betas": FIG4_BETAS, "alpha_grid": [-30.0, 30.0, 0.25] });
        }
        FigureId::Fig5a => {
            files.push(fig5a_data().write(out, name, format)?);
            params = json!({ "levels": "(-1, 0, E3)", "E3_grid": [1.0, 10.0, 0.05], "alpha": 20.0, "beta": 1.0 });
        }
        FigureId::Fig5b => {
            files.push(fig5b_data().write(out, name, format)?);
            params = json!({ "levels": "(-1, 0, E3)", "E3_grid": [1.0, 10.0, 0.05], "alpha_fit_range": [-30.0, -20.0, 0.5], "beta": 1.0 });
        }
        FigureId::Fig6a | FigureId::Fig6b | FigureId::Fig6c => {
            let levels = id.panel_levels().expect("fig6 panel");
            files.push(fig6_data(levels).write(out, name, format)?);
            params = json!({ "levels": levels, "q_points": 101 });
        }
    }
    let provenance = json!({
        "figure": name,
        "parameters": params,
        "master_seed": seed,
        "workers": workers,
        "engine": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
    });
    let path = out.join(format!("{name}_provenance.json"));
    let mut bytes = serde_json::to_vec_pretty(&provenance).expect("serializable");
    bytes.push(b'\n');
    write_atomic(&path, &bytes)?;
    files.push(path);
    Ok(files)
}

fn reference_params(squared: bool) -> serde_json::Value {
    json!({
        "hamiltonian": if squared { "Sz^2 + 0.5 Sx" } else { "Sz + 0.5 Sx" },
        "observable": "Sz",
        "M": CHAIN_M,
        "tau": CHAIN_TAU,
        "initial_populations": REFERENCE_STATE,
        "realizations": CHAIN_REALIZATIONS,
    })
}
