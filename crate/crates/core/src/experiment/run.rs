use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};

use super::{write_atomic, CliError, ExperimentConfig, GlobalOptions, Table};
use crate::analysis::{
    beta_eff_closed_form, beta_eff_from_joint, closed_form_curve, exact_curve, BetaEffResult,
    CharacteristicCurve,
};
use crate::error::Result as CoreResult;
use crate::model::EnergySpectrum;
use crate::protocol::{
    exact_joint, run_monte_carlo, ChainBuilder, JointOutcomeDistribution, JointSource,
    MonteCarloConfig, WaitingTimeSpec,
};

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Value,
    /// Set when a `β_eff` root search failed; the datasets are still written.
    pub numeric_failure: Option<crate::Error>,
}

fn source_label(source: JointSource) -> &'static str {
    match source {
        JointSource::Exact => "exact",
        JointSource::MonteCarlo { .. } => "monte-carlo",
    }
}

fn joint_rows(table: &mut Table, p: &JointOutcomeDistribution, e: &EnergySpectrum) {
    let levels = e.levels();
    let label = source_label(p.source());
    for n in 0..p.dim() {
        for m in 0..p.dim() {
            table.push(vec![
                label.into(),
                (n + 1).into(),
                (m + 1).into(),
                levels[n].into(),
                levels[m].into(),
                e.heat(m, n).into(),
                p.get(m, n).into(),
                p.stderr(m, n).into(),
            ]);
        }
    }
}

fn curve_rows(table: &mut Table, c: &CharacteristicCurve) {
    for ((&x, &g), &se) in c.epsilons.iter().zip(&c.values).zip(&c.stderr) {
        table.push(vec![
            x.into(),
            g.into(),
            se.into(),
            c.provenance.as_str().into(),
        ]);
    }
}

fn beta_eff_json(r: &CoreResult<BetaEffResult>) -> Value {
    match r {
        Ok(b) => json!({
            "value": b.value,
            "degenerate": b.degenerate,
            "residual": b.residual,
            "bracket": b.bracket.map(|(lo, hi)| vec![lo, hi]),
            "slope_at_zero": b.slope_at_zero,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Executes one configured experiment and writes its joint distribution,
/// characteristic curves and summary.
pub fn run_experiment(
    config: &ExperimentConfig,
    opts: &GlobalOptions,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let mut config = config.clone();
    config.apply_overrides(opts);
    let x = config.resolve()?;
    let run = &config.run;
    let m = config.protocol.m;
    let e = &x.spectrum;

    let builder = ChainBuilder::new(&x.hamiltonian, &x.observable, x.placement)?;
    let mut joints = Vec::new();
    let mut diagnostics = json!({ "shares_eigenvector": false });
    if run.mode.exact() {
        let tau = match x.waiting {
            WaitingTimeSpec::Fixed(t) => t,
            _ => unreachable!("rejected by resolve"),
        };
        let chain = builder.build(&vec![tau; m])?;
        diagnostics = json!({
            "shares_eigenvector": chain.shares_eigenvector(),
            "max_stochastic_defect": chain.max_stochastic_defect(),
        });
        joints.push(exact_joint(&x.state, &chain)?);
    }
    if run.mode.monte_carlo() {
        let mc = MonteCarloConfig {
            realizations: run.realizations,
            master_seed: run.master_seed,
            workers: run.workers,
            placement: x.placement,
        };
        let out = run_monte_carlo(&x.state, &x.hamiltonian, &x.observable, x.waiting, m, &mc)?;
        joints.push(out.joint);
    }

    let mut joint_table = Table::new([
        "source",
        "n",
        "m",
        "E_n",
        "E_m",
        "Q",
        "probability",
        "stderr",
    ]);
    let mut curve_table = Table::new(["epsilon", "G", "stderr", "provenance"]);
    let mut beta = serde_json::Map::new();
    let mut marginals = serde_json::Map::new();
    let mut failure = None;
    for p in &joints {
        joint_rows(&mut joint_table, p, e);
        curve_rows(&mut curve_table, &exact_curve(p, e, &x.epsilons));
        let r = beta_eff_from_joint(p, e, x.search_range);
        beta.insert(source_label(p.source()).into(), beta_eff_json(&r));
        marginals.insert(source_label(p.source()).into(), json!(p.final_marginal()));
        if let Err(err) = r {
            failure.get_or_insert(err);
        }
    }
    curve_rows(
        &mut curve_table,
        &closed_form_curve(&x.state, e, &x.epsilons)?,
    );
    let r = beta_eff_closed_form(&x.state, e, x.search_range);
    beta.insert("closed-form".into(), beta_eff_json(&r));
    if let Err(err) = r {
        failure.get_or_insert(err);
    }

    let dir = &config.outputs.dir;
    let prefix = &config.outputs.prefix;
    let format = config.outputs.table_format();
    let mut files = vec![
        joint_table.write(dir, &format!("{prefix}_joint"), format)?,
        curve_table.write(dir, &format!("{prefix}_characteristic"), format)?,
    ];

    let summary = json!({
        "levels": e.levels(),
        "initial_populations": x.state.populations(),
        "measurements": m,
        "beta_eff": beta,
        "final_marginal": marginals,
        "diagnostics": diagnostics,
        "provenance": {
            "config_hash": config.hash(),
            "master_seed": run.master_seed,
            "workers": run.workers,
            "realizations": if run.mode.monte_carlo() { Some(run.realizations) } else { None },
            "mode": run.mode,
            "engine": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_seconds": started.elapsed().as_secs_f64(),
        },
    });
    let summary_path = dir.join(format!("{prefix}_summary.json"));
    let mut bytes = serde_json::to_vec_pretty(&summary).expect("serializable");
    bytes.push(b'\n');
    write_atomic(&summary_path, &bytes)?;
    files.push(summary_path);

    Ok(RunReport {
        files,
        summary,
        numeric_failure: failure,
    })
}
