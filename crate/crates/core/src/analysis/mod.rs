//! Heat statistics: characteristic functions and the effective inverse
//! temperature `β_eff`, the nonzero root of `G(ε) = 1`.

mod beta_eff;

pub use beta_eff::{
    beta_eff, beta_eff_with_tolerance, BetaEffResult, BETA_EFF_RESIDUAL_TOL, DEFAULT_SEARCH_RANGE,
};

use crate::error::{Error, Result};
use crate::model::{
    ln_pseudo_partition, log_sum_exp, populations_to_alphabeta, AlphaBeta, EnergySpectrum,
    InitialState,
};
use crate::protocol::{JointOutcomeDistribution, JointSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Empirical,
    Exact,
    ClosedForm,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Empirical => "empirical",
            Provenance::Exact => "exact",
            Provenance::ClosedForm => "closed-form",
        }
    }
}

/// `G(ε)` sampled on a grid. `stderr` is zero except for empirical curves.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicCurve {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub provenance: Provenance,
}

/// `points` evenly spaced values from `min` to `max` inclusive.
pub fn epsilon_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..points)
            .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// `G(ε) = Σ p[m][n] e^{-ε(E_m - E_n)}`.
pub fn char_from_joint(p: &JointOutcomeDistribution, e: &EnergySpectrum, eps: f64) -> f64 {
    let n = p.dim();
    let levels = e.levels();
    let spread = levels[levels.len() - 1] - levels[0];
    let pairs = (0..n).flat_map(|m| (0..n).map(move |k| (m, k)));
    if (eps * spread).abs() <= 50.0 {
        pairs
            .map(|(m, k)| p.get(m, k) * (-eps * (levels[m] - levels[k])).exp())
            .sum()
    } else {
        let terms = pairs
            .filter(|&(m, k)| p.get(m, k) > 0.0)
            .map(|(m, k)| p.get(m, k).ln() - eps * (levels[m] - levels[k]));
        log_sum_exp(terms).exp()
    }
}

/// Empirical `G(ε)` and its standard error, from the trajectory-level
/// variance of `e^{-εQ}`.
pub fn empirical_characteristic(
    p: &JointOutcomeDistribution,
    e: &EnergySpectrum,
    eps: f64,
) -> (f64, f64) {
    let g = char_from_joint(p, e, eps);
    let r = match p.source() {
        JointSource::MonteCarlo { realizations } => realizations,
        JointSource::Exact => return (g, 0.0),
    };
    let second = char_from_joint(p, e, 2.0 * eps);
    if r < 2 {
        return (g, f64::INFINITY);
    }
    let r = r as f64;
    let var = ((second - g * g) * r / (r - 1.0)).max(0.0);
    (g, (var / r).sqrt())
}

/// Closed form when the final state is uniform:
/// `G(ε) = (1/N) Σ_n e^{-ε E_n} · Σ_m c_m e^{ε E_m}`.
pub fn char_uniform_limit(s: &InitialState, e: &EnergySpectrum, eps: f64) -> Result<f64> {
    if s.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            actual: s.len(),
        });
    }
    let levels = e.levels();
    let ln_z = e.ln_partition(eps) - (e.len() as f64).ln();
    let weighted = log_sum_exp(
        s.populations()
            .iter()
            .zip(levels)
            .filter(|(&c, _)| c > 0.0)
            .map(|(&c, &en)| c.ln() + eps * en),
    );
    Ok((ln_z + weighted).exp())
}

/// Large-`M` characteristic function through the pseudo-partition function:
/// `G = [Z(ε)/Z(0)]·[Z̃(α, β-ε)/Z̃(α, β)]`.
pub fn char_asymptotic(ab: AlphaBeta, e: &EnergySpectrum, eps: f64) -> Result<f64> {
    let shifted = AlphaBeta::new(ab.alpha, ab.beta - eps)?;
    let ln_g = e.ln_partition(eps) - (e.len() as f64).ln() + ln_pseudo_partition(shifted, e)?
        - ln_pseudo_partition(ab, e)?;
    Ok(ln_g.exp())
}

pub fn exact_curve(
    p: &JointOutcomeDistribution,
    e: &EnergySpectrum,
    epsilons: &[f64],
) -> CharacteristicCurve {
    let (values, stderr): (Vec<f64>, Vec<f64>) = epsilons
        .iter()
        .map(|&x| empirical_characteristic(p, e, x))
        .unzip();
    let provenance = match p.source() {
        JointSource::Exact => Provenance::Exact,
        JointSource::MonteCarlo { .. } => Provenance::Empirical,
    };
    CharacteristicCurve {
        epsilons: epsilons.to_vec(),
        values,
        stderr,
        provenance,
    }
}

pub fn closed_form_curve(
    s: &InitialState,
    e: &EnergySpectrum,
    epsilons: &[f64],
) -> Result<CharacteristicCurve> {
    let values = epsilons
        .iter()
        .map(|&x| char_uniform_limit(s, e, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacteristicCurve {
        epsilons: epsilons.to_vec(),
        stderr: vec![0.0; values.len()],
        values,
        provenance: Provenance::ClosedForm,
    })
}

/// `β_eff` of the large-`M` closed form for populations `s`.
pub fn beta_eff_closed_form(
    s: &InitialState,
    e: &EnergySpectrum,
    search_range: (f64, f64),
) -> Result<BetaEffResult> {
    if s.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            actual: s.len(),
        });
    }
    beta_eff(
        |x| char_uniform_limit(s, e, x).expect("dimensions checked"),
        search_range,
    )
}

/// `β_eff` of a joint distribution. Sampled distributions use a residual
/// tolerance of three standard errors of `G` at the root.
pub fn beta_eff_from_joint(
    p: &JointOutcomeDistribution,
    e: &EnergySpectrum,
    search_range: (f64, f64),
) -> Result<BetaEffResult> {
    match p.source() {
        JointSource::Exact => beta_eff(|x| char_from_joint(p, e, x), search_range),
        JointSource::MonteCarlo { .. } => {
            let provisional =
                beta_eff_with_tolerance(|x| char_from_joint(p, e, x), search_range, f64::INFINITY)?;
            let (_, se) = empirical_characteristic(p, e, provisional.value);
            if provisional.residual > 3.0 * se.max(BETA_EFF_RESIDUAL_TOL) {
                return Err(Error::ResidualTooLarge {
                    residual: provisional.residual,
                    tolerance: 3.0 * se,
                });
            }
            Ok(provisional)
        }
    }
}

/// Root of `e^{-β(E1-E2)} + e^{-β(E3-E2)} = 2`: the plateau of `β_eff` for
/// large positive `α`. Zero for a symmetric spectrum.
pub fn beta_bar_asymptotic(e: &EnergySpectrum) -> Result<f64> {
    let [e1, e2, e3] = three(e)?;
    let lower = e1 - e2;
    let upper = e3 - e2;
    let asym = lower + upper;
    if asym.abs() <= 1e-12 * upper.max(-lower) {
        return Ok(0.0);
    }
    let f = |x: f64| (-x * lower).exp() + (-x * upper).exp() - 2.0;
    // f(0) = 0 and f is convex, negative between 0 and the root
    let (mut inner, mut outer) = if asym > 0.0 {
        (0.0, std::f64::consts::LN_2 / -lower)
    } else {
        (0.0, -std::f64::consts::LN_2 / upper)
    };
    for _ in 0..2000 {
        let mid = 0.5 * (inner + outer);
        if mid == inner || mid == outer {
            break;
        }
        if f(mid) > 0.0 {
            outer = mid;
        } else {
            inner = mid;
        }
    }
    Ok(0.5 * (inner + outer))
}

/// `(-ln2/(E3-E2), ln2/(E2-E1))`, the strict bounds on the plateau value.
pub fn beta_bar_bounds(e: &EnergySpectrum) -> Result<(f64, f64)> {
    let [e1, e2, e3] = three(e)?;
    let ln2 = std::f64::consts::LN_2;
    Ok((-ln2 / (e3 - e2), ln2 / (e2 - e1)))
}

/// Slope of `β_eff` against `α` for large negative `α`: `(E1 + E3 - 2E2)/v`.
pub fn slope_r(e: &EnergySpectrum) -> Result<f64> {
    let [e1, e2, e3] = three(e)?;
    Ok((e1 + e3 - 2.0 * e2) / e.norm_v()?)
}

/// `(α, β)` of `c = (q(1-e^{-Y}), e^{-Y}, (1-q)(1-e^{-Y}))`, which tends to
/// the edge state `q|E1⟩ + (1-q)|E3⟩` as `Y` grows. Both parameters diverge
/// linearly: `α ≈ -v Y / (3 Δ1 Δ2)` and `β/α → -r`.
pub fn edge_alphabeta_divergence(q: f64, e: &EnergySpectrum, y: f64) -> Result<AlphaBeta> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidSpec(format!("q = {q} must lie in (0, 1)")));
    }
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidSpec(format!("Y = {y} must be positive")));
    }
    let small = (-y).exp();
    let rest = -(-y).exp_m1();
    let s = InitialState::new(vec![q * rest, small, (1.0 - q) * rest])?;
    populations_to_alphabeta(&s, e)
}

/// Leading coefficient of `α/Y` in [`edge_alphabeta_divergence`].
pub fn edge_alpha_rate(e: &EnergySpectrum) -> Result<f64> {
    let [d1, d2, _] = e.gaps()?;
    Ok(-e.norm_v()? / (3.0 * d1 * d2))
}

/// `-Σ c_k ln c_k` with `0 ln 0 = 0`.
pub fn shannon_entropy(s: &InitialState) -> f64 {
    -s.populations()
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| c * c.ln())
        .sum::<f64>()
}

/// Ordinary least-squares line `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn three(e: &EnergySpectrum) -> Result<[f64; 3]> {
    match e.levels()[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => Err(Error::RequiresThreeLevels(e.len())),
    }
}
