//! Physical model: spectra, observables and initial-state parametrizations.
//!
//! Energies are always kept in ascending order. For three levels the
//! populations can be written through a thermal component `beta` and a
//! non-thermal component `alpha`:
//!
//! ```text
//! c_k ∝ exp(-beta E_k + (alpha / v) g_k),  g = ((E2-E3)², (E3-E1)², (E1-E2)²)
//! ```
//!
//! with `v² = 3(Δ1² + Δ2² + Δ3²)` and `Δ = (E2-E1, E3-E2, E1-E3)`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, CMatrix, EigenSystem, HermitianMatrix, UnitaryMatrix, C64};

/// Minimum spacing between consecutive energy levels.
pub const MIN_LEVEL_GAP: f64 = 1e-9;
/// Populations below this are treated as exactly zero.
pub const ZERO_POPULATION_CUTOFF: f64 = 1e-300;
const NORMALIZATION_TOL: f64 = 1e-12;

/// Nondegenerate energy levels, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidDimension(levels.len()));
        }
        if let Some(bad) = levels.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("energy level {bad}")));
        }
        let min_gap = levels
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if min_gap <= MIN_LEVEL_GAP {
            return Err(Error::DegenerateSpectrum { min_gap });
        }
        Ok(Self { levels })
    }

    pub fn from_eigensystem(es: &EigenSystem) -> Result<Self> {
        Self::new(es.values.clone())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn require_three(&self) -> Result<[f64; 3]> {
        match self.levels[..] {
            [e1, e2, e3] => Ok([e1, e2, e3]),
            _ => Err(Error::RequiresThreeLevels(self.len())),
        }
    }

    /// `(Δ1, Δ2, Δ3) = (E2-E1, E3-E2, E1-E3)`; sums to zero.
    pub fn gaps(&self) -> Result<[f64; 3]> {
        let [e1, e2, e3] = self.require_three()?;
        let d1 = e2 - e1;
        let d2 = e3 - e2;
        Ok([d1, d2, -(d1 + d2)])
    }

    /// Normalization `v = sqrt(3(Δ1² + Δ2² + Δ3²))`.
    pub fn norm_v(&self) -> Result<f64> {
        let d = self.gaps()?;
        Ok((3.0 * d.iter().map(|x| x * x).sum::<f64>()).sqrt())
    }

    /// Squared gap of the two levels other than `k`, in the pairing used by
    /// the (alpha, beta) populations.
    fn complementary_gaps_sq(&self) -> Result<[f64; 3]> {
        let [e1, e2, e3] = self.require_three()?;
        Ok([(e2 - e3).powi(2), (e3 - e1).powi(2), (e1 - e2).powi(2)])
    }

    /// `ln Z(beta)`, evaluated with a max shift.
    pub fn ln_partition(&self, beta: f64) -> f64 {
        log_sum_exp(self.levels.iter().map(|&e| -beta * e))
    }

    pub fn partition(&self, beta: f64) -> f64 {
        self.ln_partition(beta).exp()
    }

    /// `E'_k = -E_{N-1-k}`: the spectrum reflected through zero, re-sorted.
    pub fn mirrored(&self) -> Self {
        Self {
            levels: self.levels.iter().rev().map(|&e| -e).collect(),
        }
    }

    /// Heat `E_m - E_n`.
    pub fn heat(&self, final_index: usize, first_index: usize) -> f64 {
        self.levels[final_index] - self.levels[first_index]
    }
}

/// Measured operator: outcomes and eigenvectors written in the energy basis
/// (column `k` is `|Ω_k⟩`).
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    outcomes: Vec<f64>,
    eigenbasis: UnitaryMatrix,
}

impl Observable {
    pub fn new(outcomes: Vec<f64>, eigenbasis: UnitaryMatrix) -> Result<Self> {
        if outcomes.len() != eigenbasis.dim() {
            return Err(Error::DimensionMismatch {
                expected: eigenbasis.dim(),
                actual: outcomes.len(),
            });
        }
        for (i, a) in outcomes.iter().enumerate() {
            if outcomes[i + 1..]
                .iter()
                .any(|b| (a - b).abs() <= MIN_LEVEL_GAP)
            {
                return Err(Error::InvalidSpec(format!(
                    "observable outcomes must be distinct, {a} repeats"
                )));
            }
        }
        Ok(Self {
            outcomes,
            eigenbasis,
        })
    }

    /// Diagonalizes `op` (given in the same basis as `h`) and re-expresses
    /// its eigenvectors in the ordered energy eigenbasis of `h`.
    pub fn from_operator(op: &HermitianMatrix, h: &EigenSystem) -> Result<Self> {
        if op.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                actual: op.dim(),
            });
        }
        let es = eig_hermitian(op)?;
        let in_energy = h.vectors.adjoint().compose(&es.vectors);
        Self::new(es.values, UnitaryMatrix::new(in_energy.matrix().clone())?)
    }

    /// Two-level observable with `|Ω1⟩ = a|E1⟩ - b|E2⟩`, `|Ω2⟩ = b|E1⟩ + a|E2⟩`,
    /// `a, b` real and `|a|² = a2`. Outcomes are (-1, +1).
    pub fn two_level_mixing(a2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a2) {
            return Err(Error::InvalidSpec(format!("|a|^2 = {a2} outside [0, 1]")));
        }
        let a = a2.sqrt();
        let b = (1.0 - a2).sqrt();
        let basis = CMatrix::from_real_rows(&[vec![a, b], vec![-b, a]])?;
        Self::new(vec![-1.0, 1.0], UnitaryMatrix::new(basis)?)
    }

    /// Observable diagonal in the energy basis.
    pub fn commuting(outcomes: Vec<f64>) -> Result<Self> {
        let n = outcomes.len();
        Self::new(outcomes, UnitaryMatrix::identity(n))
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn eigenbasis(&self) -> &UnitaryMatrix {
        &self.eigenbasis
    }

    pub fn dim(&self) -> usize {
        self.outcomes.len()
    }

    /// `max_{j,k} |⟨Ω_j|E_k⟩|²`. Close to one means an eigenvector is shared
    /// with the Hamiltonian.
    pub fn max_energy_overlap(&self) -> f64 {
        let w = self.eigenbasis.matrix();
        let n = w.dim();
        (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|rc| w[rc].norm_sqr())
            .fold(0.0, f64::max)
    }
}

/// Diagonal populations `c_k` of the initial state in the energy basis.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    populations: Vec<f64>,
}

impl InitialState {
    pub fn new(mut populations: Vec<f64>) -> Result<Self> {
        if populations.len() < 2 {
            return Err(Error::InvalidDimension(populations.len()));
        }
        for (k, c) in populations.iter_mut().enumerate() {
            if !c.is_finite() || *c < 0.0 {
                return Err(Error::InvalidPopulations(format!(
                    "c[{}] = {c} must be finite and non-negative",
                    k + 1
                )));
            }
            if *c < ZERO_POPULATION_CUTOFF {
                *c = 0.0;
            }
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidPopulations(format!(
                "populations sum to {total}, expected 1"
            )));
        }
        Ok(Self { populations })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            populations: vec![1.0 / n as f64; n],
        }
    }

    /// Normalizes `exp(x_k)` with a max shift.
    fn from_log_weights(x: &[f64]) -> Self {
        let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
        let total: f64 = w.iter().sum();
        Self {
            populations: w.into_iter().map(|v| v / total).collect(),
        }
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    pub fn has_zero_population(&self) -> bool {
        self.populations.contains(&0.0)
    }

    pub fn reversed(&self) -> Self {
        Self {
            populations: self.populations.iter().rev().cloned().collect(),
        }
    }
}

/// Thermal (`beta`) and non-thermal (`alpha`) components of a 3-level state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

impl AlphaBeta {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::NonFinite(format!("alpha = {alpha}, beta = {beta}")));
        }
        Ok(Self { alpha, beta })
    }
}

/// Which two levels carry the population of an edge state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgePair {
    P12,
    P13,
    P23,
}

impl EdgePair {
    pub const ALL: [EdgePair; 3] = [EdgePair::P12, EdgePair::P13, EdgePair::P23];

    fn indices(self) -> (usize, usize) {
        match self {
            EdgePair::P12 => (0, 1),
            EdgePair::P13 => (0, 2),
            EdgePair::P23 => (1, 2),
        }
    }
}

impl FromStr for EdgePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "12" => Ok(EdgePair::P12),
            "13" => Ok(EdgePair::P13),
            "23" => Ok(EdgePair::P23),
            other => Err(Error::InvalidSpec(format!(
                "edge pair must be one of 12, 13, 23, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for EdgePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgePair::P12 => "12",
            EdgePair::P13 => "13",
            EdgePair::P23 => "23",
        })
    }
}

/// Spin-1 `S_z = diag(1, 0, -1)` and `S_x` in the `S_z` eigenbasis.
pub fn spin1_operators() -> (HermitianMatrix, HermitianMatrix) {
    let s = FRAC_1_SQRT_2;
    let sz = HermitianMatrix::from_real_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0],
        vec![0.0, 0.0, -1.0],
    ])
    .expect("S_z is Hermitian");
    let sx =
        HermitianMatrix::from_real_rows(&[vec![0.0, s, 0.0], vec![s, 0.0, s], vec![0.0, s, 0.0]])
            .expect("S_x is Hermitian");
    (sz, sx)
}

/// Spin-1 `S_y`, for commutator checks.
pub fn spin1_sy() -> HermitianMatrix {
    let s = C64::new(0.0, FRAC_1_SQRT_2);
    let z = C64::new(0.0, 0.0);
    HermitianMatrix::new(
        CMatrix::from_rows(&[vec![z, -s, z], vec![s, z, -s], vec![z, s, z]]).expect("square"),
    )
    .expect("S_y is Hermitian")
}

/// Partial effective temperatures `b_k`, from `c2/c1 = e^{-b1 Δ1}`,
/// `c3/c2 = e^{-b2 Δ2}`, `c1/c3 = e^{-b3 Δ3}`.
pub fn partial_temperatures(s: &InitialState, e: &EnergySpectrum) -> Result<[f64; 3]> {
    let d = e.gaps()?;
    let c = strictly_positive_three(s)?;
    Ok([
        -(c[1] / c[0]).ln() / d[0],
        -(c[2] / c[1]).ln() / d[1],
        -(c[0] / c[2]).ln() / d[2],
    ])
}

fn strictly_positive_three(s: &InitialState) -> Result<[f64; 3]> {
    match s.populations()[..] {
        [c1, c2, c3] => {
            for (index, &value) in [c1, c2, c3].iter().enumerate() {
                if value <= 0.0 {
                    return Err(Error::ZeroPopulation { index, value });
                }
            }
            Ok([c1, c2, c3])
        }
        _ => Err(Error::RequiresThreeLevels(s.len())),
    }
}

fn alphabeta_exponents(ab: AlphaBeta, e: &EnergySpectrum) -> Result<[f64; 3]> {
    let g = e.complementary_gaps_sq()?;
    let v = e.norm_v()?;
    let lv = e.levels();
    Ok([
        -ab.beta * lv[0] + ab.alpha / v * g[0],
        -ab.beta * lv[1] + ab.alpha / v * g[1],
        -ab.beta * lv[2] + ab.alpha / v * g[2],
    ])
}

pub fn alphabeta_to_populations(ab: AlphaBeta, e: &EnergySpectrum) -> Result<InitialState> {
    let x = alphabeta_exponents(ab, e)?;
    Ok(InitialState::from_log_weights(&x))
}

/// Inverse of [`alphabeta_to_populations`]: `beta` is the mean of the `b_k`
/// and `alpha` the projection of `b - beta(1,1,1)` onto
/// `d = (Δ3-Δ2, Δ1-Δ3, Δ2-Δ1)`, scaled by `v`.
pub fn populations_to_alphabeta(s: &InitialState, e: &EnergySpectrum) -> Result<AlphaBeta> {
    let b = partial_temperatures(s, e)?;
    let [d1, d2, d3] = e.gaps()?;
    let v = e.norm_v()?;
    let dir = [d3 - d2, d1 - d3, d2 - d1];
    let dd: f64 = dir.iter().map(|x| x * x).sum();
    if dd <= f64::EPSILON * v * v {
        return Err(Error::DegenerateDirection);
    }
    let beta = b.iter().sum::<f64>() / 3.0;
    let centered = [b[0] - beta, b[1] - beta, b[2] - beta];
    let coef = centered.iter().zip(&dir).map(|(x, y)| x * y).sum::<f64>() / dd;
    let alpha = v * coef;

    let scale = b.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let residual = centered
        .iter()
        .zip(&dir)
        .map(|(x, y)| (x - coef * y).abs())
        .fold(0.0, f64::max);
    if residual > 1e-9 * scale {
        return Err(Error::InvalidPopulations(format!(
            "partial temperatures leave the (alpha, beta) plane (residual {residual:e})"
        )));
    }
    AlphaBeta::new(alpha, beta)
}

/// `ln Z̃(alpha, beta)`.
pub fn ln_pseudo_partition(ab: AlphaBeta, e: &EnergySpectrum) -> Result<f64> {
    let x = alphabeta_exponents(ab, e)?;
    Ok(log_sum_exp(x.into_iter()))
}

/// Pseudo-partition function `Z̃(alpha, beta)`; reduces to `Z(beta)` at `alpha = 0`.
pub fn pseudo_partition(ab: AlphaBeta, e: &EnergySpectrum) -> Result<f64> {
    Ok(ln_pseudo_partition(ab, e)?.exp())
}

/// `c_k = e^{-beta E_k} / Z(beta)` for any number of levels.
pub fn thermal_state(beta: f64, e: &EnergySpectrum) -> InitialState {
    let x: Vec<f64> = e.levels().iter().map(|&en| -beta * en).collect();
    InitialState::from_log_weights(&x)
}

/// `q` on the first level of `pair`, `1 - q` on the second, zero elsewhere.
pub fn edge_state(q: f64, pair: EdgePair) -> Result<InitialState> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidSpec(format!("q = {q} outside [0, 1]")));
    }
    let (i, j) = pair.indices();
    let mut c = vec![0.0; 3];
    c[i] = q;
    c[j] = 1.0 - q;
    InitialState::new(c)
}

pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_hermitian;

    fn tilted_spectrum() -> EnergySpectrum {
        let (sz, sx) = spin1_operators();
        let h = sz.combine(1.0, &sx, 0.5).unwrap();
        EnergySpectrum::from_eigensystem(&eig_hermitian(&h).unwrap()).unwrap()
    }

    fn spectrum(levels: &[f64]) -> EnergySpectrum {
        EnergySpectrum::new(levels.to_vec()).unwrap()
    }

    #[test]
    fn spin1_spectra_and_commutator() {
        let (sz, sx) = spin1_operators();
        for op in [&sz, &sx] {
            let es = eig_hermitian(op).unwrap();
            for (got, want) in es.values.iter().zip([-1.0, 0.0, 1.0]) {
                assert!((got - want).abs() < 1e-12);
            }
        }
        let comm = sz
            .matrix()
            .matmul(sx.matrix())
            .add(&sx.matrix().matmul(sz.matrix()).scale(C64::new(-1.0, 0.0)));
        let i_sy = spin1_sy().matrix().scale(C64::new(0.0, 1.0));
        assert!(comm.max_abs_diff(&i_sy) < 1e-15);

        let levels = tilted_spectrum();
        let r = 1.25f64.sqrt();
        for (got, want) in levels.levels().iter().zip([-r, 0.0, r]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_spectrum_rejected() {
        assert!(matches!(
            EnergySpectrum::new(vec![0.0, 0.0, 1.0]),
            Err(Error::DegenerateSpectrum { .. })
        ));
        assert!(EnergySpectrum::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn gaps_sum_to_zero() {
        let e = spectrum(&[-1.3, 0.2, 2.9]);
        let d = e.gaps().unwrap();
        assert_eq!(d.iter().sum::<f64>(), 0.0);
        assert!(e.norm_v().unwrap() > 0.0);
        assert!(matches!(
            spectrum(&[0.0, 1.0]).gaps(),
            Err(Error::RequiresThreeLevels(2))
        ));
    }

    #[test]
    fn thermal_partial_temperatures_equal_beta() {
        let e = spectrum(&[-1.0, 0.0, 3.0]);
        let b = partial_temperatures(&thermal_state(0.85, &e), &e).unwrap();
        for bk in b {
            assert!((bk - 0.85).abs() < 1e-12);
        }
        let b = partial_temperatures(&InitialState::uniform(3), &e).unwrap();
        assert!(b.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn partial_temperatures_of_reference_state() {
        let e = tilted_spectrum();
        let s = InitialState::new(vec![0.8, 0.01, 0.19]).unwrap();
        let b = partial_temperatures(&s, &e).unwrap();
        let r = 1.25f64.sqrt();
        assert!((b[0] - 80f64.ln() / r).abs() < 1e-10);
        assert!((b[1] + 19f64.ln() / r).abs() < 1e-10);
        assert!((b[2] - (0.8f64 / 0.19).ln() / (2.0 * r)).abs() < 1e-10);
        assert!((b[0] - 3.9195).abs() < 1e-4);
        assert!((b[1] + 2.6336).abs() < 1e-4);
        assert!((b[2] - 0.6429).abs() < 1e-4);
        let d = e.gaps().unwrap();
        let constraint: f64 = b.iter().zip(d).map(|(x, y)| x * y).sum();
        assert!(constraint.abs() < 1e-10);
    }

    #[test]
    fn zero_population_is_singular() {
        let e = spectrum(&[-1.0, 0.0, 1.0]);
        let s = edge_state(0.3, EdgePair::P12).unwrap();
        assert!(matches!(
            partial_temperatures(&s, &e),
            Err(Error::ZeroPopulation { index: 2, .. })
        ));
        assert!(populations_to_alphabeta(&s, &e).is_err());
    }

    #[test]
    fn alpha_zero_is_thermal() {
        let e = spectrum(&[-1.0, 0.0, 3.0]);
        for beta in [-1.2, 0.0, 0.4, 2.5] {
            let c = alphabeta_to_populations(AlphaBeta::new(0.0, beta).unwrap(), &e).unwrap();
            let t = thermal_state(beta, &e);
            for (a, b) in c.populations().iter().zip(t.populations()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn positive_alpha_favours_middle_level() {
        let e = spectrum(&[-1.0, 0.0, 1.0]);
        let c = alphabeta_to_populations(AlphaBeta::new(0.8, 0.0).unwrap(), &e).unwrap();
        let c = c.populations();
        assert!(c[1] > c[0] && c[1] > c[2]);
        assert!((c[0] - c[2]).abs() < 1e-15);
        let c = alphabeta_to_populations(AlphaBeta::new(-0.8, 0.0).unwrap(), &e).unwrap();
        let c = c.populations();
        assert!(c[1] < c[0] && c[1] < c[2]);
    }

    #[test]
    fn alphabeta_round_trip() {
        let e = spectrum(&[-1.0, 0.0, 3.0]);
        let ab = AlphaBeta::new(0.7, 1.3).unwrap();
        let back =
            populations_to_alphabeta(&alphabeta_to_populations(ab, &e).unwrap(), &e).unwrap();
        assert!((back.alpha - 0.7).abs() < 1e-10);
        assert!((back.beta - 1.3).abs() < 1e-10);
    }

    #[test]
    fn reference_state_alphabeta() {
        let e = tilted_spectrum();
        let s = InitialState::new(vec![0.8, 0.01, 0.19]).unwrap();
        let ab = populations_to_alphabeta(&s, &e).unwrap();
        // b = (3.9195, -2.6336, 0.6429) projected on (1,1,1) and d = (-3√5/2, 3√5/2, 0)
        let r = 1.25f64.sqrt();
        let b = [
            80f64.ln() / r,
            -(19f64.ln()) / r,
            (0.8f64 / 0.19).ln() / (2.0 * r),
        ];
        let beta = (b[0] + b[1] + b[2]) / 3.0;
        let v = (22.5f64).sqrt();
        let alpha = v * (-(b[0] - beta) + (b[1] - beta)) / 2.0 / (1.5 * 5f64.sqrt());
        assert!((ab.beta - beta).abs() < 1e-12);
        assert!((ab.alpha - alpha).abs() < 1e-10);
        assert!((ab.alpha + 4.632).abs() < 5e-3, "alpha = {}", ab.alpha);
        assert!((ab.beta - 0.643).abs() < 5e-4, "beta = {}", ab.beta);
    }

    #[test]
    fn thermal_and_uniform_map_to_expected_parameters() {
        let e = spectrum(&[-2.0, 0.5, 1.0]);
        let ab = populations_to_alphabeta(&thermal_state(1.7, &e), &e).unwrap();
        assert!(ab.alpha.abs() < 1e-10);
        assert!((ab.beta - 1.7).abs() < 1e-12);
        let ab = populations_to_alphabeta(&InitialState::uniform(3), &e).unwrap();
        assert!(ab.alpha.abs() < 1e-12 && ab.beta.abs() < 1e-12);
    }

    #[test]
    fn pseudo_partition_values() {
        let e = spectrum(&[-1.0, 0.0, 3.0]);
        let z = pseudo_partition(AlphaBeta::new(0.0, 0.9).unwrap(), &e).unwrap();
        assert!((z - e.partition(0.9)).abs() < 1e-12 * z);
        let z = pseudo_partition(AlphaBeta::new(0.0, 0.0).unwrap(), &e).unwrap();
        assert!((z - 3.0).abs() < 1e-14);

        let e = spectrum(&[-1.0, 0.0, 1.0]);
        let v = 18f64.sqrt();
        let want = 2.0 * (1.0 / v).exp() + (4.0 / v).exp();
        let z = pseudo_partition(AlphaBeta::new(1.0, 0.0).unwrap(), &e).unwrap();
        assert!((z - want).abs() < 1e-13);
    }

    #[test]
    fn thermal_state_limits() {
        let e = spectrum(&[-1.0, 0.0, 1.0]);
        let c = thermal_state(0.0, &e);
        assert!(c
            .populations()
            .iter()
            .all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        let c = thermal_state(60.0, &e);
        assert!((c.populations()[0] - 1.0).abs() < 1e-20);
        let c = thermal_state(1.5, &spectrum(&[-1.0, 1.0]));
        assert!((c.populations()[0] - 1.0 / (1.0 + (-3f64).exp())).abs() < 1e-15);
        assert!((c.populations()[0] - 0.95257).abs() < 1e-5);
        // huge beta must not overflow
        let c = thermal_state(800.0, &e);
        assert_eq!(c.populations()[0], 1.0);
    }

    #[test]
    fn edge_states() {
        assert_eq!(
            edge_state(1.0, EdgePair::P13).unwrap().populations(),
            &[1.0, 0.0, 0.0]
        );
        assert_eq!(
            edge_state(0.5, EdgePair::P23).unwrap().populations(),
            &[0.0, 0.5, 0.5]
        );
        assert_eq!(
            edge_state(0.3, EdgePair::P12).unwrap().populations(),
            &[0.3, 0.7, 0.0]
        );
        assert!(edge_state(1.2, EdgePair::P12).is_err());
        assert_eq!("13".parse::<EdgePair>().unwrap(), EdgePair::P13);
        assert!("31".parse::<EdgePair>().is_err());
    }

    #[test]
    fn initial_state_validation() {
        assert!(InitialState::new(vec![0.5, 0.6]).is_err());
        assert!(InitialState::new(vec![1.2, -0.2]).is_err());
        let s = InitialState::new(vec![1.0, 1e-310, 0.0]).unwrap();
        assert!(s.has_zero_population());
        assert_eq!(s.populations()[1], 0.0);
    }

    #[test]
    fn two_level_observable_is_unitary() {
        let o = Observable::two_level_mixing(0.25).unwrap();
        assert!(o.eigenbasis().matrix().unitary_deviation() < 1e-15);
        assert!((o.max_energy_overlap() - 0.75).abs() < 1e-15);
        assert!(Observable::two_level_mixing(1.5).is_err());
    }

    #[test]
    fn observable_from_operator_in_energy_basis() {
        let (sz, sx) = spin1_operators();
        let h = sz.combine(1.0, &sx, 0.5).unwrap();
        let es = eig_hermitian(&h).unwrap();
        let o = Observable::from_operator(&sz, &es).unwrap();
        // O written in the energy basis must equal V† Sz V
        let w = o.eigenbasis().matrix();
        let d = CMatrix::diagonal(
            &o.outcomes()
                .iter()
                .map(|&x| C64::new(x, 0.0))
                .collect::<Vec<_>>(),
        );
        let o_energy = w.matmul(&d).matmul(&w.adjoint());
        let v = es.vectors.matrix();
        let direct = v.adjoint().matmul(sz.matrix()).matmul(v);
        assert!(o_energy.max_abs_diff(&direct) < 1e-10);
        assert!(o.max_energy_overlap() < 1.0 - 1e-3);
    }
}
