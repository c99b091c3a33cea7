//! Two-point energy measurement with `M` intermediate projective
//! measurements of an observable, as a chain of unistochastic kernels.
//!
//! Every kernel is column-indexed by the previous outcome and row-indexed by
//! the next one, so `p = B·T⁽ᴹ⁻¹⁾···T⁽¹⁾·A·diag(c)`.

mod sampling;

pub use sampling::{
    run_monte_carlo, sample_trajectory, trajectory_rng, MonteCarloConfig, MonteCarloRun,
    TrajectoryRecord, TrajectoryRng, WaitingTimeSpec,
};

use crate::error::{Error, Result};
use crate::linalg::{overlap_stochastic, propagator, EigenSystem, RealMatrix, UnitaryMatrix};
use crate::model::{EnergySpectrum, InitialState, Observable};

/// Overlap above which an observable eigenvector counts as an energy eigenvector.
pub const SHARED_EIGENVECTOR_THRESHOLD: f64 = 1.0 - 1e-10;

/// Where the first waiting time is spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstEvolution {
    /// `U(τ1)` acts between the first energy measurement and the first
    /// observable measurement; `τ2..τM` separate the observable measurements.
    #[default]
    BeforeFirstMeasurement,
    /// The first observable measurement follows the energy measurement
    /// immediately; `τ1..τ(M-1)` separate the observable measurements and
    /// `τM` is unused.
    BetweenMeasurementsOnly,
}

/// The kernels of one protocol realization.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementChain {
    dim: usize,
    /// `[A, T⁽¹⁾, …, T⁽ᴹ⁻¹⁾, B]`, or empty when `M = 0`.
    steps: Vec<RealMatrix>,
    shares_eigenvector: bool,
}

impl MeasurementChain {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of observable measurements.
    pub fn measurements(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Energy basis to observable basis.
    pub fn first(&self) -> Option<&RealMatrix> {
        self.steps.first()
    }

    pub fn middle(&self) -> &[RealMatrix] {
        match self.steps.len() {
            0..=2 => &[],
            n => &self.steps[1..n - 1],
        }
    }

    /// Observable basis to energy basis.
    pub fn last(&self) -> Option<&RealMatrix> {
        if self.steps.len() >= 2 {
            self.steps.last()
        } else {
            None
        }
    }

    pub fn steps(&self) -> &[RealMatrix] {
        &self.steps
    }

    /// Set when the observable shares an eigenvector with the Hamiltonian;
    /// the chain can then lock into that state and never equilibrate.
    pub fn shares_eigenvector(&self) -> bool {
        self.shares_eigenvector
    }

    /// Worst row/column-sum defect over all kernels.
    pub fn max_stochastic_defect(&self) -> f64 {
        self.steps
            .iter()
            .map(RealMatrix::doubly_stochastic_defect)
            .fold(0.0, f64::max)
    }

    /// Pushes a distribution over initial energy levels through the chain.
    fn propagate(&self, mut v: Vec<f64>) -> Vec<f64> {
        for t in &self.steps {
            let n = t.dim();
            let mut next = vec![0.0; n];
            for (c, &x) in v.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                for (r, slot) in next.iter_mut().enumerate() {
                    *slot += t[(r, c)] * x;
                }
            }
            v = next;
        }
        v
    }
}

/// Precomputed bases for building chains with varying waiting times.
#[derive(Debug, Clone)]
pub struct ChainBuilder {
    hamiltonian: EigenSystem,
    energy_basis: UnitaryMatrix,
    observable_basis: UnitaryMatrix,
    placement: FirstEvolution,
    shares_eigenvector: bool,
    /// Kernels that do not depend on the waiting times.
    first_static: Option<RealMatrix>,
    last: RealMatrix,
}

impl ChainBuilder {
    pub fn new(h: &EigenSystem, o: &Observable, placement: FirstEvolution) -> Result<Self> {
        if o.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                actual: o.dim(),
            });
        }
        let energy_basis = h.vectors.clone();
        // |Ω_k⟩ in the basis the Hamiltonian was given in
        let observable_basis = energy_basis.compose(o.eigenbasis());
        let last = overlap_stochastic(&energy_basis, &observable_basis)?;
        let first_static = match placement {
            FirstEvolution::BeforeFirstMeasurement => None,
            FirstEvolution::BetweenMeasurementsOnly => {
                Some(overlap_stochastic(&observable_basis, &energy_basis)?)
            }
        };
        Ok(Self {
            hamiltonian: h.clone(),
            energy_basis,
            observable_basis,
            placement,
            shares_eigenvector: o.max_energy_overlap() > SHARED_EIGENVECTOR_THRESHOLD,
            first_static,
            last,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn placement(&self) -> FirstEvolution {
        self.placement
    }

    /// Builds the chain for `taus.len()` observable measurements.
    pub fn build(&self, taus: &[f64]) -> Result<MeasurementChain> {
        validate_taus(taus)?;
        let dim = self.dim();
        let m = taus.len();
        if m == 0 {
            return Ok(MeasurementChain {
                dim,
                steps: Vec::new(),
                shares_eigenvector: self.shares_eigenvector,
            });
        }

        let mut steps = Vec::with_capacity(m + 1);
        let gaps: &[f64] = match self.placement {
            FirstEvolution::BeforeFirstMeasurement => {
                let u = propagator(&self.hamiltonian, taus[0]);
                steps.push(overlap_stochastic(
                    &self.observable_basis,
                    &u.compose(&self.energy_basis),
                )?);
                &taus[1..]
            }
            FirstEvolution::BetweenMeasurementsOnly => {
                steps.push(self.first_static.clone().expect("set for this placement"));
                &taus[..m - 1]
            }
        };
        for &tau in gaps {
            let u = propagator(&self.hamiltonian, tau);
            steps.push(overlap_stochastic(
                &self.observable_basis,
                &u.compose(&self.observable_basis),
            )?);
        }
        steps.push(self.last.clone());

        Ok(MeasurementChain {
            dim,
            steps,
            shares_eigenvector: self.shares_eigenvector,
        })
    }
}

fn validate_taus(taus: &[f64]) -> Result<()> {
    match taus.iter().position(|t| !(t.is_finite() && *t > 0.0)) {
        Some(i) => Err(Error::InvalidSpec(format!(
            "waiting time {} is {}, must be positive and finite",
            i + 1,
            taus[i]
        ))),
        None => Ok(()),
    }
}

/// Chain for the default placement (`U(τ1)` before the first observable
/// measurement).
pub fn build_chain(h: &EigenSystem, o: &Observable, taus: &[f64]) -> Result<MeasurementChain> {
    ChainBuilder::new(h, o, FirstEvolution::default())?.build(taus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointSource {
    Exact,
    MonteCarlo { realizations: u64 },
}

/// `p[m][n] = P(final level m, first level n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcomeDistribution {
    p: RealMatrix,
    source: JointSource,
    counts: Option<Vec<u64>>,
}

impl JointOutcomeDistribution {
    pub fn from_matrix(p: RealMatrix) -> Self {
        Self {
            p,
            source: JointSource::Exact,
            counts: None,
        }
    }

    /// Empirical frequencies from row-major counts `counts[m * n + n0]`.
    pub fn from_counts(dim: usize, counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let denom = total.max(1) as f64;
        let p = RealMatrix::from_fn(dim, |r, c| counts[r * dim + c] as f64 / denom);
        Self {
            p,
            source: JointSource::MonteCarlo {
                realizations: total,
            },
            counts: Some(counts),
        }
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn get(&self, final_index: usize, first_index: usize) -> f64 {
        self.p[(final_index, first_index)]
    }

    pub fn source(&self) -> JointSource {
        self.source
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    /// Distribution of the final energy outcome.
    pub fn final_marginal(&self) -> Vec<f64> {
        self.p.row_sums()
    }

    /// Distribution of the first energy outcome.
    pub fn initial_marginal(&self) -> Vec<f64> {
        self.p.column_sums()
    }

    /// Binomial standard error of entry `(m, n)`; zero for exact results.
    pub fn stderr(&self, final_index: usize, first_index: usize) -> f64 {
        match self.source {
            JointSource::Exact => 0.0,
            JointSource::MonteCarlo { realizations } => {
                let p = self.get(final_index, first_index);
                (p * (1.0 - p) / realizations.max(1) as f64).sqrt()
            }
        }
    }

    /// Probability of each distinct heat value, ascending in `Q`.
    pub fn heat_histogram(&self, e: &EnergySpectrum) -> Vec<HeatBin> {
        let n = self.dim();
        let mut entries: Vec<(f64, f64, u64)> = (0..n)
            .flat_map(|m| (0..n).map(move |k| (m, k)))
            .map(|(m, k)| {
                let count = self.counts.as_ref().map_or(0, |c| c[m * n + k]);
                (e.heat(m, k), self.get(m, k), count)
            })
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let scale = e.levels().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut bins: Vec<HeatBin> = Vec::new();
        for (q, p, count) in entries {
            match bins.last_mut() {
                Some(bin) if (bin.heat - q).abs() <= 1e-12 * scale => {
                    bin.probability += p;
                    bin.count += count;
                }
                _ => bins.push(HeatBin {
                    heat: q,
                    probability: p,
                    count,
                }),
            }
        }
        bins
    }
}

/// One distinct value of the heat and its probability (and raw count for
/// sampled distributions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatBin {
    pub heat: f64,
    pub probability: f64,
    pub count: u64,
}

pub(crate) fn exact_joint_dim_check(s: &InitialState, chain: &MeasurementChain) -> Result<()> {
    if s.len() != chain.dim() {
        return Err(Error::DimensionMismatch {
            expected: chain.dim(),
            actual: s.len(),
        });
    }
    Ok(())
}

/// Exact joint distribution of the two energy outcomes.
pub fn exact_joint(s: &InitialState, chain: &MeasurementChain) -> Result<JointOutcomeDistribution> {
    exact_joint_dim_check(s, chain)?;
    let n = chain.dim();
    let mut p = RealMatrix::zeros(n);
    for (col, &c) in s.populations().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mut v = vec![0.0; n];
        v[col] = c;
        for (row, x) in chain.propagate(v).into_iter().enumerate() {
            p[(row, col)] = x;
        }
    }
    Ok(JointOutcomeDistribution::from_matrix(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_hermitian;
    use crate::model::spin1_operators;

    fn tilted() -> (EigenSystem, Observable) {
        let (sz, sx) = spin1_operators();
        let h = sz.combine(1.0, &sx, 0.5).unwrap();
        let es = eig_hermitian(&h).unwrap();
        let o = Observable::from_operator(&sz, &es).unwrap();
        (es, o)
    }

    #[test]
    fn commuting_observable_locks() {
        let (es, _) = tilted();
        let o = Observable::commuting(vec![3.0, 1.0, 2.0]).unwrap();
        let chain = build_chain(&es, &o, &[0.7, 1.3, 0.2]).unwrap();
        assert!(chain.shares_eigenvector());
        for t in chain.steps() {
            assert!(t.max_abs_diff(&RealMatrix::identity(3)) < 1e-12);
        }
        let s = InitialState::new(vec![0.5, 0.3, 0.2]).unwrap();
        let p = exact_joint(&s, &chain).unwrap();
        assert!(
            p.matrix()
                .max_abs_diff(&RealMatrix::from_diagonal(s.populations()))
                < 1e-12
        );
    }

    #[test]
    fn chain_structure() {
        let (es, o) = tilted();
        assert!(build_chain(&es, &o, &[]).unwrap().is_empty());
        let one = build_chain(&es, &o, &[1.0]).unwrap();
        assert_eq!(one.measurements(), 1);
        assert!(one.middle().is_empty());
        let five = build_chain(&es, &o, &[1.0; 5]).unwrap();
        assert_eq!(five.middle().len(), 4);
        assert!(five.max_stochastic_defect() < 1e-12);
        assert!(!five.shares_eigenvector());
    }

    #[test]
    fn single_measurement_is_product_of_two_kernels() {
        let (es, o) = tilted();
        let chain = build_chain(&es, &o, &[0.8]).unwrap();
        let s = InitialState::new(vec![0.2, 0.3, 0.5]).unwrap();
        let p = exact_joint(&s, &chain).unwrap();
        let want = chain
            .last()
            .unwrap()
            .matmul(chain.first().unwrap())
            .matmul(&RealMatrix::from_diagonal(s.populations()));
        assert!(p.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn empty_chain_gives_diagonal_joint() {
        let (es, o) = tilted();
        let chain = build_chain(&es, &o, &[]).unwrap();
        let s = InitialState::new(vec![0.6, 0.1, 0.3]).unwrap();
        let p = exact_joint(&s, &chain).unwrap();
        assert_eq!(p.matrix(), &RealMatrix::from_diagonal(s.populations()));
    }

    #[test]
    fn nonpositive_waiting_time_rejected() {
        let (es, o) = tilted();
        assert!(matches!(
            build_chain(&es, &o, &[1.0, 0.0]),
            Err(Error::InvalidSpec(_))
        ));
        assert!(build_chain(&es, &o, &[f64::NAN]).is_err());
    }

    #[test]
    fn exact_joint_marginals() {
        let (es, o) = tilted();
        let chain = build_chain(&es, &o, &[1.0; 6]).unwrap();
        let s = InitialState::new(vec![0.8, 0.01, 0.19]).unwrap();
        let p = exact_joint(&s, &chain).unwrap();
        assert!((p.matrix().total() - 1.0).abs() < 1e-12);
        for (got, want) in p.initial_marginal().iter().zip(s.populations()) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(p.matrix().as_slice().iter().all(|&x| x >= 0.0));
        let u = exact_joint(&InitialState::uniform(3), &chain).unwrap();
        for m in u.final_marginal() {
            assert!((m - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn placements_agree_for_fixed_waiting_times() {
        // A does not depend on τ1 (energy eigenstates only pick up a phase),
        // so with equal waiting times the two placements coincide.
        let (es, o) = tilted();
        let s = InitialState::new(vec![0.8, 0.01, 0.19]).unwrap();
        let a = ChainBuilder::new(&es, &o, FirstEvolution::BeforeFirstMeasurement)
            .unwrap()
            .build(&[0.9; 7])
            .unwrap();
        let b = ChainBuilder::new(&es, &o, FirstEvolution::BetweenMeasurementsOnly)
            .unwrap()
            .build(&[0.9; 7])
            .unwrap();
        let pa = exact_joint(&s, &a).unwrap();
        let pb = exact_joint(&s, &b).unwrap();
        assert!(pa.matrix().max_abs_diff(pb.matrix()) < 1e-14);
    }

    #[test]
    fn heat_histogram_groups_equal_heats() {
        let e = EnergySpectrum::new(vec![-1.0, 0.0, 1.0]).unwrap();
        let p = JointOutcomeDistribution::from_matrix(RealMatrix::from_fn(3, |_, _| 1.0 / 9.0));
        let h = p.heat_histogram(&e);
        let heats: Vec<f64> = h.iter().map(|b| b.heat).collect();
        assert_eq!(heats, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!((h[2].probability - 3.0 / 9.0).abs() < 1e-15);
        assert!((h[1].probability - 2.0 / 9.0).abs() < 1e-15);
    }
}
