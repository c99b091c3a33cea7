//! Trajectory sampling with per-trajectory random streams.
//!
//! Trajectory `t` draws from ChaCha8 keyed by the master seed on stream `t`,
//! so results depend only on `(master_seed, t)` and never on how the work is
//! split across threads. Counts are summed as integers, which keeps the
//! reduction order-independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    exact_joint_dim_check, ChainBuilder, FirstEvolution, HeatBin, JointOutcomeDistribution,
    MeasurementChain,
};
use crate::error::{Error, Result};
use crate::linalg::EigenSystem;
use crate::model::{EnergySpectrum, InitialState, Observable};

pub type TrajectoryRng = ChaCha8Rng;

/// Random stream of trajectory `index` under `master_seed`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> TrajectoryRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Distribution of the waiting time between measurements. Times are i.i.d.
/// across the sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaitingTimeSpec {
    Fixed(f64),
    Uniform { min: f64, max: f64 },
    Exponential { mean: f64 },
}

impl WaitingTimeSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            WaitingTimeSpec::Fixed(t) => t.is_finite() && t > 0.0,
            WaitingTimeSpec::Uniform { min, max } => {
                min.is_finite() && max.is_finite() && min > 0.0 && max >= min
            }
            WaitingTimeSpec::Exponential { mean } => mean.is_finite() && mean > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "waiting times must be positive and finite: {self:?}"
            )))
        }
    }

    pub fn is_random(&self) -> bool {
        !matches!(self, WaitingTimeSpec::Fixed(_))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            WaitingTimeSpec::Fixed(t) => t,
            WaitingTimeSpec::Uniform { min, max } => min + (max - min) * rng.random::<f64>(),
            WaitingTimeSpec::Exponential { mean } => loop {
                // 1 - u lies in (0, 1]; reject the single value that maps to 0
                let t = -mean * (1.0 - rng.random::<f64>()).ln();
                if t > 0.0 {
                    break t;
                }
            },
        }
    }
}

/// Outcome of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub first_index: usize,
    pub final_index: usize,
    pub heat: f64,
    /// Observable outcomes in order.
    pub intermediate: Vec<usize>,
}

fn draw_index<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = f64>) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, w) in weights.enumerate() {
        if w > 0.0 {
            last_positive = k;
        }
        acc += w;
        if u < acc {
            return k;
        }
    }
    // rounding left the cumulative sum just below u
    last_positive
}

fn sample_path<R: Rng + ?Sized>(
    rng: &mut R,
    s: &InitialState,
    chain: &MeasurementChain,
    mut visit: impl FnMut(usize),
) -> (usize, usize) {
    let first = draw_index(rng, s.populations().iter().copied());
    let mut state = first;
    let steps = chain.steps();
    for (i, t) in steps.iter().enumerate() {
        state = draw_index(rng, (0..t.dim()).map(|r| t[(r, state)]));
        if i + 1 < steps.len() {
            visit(state);
        }
    }
    (first, state)
}

/// Samples one realization: the first level from `c`, each later outcome
/// from the column of the next kernel selected by the current outcome.
pub fn sample_trajectory<R: Rng + ?Sized>(
    rng: &mut R,
    s: &InitialState,
    chain: &MeasurementChain,
    e: &EnergySpectrum,
) -> Result<TrajectoryRecord> {
    exact_joint_dim_check(s, chain)?;
    let mut intermediate = Vec::with_capacity(chain.measurements());
    let (first_index, final_index) = sample_path(rng, s, chain, |k| intermediate.push(k));
    Ok(TrajectoryRecord {
        first_index,
        final_index,
        heat: e.heat(final_index, first_index),
        intermediate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub realizations: u64,
    pub master_seed: u64,
    pub workers: usize,
    pub placement: FirstEvolution,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            realizations: 100_000,
            master_seed: 0,
            workers: 1,
            placement: FirstEvolution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRun {
    pub joint: JointOutcomeDistribution,
    pub histogram: Vec<HeatBin>,
}

/// Runs `config.realizations` independent protocol realizations with `m`
/// observable measurements. Random waiting times are redrawn for every
/// realization from that realization's own stream.
pub fn run_monte_carlo(
    s: &InitialState,
    h: &EigenSystem,
    o: &Observable,
    wspec: WaitingTimeSpec,
    m: usize,
    config: &MonteCarloConfig,
) -> Result<MonteCarloRun> {
    wspec.validate()?;
    if config.realizations == 0 {
        return Err(Error::InvalidSpec("realizations must be at least 1".into()));
    }
    let spectrum = EnergySpectrum::from_eigensystem(h)?;
    let builder = ChainBuilder::new(h, o, config.placement)?;
    let dim = builder.dim();
    if s.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: s.len(),
        });
    }
    let fixed_chain = match wspec {
        WaitingTimeSpec::Fixed(t) => Some(builder.build(&vec![t; m])?),
        _ => None,
    };

    let one = |index: u64| -> Result<usize> {
        let mut rng = trajectory_rng(config.master_seed, index);
        let (first, last) = match &fixed_chain {
            Some(chain) => sample_path(&mut rng, s, chain, |_| {}),
            None => {
                let taus: Vec<f64> = (0..m).map(|_| wspec.draw(&mut rng)).collect();
                let chain = builder.build(&taus)?;
                sample_path(&mut rng, s, &chain, |_| {})
            }
        };
        Ok(last * dim + first)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    let counts = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .try_fold(
                || vec![0u64; dim * dim],
                |mut acc, t| {
                    acc[one(t)?] += 1;
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || vec![0u64; dim * dim],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )
    })?;

    let joint = JointOutcomeDistribution::from_counts(dim, counts);
    let histogram = joint.heat_histogram(&spectrum);
    Ok(MonteCarloRun { joint, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_hermitian;
    use crate::model::spin1_operators;
    use crate::protocol::{build_chain, exact_joint};

    fn tilted() -> (EigenSystem, Observable) {
        let (sz, sx) = spin1_operators();
        let h = sz.combine(1.0, &sx, 0.5).unwrap();
        let es = eig_hermitian(&h).unwrap();
        let o = Observable::from_operator(&sz, &es).unwrap();
        (es, o)
    }

    #[test]
    fn pure_ground_state_with_commuting_observable() {
        let (es, _) = tilted();
        let e = EnergySpectrum::from_eigensystem(&es).unwrap();
        let o = Observable::commuting(vec![0.0, 1.0, 2.0]).unwrap();
        let chain = build_chain(&es, &o, &[1.0; 4]).unwrap();
        let s = InitialState::new(vec![1.0, 0.0, 0.0]).unwrap();
        let mut rng = trajectory_rng(7, 0);
        for _ in 0..200 {
            let t = sample_trajectory(&mut rng, &s, &chain, &e).unwrap();
            assert_eq!((t.first_index, t.final_index, t.heat), (0, 0, 0.0));
            assert_eq!(t.intermediate, vec![0; 4]);
        }
    }

    #[test]
    fn empty_chain_has_zero_heat() {
        let (es, o) = tilted();
        let e = EnergySpectrum::from_eigensystem(&es).unwrap();
        let chain = build_chain(&es, &o, &[]).unwrap();
        let s = InitialState::uniform(3);
        let mut rng = trajectory_rng(1, 3);
        for _ in 0..200 {
            let t = sample_trajectory(&mut rng, &s, &chain, &e).unwrap();
            assert_eq!(t.heat, 0.0);
            assert!(t.intermediate.is_empty());
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trajectory_rng(9, 5).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = trajectory_rng(9, 5).random();
        let y: u64 = trajectory_rng(9, 6).random();
        let z: u64 = trajectory_rng(10, 5).random();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let (es, o) = tilted();
        let s = InitialState::new(vec![0.8, 0.01, 0.19]).unwrap();
        for wspec in [
            WaitingTimeSpec::Fixed(1.0),
            WaitingTimeSpec::Uniform { min: 0.5, max: 1.5 },
        ] {
            let run = |workers| {
                let cfg = MonteCarloConfig {
                    realizations: 20_000,
                    master_seed: 42,
                    workers,
                    ..Default::default()
                };
                run_monte_carlo(&s, &es, &o, wspec, 6, &cfg).unwrap()
            };
            let a = run(1);
            let b = run(4);
            assert_eq!(a.joint.counts(), b.joint.counts());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn monte_carlo_tracks_exact_joint() {
        let (es, o) = tilted();
        let s = InitialState::new(vec![0.5, 0.2, 0.3]).unwrap();
        let cfg = MonteCarloConfig {
            realizations: 100_000,
            master_seed: 3,
            workers: 2,
            ..Default::default()
        };
        let mc = run_monte_carlo(&s, &es, &o, WaitingTimeSpec::Fixed(0.7), 4, &cfg).unwrap();
        let exact = exact_joint(&s, &build_chain(&es, &o, &[0.7; 4]).unwrap()).unwrap();
        let n = 3;
        let mut within = 0;
        for m in 0..n {
            for k in 0..n {
                let p = exact.get(m, k);
                let sigma = (p * (1.0 - p) / 1e5).sqrt();
                if (mc.joint.get(m, k) - p).abs() <= 4.0 * sigma + 1e-12 {
                    within += 1;
                }
            }
        }
        assert_eq!(within, 9);
        let total: f64 = mc.histogram.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(mc.histogram.iter().map(|b| b.count).sum::<u64>(), 100_000);
    }

    #[test]
    fn invalid_specs_rejected() {
        let (es, o) = tilted();
        let s = InitialState::uniform(3);
        let cfg = MonteCarloConfig::default();
        for bad in [
            WaitingTimeSpec::Fixed(0.0),
            WaitingTimeSpec::Uniform { min: 0.0, max: 1.0 },
            WaitingTimeSpec::Uniform { min: 2.0, max: 1.0 },
            WaitingTimeSpec::Exponential { mean: -1.0 },
        ] {
            assert!(matches!(
                run_monte_carlo(&s, &es, &o, bad, 3, &cfg),
                Err(Error::InvalidSpec(_))
            ));
        }
        let zero = MonteCarloConfig {
            realizations: 0,
            ..cfg
        };
        assert!(run_monte_carlo(&s, &es, &o, WaitingTimeSpec::Fixed(1.0), 3, &zero).is_err());
    }

    #[test]
    fn exponential_draws_are_positive() {
        let spec = WaitingTimeSpec::Exponential { mean: 0.5 };
        let mut rng = trajectory_rng(0, 0);
        let draws: Vec<f64> = (0..10_000).map(|_| spec.draw(&mut rng)).collect();
        assert!(draws.iter().all(|&t| t > 0.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.5).abs() < 0.03);
    }
}
