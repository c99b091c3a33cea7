mod common;

use common::{
    hermitian, random_instance, random_unitary, taylor_propagator, to_cmatrix, with_spectrum,
};
use proptest::prelude::*;
use qheat::analysis::{
    beta_eff_closed_form, char_asymptotic, char_from_joint, char_uniform_limit, epsilon_grid,
    DEFAULT_SEARCH_RANGE,
};
use qheat::experiment::{Cell, Table};
use qheat::linalg::{eig_hermitian, overlap_stochastic, propagator, UnitaryMatrix};
use qheat::model::{
    alphabeta_to_populations, edge_state, partial_temperatures, populations_to_alphabeta,
    thermal_state, AlphaBeta, EdgePair, EnergySpectrum, InitialState, Observable,
};
use qheat::protocol::{build_chain, exact_joint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn levels3() -> impl Strategy<Value = Vec<f64>> {
    (-3.0..0.0f64, 0.1..3.0f64, 0.1..3.0f64)
        .prop_map(|(e1, d1, d2)| vec![e1, e1 + d1, e1 + d1 + d2])
}

fn populations3() -> impl Strategy<Value = Vec<f64>> {
    prop::array::uniform3(0.01..1.0f64).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigensystem_reconstructs(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let levels = common::random_levels(&mut rng, n, 3.0, 1e-3);
        let h = with_spectrum(&random_unitary(&mut rng, n), &levels);
        let es = eig_hermitian(&hermitian(&h)).unwrap();
        prop_assert!(es.vectors.matrix().unitary_deviation() < 1e-10);
        prop_assert!(es.reconstruct().max_abs_diff(&to_cmatrix(&h)) < 1e-10);
        for (a, b) in es.values.iter().zip(&levels) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let trace: f64 = (0..n).map(|i| h[i][i].re).sum();
        prop_assert!((trace - es.values.iter().sum::<f64>()).abs() < 1e-10);
    }

    #[test]
    fn propagator_matches_taylor_and_composes(seed in any::<u64>(), t1 in 0.0..2.0f64, t2 in 0.0..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 3);
        let es = eig_hermitian(&hermitian(&inst.h)).unwrap();
        let u = propagator(&es, t1);
        prop_assert!(u.matrix().max_abs_diff(&to_cmatrix(&taylor_propagator(&inst.h, t1))) < 1e-10);
        let joint = propagator(&es, t1 + t2);
        let product = u.compose(&propagator(&es, t2));
        prop_assert!(joint.matrix().max_abs_diff(product.matrix()) < 1e-10);
    }

    #[test]
    fn overlaps_are_doubly_stochastic(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = UnitaryMatrix::new(to_cmatrix(&random_unitary(&mut rng, n))).unwrap();
        let b = UnitaryMatrix::new(to_cmatrix(&random_unitary(&mut rng, n))).unwrap();
        let t = overlap_stochastic(&a, &b).unwrap();
        prop_assert!(t.doubly_stochastic_defect() < 1e-12);
    }

    #[test]
    fn chain_kernels_are_doubly_stochastic(seed in any::<u64>(), m in 0usize..8, tau in 0.1..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 3);
        let es = eig_hermitian(&hermitian(&inst.h)).unwrap();
        let o = Observable::from_operator(&hermitian(&inst.obs), &es).unwrap();
        let chain = build_chain(&es, &o, &vec![tau; m]).unwrap();
        prop_assert!(chain.max_stochastic_defect() < 1e-12);
    }

    #[test]
    fn exact_joint_marginals(seed in any::<u64>(), m in 0usize..8, c in populations3()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 3);
        let es = eig_hermitian(&hermitian(&inst.h)).unwrap();
        let o = Observable::from_operator(&hermitian(&inst.obs), &es).unwrap();
        let chain = build_chain(&es, &o, &vec![0.7; m]).unwrap();
        let p = exact_joint(&InitialState::new(c.clone()).unwrap(), &chain).unwrap();
        prop_assert!(p.matrix().as_slice().iter().all(|&x| x >= 0.0));
        for (a, b) in p.initial_marginal().iter().zip(&c) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let e = EnergySpectrum::from_eigensystem(&es).unwrap();
        prop_assert!((char_from_joint(&p, &e, 0.0) - 1.0).abs() < 1e-12);
        // the uniform vector is a fixed point of every doubly stochastic map
        let u = exact_joint(&InitialState::uniform(3), &chain).unwrap();
        for x in u.final_marginal() {
            prop_assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jarzynski_for_thermal_states(seed in any::<u64>(), n in 2usize..=3, m in 0usize..=10, tau in 0.1..2.0f64, beta in -2.0..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n);
        let es = eig_hermitian(&hermitian(&inst.h)).unwrap();
        let o = Observable::from_operator(&hermitian(&inst.obs), &es).unwrap();
        let e = EnergySpectrum::from_eigensystem(&es).unwrap();
        let p = exact_joint(&thermal_state(beta, &e), &build_chain(&es, &o, &vec![tau; m]).unwrap()).unwrap();
        prop_assert!((char_from_joint(&p, &e, beta) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn alphabeta_round_trip(e in levels3(), alpha in -5.0..5.0f64, beta in -3.0..3.0f64) {
        let e = EnergySpectrum::new(e).unwrap();
        let s = alphabeta_to_populations(AlphaBeta::new(alpha, beta).unwrap(), &e).unwrap();
        let ab = populations_to_alphabeta(&s, &e).unwrap();
        prop_assert!((ab.alpha - alpha).abs() < 1e-10, "{} vs {}", ab.alpha, alpha);
        prop_assert!((ab.beta - beta).abs() < 1e-10);
    }

    #[test]
    fn partial_temperature_constraint(e in levels3(), c in populations3()) {
        let e = EnergySpectrum::new(e).unwrap();
        let b = partial_temperatures(&InitialState::new(c).unwrap(), &e).unwrap();
        let d = e.gaps().unwrap();
        prop_assert!((b[0] * d[0] + b[1] * d[1] + b[2] * d[2]).abs() < 1e-10);
    }

    #[test]
    fn mirror_symmetry(e in levels3(), alpha in -5.0..5.0f64, beta in -3.0..3.0f64) {
        let e = EnergySpectrum::new(e).unwrap();
        let s = alphabeta_to_populations(AlphaBeta::new(alpha, beta).unwrap(), &e).unwrap();
        let mirrored = alphabeta_to_populations(AlphaBeta::new(alpha, -beta).unwrap(), &e.mirrored()).unwrap();
        for (a, b) in mirrored.populations().iter().zip(s.reversed().populations()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn thermal_populations_decrease(e in levels3(), beta in 0.01..3.0f64) {
        let e = EnergySpectrum::new(e).unwrap();
        let s = alphabeta_to_populations(AlphaBeta::new(0.0, beta).unwrap(), &e).unwrap();
        let c = s.populations();
        prop_assert!(c[0] > c[1] && c[1] > c[2]);
    }

    #[test]
    fn closed_forms_agree_and_are_convex(e in levels3(), alpha in -3.0..3.0f64, beta in -2.0..2.0f64) {
        let e = EnergySpectrum::new(e).unwrap();
        let ab = AlphaBeta::new(alpha, beta).unwrap();
        let s = alphabeta_to_populations(ab, &e).unwrap();
        let grid = epsilon_grid(-3.0, 3.0, 61);
        let g: Vec<f64> = grid.iter().map(|&x| char_uniform_limit(&s, &e, x).unwrap()).collect();
        for (&x, &gx) in grid.iter().zip(&g) {
            let gz = char_asymptotic(ab, &e, x).unwrap();
            prop_assert!((gx - gz).abs() <= 1e-10 * gx.max(1.0));
            prop_assert!(gx > 0.0);
        }
        for w in g.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-10);
        }
    }

    #[test]
    fn edge_state_mirror(q in 0.0..=1.0f64, e in levels3()) {
        let e = EnergySpectrum::new(e).unwrap();
        let a = beta_eff_closed_form(&edge_state(q, EdgePair::P12).unwrap(), &e, DEFAULT_SEARCH_RANGE);
        let b = beta_eff_closed_form(&edge_state(1.0 - q, EdgePair::P23).unwrap(), &e.mirrored(), DEFAULT_SEARCH_RANGE);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!((a.value + b.value).abs() < 1e-9, "{} {}", a.value, b.value),
            (a, b) => prop_assert!(a.is_err() && b.is_err()),
        }
    }

    #[test]
    fn csv_round_trips(rows in prop::collection::vec((any::<i64>(), any::<f64>(), any::<bool>(), "[a-z ,]{0,8}"), 0..20)) {
        let mut t = Table::new(["i", "x", "b", "s"]);
        for (i, x, b, s) in rows {
            // NaN never equals itself; text that looks numeric would re-parse as a number
            let x = if x.is_nan() { 0.0 } else { x };
            let s = format!("s:{s}");
            t.push(vec![Cell::Int(i), Cell::Real(x), Cell::Bool(b), Cell::Text(s)]);
        }
        prop_assert_eq!(Table::from_csv(&t.to_csv()).unwrap(), t);
    }
}
