use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use totcorr::measures::Measure;
use totcorr::roof::{
    ensemble_from_isometry, ensemble_value, flags_residual, roof_additivity_gap, roof_minimize,
    RoofConfig, Strategy,
};
use totcorr::states::{
    dm, epr, mix, random_density, random_pure, random_unitary, Ensemble, PureState, State,
};
use totcorr::{CMatrix, DensityMatrix, RegisterShape, C64};

fn qubits(n: usize) -> RegisterShape {
    RegisterShape::qubits(n).unwrap()
}

fn quick(seed: u64) -> RoofConfig {
    RoofConfig {
        restarts: 4,
        seed,
        ..RoofConfig::default()
    }
}

fn classical() -> DensityMatrix {
    let a = PureState::basis(qubits(2), 0).unwrap();
    let b = PureState::basis(qubits(2), 3).unwrap();
    mix(&Ensemble::new(vec![0.5, 0.5], vec![a.into(), b.into()]).unwrap())
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// First `r` columns of a Haar unitary of size `m`.
fn random_isometry(m: usize, r: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary(m, &mut rng).columns(0, r).into_owned()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn roof_never_exceeds_a_supplied_decomposition(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let members: Vec<State> =
            (0..k).map(|i| random_pure(&qubits(2), seed.wrapping_add(i as u64)).into()).collect();
        let e = Ensemble::new(raw.iter().map(|w| w / total).collect(), members).unwrap();
        let supplied = ensemble_value(&e, Measure::M).unwrap();
        let roof = roof_minimize(&mix(&e), Measure::M, &quick(seed)).unwrap();
        prop_assert!(roof.value <= supplied + 1e-6, "{} > {}", roof.value, supplied);
    }

    #[test]
    fn isometries_reconstruct_the_state(seed in any::<u64>(), rank in 1usize..=4, extra in 0usize..4) {
        let rho = random_density(&qubits(2), rank, seed).unwrap();
        let v = random_isometry(rank + extra, rank, seed ^ 1);
        let e = ensemble_from_isometry(&rho, &v).unwrap();
        prop_assert!(e.len() <= rank + extra);
        prop_assert!(max_diff(mix(&e).matrix(), rho.matrix()) < 1e-8);
    }

    #[test]
    fn result_invariants(seed in any::<u64>(), rank in 2usize..=4) {
        let rho = random_density(&qubits(2), rank, seed).unwrap();
        let r = roof_minimize(&rho, Measure::S, &quick(seed)).unwrap();
        prop_assert!((ensemble_value(&r.ensemble, Measure::S).unwrap() - r.value).abs() < 1e-9);
        let best = r.per_restart_values.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(r.value <= best + 1e-12);
        prop_assert!(max_diff(mix(&r.ensemble).matrix(), rho.matrix()) < 1e-8);
        for h in &r.histories {
            prop_assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }
    }

    #[test]
    fn mixed_roof_never_exceeds_pure_roof(seed in any::<u64>(), rank in 2usize..=3) {
        let rho = random_density(&qubits(2), rank, seed).unwrap();
        let pure = roof_minimize(&rho, Measure::M, &quick(seed)).unwrap();
        let config = RoofConfig { strategy: Strategy::MixedRoof, ..quick(seed) };
        let mixed = roof_minimize(&rho, Measure::M, &config).unwrap();
        prop_assert!(mixed.value <= pure.value + 1e-9);
    }
}

#[test]
fn deterministic_for_a_fixed_seed() {
    let rho = random_density(&qubits(2), 3, 17).unwrap();
    let a = roof_minimize(&rho, Measure::M, &quick(5)).unwrap();
    let b = roof_minimize(&rho, Measure::M, &quick(5)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pure_input_gives_the_direct_value() {
    let psi = random_pure(&qubits(3), 9);
    let r = roof_minimize(&psi.to_density(), Measure::S, &quick(0)).unwrap();
    let direct = Measure::S.evaluate(&psi).unwrap();
    assert!((r.value - direct).abs() < 1e-12);
    assert_eq!(r.ensemble.len(), 1);
}

#[test]
fn separable_werner_state() {
    let shape = qubits(2);
    let m = dm(&epr()).matrix() * C64::new(0.2, 0.0)
        + DensityMatrix::maximally_mixed(shape.clone()).matrix() * C64::new(0.8, 0.0);
    let rho = DensityMatrix::new(shape, m).unwrap();
    let r = roof_minimize(&rho, Measure::M, &RoofConfig::default()).unwrap();
    assert!(r.value <= 1e-3, "{}", r.value);
}

#[test]
fn flags_single_member() {
    for member in [epr(), random_pure(&qubits(2), 3)] {
        let e = Ensemble::new(vec![1.0], vec![member.into()]).unwrap();
        assert!(flags_residual(&e, Measure::M, &quick(0)).unwrap() < 1e-6);
    }
}

#[test]
fn flags_epr_and_product() {
    let zero = PureState::basis(qubits(2), 0).unwrap();
    let e = Ensemble::new(vec![0.5, 0.5], vec![epr().into(), zero.into()]).unwrap();
    let residual = flags_residual(&e, Measure::M, &RoofConfig::default()).unwrap();
    assert!(residual <= 5e-3, "{residual}");
}

#[test]
fn flags_two_products() {
    let a = PureState::basis(qubits(2), 1).unwrap();
    let b = PureState::basis(qubits(2), 2).unwrap();
    let e = Ensemble::new(vec![0.3, 0.7], vec![a.into(), b.into()]).unwrap();
    assert!(flags_residual(&e, Measure::M, &quick(0)).unwrap() < 1e-6);
}

#[test]
fn additivity_gap_examples() {
    let p = random_pure(&qubits(2), 1).to_density();
    let q = random_pure(&qubits(2), 2).to_density();
    assert!(
        roof_additivity_gap(&p, &q, Measure::M, &quick(0))
            .unwrap()
            .abs()
            < 1e-8
    );

    let gap = roof_additivity_gap(
        &dm(&epr()),
        &classical(),
        Measure::M,
        &RoofConfig::default(),
    )
    .unwrap();
    assert!(gap.abs() <= 5e-3, "{gap}");

    let mm = DensityMatrix::maximally_mixed(qubits(2));
    let zero = PureState::basis(qubits(2), 0).unwrap().to_density();
    let gap = roof_additivity_gap(&mm, &zero, Measure::O, &RoofConfig::default()).unwrap();
    assert!(gap.abs() <= 5e-3, "{gap}");
}
