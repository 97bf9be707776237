use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use totcorr::measures::{
    bipartite_correlation, bound_m, bound_s, measure_m, measure_mw, measure_o, measure_s,
    measure_s_form2, mutual_information, product_of_marginals, relative_entropy, ssa_check,
    subset_correlation_sum, von_neumann_entropy, Measure,
};
use totcorr::states::{
    flagged_mixture, ghz, random_density, random_local_unitaries, random_pure, Ensemble, PureState,
    State,
};
use totcorr::{DensityMatrix, RegisterShape, C64};

fn qubits(n: usize) -> RegisterShape {
    RegisterShape::qubits(n).unwrap()
}

fn max_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.matrix() - b.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn all_measures(psi: &PureState) -> Vec<f64> {
    vec![
        measure_m(psi).unwrap(),
        measure_o(psi).unwrap(),
        measure_s(psi).unwrap(),
        measure_mw(psi).unwrap(),
        subset_correlation_sum(psi).unwrap(),
        bipartite_correlation(psi, &[0]).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_composes(seed in any::<u64>(), rank in 1usize..=12) {
        let shape = RegisterShape::new(vec![2, 3, 2]).unwrap();
        let rho = random_density(&shape, rank, seed).unwrap();
        let direct = rho.partial_trace(&[0]).unwrap();
        let staged = rho.partial_trace(&[0, 2]).unwrap().partial_trace(&[0]).unwrap();
        prop_assert!(max_diff(&direct, &staged) < 1e-12);
        let direct = rho.partial_trace(&[1]).unwrap();
        let staged = rho.partial_trace(&[1, 2]).unwrap().partial_trace(&[0]).unwrap();
        prop_assert!(max_diff(&direct, &staged) < 1e-12);
        for keep in [&[0][..], &[1], &[2], &[0, 1], &[1, 2], &[0, 2]] {
            let r = rho.partial_trace(keep).unwrap();
            prop_assert!((r.trace() - 1.0).abs() < 1e-12);
            prop_assert!(r.validate(1e-10).is_valid());
        }
    }

    #[test]
    fn pure_marginals_match_density_marginals(seed in any::<u64>()) {
        let shape = RegisterShape::new(vec![2, 3, 2]).unwrap();
        let psi = random_pure(&shape, seed);
        let rho = psi.to_density();
        for keep in [&[0][..], &[2], &[0, 2], &[1, 2]] {
            let a = psi.marginal(keep).unwrap();
            let b = rho.partial_trace(keep).unwrap();
            prop_assert!(max_diff(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn kron_trace_and_associativity(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let a = random_density(&qubits(1), 2, s1).unwrap();
        let b = random_density(&RegisterShape::new(vec![3]).unwrap(), 2, s2).unwrap();
        let c = random_density(&qubits(1), 1, s3).unwrap();
        let ab = a.kron(&b);
        prop_assert!((ab.trace() - a.trace() * b.trace()).abs() < 1e-12);
        let left = ab.kron(&c);
        let right = a.kron(&b.kron(&c));
        prop_assert_eq!(left.shape(), right.shape());
        prop_assert!(max_diff(&left, &right) < 1e-14);
        prop_assert!(max_diff(&left.partial_trace(&[1]).unwrap(), &b) < 1e-12);
    }

    #[test]
    fn flagged_mixture_is_a_density(seed in any::<u64>(), k in 1usize..=4) {
        let shape = qubits(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..k).map(|_| rand::Rng::random_range(&mut rng, 0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let members: Vec<State> = (0..k)
            .map(|i| random_density(&shape, 1 + i % 4, seed.wrapping_add(i as u64)).unwrap().into())
            .collect();
        let f = flagged_mixture(&Ensemble::new(weights, members).unwrap());
        prop_assert!((f.trace() - 1.0).abs() < 1e-12);
        prop_assert!(f.validate(1e-10).is_valid());
        prop_assert_eq!(f.shape().dims(), &[2, 2, k.max(2)][..]);
    }

    #[test]
    fn local_unitary_invariance(seed in any::<u64>(), n in 2usize..=4) {
        let shape = qubits(n);
        let psi = random_pure(&shape, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5555);
        let moved = psi.apply_local(&random_local_unitaries(&shape, &mut rng)).unwrap();
        for (a, b) in all_measures(&psi).into_iter().zip(all_measures(&moved)) {
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }
    }

    #[test]
    fn pure_product_additivity(s1 in any::<u64>(), s2 in any::<u64>()) {
        let sigma = random_pure(&qubits(2), s1);
        let eta = random_pure(&qubits(2), s2);
        let joint = sigma.kron(&eta);
        for m in [Measure::M, Measure::O, Measure::S] {
            let gap = m.evaluate(&joint).unwrap() - m.evaluate(&sigma).unwrap() - m.evaluate(&eta).unwrap();
            prop_assert!(gap.abs() < 1e-8, "{} gap {}", m, gap);
        }
    }

    #[test]
    fn pure_super_additivity(seed in any::<u64>()) {
        let psi = random_pure(&qubits(4), seed);
        let whole = measure_s(&psi).unwrap();
        let parts = measure_s(&psi.marginal(&[0, 1]).unwrap()).unwrap()
            + measure_s(&psi.marginal(&[2, 3]).unwrap()).unwrap();
        prop_assert!(whole >= parts - 1e-8, "{} < {}", whole, parts);
    }

    #[test]
    fn ancilla_invariance(seed in any::<u64>(), n in 2usize..=4, anc in 0usize..2) {
        let psi = random_pure(&qubits(n), seed);
        let ancilla = PureState::basis(qubits(1), anc).unwrap();
        let extended = psi.kron(&ancilla);
        for m in [Measure::M, Measure::O, Measure::S] {
            let d = m.evaluate(&extended).unwrap() - m.evaluate(&psi).unwrap();
            prop_assert!(d.abs() < 1e-9, "{} changed by {}", m, d);
        }
    }

    #[test]
    fn form2_matches_s(seed in any::<u64>(), n in 3usize..=5) {
        let state = State::Pure(random_pure(&qubits(n), seed));
        let a = measure_s_form2(&state).unwrap();
        let b = measure_s(&state).unwrap();
        prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn form2_matches_s_on_mixed(seed in any::<u64>(), rank in 1usize..=8) {
        let state = State::Mixed(random_density(&qubits(3), rank, seed).unwrap());
        let a = measure_s_form2(&state).unwrap();
        let b = measure_s(&state).unwrap();
        prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn bound_property(seed in any::<u64>(), n in 3usize..=5) {
        let psi = random_pure(&qubits(n), seed);
        let m = measure_m(&psi).unwrap();
        prop_assert!(m >= -1e-9);
        prop_assert!(m <= bound_m(n, 2) + 1e-9);
        prop_assert!(measure_s(&psi).unwrap() <= bound_s(n, 2) + 1e-9);
    }

    #[test]
    fn strong_subadditivity(seed in any::<u64>(), rank in 1usize..=8) {
        let rho = random_density(&qubits(3), rank, seed).unwrap();
        prop_assert!(ssa_check(&rho).unwrap() >= -1e-8);
        let s = von_neumann_entropy(&rho);
        prop_assert!((-1e-9..=3.0 + 1e-9).contains(&s));
    }

    #[test]
    fn relative_entropy_is_mutual_information(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density(&qubits(2), rank, seed).unwrap();
        let rel = relative_entropy(&rho, &product_of_marginals(&rho).unwrap()).unwrap();
        let mi = mutual_information(&rho, &[0], &[1]).unwrap();
        prop_assert!((rel - mi).abs() < 1e-8, "{} vs {}", rel, mi);
    }

    #[test]
    fn entangled_pairs_are_detected(seed in any::<u64>(), t in 0.1f64..std::f64::consts::FRAC_1_SQRT_2) {
        let c = (1.0 - t * t).sqrt();
        let shape = qubits(2);
        let amps = vec![C64::new(c, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(t, 0.0)];
        let psi = PureState::new(shape.clone(), amps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = psi.apply_local(&random_local_unitaries(&shape, &mut rng)).unwrap();
        prop_assert!(measure_m(&psi).unwrap() >= 1e-3);
    }

    #[test]
    fn products_carry_no_correlation(seed in any::<u64>(), n in 2usize..=4) {
        let singles: Vec<PureState> =
            (0..n).map(|i| random_pure(&qubits(1), seed.wrapping_add(i as u64))).collect();
        let psi = totcorr::states::product(&singles).unwrap();
        for v in all_measures(&psi) {
            prop_assert!(v.abs() < 1e-9, "{}", v);
        }
    }
}

#[test]
fn ghz_attains_the_bounds() {
    for n in 2..=8 {
        let g = ghz(n).unwrap();
        assert!(
            (measure_m(&g).unwrap() - bound_m(n, 2)).abs() < 1e-9,
            "n = {n}"
        );
        assert!((measure_o(&g).unwrap() - n as f64 / 2.0).abs() < 1e-9);
        assert!((measure_s(&g).unwrap() - bound_s(n, 2)).abs() < 1e-9);
    }
}
