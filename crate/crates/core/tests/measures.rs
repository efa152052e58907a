use bidir_bounds::measures::{
    emax_dps_state, emax_ppt_state, is_ppt, max_rains_state, BipartiteCut, FeasibleSet,
};
use bidir_bounds::operator::{random, DenseOperator, PureState, SystemDims};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ab() -> BipartiteCut {
    BipartiteCut::new(&["A"], &["B"]).unwrap()
}

fn phi_d(d: usize) -> DenseOperator {
    DenseOperator::projector(&PureState::maximally_entangled("A", "B", d).unwrap())
}

fn two_qubits() -> SystemDims {
    SystemDims::new([("A", 2), ("B", 2)]).unwrap()
}

#[test]
fn cut_must_partition_the_labels() {
    let rho = phi_d(2);
    assert!(BipartiteCut::new(&["A"], &["A"]).is_err());
    assert!(BipartiteCut::new(&["A"], &["C"]).unwrap().validate(rho.dims()).is_err());
    assert!(ab().validate(rho.dims()).is_ok());
}

#[test]
fn maximally_entangled_values_are_log_d() {
    for d in [2usize, 3] {
        let rho = phi_d(d);
        let want = (d as f64).log2();
        let r = max_rains_state(&rho, &ab()).unwrap();
        let e = emax_ppt_state(&rho, &ab()).unwrap();
        assert!((r.bits - want).abs() < 1e-6, "rains d={d}: {}", r.bits);
        assert!((e.bits - want).abs() < 1e-6, "emax d={d}: {}", e.bits);
        // Independent check: log-negativity coincides for maximally entangled states.
        let neg = rho.partial_transpose(&["B"]).unwrap().trace_norm().unwrap().log2();
        assert!((neg - want).abs() < 1e-12);
        assert_eq!(r.feasible_set, FeasibleSet::PptPrime);
        assert_eq!(e.feasible_set, FeasibleSet::PptRelaxed);
    }
}

#[test]
fn product_and_mixed_states_are_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random::random_density(SystemDims::single("A", 2).unwrap(), &mut rng).unwrap();
    let b = random::random_density(SystemDims::single("B", 3).unwrap(), &mut rng).unwrap();
    let prod = a.tensor(&b).unwrap();
    assert!(max_rains_state(&prod, &ab()).unwrap().bits < 1e-6);
    assert!(emax_ppt_state(&prod, &ab()).unwrap().bits < 1e-6);

    let mixed = DenseOperator::identity(two_qubits()).scale_real(0.25);
    assert!(max_rains_state(&mixed, &ab()).unwrap().bits < 1e-6);
}

#[test]
fn bell_mixture_is_separable() {
    let p = DenseOperator::projector(&PureState::phi("A", "B", 1.0).unwrap());
    let m = DenseOperator::projector(&PureState::phi("A", "B", -1.0).unwrap());
    let rho = p.add(&m).unwrap().scale_real(0.5);
    assert!(emax_ppt_state(&rho, &ab()).unwrap().bits < 1e-6);
    assert!(is_ppt(&rho, &ab()).unwrap().is_ppt);
}

#[test]
fn ppt_test_examples() {
    let t = is_ppt(&phi_d(2), &ab()).unwrap();
    assert!(!t.is_ppt);
    assert!((t.min_eigenvalue + 0.5).abs() < 1e-12);
    assert!(is_ppt(&DenseOperator::identity(two_qubits()).scale_real(0.25), &ab()).unwrap().is_ppt);
    let prod = DenseOperator::projector(&PureState::basis(two_qubits(), 1).unwrap());
    assert!(is_ppt(&prod, &ab()).unwrap().is_ppt);
}

#[test]
fn multi_label_cut_matches_merged() {
    // Φ⁺ on A:B tensored with a product ancilla C on the left.
    let phi = phi_d(2);
    let c = DenseOperator::projector(&PureState::basis(SystemDims::single("C", 2).unwrap(), 0).unwrap());
    let rho = c.tensor(&phi).unwrap();
    let cut = BipartiteCut::new(&["C", "A"], &["B"]).unwrap();
    let r = max_rains_state(&rho, &cut).unwrap();
    assert!((r.bits - 1.0).abs() < 1e-6);
}

#[test]
fn symmetric_extension_levels_are_ordered() {
    let rho = phi_d(2);
    let l1 = emax_dps_state(&rho, &ab(), 1).unwrap();
    let l2 = emax_dps_state(&rho, &ab(), 2).unwrap();
    assert!(l2.bits >= l1.bits - 1e-8);
    assert_eq!(l2.feasible_set, FeasibleSet::PptSymmetricExtension(2));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sep = random::random_separable(
        &SystemDims::single("A", 2).unwrap(),
        &SystemDims::single("B", 2).unwrap(),
        4,
        &mut rng,
    )
    .unwrap();
    for k in 1..=3 {
        assert!(emax_dps_state(&sep, &ab(), k).unwrap().bits < 1e-6, "level {k}");
    }
}

#[test]
fn oversized_extension_is_refused() {
    let rho = phi_d(3);
    assert!(matches!(
        emax_dps_state(&rho, &ab(), 3),
        Err(bidir_bounds::Error::SizeLimit(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn random_states_obey_invariants(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random::random_density_rank(two_qubits(), 2, &mut rng).unwrap();
        let r = max_rains_state(&rho, &ab()).unwrap();
        let e = emax_ppt_state(&rho, &ab()).unwrap();
        prop_assert!(r.bits >= 0.0 && e.bits >= 0.0);
        prop_assert!(r.dual_bits <= r.bits + 1e-7);
        let u = random::random_unitary(SystemDims::single("B", 2).unwrap(), &mut rng).unwrap();
        let rotated = rho.conjugate_local(&u).unwrap();
        let r2 = max_rains_state(&rotated, &ab()).unwrap();
        let e2 = emax_ppt_state(&rotated, &ab()).unwrap();
        prop_assert!((r.bits - r2.bits).abs() < 1e-8, "{} vs {}", r.bits, r2.bits);
        prop_assert!((e.bits - e2.bits).abs() < 1e-8, "{} vs {}", e.bits, e2.bits);
        let l2 = emax_dps_state(&rho, &ab(), 2).unwrap();
        prop_assert!(l2.bits >= e.bits - 1e-8);
        if is_ppt(&rho, &ab()).unwrap().is_ppt {
            prop_assert!(r.bits < 1e-6 && e.bits < 1e-6);
        }
    }
}
