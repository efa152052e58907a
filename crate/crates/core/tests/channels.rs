use bidir_bounds::channels::{
    check_bicovariance, cnot_channel, cnot_output_representations, collective_dephasing_swap,
    depolarizing, identity_channel, is_ppt_preserving, noisy_cnot, partial_swap,
    partial_swap_traceout, pauli_representation, phase_gate, swap_channel, teleportation_simulate,
    Bicovariance, GroupRepresentation, IN_A, IN_B, OUT_A, OUT_B,
};
use bidir_bounds::operator::{random, DenseOperator, PureState, SystemDims};
use bidir_bounds::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn inputs() -> SystemDims {
    SystemDims::new([(IN_A, 2), (IN_B, 2)]).unwrap()
}

#[test]
fn zoo_channels_are_trace_preserving() {
    let mut zoo = vec![identity_channel().unwrap(), swap_channel().unwrap(), cnot_channel().unwrap()];
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        zoo.push(partial_swap(p).unwrap());
        zoo.push(partial_swap_traceout(p).unwrap());
        zoo.push(collective_dephasing_swap(p, std::f64::consts::PI / 3.0).unwrap());
        zoo.push(noisy_cnot(p).unwrap());
        zoo.push(depolarizing(p).unwrap());
    }
    for ch in &zoo {
        assert!(ch.completeness_residual() < 1e-12, "{}", ch.name());
        let j = ch.choi().unwrap();
        assert!((j.real_trace().unwrap() - 4.0).abs() < 1e-10);
        assert!(j.min_eigenvalue().unwrap() > -1e-10);
        assert_eq!(j.dims().labels(), ["LA", "A", "B", "LB"]);
    }
}

/// ‖J(p) − J(q)‖₁ for the pure Choi vectors √p|Φ_I⟩ + i√(1−p)|Φ_S⟩, where
/// ⟨Φ_I|Φ_S⟩ = 1/2.
fn partial_swap_choi_distance(p: f64, q: f64) -> f64 {
    let re = (p * q).sqrt() + ((1.0 - p) * (1.0 - q)).sqrt();
    let im = 0.5 * ((p * (1.0 - q)).sqrt() - ((1.0 - p) * q).sqrt());
    8.0 * (1.0 - re * re - im * im).max(0.0).sqrt()
}

#[test]
fn partial_swap_choi_is_continuous() {
    for i in 0..100 {
        let p = i as f64 / 100.0;
        let a = partial_swap(p).unwrap().choi_state().unwrap();
        let b = partial_swap(p + 1e-4).unwrap().choi_state().unwrap();
        // Four times the trace norm of the normalized difference.
        let dist = 8.0 * a.trace_distance(&b).unwrap();
        assert!((dist - partial_swap_choi_distance(p, p + 1e-4)).abs() < 1e-9, "p={p}");
        // The √p amplitude makes the distance grow like √1e-4 at the
        // endpoints, so the 1e-2 bound only holds inside.
        if (0.01..=0.99).contains(&p) {
            assert!(dist < 1e-2, "p={p}: {dist}");
        }
    }
    assert!(partial_swap_choi_distance(0.0, 1e-4) > 0.06);
}

/// Distance between the Choi operators of dephasing(1 − p) and of
/// dephasing(p) followed by `Z_φ ⊗ Z_φ` on the outputs.
fn dephasing_mirror_gap(p: f64, phi: f64) -> f64 {
    let z = DenseOperator::new(
        phase_gate(phi).kronecker(&phase_gate(phi)),
        SystemDims::new([(OUT_A, 2), (OUT_B, 2)]).unwrap(),
        SystemDims::new([(OUT_A, 2), (OUT_B, 2)]).unwrap(),
    )
    .unwrap();
    let turned = collective_dephasing_swap(p, phi).unwrap().choi().unwrap().conjugate_local(&z).unwrap();
    let mirror = collective_dephasing_swap(1.0 - p, phi).unwrap().choi().unwrap();
    turned.max_abs_diff(&mirror).unwrap()
}

#[test]
fn dephasing_mirrors_under_output_phase() {
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        assert!(dephasing_mirror_gap(p, std::f64::consts::PI) < 1e-12, "p={p}");
    }
    // Swapping the Kraus weights needs Z_φ² = I, so other angles only
    // mirror at p = 1/2.
    assert!(dephasing_mirror_gap(0.2, std::f64::consts::PI / 2.0) > 0.1);
}

#[test]
fn out_of_range_parameters_are_rejected() {
    assert!(matches!(partial_swap(1.2), Err(Error::InvalidParameter(_))));
    assert!(matches!(noisy_cnot(-0.1), Err(Error::InvalidParameter(_))));
    assert!(matches!(collective_dephasing_swap(f64::NAN, 0.0), Err(Error::InvalidParameter(_))));
}

#[test]
fn swap_moves_states_across() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random::random_density(SystemDims::single(IN_A, 2).unwrap(), &mut rng).unwrap();
    let b = random::random_density(SystemDims::single(IN_B, 2).unwrap(), &mut rng).unwrap();
    let out = swap_channel().unwrap().apply(&a.tensor(&b).unwrap()).unwrap();
    let got_a = out.partial_trace(&[OUT_B]).unwrap();
    assert!(got_a.relabel(&[IN_B]).unwrap().max_abs_diff(&b).unwrap() < 1e-12);
}

#[test]
fn traceout_variant_has_trivial_alice_output() {
    let ch = partial_swap_traceout(0.3).unwrap();
    assert_eq!(ch.out_dims().dims(), [1, 2]);
    let full = partial_swap(0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = random::random_density(inputs(), &mut rng).unwrap();
    let reduced = full.apply(&rho).unwrap().partial_trace(&[OUT_A]).unwrap();
    let direct = ch.apply(&rho).unwrap().partial_trace(&[OUT_A]).unwrap();
    assert!(reduced.max_abs_diff(&direct).unwrap() < 1e-12);
}

#[test]
fn identity_choi_is_two_bell_pairs() {
    let j = identity_channel().unwrap().choi_state().unwrap();
    let a = PureState::phi("LA", "A", 1.0).unwrap();
    let b = PureState::phi("B", "LB", 1.0).unwrap();
    let want = DenseOperator::projector(&a.tensor(&b).unwrap());
    assert!(j.max_abs_diff(&want).unwrap() < 1e-12);
}

fn cnot_reps() -> (GroupRepresentation, GroupRepresentation, GroupRepresentation, GroupRepresentation) {
    let (w, t) = cnot_output_representations().unwrap();
    (pauli_representation(IN_A).unwrap(), pauli_representation(IN_B).unwrap(), w, t)
}

#[test]
fn cnot_is_pauli_bicovariant() {
    let (g, h, w, t) = cnot_reps();
    let reps = Bicovariance { g: &g, h: &h, w: &w, t: &t };
    assert!(check_bicovariance(&cnot_channel().unwrap(), &reps).unwrap() < 1e-12);
    // Identity outputs do not intertwine CNOT.
    let wi = GroupRepresentation::new(OUT_A, (0..16).map(|k| g.elements()[k / 4].matrix().clone()).collect()).unwrap();
    let ti = GroupRepresentation::new(OUT_B, (0..16).map(|k| h.elements()[k % 4].matrix().clone()).collect()).unwrap();
    let naive = Bicovariance { g: &g, h: &h, w: &wi, t: &ti };
    assert!(check_bicovariance(&cnot_channel().unwrap(), &naive).unwrap() > 0.5);
    assert!(check_bicovariance(&identity_channel().unwrap(), &naive).unwrap() < 1e-12);
}

#[test]
fn bicovariance_ignores_enumeration_order() {
    let (g, h, w, t) = cnot_reps();
    let ch = cnot_channel().unwrap();
    let order = [3, 1, 0, 2];
    let g2 = g.reordered(&order).unwrap();
    let pairs: Vec<usize> = (0..16).map(|k| order[k / 4] * 4 + k % 4).collect();
    let w2 = w.reordered(&pairs).unwrap();
    let t2 = t.reordered(&pairs).unwrap();
    let reps = Bicovariance { g: &g2, h: &h, w: &w2, t: &t2 };
    assert!(check_bicovariance(&ch, &reps).unwrap() < 1e-12);
}

#[test]
fn representations_must_match_channel_systems() {
    let (g, h, w, _) = cnot_reps();
    let reps = Bicovariance { g: &h, h: &g, w: &w, t: &w };
    assert!(matches!(
        check_bicovariance(&cnot_channel().unwrap(), &reps),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn non_one_designs_are_rejected() {
    let half: Vec<_> = (0..2).map(|g| bidir_bounds::channels::pauli(0, g)).collect();
    assert!(GroupRepresentation::new(IN_A, half).is_err());
}

#[test]
fn teleportation_reproduces_cnot_with_reference() {
    let (g, h, w, t) = cnot_reps();
    let reps = Bicovariance { g: &g, h: &h, w: &w, t: &t };
    let ch = cnot_channel().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dims = SystemDims::new([("R", 2), (IN_A, 2), (IN_B, 2)]).unwrap();
    for _ in 0..3 {
        let rho = random::random_density(dims.clone(), &mut rng).unwrap();
        let sim = teleportation_simulate(&ch, &reps, &rho).unwrap();
        let direct = ch.apply(&rho).unwrap();
        assert_eq!(sim.dims(), direct.dims());
        assert!(sim.trace_distance(&direct).unwrap() < 1e-10);
    }
}

#[test]
fn teleportation_refuses_non_covariant_channel() {
    let g = pauli_representation(IN_A).unwrap();
    let h = pauli_representation(IN_B).unwrap();
    let w = GroupRepresentation::new(OUT_A, (0..16).map(|k| g.elements()[k / 4].matrix().clone()).collect()).unwrap();
    let t = GroupRepresentation::new(OUT_B, (0..16).map(|k| h.elements()[k % 4].matrix().clone()).collect()).unwrap();
    let reps = Bicovariance { g: &g, h: &h, w: &w, t: &t };
    let rho = DenseOperator::identity(inputs()).scale_real(0.25);
    let err = teleportation_simulate(&partial_swap(0.5).unwrap(), &reps, &rho).unwrap_err();
    assert!(matches!(err, Error::NotBicovariant(d) if d > 1e-10));
}

#[test]
fn ppt_preservation() {
    assert!(is_ppt_preserving(&depolarizing(1.0).unwrap()).unwrap());
    assert!(!is_ppt_preserving(&swap_channel().unwrap()).unwrap());
    assert!(!is_ppt_preserving(&cnot_channel().unwrap()).unwrap());
    // Local channels never create entanglement across the cut.
    assert!(is_ppt_preserving(&identity_channel().unwrap()).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn collective_dephasing_is_cptp(p in 0.0f64..=1.0, phi in -7.0f64..7.0) {
        let ch = collective_dephasing_swap(p, phi).unwrap();
        prop_assert!(ch.completeness_residual() < 1e-12);
        let j = ch.choi().unwrap();
        prop_assert!(j.min_eigenvalue().unwrap() > -1e-10);
        prop_assert!((j.real_trace().unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn output_is_a_state(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random::random_density(inputs(), &mut rng).unwrap();
        for ch in [partial_swap(p).unwrap(), noisy_cnot(p).unwrap(), partial_swap_traceout(p).unwrap()] {
            prop_assert!(ch.apply(&rho).unwrap().is_density());
        }
    }
}
