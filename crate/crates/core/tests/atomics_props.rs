use atomnet_core::atomics::{
    apply_pulses, atom_state, bell_map_sequence, bell_state, inverse_sequence, sequence_operator,
    AtomLevel, BellOutcome, NamedPulse, OscillatorFrame, PulseSpec,
};
use atomnet_core::Complex64;
use proptest::prelude::*;

fn level(l: AtomLevel) -> atomnet_core::qcore::StateVector {
    atom_state("atom2", &[(l, Complex64::new(1.0, 0.0))]).unwrap()
}

proptest! {
    #[test]
    fn bell_map_is_a_permutation_onto_levels(omega in -100.0f64..100.0, xi in -7.0f64..7.0) {
        let frame = OscillatorFrame::new(omega, xi);
        let seq = bell_map_sequence(&frame);
        for kind in BellOutcome::ALL {
            let mapped = apply_pulses(&bell_state(kind, &frame), &seq, "atom2").unwrap();
            for target in BellOutcome::ALL {
                let overlap = mapped.fidelity(&level(target.mapped_level())).unwrap();
                let want = if target == kind { 1.0 } else { 0.0 };
                prop_assert!((overlap - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bell_states_are_orthonormal(omega in -100.0f64..100.0, xi in -7.0f64..7.0) {
        let frame = OscillatorFrame::new(omega, xi);
        for a in BellOutcome::ALL {
            for b in BellOutcome::ALL {
                let ip = bell_state(a, &frame).inner(&bell_state(b, &frame)).unwrap();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((ip.norm() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_sequence_undoes_sequence(
        pulses in prop::collection::vec((0usize..6, 1usize..6, -10.0f64..10.0, -10.0f64..10.0), 1..6),
    ) {
        let specs: Vec<PulseSpec> = pulses
            .iter()
            .map(|&(u, du, area, phase)| {
                let a = AtomLevel::from_index(u).unwrap();
                let b = AtomLevel::from_index((u + du) % 6).unwrap();
                PulseSpec::new((a, b), area, phase, "p")
            })
            .collect();
        let forward = sequence_operator(&specs);
        let back = sequence_operator(&inverse_sequence(&specs));
        let id = atomnet_core::qcore::Operator::identity(6);
        prop_assert!(back.compose(&forward).unwrap().max_abs_diff(&id) < 1e-12);
    }
}

#[test]
fn named_pulses_move_populations_as_labelled() {
    use AtomLevel::*;
    let cases = [
        (NamedPulse::ShelveD, D, X),
        (NamedPulse::UnshelveD, X, D),
        (NamedPulse::SwapAc, A, C),
        (NamedPulse::SwapAc, C, A),
        (NamedPulse::SwapBd, B, D),
        (NamedPulse::SwapAb, A, B),
        (NamedPulse::SwapAb, B, A),
        (NamedPulse::PhaseFlipA, A, A),
    ];
    for (pulse, from, to) in cases {
        let out = pulse.spec().apply_to(&level(from), "atom2").unwrap();
        assert!(
            (out.fidelity(&level(to)).unwrap() - 1.0).abs() < 1e-12,
            "{}",
            pulse.name()
        );
    }
    let flipped = NamedPulse::PhaseFlipA
        .spec()
        .apply_to(&level(A), "atom2")
        .unwrap();
    assert!((flipped.amplitudes()[A.index()] + 1.0).norm() < 1e-12);
    let untouched = NamedPulse::PhaseFlipA
        .spec()
        .apply_to(&level(B), "atom2")
        .unwrap();
    assert!((untouched.amplitudes()[B.index()] - 1.0).norm() < 1e-12);
}
