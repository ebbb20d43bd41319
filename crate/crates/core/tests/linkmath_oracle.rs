use atomnet_core::linkmath::{
    coincidence_prob, epsilon_from_snr, expected_trials, false_positive_prob, herald_fidelity,
    snr_db, survival_prob,
};
use proptest::prelude::*;

/// Enumerates arrival per arm, the loading draw and each node's herald,
/// returning (P(coincidence), P(coincidence ∧ both absorbed)).
fn enumerate_heralds(s: f64, eta_joint: f64, eta_single: f64, eps: f64) -> (f64, f64) {
    let mut declared = 0.0;
    let mut genuine = 0.0;
    for arrived in [[false, false], [false, true], [true, false], [true, true]] {
        let p_arrive: f64 = arrived
            .iter()
            .map(|&a| if a { s } else { 1.0 - s })
            .product();
        // (probability, absorbed per node) for every loading outcome
        let loadings: Vec<(f64, [bool; 2])> = match arrived {
            [true, true] => vec![(eta_joint, [true, true]), (1.0 - eta_joint, [false, false])],
            [true, false] => vec![
                (eta_single, [true, false]),
                (1.0 - eta_single, [false, false]),
            ],
            [false, true] => vec![
                (eta_single, [false, true]),
                (1.0 - eta_single, [false, false]),
            ],
            [false, false] => vec![(1.0, [false, false])],
        };
        for (p_load, absorbed) in loadings {
            for heralds in [[false, false], [false, true], [true, false], [true, true]] {
                let mut p = p_arrive * p_load;
                for node in 0..2 {
                    let p_herald = if absorbed[node] { 1.0 } else { eps };
                    p *= if heralds[node] {
                        p_herald
                    } else {
                        1.0 - p_herald
                    };
                }
                if heralds == [true, true] {
                    declared += p;
                    if absorbed == [true, true] {
                        genuine += p;
                    }
                }
            }
        }
    }
    (declared, genuine)
}

#[test]
fn herald_closed_form_matches_enumeration() {
    let eps_ref = 0.75f64.powi(30);
    let s_ref = 10f64.powf(-1.5);
    let cases = [
        (s_ref, 1.0, 1.0, eps_ref),
        (0.0316, 1.0, 1.0, eps_ref),
        (0.3, 0.6, 0.2, 0.05),
        (0.9, 0.1, 0.9, 0.5),
        (1.0, 1.0, 1.0, 0.3),
        (0.01, 0.5, 0.5, 1.0),
    ];
    for (s, ej, es, eps) in cases {
        let (declared, genuine) = enumerate_heralds(s, ej, es, eps);
        assert!((coincidence_prob(s, ej, es, eps) - declared).abs() < 1e-15);
        let f = herald_fidelity(s, ej, es, eps).unwrap();
        assert!(
            (f - genuine / declared).abs() < 1e-12,
            "{s} {ej} {es} {eps}"
        );
    }
    let (declared, genuine) = enumerate_heralds(s_ref, 1.0, 1.0, eps_ref);
    assert!((genuine / declared - 0.9891).abs() < 1e-3);
    assert!((declared - 1.011e-3).abs() < 1e-6);
}

#[test]
fn trials_times_survival_squared_is_one() {
    for i in 0..=300 {
        let l = f64::from(i) * 0.1;
        let s = survival_prob(l).unwrap();
        assert!((expected_trials(l) * s * s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn snr_round_trip() {
    for k in 0..=240 {
        let eps = 10f64.powf(-f64::from(k) / 20.0);
        let s = snr_db(eps).unwrap().db().unwrap();
        assert!((epsilon_from_snr(s) / eps - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fidelity_bound_and_limit() {
    for li in 0..=30 {
        let l = f64::from(li);
        let s = survival_prob(l).unwrap();
        for ek in 0..=12 {
            let eps = 10f64.powf(-8.0 + f64::from(ek) / 2.0);
            let f = herald_fidelity(s, 1.0, 1.0, eps).unwrap();
            let bound = 1.0 - eps / s * (2.0 * (1.0 - s) / s);
            assert!(f >= bound - 1e-15, "L={l} eps={eps}: {f} < {bound}");
        }
    }
    let s = survival_prob(15.0).unwrap();
    let mut prev = 0.0;
    for k in 1..=12 {
        let f = herald_fidelity(s, 1.0, 1.0, 10f64.powi(-k)).unwrap();
        assert!(f >= prev);
        prev = f;
    }
    assert!(1.0 - prev < 1e-9);
}

proptest! {
    #[test]
    fn survival_decreases_with_loss(a in 0.0f64..60.0, d in 0.001f64..10.0) {
        prop_assert!(survival_prob(a + d).unwrap() < survival_prob(a).unwrap());
    }

    #[test]
    fn epsilon_monotone(p in 0.01f64..0.99, dp in 0.001f64..0.009, n in 1u32..60) {
        prop_assert!(false_positive_prob(p + dp, n).unwrap() > false_positive_prob(p, n).unwrap());
        prop_assert!(false_positive_prob(p, n + 1).unwrap() < false_positive_prob(p, n).unwrap());
    }
}
