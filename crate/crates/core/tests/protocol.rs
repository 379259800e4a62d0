use std::f64::consts::PI;

use proptest::prelude::*;

use osg_core::protocol::{
    classify, run_monte_carlo, run_trial, PathClassifier, PhotonCounter, PreparedProtocol, ProbeConfig, ProtocolConfig,
    Status,
};
use osg_core::{GaussianState, InternalLabel, QubitState, Region, Sign};

fn config(theta: f64, phi: f64, eps_tau: f64, mode: PathClassifier) -> ProtocolConfig {
    ProtocolConfig::reference(QubitState::new(theta, phi).unwrap(), eps_tau, mode)
}

#[test]
fn success_rate_independent_of_bloch_point() {
    let n = 40_000;
    for (i, (theta, phi)) in [(0.2, 0.0), (1.0, 2.0), (1.7, -1.0), (2.5, 3.0), (3.0, 0.5)].into_iter().enumerate() {
        let stats = run_monte_carlo(&config(theta, phi, 6.0, PathClassifier::Ideal), n, 100 * i as u64).unwrap();
        assert!((stats.success_rate - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt(), "{theta}: {}", stats.success_rate);
    }
}

#[test]
fn conditional_fidelity_grows_with_interaction_time() {
    let mut last = 0.0;
    for eps_tau in [2.0, 4.0, 6.0, 8.0] {
        let stats = run_monte_carlo(&config(1.1, 0.4, eps_tau, PathClassifier::SampledPosition), 40_000, 5).unwrap();
        assert!(stats.mean_fidelity > last, "ετ={eps_tau}: {} after {last}", stats.mean_fidelity);
        last = stats.mean_fidelity;
    }
    assert!(last > 0.999);
}

#[test]
fn monte_carlo_is_reproducible() {
    let cfg = config(1.3, 0.9, 5.0, PathClassifier::SampledPosition);
    let a = PreparedProtocol::new(&cfg).unwrap().sample_many(500, 77).unwrap();
    let b = PreparedProtocol::new(&cfg).unwrap().sample_many(500, 77).unwrap();
    assert_eq!(a, b);
    assert_eq!(a[17], run_trial(&cfg, 77 + 17).unwrap());
}

#[test]
fn probe_and_direct_counting_induce_the_same_statistics() {
    let direct = config(1.2, 0.3, 8.0, PathClassifier::Ideal);
    let p = direct.params;
    let probe = ProbeConfig {
        region: Region::Nodal,
        tau_p: p.time_from_eps_tau(50.0),
        packet: GaussianState::minimum_uncertainty(0.0, 0.0, p.lambda() / 6.0, p.hbar()).unwrap(),
        delay: 0.0,
        z_conf: 5.0,
    };
    let via_probe = ProtocolConfig {
        photon_counter: PhotonCounter::Probe(probe),
        ..direct
    };
    let n = 20_000;
    let a = run_monte_carlo(&direct, n, 1).unwrap();
    let b = run_monte_carlo(&via_probe, n, 2).unwrap();
    assert_eq!(b.n_unreliable, 0);
    for (ra, rb) in a.per_row_frequencies.iter().zip(&b.per_row_frequencies) {
        let q = 0.5 * (ra.frequency + rb.frequency);
        let tol = 4.0 * (2.0 * q * (1.0 - q) / n as f64).sqrt() + 1e-12;
        assert!((ra.frequency - rb.frequency).abs() <= tol, "{}: {} vs {}", ra.label, ra.frequency, rb.frequency);
    }
    assert!(b.min_fidelity > 1.0 - 1e-9);
}

#[test]
fn antinodal_protocol_runs() {
    let mut cfg = config(0.9, 0.1, 6.0, PathClassifier::Ideal);
    cfg.region = Region::Antinodal;
    let stats = run_monte_carlo(&cfg, 2000, 3).unwrap();
    assert_eq!(stats.n_trials, 2000);
    assert!(stats.success_rate > 0.4 && stats.success_rate < 0.6);
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trial_is_pure_in_seed(theta in 0.0..PI, phi in -PI..PI, seed in any::<u64>()) {
        let cfg = config(theta, phi, 6.0, PathClassifier::SampledPosition);
        prop_assert_eq!(run_trial(&cfg, seed).unwrap(), run_trial(&cfg, seed).unwrap());
    }

    #[test]
    fn swapping_all_labels_keeps_status(n in 0u8..3, excited in any::<bool>(), a in sign(), b in sign()) {
        let label = if excited { InternalLabel::Excited } else { InternalLabel::Ground };
        let r = classify(n, label, Some(a), Some(b)).unwrap();
        let s = classify(n, label, Some(a.flip()), Some(b.flip())).unwrap();
        prop_assert_eq!(r.status, s.status);
        prop_assert_eq!(r.status == Status::Failure, !matches!((n, label), (1, InternalLabel::Ground) | (0, InternalLabel::Excited)));
    }
}
