mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qet_core::teleport::{
    extend_with_bell, relay_identity_check, teleport_branches, teleport_qubit, Purpose,
};
use qet_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn qubit() -> impl Strategy<Value = StateVector> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(t, p)| {
        StateVector::from_amplitudes(vec![
            Complex64::new((t / 2.0).cos(), 0.0),
            Complex64::from_polar((t / 2.0).sin(), p),
        ])
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_branch_delivers_the_input(psi in qubit()) {
        let s = extend_with_bell(&psi).unwrap();
        let outs = teleport_branches(&s, 0, (1, 2)).unwrap();
        prop_assert_eq!(outs.len(), 4);
        let total: f64 = outs.iter().map(|o| o.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let target = density(&psi);
        for o in outs {
            prop_assert!((o.probability - 0.25).abs() < 1e-12);
            let got = reduce_to_qubit(&density(&o.state), 2);
            prop_assert!(max_abs(&(got - &target)) < 1e-12);
        }
    }

    #[test]
    fn entanglement_with_a_spectator_survives(a in qubit(), b in qubit(), seed in any::<u64>()) {
        // (|0>a + |1>b)/sqrt2 on (qubit 0, spectator qubit 1): teleporting
        // qubit 0 must leave the joint state of (teleported, spectator) intact.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (a0, a1) = (a.amplitudes()[0], a.amplitudes()[1]);
        let (b0, b1) = (b.amplitudes()[0], b.amplitudes()[1]);
        let joint = StateVector::normalized(vec![a0 * r, b0 * r, a1 * r, b1 * r]).unwrap();
        let s = extend_with_bell(&joint).unwrap();
        let mut t = LoccTranscript::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = teleport_qubit(&s, 0, (2, 3), &mut t, ("charlie", "bob"), &mut rng).unwrap();
        prop_assert_eq!(t.count(Purpose::TeleportCorrection), 2);
        // compare reduced (qubit 3, qubit 1) state with the original (0, 1)
        let rho = density(&out);
        let mut got = CMat::zeros(4, 4);
        for x in 0..16usize {
            for y in 0..16usize {
                let rest = |v: usize| v & 0b0101;
                if rest(x) == rest(y) {
                    let idx = |v: usize| ((v >> 3) & 1) | (((v >> 1) & 1) << 1);
                    got[(idx(x), idx(y))] += rho[(x, y)];
                }
            }
        }
        prop_assert!(max_abs(&(got - density(&joint))) < 1e-12);
    }
}

#[test]
fn relay_panel_is_identity() {
    for hops in 1..=3 {
        assert!(relay_identity_check(hops, 24, 7).unwrap() <= 1e-12);
    }
}

#[test]
fn relay_reproduces_direct_qet() {
    let p = MinimalModelParams::new(4.0, 1.5).unwrap();
    let direct = run_minimal_qet(p).unwrap();
    for hops in 1..=3 {
        let (relayed, transcript) = run_longrange_qet(p, hops, 11).unwrap();
        assert!(relayed.max_abs_diff(&direct) < 1e-10);
        assert_eq!(transcript.messages().len(), 1 + 2 * hops);
        assert_eq!(transcript.count(Purpose::MuBroadcast), 1);
        assert_eq!(transcript.bit_count(Purpose::TeleportCorrection), 2 * hops);
        let back = LoccTranscript::parse(&transcript.to_text()).unwrap();
        assert_eq!(back, transcript);
    }
}

#[test]
fn bell_pair_is_required() {
    let psi = StateVector::basis(3, 0).unwrap();
    assert!(teleport_branches(&psi, 0, (1, 2)).is_err());
    assert!(run_longrange_qet(MinimalModelParams::new(1.0, 1.0).unwrap(), 0, 1).is_err());
}
