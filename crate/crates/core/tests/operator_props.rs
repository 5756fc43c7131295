mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qet_core::{heisenberg_derivative, ObservableSum, Pauli, PauliString, StateVector};

fn letter() -> impl Strategy<Value = Pauli> {
    prop_oneof![
        Just(Pauli::I),
        Just(Pauli::X),
        Just(Pauli::Y),
        Just(Pauli::Z)
    ]
}

fn word(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(letter(), n).prop_map(|ls| PauliString::from_letters(&ls).unwrap())
}

fn observable(n: usize) -> impl Strategy<Value = ObservableSum> {
    (
        prop::collection::vec((-3.0..3.0f64, word(n)), 1..6),
        -2.0..2.0f64,
    )
        .prop_map(move |(terms, off)| ObservableSum::from_terms(n, terms, off).unwrap())
}

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n)
        .prop_filter("non-zero", |v| {
            v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
        })
        .prop_map(|v| {
            StateVector::normalized(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
                .unwrap()
        })
}

#[test]
fn single_qubit_multiplication_table() {
    // XY = iZ, YZ = iX, ZX = iY and reversed orders pick up -i
    let cases = [("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")];
    for (a, b, c) in cases {
        let (a, b, c): (PauliString, PauliString, PauliString) =
            (a.parse().unwrap(), b.parse().unwrap(), c.parse().unwrap());
        assert_eq!(a.mul(&b).unwrap(), (1, c));
        assert_eq!(b.mul(&a).unwrap(), (3, c));
    }
}

#[test]
fn derivative_of_y_under_z_field() {
    // i[2Z, Y] = 2i(ZY - YZ) = 2i(-2iX) = 4X
    let h = ObservableSum::from_term(2.0, "Z".parse().unwrap());
    let d = heisenberg_derivative(&h, &"Y".parse().unwrap()).unwrap();
    assert_eq!(d.coefficient(&"X".parse().unwrap()), 4.0);
    assert_eq!(d.n_terms(), 1);
}

proptest! {
    #[test]
    fn product_matches_dense(a in word(3), b in word(3)) {
        let (k, w) = a.mul(&b).unwrap();
        let lhs = word_matrix(&a) * word_matrix(&b);
        let rhs = word_matrix(&w) * i_pow(k);
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn commutation_matches_dense(a in word(3), b in word(3)) {
        let (ma, mb) = (word_matrix(&a), word_matrix(&b));
        let comm = &ma * &mb - &mb * &ma;
        prop_assert_eq!(a.commutes_with(&b), max_abs(&comm) < 1e-12);
    }

    #[test]
    fn heisenberg_derivative_matches_dense(h in observable(3), s in word(3)) {
        let d = heisenberg_derivative(&h, &s).unwrap();
        let (mh, ms) = (obs_matrix(&h), word_matrix(&s));
        let expected = (&mh * &ms - &ms * &mh) * Complex64::new(0.0, 1.0);
        prop_assert!(max_abs(&(obs_matrix(&d) - expected)) < 1e-10);
    }

    #[test]
    fn expectation_is_quadratic_form(h in observable(3), psi in state(3)) {
        let v = column(&psi);
        let dense = (v.adjoint() * obs_matrix(&h) * &v)[(0, 0)];
        prop_assert!((psi.expectation(&h).unwrap() - dense.re).abs() < 1e-10);
    }

    #[test]
    fn apply_pauli_is_matrix_action(w in word(3), psi in state(3)) {
        let out = column(&psi.apply_pauli(&w).unwrap());
        let dense = word_matrix(&w) * column(&psi);
        prop_assert!((out - dense).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn string_round_trip(w in word(5)) {
        let back: PauliString = w.to_string().parse().unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn sums_are_linear(a in observable(2), b in observable(2), psi in state(2)) {
        let s = a.try_add(&b).unwrap();
        let lhs = psi.expectation(&s).unwrap();
        let rhs = psi.expectation(&a).unwrap() + psi.expectation(&b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }
}
