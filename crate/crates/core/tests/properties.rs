use oplab::kernel::{c64, ComplexMatrix, Tolerances};
use oplab::properties::{
    flushed_power, is_binormal, is_centered, is_hyponormal, is_normal, is_paranormal, is_quasinormal,
    property_report, Paranormal, DEFAULT_CENTERED_DEPTH,
};
use oplab::search::{generate, random_unitary, Family, RandomSpec};
use oplab::symmetry::OracleConfig;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn family_strategy() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::IntegerDense),
        Just(Family::GaussianDense),
        Just(Family::Involution),
        Just(Family::WeightedInvolutivePermutation),
        Just(Family::Nilpotent2),
        Just(Family::Normal),
        Just(Family::SquareNormal),
        Just(Family::UnitaryConjugate(Box::new(Family::IntegerDense))),
    ]
}

fn sample_strategy() -> impl Strategy<Value = ComplexMatrix> {
    (family_strategy(), 2usize..=5, any::<u64>()).prop_map(|(family, n, seed)| {
        generate(&RandomSpec::new(family, n, seed, 1), 0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn reports_respect_the_implication_lattice(t in sample_strategy()) {
        let r = property_report(&t, DEFAULT_CENTERED_DEPTH, &tol(), &OracleConfig::default()).unwrap();
        prop_assert!(r.validate().is_ok(), "{:?}", r.validate());
        prop_assert_eq!(r.n, t.n());
    }

    /// In finite dimensions `tr(T*T − TT*) = 0`, so hyponormal means normal.
    #[test]
    fn hyponormal_coincides_with_normal(t in sample_strategy()) {
        let h = is_hyponormal(&t, &tol()).unwrap();
        let n = is_normal(&t, &tol());
        if n.holds {
            prop_assert!(h.holds);
        }
        if n.witness > 1e-6 {
            prop_assert!(!h.holds);
        }
    }

    #[test]
    fn adjoint_symmetric_properties(t in sample_strategy()) {
        let a = t.adjoint();
        for (x, y) in [(is_normal(&t, &tol()), is_normal(&a, &tol())), (is_binormal(&t, &tol()), is_binormal(&a, &tol()))] {
            prop_assert!((x.witness - y.witness).abs() <= 1e-12);
        }
    }

    #[test]
    fn unitary_similarity_preserves_properties(t in sample_strategy(), seed in any::<u64>()) {
        let v = random_unitary(t.n(), &mut ChaCha8Rng::seed_from_u64(seed));
        let s = v.matmul(&t).matmul(&v.adjoint());
        for (f, name) in [
            (is_normal as fn(&ComplexMatrix, &Tolerances) -> _, "normal"),
            (is_quasinormal, "quasinormal"),
            (is_binormal, "binormal"),
        ] {
            let (x, y) = (f(&t, &tol()), f(&s, &tol()));
            prop_assert!((x.witness - y.witness).abs() <= 1e-9, "{} {} {}", name, x.witness, y.witness);
        }
    }

    #[test]
    fn paranormal_witness_is_genuine(t in sample_strategy()) {
        if let Paranormal::No { witness, gap } = is_paranormal(&t, &tol()).unwrap() {
            let smax = oplab::kernel::svd(&t).unwrap().sigma[0];
            let tn = t.scale_real(1.0 / smax);
            let x_norm: f64 = witness.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((x_norm - 1.0).abs() < 1e-12);
            let tx = tn.matvec(&witness);
            let ttx = tn.matvec(&tx);
            let a: f64 = tx.iter().map(|z| z.norm_sqr()).sum();
            let b: f64 = ttx.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((a - b - gap).abs() < 1e-12);
            prop_assert!(gap >= tol().eps_screen);
        }
    }
}

#[test]
fn normal_matrices_are_paranormal_and_centered() {
    for i in 0..40 {
        let t = generate(&RandomSpec::new(Family::Normal, 2 + i % 5, 5, 40), i).unwrap();
        assert_eq!(is_paranormal(&t, &tol()).unwrap().decided(), Some(true), "{t}");
        assert!(is_centered(&t, DEFAULT_CENTERED_DEPTH, &tol()).unwrap().holds);
    }
}

#[test]
fn weighted_shift_is_not_paranormal_when_weights_drop() {
    // S e1 = 2 e2, S e2 = 0.5 e3: ||S e1||^2 = 4 > ||S^2 e1|| = 1.
    let s = ComplexMatrix::from_real_rows(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.5, 0.0]]);
    assert_eq!(is_paranormal(&s, &tol()).unwrap().decided(), Some(false));
    // Increasing weights do not help: S e2 = 2 e3 while S^2 e2 = 0.
    let s = ComplexMatrix::from_real_rows(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]);
    assert_eq!(is_paranormal(&s, &tol()).unwrap().decided(), Some(false));
}

#[test]
fn quasinormal_and_binormal_on_known_matrices() {
    let shift = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
    assert!(!is_normal(&shift, &tol()).holds);
    assert!(is_binormal(&shift, &tol()).holds);
    assert!(!is_quasinormal(&shift, &tol()).holds);
    let d = ComplexMatrix::real_diagonal(&[1.0, -2.0, 3.0]);
    assert!(is_quasinormal(&d, &tol()).holds);
    let generic = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [0.0, 3.0]]);
    assert!(!is_binormal(&generic, &tol()).holds);
}

#[test]
fn flushed_powers_of_nilpotents_vanish() {
    for i in 0..30 {
        let t = generate(&RandomSpec::new(Family::Nilpotent2, 2 + i % 5, 9, 30), i).unwrap();
        assert!(flushed_power(&t, 2, &tol()).is_zero(), "{t}");
    }
    let t = ComplexMatrix::from_fn(2, |i, j| c64((i + j) as f64, 0.0));
    assert_eq!(flushed_power(&t, 2, &tol()), t.square());
}
