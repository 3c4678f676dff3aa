use oplab::kernel::{c64, ComplexMatrix, Tolerances};
use oplab::search::random_unitary;
use oplab::symmetry::{
    classify_cs, conjugation_residual, objective, objective_gradient, screen_eigen_angle, screen_modulus_angle,
    unitary_exp, verify_certificate, CSVerdict, Conjugation, OracleConfig, ScreenId, ScreenOutcome,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn complex_entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n)
}

/// `S = G + Gᵀ`, optionally moved by a seeded unitary similarity.
fn cs_strategy(max_n: usize) -> impl Strategy<Value = (ComplexMatrix, ComplexMatrix, u64)> {
    (2..=max_n).prop_flat_map(|n| {
        (complex_entries(n), any::<u64>()).prop_map(move |(v, seed)| {
            let g = ComplexMatrix::new(n, v.into_iter().map(|(re, im)| c64(re, im)).collect()).unwrap();
            let s = &g + &g.transpose();
            let u = random_unitary(n, &mut ChaCha8Rng::seed_from_u64(seed));
            (s, u, seed)
        })
    })
}

fn refuted(o: ScreenOutcome) -> bool {
    matches!(o, ScreenOutcome::Refuted { .. })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn screens_never_refute_complex_symmetric_matrices((s, u, _) in cs_strategy(6)) {
        let t = u.matmul(&s).matmul(&u.adjoint());
        for m in [&s, &t] {
            prop_assert!(!refuted(screen_eigen_angle(m, &tol())));
            prop_assert!(!refuted(screen_modulus_angle(m, &tol())));
        }
    }

    #[test]
    fn conjugation_transports_under_unitary_similarity((s, u, _) in cs_strategy(6)) {
        // S is symmetric, so J = I works for S and J' = U Uᵀ for U S U*.
        let t = u.matmul(&s).matmul(&u.adjoint());
        let moved = Conjugation::standard(s.n()).transported(&u);
        let c = Conjugation::new(moved, &tol()).unwrap();
        prop_assert!(conjugation_residual(&t, &c).unwrap() <= 1e-12 * t.frobenius_norm().max(1.0));
    }

    #[test]
    fn certificates_reverify_independently((s, u, seed) in cs_strategy(5)) {
        let t = u.matmul(&s).matmul(&u.adjoint());
        let verdict = classify_cs(&t, &tol(), &OracleConfig::with_seed(seed));
        let CSVerdict::CertifiedCs { conjugation, residual } = verdict else {
            return Err(TestCaseError::fail(format!("not certified: {verdict:?}")));
        };
        let j = conjugation.matrix();
        prop_assert!(j.distance(&j.transpose()) <= tol().eps_cert);
        prop_assert!(j.cogram().distance_to_identity() <= tol().eps_cert);
        // Recompute J conj(T) J* − T* entry by entry.
        let direct = j.matmul(&t.conj()).matmul(&j.adjoint()).distance(&t.adjoint());
        prop_assert!((direct - residual).abs() <= 1e-12 * t.frobenius_norm().max(1.0));
        prop_assert!(verify_certificate(&t, j, &tol()).is_ok());
        // The certificate carries along a further unitary similarity.
        let w = random_unitary(t.n(), &mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let c2 = Conjugation::new(conjugation.transported(&w), &tol()).unwrap();
        let t2 = w.matmul(&t).matmul(&w.adjoint());
        prop_assert!(conjugation_residual(&t2, &c2).unwrap() <= 10.0 * tol().eps_cert * t.frobenius_norm().max(1.0));
    }

    #[test]
    fn gradient_matches_finite_differences(n in 2usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_unitary(n, &mut rng).matmul(&ComplexMatrix::from_fn(n, |i, j| c64((i * n + j) as f64 * 0.3 - 1.0, (i as f64) - (j as f64) * 0.5)));
        let q = random_unitary(n, &mut rng);
        let k = ComplexMatrix::from_fn(n, |i, j| c64(((i + 1) * (j + 1)) as f64 / 7.0 - 0.4, 0.0));
        let g = objective_gradient(&t, &q);
        let predicted: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| g[i][j] * k.get(i, j).re).sum();
        let h = 1e-6;
        let plus = objective(&t, &q.matmul(&unitary_exp(&k.scale_real(h))));
        let minus = objective(&t, &q.matmul(&unitary_exp(&k.scale_real(-h))));
        let fd = (plus - minus) / (2.0 * h);
        prop_assert!((fd - predicted).abs() <= 1e-5 * (1.0 + predicted.abs()), "fd {} analytic {}", fd, predicted);
    }
}

#[test]
fn jordan_block_is_complex_symmetric() {
    // Every 2x2 matrix is unitarily equivalent to a symmetric one.
    let t = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
    assert!(classify_cs(&t, &tol(), &OracleConfig::default()).is_cs());
}

#[test]
fn three_by_three_shift_with_unequal_weights_is_refuted() {
    let t = ComplexMatrix::from_real_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]]);
    match classify_cs(&t, &tol(), &OracleConfig::default()) {
        CSVerdict::CertifiedNotCs { screen, margin } => {
            assert_eq!(screen, ScreenId::ModulusAngle);
            assert!(margin >= tol().eps_screen);
        }
        other => panic!("expected a refutation, got {other:?}"),
    }
}
