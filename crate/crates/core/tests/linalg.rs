use hrisk_core::lti::{dare_gain, LtiSystem};
use hrisk_core::matrix::{
    condition_number, kronecker, operator_two_norm, solve_discrete_lyapunov, spectral_radius, Mat,
};
use hrisk_core::rng::NoiseSource;
use proptest::prelude::*;

fn random_stable(rng: &mut NoiseSource, target_rho: f64) -> Mat {
    let m = Mat::from_rows(&[
        [rng.standard_normal(), rng.standard_normal()],
        [rng.standard_normal(), rng.standard_normal()],
    ])
    .unwrap();
    let rho = spectral_radius(&m).unwrap();
    m.scale(target_rho / rho.max(1e-12))
}

fn random_psd(rng: &mut NoiseSource) -> Mat {
    let l = Mat::from_rows(&[[rng.standard_normal(), 0.0], [rng.standard_normal(), rng.standard_normal()]]).unwrap();
    &(&l * &l.transpose()) + &Mat::identity(2).scale(1e-3)
}

/// Σ_k Φᵏ Σ (Φᵀ)ᵏ until the terms stop mattering.
fn lyapunov_series(phi: &Mat, sigma: &Mat) -> Mat {
    let mut total = sigma.clone();
    let mut term = sigma.clone();
    for _ in 0..200_000 {
        term = &(phi * &term) * &phi.transpose();
        total = &total + &term;
        if term.max_abs() < 1e-18 * total.max_abs() {
            break;
        }
    }
    total
}

#[test]
fn lyapunov_matches_truncated_series_on_random_systems() {
    let mut rng = NoiseSource::new(7);
    for case in 0..100 {
        let rho = 0.05 + 0.9 * rng.uniform();
        let phi = random_stable(&mut rng, rho);
        let sigma = random_psd(&mut rng);
        let p = solve_discrete_lyapunov(&phi, &sigma).unwrap();
        let oracle = lyapunov_series(&phi, &sigma);
        let err = (&p - &oracle).max_abs() / oracle.max_abs().max(1.0);
        assert!(err < 1e-8, "case {case}: rho {rho}, relative error {err}");
    }
}

#[test]
fn scalar_dare_closed_form() {
    // P = a²P − a²P²/(P + r) + q  ⇔  P² + (r − a²r − q)P − q r = 0.
    for &(a, q, r) in &[(0.9f64, 1.0f64, 1.0f64), (1.5, 0.2, 3.0), (0.3, 4.0, 0.01), (0.999, 9e-4, 1e-4)] {
        let b = r - a * a * r - q;
        let root = (-b + (b * b + 4.0 * q * r).sqrt()) / 2.0;
        let g = dare_gain(&Mat::scalar(a), &Mat::scalar(1.0), &Mat::scalar(q), &Mat::scalar(r)).unwrap();
        assert!((g.p_pred[(0, 0)] - root).abs() <= 1e-10 * root.max(1.0), "a={a} q={q} r={r}");
        assert!((g.predictor_gain[(0, 0)] - a * root / (root + r)).abs() < 1e-10);
    }
}

#[test]
fn dare_fixed_point_on_two_state_systems() {
    let sys = LtiSystem::new(
        Mat::from_rows(&[[0.95, 0.6], [0.0, 0.97]]).unwrap(),
        Mat::from_rows(&[[1.0, 0.3]]).unwrap(),
        Mat::identity(2).scale(9e-4),
        Mat::scalar(1e-4),
    )
    .unwrap();
    let g = dare_gain(&sys.a, &sys.h, &sys.q, &sys.r).unwrap();
    let p = &g.p_pred;
    let s = &sys.h.congruence(p).unwrap() + &sys.r;
    let aph = &(&sys.a * p) * &sys.h.transpose();
    let correction = &aph * &(&Mat::scalar(1.0 / s[(0, 0)]) * &aph.transpose());
    let rhs = &(&sys.a.congruence(p).unwrap() - &correction) + &sys.q;
    assert!((&rhs - p).max_abs() < 1e-12 * p.max_abs().max(1.0));
    assert!(spectral_radius(&(&sys.a - &(&g.predictor_gain * &sys.h))).unwrap() < 1.0);
}

fn mat2() -> impl Strategy<Value = Mat> {
    prop::array::uniform4(-3.0f64..3.0).prop_map(|v| Mat::from_rows(&[[v[0], v[1]], [v[2], v[3]]]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kappa_at_least_one_and_scale_invariant(m in mat2(), c in 0.1f64..10.0) {
        let k = condition_number(&m).unwrap();
        if let Some(v) = k.finite() {
            prop_assert!(v >= 1.0 - 1e-12);
            if v < 1e6 {
                let scaled = condition_number(&m.scale(c)).unwrap().finite().unwrap();
                prop_assert!((scaled - v).abs() <= 1e-9 * v);
            }
        }
    }

    #[test]
    fn spectral_radius_bounded_by_two_norm(m in mat2()) {
        let rho = spectral_radius(&m).unwrap();
        let norm = operator_two_norm(&m).unwrap();
        prop_assert!(rho <= norm * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn symmetric_radius_equals_two_norm(a in -3.0f64..3.0, b in -3.0f64..3.0, d in -3.0f64..3.0) {
        let m = Mat::from_rows(&[[a, b], [b, d]]).unwrap();
        let rho = spectral_radius(&m).unwrap();
        let norm = operator_two_norm(&m).unwrap();
        prop_assert!((rho - norm).abs() <= 1e-10 * norm.max(1.0));
    }

    #[test]
    fn kronecker_mixed_product(a in mat2(), b in mat2(), c in mat2(), d in mat2()) {
        let lhs = &kronecker(&a, &b).unwrap() * &kronecker(&c, &d).unwrap();
        let rhs = kronecker(&(&a * &c), &(&b * &d)).unwrap();
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-9 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn lyapunov_solution_satisfies_equation(seed in 0u64..10_000, rho in 0.0f64..0.98) {
        let mut rng = NoiseSource::new(seed);
        let phi = random_stable(&mut rng, rho);
        let sigma = random_psd(&mut rng);
        let p = solve_discrete_lyapunov(&phi, &sigma).unwrap();
        let residual = &(&p - &phi.congruence(&p).unwrap()) - &sigma;
        prop_assert!(residual.max_abs() <= 1e-9 * p.max_abs().max(1.0));
        prop_assert!(p.is_symmetric(1e-9 * p.max_abs().max(1.0)));
    }
}
