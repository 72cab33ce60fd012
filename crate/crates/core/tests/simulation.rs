use hrisk_core::lti::{FilterSpec, GainPolicy, LtiSystem};
use hrisk_core::matrix::Mat;
use hrisk_core::rng::NoiseSource;
use hrisk_core::sim::{nis_stats, quantile, simulate_nis, simulate_run, RunConfig};
use hrisk_core::special::{chi2_cdf, chi2_quantile};
use hrisk_core::sweep::{b1_a, b1_h};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn scalar_system() -> LtiSystem {
    LtiSystem::new(Mat::scalar(0.9), Mat::scalar(1.0), Mat::scalar(0.5), Mat::scalar(0.2)).unwrap()
}

fn b1_system() -> LtiSystem {
    LtiSystem::new(b1_a(), b1_h(), Mat::identity(2).scale(9e-4), Mat::scalar(1e-4)).unwrap()
}

#[test]
fn chi2_quantile_agrees_with_statrs() {
    for dof in [1u32, 2, 3, 5, 10] {
        let reference = ChiSquared::new(dof as f64).unwrap();
        for p in [0.01, 0.1, 0.5, 0.9, 0.95, 0.99, 0.999] {
            let q = chi2_quantile(dof, p).unwrap();
            let expected = reference.inverse_cdf(p);
            assert!((q - expected).abs() <= 1e-8 * expected.max(1.0), "dof {dof} p {p}: {q} vs {expected}");
            assert!((chi2_cdf(dof, q) - p).abs() < 1e-10);
        }
    }
    assert!((chi2_quantile(1, 0.99).unwrap() - 6.6349).abs() < 1e-3);
}

/// Kolmogorov–Smirnov statistic of a sample against χ²₁.
fn ks_chi2_1(sample: &[f64]) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = chi2_cdf(1, x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn matched_scalar_nis_is_chi2_one() {
    let sys = scalar_system();
    let filter = FilterSpec::matched(&sys, GainPolicy::DarePerConfig).unwrap();
    // 5% critical value for large n is 1.358/√n; the NIS series is i.i.d. in steady state.
    let mut passes = 0;
    for seed in 1..=20 {
        let mut cfg = RunConfig::new(sys.clone(), filter.clone(), seed);
        cfg.steps = 2_000;
        let nis = simulate_nis(&cfg).unwrap();
        if ks_chi2_1(&nis.z2) < 1.358 / (nis.z2.len() as f64).sqrt() {
            passes += 1;
        }
    }
    assert!(passes >= 18, "KS test passed for {passes}/20 seeds");
}

#[test]
fn matched_nis_mean_over_twenty_seeds() {
    for sys in [scalar_system(), b1_system()] {
        let filter = FilterSpec::matched(&sys, GainPolicy::DarePerConfig).unwrap();
        for seed in 1..=20 {
            let nis = simulate_nis(&RunConfig::new(sys.clone(), filter.clone(), seed)).unwrap();
            assert!((0.94..=1.06).contains(&nis.nis_mean), "seed {seed}: {}", nis.nis_mean);
        }
    }
}

#[test]
fn chi2_sample_quantile_near_theory() {
    let mut rng = NoiseSource::new(99);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| {
            let z = rng.standard_normal();
            z * z
        })
        .collect();
    assert!((quantile(&draws, 0.99).unwrap() - 6.635).abs() < 0.25);
}

#[test]
fn underestimated_noise_inflates_nis_for_every_seed() {
    let sys = b1_system();
    let base = FilterSpec::matched(&sys, GainPolicy::DarePerConfig).unwrap();
    let k = base.resolve_gain(&sys).unwrap();
    let filter = FilterSpec::scaled(&sys, 0.12, 0.30, GainPolicy::FixedRef(k)).unwrap();
    for seed in 1..=10 {
        let nis = simulate_nis(&RunConfig::new(sys.clone(), filter.clone(), seed)).unwrap();
        assert!(nis.nis_mean > 1.0, "seed {seed}: {}", nis.nis_mean);
        assert!(nis.nis_q >= nis.nis_mean);
    }
}

#[test]
fn innovation_covariance_matches_steady_state() {
    let sys = b1_system();
    let filter = FilterSpec::matched(&sys, GainPolicy::DarePerConfig).unwrap();
    let mut cfg = RunConfig::new(sys, filter, 4);
    cfg.steps = 50_000;
    let run = simulate_run(&cfg).unwrap();
    let empirical = run.trajectory.innovation_covariance()[(0, 0)];
    let believed = run.believed_s[(0, 0)];
    assert!((empirical / believed - 1.0).abs() < 0.05, "{empirical} vs {believed}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tail_quantile_dominates_mean_for_chi2_like_data(seed in any::<u64>()) {
        let mut rng = NoiseSource::new(seed);
        let z2: Vec<f64> = (0..500).map(|_| { let z = rng.standard_normal(); z * z }).collect();
        let (mean, q) = nis_stats(&z2, 0.99).unwrap();
        prop_assert!(q >= mean);
    }

    #[test]
    fn quantile_is_monotone_and_bounded(v in prop::collection::vec(-1e3f64..1e3, 1..60), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let qlo = quantile(&v, lo).unwrap();
        let qhi = quantile(&v, hi).unwrap();
        prop_assert!(qlo <= qhi);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(qlo >= min && qhi <= max);
    }

    #[test]
    fn seeded_runs_are_reproducible(seed in any::<u64>()) {
        let sys = scalar_system();
        let filter = FilterSpec::matched(&sys, GainPolicy::DarePerConfig).unwrap();
        let mut cfg = RunConfig::new(sys, filter, seed);
        cfg.steps = 200;
        let a = simulate_nis(&cfg).unwrap();
        let b = simulate_nis(&cfg).unwrap();
        prop_assert_eq!(a.z2, b.z2);
    }
}
