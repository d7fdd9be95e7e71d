use capgen_core::haar::uniform_sphere;
use capgen_core::matrix::{dot, norm};
use capgen_core::moments::{ks_critical_value, ks_one_sample};
use capgen_core::orth_design::{default_generator_set, DesignConfig};
use capgen_core::prp::{choose_moment_order, prp_project, uniform_project, MomentOrder, PrpConfig};
use capgen_core::SeedStream;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, ContinuousCDF};

fn default_prp(m: usize, eps: f64) -> PrpConfig {
    PrpConfig::new(m, eps, default_generator_set(m).unwrap(), 4.0, 1.0).unwrap()
}

#[test]
fn moment_order_examples() {
    let a = choose_moment_order(200, 0.5, 1.0);
    assert_eq!(a.k, 2);
    let b = choose_moment_order(200, 1e-12, 1.0);
    assert_eq!(b.raw, Some(10));
    assert_eq!(b.k, 2);
    assert!(b.clamped);
    assert_eq!(choose_moment_order(200, 1.0, 1.0).k, 2);
    // For large m̃ the clamp is inactive: ⌊2000/80⌋ = 25.
    let c = choose_moment_order(2000, 1e-12, 1.0);
    assert!(!c.clamped);
    let k = c.k as f64;
    assert!((k / 2000.0).powf(k) <= 1e-12);
    assert!(((k - 2.0) / 2000.0).powf(k - 2.0) > 1e-12);
}

#[test]
fn identity_design_truncates() {
    let design = DesignConfig::empty_walk_for_testing(default_generator_set(9).unwrap(), 8, 0.1);
    let order = MomentOrder {
        k: 2,
        raw: None,
        clamped: false,
    };
    let cfg = PrpConfig::from_design(9, 3, order, design, 0.1).unwrap();
    let mut e1 = vec![0.0; 9];
    e1[0] = 1.0;
    let y = prp_project(&e1, &cfg, &mut SeedStream::derived(b"id", 0)).unwrap();
    assert_eq!(y, vec![1.0, 0.0, 0.0]);
    assert!(prp_project(&[0.0; 9], &cfg, &mut SeedStream::derived(b"id", 0)).is_err());
}

#[test]
fn prp_squared_length_has_beta_mean() {
    let cfg = default_prp(16, 0.1);
    assert_eq!(cfg.out_dim, 4);
    let w = uniform_sphere(16, &mut ChaCha8Rng::seed_from_u64(1));
    let mean = (0..4096u64)
        .map(|i| {
            let mut s = SeedStream::derived(b"prp mean", i);
            let y = prp_project(&w, &cfg, &mut s).unwrap();
            assert_eq!(s.bits_consumed(), cfg.seed_bits());
            dot(&y, &y)
        })
        .sum::<f64>()
        / 4096.0;
    assert!((mean - 0.25).abs() <= 0.02, "mean {mean}");
}

#[test]
fn prp_matches_low_beta_moments() {
    let cfg = default_prp(16, 0.1);
    let w = uniform_sphere(16, &mut ChaCha8Rng::seed_from_u64(2));
    let ys: Vec<f64> = (0..4096u64)
        .map(|i| {
            let y = prp_project(&w, &cfg, &mut SeedStream::derived(b"prp moments", i)).unwrap();
            dot(&y, &y)
        })
        .collect();
    for j in 1..=4 {
        let oracle: f64 = (0..j).map(|i| (2.0 + i as f64) / (8.0 + i as f64)).product();
        let got = ys.iter().map(|y| y.powi(j)).sum::<f64>() / ys.len() as f64;
        assert!((got - oracle).abs() <= 0.02, "j = {j}: {got} vs {oracle}");
    }
}

#[test]
fn uniform_projection_follows_beta_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = uniform_sphere(16, &mut rng);
    let full = uniform_project(&w, 16, &mut rng).unwrap();
    assert!((norm(&full) - 1.0).abs() < 1e-12);

    let n = 20_000;
    let mut sample: Vec<f64> = (0..n)
        .map(|_| {
            let y = uniform_project(&w, 4, &mut rng).unwrap();
            dot(&y, &y)
        })
        .collect();
    sample.sort_by(f64::total_cmp);
    let beta = Beta::new(2.0, 6.0).unwrap();
    let ks = ks_one_sample(&sample, |x| beta.cdf(x)).unwrap();
    assert!(ks <= ks_critical_value(0.01, n, None), "KS {ks}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prp_never_lengthens(seed in any::<u64>(), m in 4usize..40) {
        let cfg = default_prp(m, 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = uniform_sphere(m, &mut rng).iter().map(|v| v * 3.0).collect();
        let y = prp_project(&w, &cfg, &mut SeedStream::derived(b"contract", seed)).unwrap();
        prop_assert_eq!(y.len(), cfg.out_dim);
        prop_assert!(norm(&y) <= norm(&w) * (1.0 + 1e-12));
    }
}
