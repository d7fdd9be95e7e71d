use capgen_core::base_gen::{inw_generate, BaseGenConfig};
use capgen_core::haar::uniform_sphere;
use capgen_core::matrix::{dot, norm};
use capgen_core::pipeline::{
    chi_discretize, gaussian_generate, generate, make_schedule, seed_length, ChiConfig, FloorPolicy, Params,
    SphereGenerator,
};
use capgen_core::SeedStream;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::beta::beta_reg;

#[test]
fn schedule_examples() {
    let p = Params::default();
    let s = make_schedule(16, 0.3, &p).unwrap();
    assert_eq!((s.levels.clone(), s.level_count), (vec![16], 0));
    let big = make_schedule(1 << 32, 2f64.powi(-10), &p).unwrap();
    assert_eq!(big.levels, vec![1 << 32, 65536, 256]);
    assert_eq!(big.level_count, 2);
    assert!(make_schedule(3, 0.1, &p).is_err());
}

#[test]
fn seed_length_at_two_to_the_32() {
    // ε′ = 2⁻¹⁰/6. Both levels use k_mom = 2, so degree 8 and 3 bits per step:
    //   2³² → 2¹⁶: q = ⌈4·(8·32 + log₂(1/ε′))⌉,
    //   2¹⁶ → 2⁸:  q = ⌈4·(8·16 + log₂(1/ε′))⌉,
    // plus the base generator's 6·⌈log₂ 256⌉·⌈log₂(1/ε′)⌉ bits.
    let eps = 2f64.powi(-10);
    let l = (6.0 / eps).log2();
    let q0 = (4.0 * (256.0 + l)).ceil() as usize;
    let q1 = (4.0 * (128.0 + l)).ceil() as usize;
    let expected = 3 * (q0 + q1) + 6 * 8 * l.ceil() as usize;
    assert_eq!(expected, 5538);
    assert_eq!(seed_length(1 << 32, eps, &Params::default()).unwrap(), expected);
}

#[test]
fn base_only_ladder_is_the_base_generator() {
    let p = Params::default();
    let g = SphereGenerator::new(16, 0.1, &p).unwrap();
    let base = BaseGenConfig::new(16, g.schedule.eps_prime, 6.0).unwrap();
    assert_eq!(g.seed_length(), base.seed_len);
    for i in 0..20 {
        let x = generate(16, 0.1, &p, &mut SeedStream::derived(b"base only", i)).unwrap();
        let y = inw_generate(&base, &mut SeedStream::derived(b"base only", i)).unwrap();
        assert_eq!(x, y);
    }
}

#[test]
fn chi_grid_examples() {
    let chi2 = ChiSquared::new(10.0).unwrap();
    let one = ChiConfig::with_bits(10, 0.5, 1).unwrap();
    let atoms = one.atoms().unwrap();
    assert!((atoms[0] - chi2.inverse_cdf(0.25).sqrt()).abs() < 1e-9);
    assert!((atoms[1] - chi2.inverse_cdf(0.75).sqrt()).abs() < 1e-9);
    let cfg = ChiConfig::new(64, 0.01).unwrap();
    assert!(2f64.powi(-(cfg.grid_bits as i32)) <= 0.01);
    let mut s = SeedStream::derived(b"chi", 0);
    let r = chi_discretize(&cfg, &mut s).unwrap();
    assert_eq!(s.bits_consumed(), cfg.grid_bits as usize);
    assert!(r > 0.0);
}

#[test]
fn gaussian_norm_is_the_sampled_radius() {
    let p = Params::default();
    for i in 0..20 {
        let g = capgen_core::pipeline::GaussianGenerator::new(64, 0.2, &p).unwrap();
        let mut a = SeedStream::derived(b"radius", i);
        let x = g.generate(&mut a).unwrap();
        assert_eq!(a.bits_consumed(), g.seed_length());
        let mut b = SeedStream::derived(b"radius", i);
        b.skip(g.sphere.seed_length()).unwrap();
        let r = chi_discretize(&g.chi, &mut b).unwrap();
        assert!((norm(&x) - r).abs() <= 1e-12 * r);
        assert_eq!(x, gaussian_generate(64, 0.2, &p, &mut SeedStream::derived(b"radius", i)).unwrap());
    }
}

fn cap_measure(d: usize, c: f64) -> f64 {
    let upper = 0.5 * beta_reg(0.5, (d as f64 - 1.0) / 2.0, c * c);
    if c >= 0.0 {
        0.5 - upper
    } else {
        0.5 + upper
    }
}

/// Max cap discrepancy over sampled seeds, with the binomial standard error
/// of the worst cap.
fn sampled_discrepancy(g: &SphereGenerator, seeds: u64, tag: &[u8]) -> (f64, f64) {
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let caps: Vec<(Vec<f64>, f64)> =
        (0..30).map(|_| (uniform_sphere(n, &mut rng), rng.random_range(-0.6..0.6))).collect();
    let mut hits = vec![0u64; caps.len()];
    for i in 0..seeds {
        let x = g.generate(&mut SeedStream::derived(tag, i)).unwrap();
        for (h, (w, c)) in hits.iter_mut().zip(&caps) {
            *h += u64::from(dot(w, &x) >= *c);
        }
    }
    caps.iter().zip(&hits).fold((0.0, 0.0), |(best, sd), ((_, c), &h)| {
        let p = h as f64 / seeds as f64;
        let d = (p - cap_measure(n, *c)).abs();
        if d > best {
            (d, (p * (1.0 - p) / seeds as f64).sqrt())
        } else {
            (best, sd)
        }
    })
}

#[test]
fn error_composes_across_levels() {
    let eps = 0.25;
    let one = Params {
        floor: FloorPolicy::Fixed(5),
        ..Params::default()
    };
    let two = Params {
        floor: FloorPolicy::Fixed(4),
        ..Params::default()
    };
    let g1 = SphereGenerator::new(17, eps, &one).unwrap();
    let g2 = SphereGenerator::new(17, eps, &two).unwrap();
    assert_eq!(g1.schedule.levels, vec![17, 5]);
    assert_eq!(g2.schedule.levels, vec![17, 5, 3]);
    let seeds = 20_000;
    let (d1, s1) = sampled_discrepancy(&g1, seeds, b"one level");
    let (d2, s2) = sampled_discrepancy(&g2, seeds, b"two levels");
    let slack = g2.schedule.eps_prime + 3.0 * (s1 * s1 + s2 * s2).sqrt();
    assert!(d2 <= d1 + slack, "t=1: {d1}, t=2: {d2}, slack {slack}");
    assert!(d1 <= eps && d2 <= eps);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outputs_are_unit_and_deterministic(log_n in 2.0f64..13.0, e in 0.01f64..0.5, seed in any::<u64>()) {
        let n = 2f64.powf(log_n).round() as usize;
        let p = Params::default();
        let s = make_schedule(n, e, &p).unwrap();
        prop_assert!((s.level_count + 1) as f64 * s.eps_prime <= e * (1.0 + 1e-12));
        for w in s.levels.windows(2) {
            prop_assert_eq!(w[1], (w[0] as f64).sqrt().ceil() as usize);
        }
        let g = SphereGenerator::new(n, e, &p).unwrap();
        let mut a = SeedStream::derived(b"pipeline", seed);
        let x = g.generate(&mut a).unwrap();
        prop_assert_eq!(a.bits_consumed(), g.seed_length());
        prop_assert!((norm(&x) - 1.0).abs() <= 1e-12);
        let y = g.generate(&mut SeedStream::derived(b"pipeline", seed)).unwrap();
        prop_assert_eq!(x, y);
        let mut short = SeedStream::from_bytes(vec![0; g.seed_length() / 8 + 1], Some(g.seed_length() - 1));
        prop_assert!(g.generate(&mut short).is_err());
    }
}
