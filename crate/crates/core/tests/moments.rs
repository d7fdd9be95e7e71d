use capgen_core::haar::uniform_sphere;
use capgen_core::matrix::dot;
use capgen_core::moments::{
    beta_moments, cdf_bound, central_moment_decay_check, discrete_dcdf, km_bound, ks_critical_value, ks_distance,
    product_cdf, z_cdf, z_derivative_bound, z_norm_const, z_pdf, z_pdf_derivatives, z_tail_quantile, CdfBoundInputs,
    DiscreteLaw, MomentProfile,
};
use capgen_core::prp::uniform_project;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::beta::beta_reg;

/// `F(x) = ½ + ½·sign(x)·I_{x²}(½, (m−1)/2)`.
fn coordinate_cdf_oracle(m: usize, x: f64) -> f64 {
    if x <= -1.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    0.5 + 0.5 * x.signum() * beta_reg(0.5, (m as f64 - 1.0) / 2.0, x * x)
}

#[test]
fn density_integrates_to_one() {
    let half = std::f64::consts::FRAC_PI_2;
    for m in [3, 5, 10, 50] {
        // x = sin θ; Simpson on the smooth integrand f(sin θ)·cos θ.
        let n = 20_000;
        let h = 2.0 * half / n as f64;
        let f = |t: f64| z_pdf(m, t.sin()).unwrap() * t.cos();
        let inner: f64 = (1..n).map(|i| f(-half + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
        let total = (f(-half) + f(half) + inner) * h / 3.0;
        assert!((total - 1.0).abs() <= 1e-8, "m = {m}: {total}");
    }
}

#[test]
fn density_examples() {
    for x in [-0.99, -0.5, 0.0, 0.3, 0.999] {
        assert!((z_pdf(3, x).unwrap() - 0.5).abs() < 1e-15);
    }
    for m in [5, 9, 40] {
        assert_eq!(z_pdf(m, 1.0).unwrap(), 0.0);
        assert_eq!(z_pdf(m, -1.0).unwrap(), 0.0);
        for x in [0.1, 0.4, 0.77] {
            assert_eq!(z_pdf(m, x).unwrap(), z_pdf(m, -x).unwrap());
            assert!(z_pdf(m, x).unwrap() <= z_norm_const(m).unwrap());
        }
    }
    assert!(z_pdf(5, 1.01).is_err());
}

#[test]
fn cdf_matches_incomplete_beta_closed_form() {
    for m in [3, 4, 7, 20, 101] {
        let mut last = 0.0;
        for i in 0..=2000 {
            let x = -1.0 + i as f64 * 1e-3;
            let f = z_cdf(m, x).unwrap();
            assert!((f - coordinate_cdf_oracle(m, x)).abs() <= 1e-10, "m = {m}, x = {x}");
            assert!(f >= last - 1e-15);
            last = f;
        }
    }
    assert_eq!(z_cdf(12, 0.0).unwrap(), 0.5);
    assert!((z_cdf(3, 0.2).unwrap() - 0.6).abs() < 1e-12);
}

#[test]
fn tail_quantile_is_sharp_in_high_dimension() {
    let t = z_tail_quantile(10_000).unwrap();
    assert!(t.quantile < 0.1);
    assert_eq!(t.delta, 0.995f64.powf(100.0));
    assert!((coordinate_cdf_oracle(10_000, t.quantile) - (1.0 - t.delta)).abs() <= 1e-9);
}

#[test]
fn derivative_bound_examples_and_domination() {
    // c₅ = Γ(5/2)/(√π·Γ(2)) = 3/4.
    assert!((z_derivative_bound(5, 1, 0.5).unwrap() - 20.0 * 0.75).abs() < 1e-12);
    let h = 1e-3;
    for m in [5, 10, 20, 50] {
        let f = |t: f64| z_pdf(m, t).unwrap();
        for i in 0..=16 {
            let x = 0.1 + 0.05 * i as f64;
            let fd = [
                f(x),
                (f(x + h) - f(x - h)) / (2.0 * h),
                (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
                (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
            ];
            let exact = z_pdf_derivatives(m, x, 3).unwrap();
            for q in 0..=3 {
                assert!(fd[q].abs() <= z_derivative_bound(m, q, x).unwrap(), "m {m}, q {q}, x {x}");
                let scale = exact[q].abs().max(1.0);
                assert!((fd[q] - exact[q]).abs() <= 1e-3 * scale, "m {m}, q {q}, x {x}: {} vs {}", fd[q], exact[q]);
            }
        }
    }
}

#[test]
fn beta_moment_examples() {
    let b = beta_moments(16, 4, 2).unwrap();
    assert!((b.raw[1] - 0.25).abs() < 1e-15);
    assert!((b.raw[2] - 1.0 / 12.0).abs() < 1e-15);
    let d = beta_moments(9, 9, 4).unwrap();
    assert!(d.raw.iter().all(|&r| (r - 1.0).abs() < 1e-15));
    assert!(d.profile.central().iter().all(|&c| c == 0.0));
}

#[test]
fn beta_moments_match_monte_carlo_projections() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let w = uniform_sphere(16, &mut rng);
    let n = 200_000;
    let xs: Vec<f64> = (0..n)
        .map(|_| {
            let y = uniform_project(&w, 4, &mut rng).unwrap();
            dot(&y, &y)
        })
        .collect();
    let b = beta_moments(16, 4, 4).unwrap();
    for j in 1..=4 {
        let vals: Vec<f64> = xs.iter().map(|x| x.powi(j as i32)).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - b.raw[j]).abs() <= 4.0 * (var / n as f64).sqrt(), "j = {j}");
    }
    let mu = b.raw[1];
    let mu2 = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n as f64;
    assert!((mu2 - b.profile.mu(2).unwrap()).abs() <= 0.02 * b.profile.mu(2).unwrap());
}

#[test]
fn normalized_central_moments_decay_like_inverse_sqrt_power() {
    // For m = m̃² the normalized variance is 2(m − m̃)/(m̃(m + 2)) ≈ 2/m̃, so
    // lhs·m̃^{p/2} stays bounded while lhs/m̃^{−4p/5} grows.
    let mut scaled = Vec::new();
    let mut ratios = Vec::new();
    for mt in [100usize, 200, 400, 800] {
        let c = central_moment_decay_check(mt, 2).unwrap();
        let m = (mt * mt) as f64;
        let exact = 2.0 * (m - mt as f64) / (mt as f64 * (m + 2.0));
        assert!((c.lhs - exact).abs() <= 1e-12 * exact);
        scaled.push(c.lhs * mt as f64);
        ratios.push(c.ratio);
    }
    assert!(scaled.iter().all(|s| (s - 2.0).abs() < 0.05), "{scaled:?}");
    assert!(ratios.windows(2).all(|r| r[1] > r[0]), "{ratios:?}");
    assert!(central_moment_decay_check(100, 6).is_err());
}

#[test]
fn product_cdf_with_constant_scale() {
    let v = DiscreteLaw::uniform(vec![2.0]).unwrap();
    for i in 0..=200 {
        let t = -2.5 + 0.025 * i as f64;
        let g = product_cdf(|x| coordinate_cdf_oracle(9, x), &v, t).unwrap();
        assert!((g - coordinate_cdf_oracle(9, t / 2.0)).abs() <= 1e-9);
    }
    assert!(product_cdf(|x| x, &DiscreteLaw::uniform(vec![-1.0]).unwrap(), 0.0).is_err());
}

#[test]
fn two_uniform_samples_are_close() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut draw = || {
        let mut v: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (draw(), draw());
    assert!(ks_distance(&a, &b).unwrap() <= 0.01);
    assert!(ks_critical_value(0.01, 100_000, Some(100_000)) <= 0.01);
}

#[test]
fn km_bound_examples() {
    assert!((km_bound(2.0, &[1.0; 5]).unwrap() - 2.0 * 4f64.powf(-0.25)).abs() < 1e-15);
    // μ_{2i}^{1/(2i)} = i for i = 1..4 sums to 10.
    let moments: Vec<f64> = (1..=5).map(|i: i32| (i as f64).powi(2 * i)).collect();
    assert!((km_bound(1.0, &moments).unwrap() - 10f64.powf(-0.25)).abs() < 1e-12);
    assert!(km_bound(1.0, &moments[..3]).unwrap() >= km_bound(1.0, &moments).unwrap());
}

fn bound_inputs(eps_mom: f64, delta: f64) -> CdfBoundInputs {
    CdfBoundInputs {
        k: 2,
        delta,
        eps_mom,
        profile: MomentProfile::new(1.0, vec![1e-4, 1e-6, 1e-8]).unwrap(),
        quantile: 0.5,
        deriv_bound: 1.0,
    }
}

#[test]
fn bound_is_delta_for_a_point_mass() {
    let inp = CdfBoundInputs {
        profile: MomentProfile::new(1.0, vec![0.0, 0.0, 0.0]).unwrap(),
        ..bound_inputs(0.0, 0.02)
    };
    for t in [0.1, 0.7, 1.0, 3.0] {
        assert!((cdf_bound(&inp, t).unwrap().value - 0.02).abs() < 1e-15);
    }
}

fn law_strategy() -> impl Strategy<Value = DiscreteLaw> {
    prop::collection::vec((1u32..=16, 1u32..=9), 1..=8).prop_map(|pairs| {
        let total: f64 = pairs.iter().map(|p| p.1 as f64).sum();
        DiscreteLaw::new(
            pairs.iter().map(|p| p.0 as f64 / 4.0).collect(),
            pairs.iter().map(|p| p.1 as f64 / total).collect(),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn scaling_by_independent_positive_law_contracts(u in law_strategy(), v1 in law_strategy(), v2 in law_strategy()) {
        let before = discrete_dcdf(&v1, &v2);
        let after = discrete_dcdf(&u.product(&v1).unwrap(), &u.product(&v2).unwrap());
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn bound_is_monotone_in_its_error_inputs(e1 in 0.0f64..1e-3, e2 in 0.0f64..1e-3,
                                             d1 in 1e-4f64..0.5, d2 in 1e-4f64..0.5, t in 0.05f64..3.0) {
        let (elo, ehi) = (e1.min(e2), e1.max(e2));
        let (dlo, dhi) = (d1.min(d2), d1.max(d2));
        let lo = cdf_bound(&bound_inputs(elo, dlo), t).unwrap().value;
        prop_assert!(lo <= cdf_bound(&bound_inputs(ehi, dlo), t).unwrap().value);
        prop_assert!(lo <= cdf_bound(&bound_inputs(elo, dhi), t).unwrap().value);
        prop_assert!(lo >= dlo && lo <= 1.0);
    }
}
