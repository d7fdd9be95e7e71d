//! Explicit bound on the Kolmogorov distance between `√X·Z` and `√Y·Z` for
//! approximately moment-matched `X`, `Y`.

use crate::error::{Error, Result};
use crate::moments::beta::MomentProfile;
use crate::special::ln_gamma;

#[derive(Debug, Clone, PartialEq)]
pub struct CdfBoundInputs {
    /// Even order `k`; the profile must reach `2k`.
    pub k: usize,
    pub delta: f64,
    /// Moment-matching error `ε`.
    pub eps_mom: f64,
    pub profile: MomentProfile,
    /// `F⁻¹(1 − δ)` for the CDF `F` of `Z`.
    pub quantile: f64,
    /// `max_{ℓ ≤ k} |F^{(ℓ)}|` over the relevant interval.
    pub deriv_bound: f64,
}

impl CdfBoundInputs {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k % 2 != 0 {
            return Err(Error::InvalidArgument(format!("k must be even and positive, got {}", self.k)));
        }
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return Err(Error::InvalidArgument(format!("δ must lie in (0, 1/2], got {}", self.delta)));
        }
        if !(self.eps_mom >= 0.0) || !(self.deriv_bound >= 0.0) {
            return Err(Error::InvalidArgument("ε and the derivative bound must be ≥ 0".into()));
        }
        if self.profile.is_empty() {
            return Err(Error::InvalidArgument("empty moment profile".into()));
        }
        if self.profile.max_order() < 2 * self.k {
            return Err(Error::InvalidArgument(format!(
                "profile reaches order {}, need {}",
                self.profile.max_order(),
                2 * self.k
            )));
        }
        if !(self.profile.mu_sq > 0.0) {
            return Err(Error::InvalidArgument("μ² must be positive".into()));
        }
        Ok(())
    }
}

/// Which estimate produced the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `μ_k/μ^{2k} ≥ 1`: nothing better than 1 is available.
    Trivial,
    /// `t/μ ≤ 2·F⁻¹(1−δ)`: the Taylor-expansion estimate.
    SmallT,
    /// `t/μ > 2·F⁻¹(1−δ)`: the tail estimate.
    LargeT,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfBound {
    /// The applicable branch's value, capped at 1.
    pub value: f64,
    pub branch: Branch,
    /// `min(1, δ + 2k·ζ·μ_k/μ^{2k} + (1+kζ)·2^{k+1}·√μ_{2k}/μ^{2k} + ε·2^{3k}·ζ)`.
    pub small_t: f64,
    /// `min(1, δ + 2^{2k+1}·√μ_{2k}/μ^{4k} + 2^{2k+1}·ε)`.
    pub large_t: f64,
    pub zeta: f64,
}

/// `ζ = (k!)³·(t/μ)^k·D`.
pub fn zeta(k: usize, t_over_mu: f64, deriv_bound: f64) -> f64 {
    let kf = k as f64;
    (3.0 * ln_gamma(kf + 1.0)).exp() * t_over_mu.abs().powi(k as i32) * deriv_bound
}

/// The interval `[2√(2/3)·q, 2√2·q]` over which the derivative bound is taken.
pub fn derivative_bracket(quantile: f64) -> (f64, f64) {
    let q = quantile.abs();
    (2.0 * (2.0f64 / 3.0).sqrt() * q, 2.0 * 2f64.sqrt() * q)
}

/// Distance bound at threshold `t`, given as `t/μ`. The CDF distance is
/// symmetric in `t` for symmetric `Z`, so only `|t|` matters.
pub fn cdf_bound(inputs: &CdfBoundInputs, t_over_mu: f64) -> Result<CdfBound> {
    inputs.validate()?;
    let k = inputs.k;
    let p = &inputs.profile;
    let mu_2k = p.mu_sq.powi(k as i32); // μ^{2k}
    let mu_4k = mu_2k * mu_2k;
    let ratio_k = p.mu(k).expect("validated") / mu_2k;
    let root_2k = p.mu(2 * k).expect("validated").sqrt();
    let t = t_over_mu.abs();
    let z = zeta(k, t, inputs.deriv_bound);
    let kf = k as f64;

    let small = inputs.delta
        + 2.0 * kf * z * ratio_k
        + (1.0 + kf * z) * 2f64.powi(k as i32 + 1) * root_2k / mu_2k
        + inputs.eps_mom * 2f64.powi(3 * k as i32) * z;
    let large = inputs.delta
        + 2f64.powi(2 * k as i32 + 1) * root_2k / mu_4k
        + 2f64.powi(2 * k as i32 + 1) * inputs.eps_mom;
    let small_t = cap(small);
    let large_t = cap(large);

    let (value, branch) = if ratio_k >= 1.0 {
        (1.0, Branch::Trivial)
    } else if t <= 2.0 * inputs.quantile {
        (small_t, Branch::SmallT)
    } else {
        (large_t, Branch::LargeT)
    };
    Ok(CdfBound {
        value,
        branch,
        small_t,
        large_t,
        zeta: z,
    })
}

fn cap(x: f64) -> f64 {
    if x.is_nan() {
        1.0
    } else {
        x.min(1.0)
    }
}

/// A bound valid for every `t`: the worse of the two branches at the
/// switch point `t/μ = 2·F⁻¹(1−δ)`, where the small-`t` estimate peaks.
pub fn uniform_cdf_bound(inputs: &CdfBoundInputs) -> Result<CdfBound> {
    let at = cdf_bound(inputs, 2.0 * inputs.quantile)?;
    if at.branch == Branch::Trivial {
        return Ok(at);
    }
    let (value, branch) = if at.small_t >= at.large_t {
        (at.small_t, Branch::SmallT)
    } else {
        (at.large_t, Branch::LargeT)
    };
    Ok(CdfBound { value, branch, ..at })
}

/// `sup f · β_{k−1}^{−1/4}` with `β_j = Σ_{i=1}^{j} μ_{2i}^{1/(2i)}` and
/// unit constant. `even_raw_moments[i−1]` is `μ_{2i}`; only the shape of
/// this estimate is meaningful.
pub fn km_bound(sup_pdf: f64, even_raw_moments: &[f64]) -> Result<f64> {
    if even_raw_moments.len() < 2 {
        return Err(Error::InvalidArgument("need at least two even moments".into()));
    }
    let k = even_raw_moments.len();
    let beta: f64 = even_raw_moments[..k - 1]
        .iter()
        .enumerate()
        .map(|(i, &m)| m.powf(1.0 / (2.0 * (i + 1) as f64)))
        .sum();
    Ok(sup_pdf * beta.powf(-0.25))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(k: usize, delta: f64, eps: f64, central: Vec<f64>, q: f64, d: f64) -> CdfBoundInputs {
        CdfBoundInputs {
            k,
            delta,
            eps_mom: eps,
            profile: MomentProfile::new(1.0, central).unwrap(),
            quantile: q,
            deriv_bound: d,
        }
    }

    #[test]
    fn deterministic_law_gives_delta() {
        let inp = inputs(2, 0.01, 0.0, vec![0.0; 3], 1.0, 1.0);
        for t in [0.0, 0.5, 1.9, 5.0] {
            assert_eq!(cdf_bound(&inp, t).unwrap().value, 0.01);
        }
    }

    #[test]
    fn worked_example() {
        // μ² = 1, μ₂ = 1e-4, √μ₄ = 1e-4, t/μ = 1, D = 1 so ζ = 8.
        let inp = inputs(2, 0.01, 1e-6, vec![1e-4, 1e-6, 1e-8], 1.0, 1.0);
        let b = cdf_bound(&inp, 1.0).unwrap();
        assert_eq!(b.branch, Branch::SmallT);
        assert!((b.zeta - 8.0).abs() < 1e-12);
        let want = 0.01 + 2.0 * 2.0 * 8.0 * 1e-4 + 17.0 * 8.0 * 1e-4 + 1e-6 * 64.0 * 8.0;
        assert!((b.value - want).abs() < 1e-15);
        assert!((b.value - 0.027_312).abs() < 1e-12);
    }

    #[test]
    fn trivial_when_spread_is_large() {
        let inp = inputs(2, 0.01, 0.0, vec![1.0, 1.0, 1.0], 1.0, 1.0);
        let b = cdf_bound(&inp, 0.3).unwrap();
        assert_eq!(b.value, 1.0);
        assert_eq!(b.branch, Branch::Trivial);
    }

    #[test]
    fn branch_switches_at_twice_quantile() {
        let inp = inputs(2, 0.05, 0.0, vec![1e-5, 1e-8, 1e-10], 0.4, 1.0);
        assert_eq!(cdf_bound(&inp, 0.8).unwrap().branch, Branch::SmallT);
        assert_eq!(cdf_bound(&inp, 0.81).unwrap().branch, Branch::LargeT);
        let u = uniform_cdf_bound(&inp).unwrap();
        assert!(u.value >= cdf_bound(&inp, 0.81).unwrap().value);
        assert!(u.value >= cdf_bound(&inp, 0.1).unwrap().value);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(cdf_bound(&inputs(3, 0.1, 0.0, vec![0.0; 5], 1.0, 1.0), 1.0).is_err());
        assert!(cdf_bound(&inputs(2, 0.1, 0.0, vec![0.0; 2], 1.0, 1.0), 1.0).is_err());
        assert!(cdf_bound(&inputs(2, 0.6, 0.0, vec![0.0; 3], 1.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn km_examples() {
        assert!((km_bound(2.0, &[1.0; 5]).unwrap() - 2.0 * 4f64.powf(-0.25)).abs() < 1e-15);
        // μ_{2i}^{1/2i} = i for i ≤ 4 sums to 10.
        let m: Vec<f64> = (1..=5).map(|i: i32| (i as f64).powi(2 * i)).collect();
        assert!((km_bound(1.0, &m).unwrap() - 10f64.powf(-0.25)).abs() < 1e-12);
        assert!(km_bound(1.0, &[1.0]).is_err());
    }
}
