//! Moments of `X = ‖Qw‖²` for a uniform projection `Q: R^m → R^m̃` and unit
//! `w`, which follows Beta(m̃/2, (m−m̃)/2).

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::quad::integrate_with_breaks;
use crate::scalar::Scalar;
use crate::special::ln_beta;

/// Orders beyond this are refused rather than computed.
pub const MAX_ORDER: usize = 4096;

/// `E[Xʲ] = ∏_{i<j} (m̃/2 + i)/(m/2 + i)` for `j = 0..=p`, in any exact or
/// floating scalar type.
pub fn beta_raw_moments<T: Scalar>(m: usize, m_tilde: usize, p: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(p + 1);
    let mut acc = T::one();
    out.push(acc.clone());
    for i in 0..p {
        let num = T::from_usize(m_tilde + 2 * i).expect("fits");
        let den = T::from_usize(m + 2 * i).expect("fits");
        acc = acc * num / den;
        out.push(acc.clone());
    }
    out
}

/// Signed central moments `E[(X − E X)ⁱ]` for `i = 0..=p` by binomial
/// expansion of the raw moments `raw[0..=p]`.
pub fn central_moments_exact<T: Scalar>(raw: &[T]) -> Vec<T> {
    let p = raw.len() - 1;
    let mean = raw.get(1).cloned().unwrap_or_else(T::zero);
    let neg_mean = T::zero() - mean;
    let mut out = Vec::with_capacity(p + 1);
    for i in 0..=p {
        let mut binom = T::one();
        let mut sum = T::zero();
        for r in 0..=i {
            let mut pow = T::one();
            for _ in 0..(i - r) {
                pow = pow * neg_mean.clone();
            }
            sum = sum + binom.clone() * raw[r].clone() * pow;
            // C(i, r+1) = C(i, r)·(i−r)/(r+1)
            binom = binom * T::from_usize(i - r).expect("fits") / T::from_usize(r + 1).expect("fits");
        }
        out.push(sum);
    }
    out
}

/// Mean and absolute central moments `μ_i = E|X − μ²|ⁱ`, `i = 2..=p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentProfile {
    pub mu_sq: f64,
    central: Vec<f64>,
}

impl MomentProfile {
    /// `central[0]` is `μ₂`, `central[i−2]` is `μ_i`.
    pub fn new(mu_sq: f64, central: Vec<f64>) -> Result<Self> {
        let p = Self { mu_sq, central };
        p.validate()?;
        Ok(p)
    }

    /// Profile of a finite law with the given atoms and weights.
    pub fn from_discrete(atoms: &[f64], weights: &[f64], max_order: usize) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::InvalidArgument("atoms and weights must be nonempty and aligned".into()));
        }
        let total: f64 = weights.iter().sum();
        let mean = atoms.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / total;
        let central = (2..=max_order)
            .map(|i| {
                atoms
                    .iter()
                    .zip(weights)
                    .map(|(a, w)| w * (a - mean).abs().powi(i as i32))
                    .sum::<f64>()
                    / total
            })
            .collect();
        Self::new(mean, central)
    }

    /// `μ_i` for `2 ≤ i ≤ max_order`.
    pub fn mu(&self, i: usize) -> Option<f64> {
        i.checked_sub(2).and_then(|j| self.central.get(j).copied())
    }

    pub fn max_order(&self) -> usize {
        self.central.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        self.central.is_empty()
    }

    pub fn central(&self) -> &[f64] {
        &self.central
    }

    /// Profile of `s·X`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mu_sq: self.mu_sq * s,
            central: self
                .central
                .iter()
                .enumerate()
                .map(|(j, &v)| v * s.powi(j as i32 + 2))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_sq >= 0.0) {
            return Err(Error::InvalidArgument(format!("μ² must be ≥ 0, got {}", self.mu_sq)));
        }
        if let Some(v) = self.central.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative central moment {v}")));
        }
        for i in 2..=self.max_order() / 2 {
            let (a, b) = (self.mu(i).unwrap(), self.mu(2 * i).unwrap());
            if b < a * a - 1e-9 * (1.0 + a * a) {
                return Err(Error::InvalidArgument(format!(
                    "μ_{} = {b} is below μ_{}² = {}",
                    2 * i,
                    i,
                    a * a
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaMoments {
    /// `E[Xʲ]` for `j = 0..=p`.
    pub raw: Vec<f64>,
    /// `μ_i` for `i = 2..=p`.
    pub profile: MomentProfile,
}

/// Raw and absolute central moments of Beta(m̃/2, (m−m̃)/2) through order `p`.
///
/// Raw and even central moments are exact rationals rounded once; odd
/// absolute central moments come from adaptive quadrature of the density.
pub fn beta_moments(m: usize, m_tilde: usize, p: usize) -> Result<BetaMoments> {
    if m_tilde == 0 || m_tilde > m {
        return Err(Error::InvalidArgument(format!("need 0 < m̃ ≤ m, got m̃={m_tilde}, m={m}")));
    }
    if p > MAX_ORDER {
        return Err(Error::Overflow(format!("moment order {p} exceeds {MAX_ORDER}")));
    }
    let raw_q: Vec<BigRational> = beta_raw_moments(m, m_tilde, p);
    let central_q = central_moments_exact(&raw_q);
    let to_f64 = |q: &BigRational| -> Result<f64> {
        q.to_f64()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Overflow(format!("moment {q} not representable")))
    };
    let raw = raw_q.iter().map(to_f64).collect::<Result<Vec<_>>>()?;
    let mean = raw.get(1).copied().unwrap_or(1.0);
    let mut central = Vec::with_capacity(p.saturating_sub(1));
    for i in 2..=p {
        let v = if i % 2 == 0 || m_tilde == m {
            to_f64(&central_q[i])?.abs()
        } else {
            odd_abs_central(m, m_tilde, mean, i)?
        };
        central.push(v);
    }
    Ok(BetaMoments {
        raw,
        profile: MomentProfile::new(mean, central)?,
    })
}

fn odd_abs_central(m: usize, m_tilde: usize, mean: f64, i: usize) -> Result<f64> {
    let a = m_tilde as f64 / 2.0;
    let b = (m - m_tilde) as f64 / 2.0;
    let lb = ln_beta(a, b);
    let sd = (a * b / ((a + b).powi(2) * (a + b + 1.0))).sqrt();
    let pdf = |x: f64| {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - lb).exp() * (x - mean).abs().powi(i as i32)
        }
    };
    let mut pts = vec![0.0, 1.0, mean];
    for j in [1.0, 2.0, 4.0, 8.0, 16.0] {
        pts.push((mean - j * sd).clamp(0.0, 1.0));
        pts.push((mean + j * sd).clamp(0.0, 1.0));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // Tolerance relative to the even neighbour's scale.
    let scale = sd.powi(i as i32).max(f64::MIN_POSITIVE);
    Ok(integrate_with_breaks(pdf, &pts, 1e-10 * scale)?.value)
}

/// Normalized central moment against its shape term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCheck {
    /// `E|X − E X|^p / (E X)^p`.
    pub lhs: f64,
    /// `m̃^{−4p/5}`.
    pub rhs_shape: f64,
    pub ratio: f64,
}

/// For `m = m̃²`: the `p`-th normalized central moment of `‖Qw‖²` against
/// `m̃^{−4p/5}`. Requires `p ≤ m̃/20`.
pub fn central_moment_decay_check(m_tilde: usize, p: usize) -> Result<DecayCheck> {
    central_moment_decay_check_with_dim(m_tilde * m_tilde, m_tilde, p)
}

pub fn central_moment_decay_check_with_dim(m: usize, m_tilde: usize, p: usize) -> Result<DecayCheck> {
    if p < 2 || (20 * p > m_tilde && m != m_tilde) {
        return Err(Error::InvalidArgument(format!("order {p} outside [2, m̃/20] for m̃ = {m_tilde}")));
    }
    let bm = beta_moments(m, m_tilde, p)?;
    let lhs = bm.profile.mu(p).unwrap_or(0.0) / bm.profile.mu_sq.powi(p as i32);
    let rhs_shape = (m_tilde as f64).powf(-0.8 * p as f64);
    Ok(DecayCheck {
        lhs,
        rhs_shape,
        ratio: lhs / rhs_shape,
    })
}

/// Exact value of `E[(X − E X)²]` for the Beta law as a fraction, exposed for
/// cross-checks.
pub fn beta_variance_exact(m: usize, m_tilde: usize) -> BigRational {
    let raw: Vec<BigRational> = beta_raw_moments(m, m_tilde, 2);
    central_moments_exact(&raw)[2].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn first_two_raw_moments() {
        let bm = beta_moments(16, 4, 4).unwrap();
        assert_eq!(bm.raw[1], 0.25);
        assert!((bm.raw[2] - 1.0 / 12.0).abs() < 1e-16);
        let exact: Vec<BigRational> = beta_raw_moments(16, 4, 2);
        assert_eq!(exact[2], ratio(1, 12));
    }

    #[test]
    fn variance_closed_form() {
        // Beta(a, b): ab / ((a+b)²(a+b+1)) with a = 2, b = 6.
        assert_eq!(beta_variance_exact(16, 4), ratio(12, 64 * 9));
    }

    #[test]
    fn degenerate_projection() {
        let bm = beta_moments(7, 7, 6).unwrap();
        assert!(bm.raw.iter().all(|&r| r == 1.0));
        assert!(bm.profile.central().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn generic_in_f32() {
        let r: Vec<f32> = beta_raw_moments(16, 4, 2);
        assert!((r[2] - 1.0 / 12.0).abs() < 1e-7);
    }

    #[test]
    fn odd_moment_sits_between_even_neighbours() {
        let bm = beta_moments(40, 10, 5).unwrap();
        let p = &bm.profile;
        // Lyapunov: μ_i^{1/i} is nondecreasing.
        let roots: Vec<f64> = (2..=5).map(|i| p.mu(i).unwrap().powf(1.0 / i as f64)).collect();
        assert!(roots.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-9)));
    }

    #[test]
    fn profile_rejects_inconsistent_moments() {
        assert!(MomentProfile::new(1.0, vec![0.5, 0.1, 0.01]).is_err());
        assert!(MomentProfile::new(-1.0, vec![]).is_err());
    }

    #[test]
    fn overflow_reported() {
        assert!(matches!(beta_moments(10, 5, MAX_ORDER + 1), Err(Error::Overflow(_))));
    }

    #[test]
    fn decay_check_degenerate_is_zero() {
        let d = central_moment_decay_check_with_dim(40, 40, 2).unwrap();
        assert_eq!(d.ratio, 0.0);
    }
}
