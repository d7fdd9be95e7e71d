//! One coordinate of a uniform point on `S^{m−1}`: density
//! `c_m·(1 − x²)^{(m−3)/2}` on `[−1, 1]`.

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::{bisect, ln_gamma};

const CDF_TOL: f64 = 1e-11;
const QUANTILE_TOL: f64 = 1e-12;

fn check_dim(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("coordinate law needs m ≥ 3, got {m}")));
    }
    Ok(())
}

/// `c_m = Γ(m/2) / (√π·Γ((m−1)/2))`.
pub fn z_norm_const(m: usize) -> Result<f64> {
    check_dim(m)?;
    let m = m as f64;
    Ok((ln_gamma(m / 2.0) - ln_gamma((m - 1.0) / 2.0)).exp() / std::f64::consts::PI.sqrt())
}

fn pdf_unchecked(c: f64, a: f64, x: f64) -> f64 {
    if a == 0.0 {
        c
    } else if x.abs() >= 1.0 {
        0.0
    } else {
        c * (a * (-x * x).ln_1p()).exp()
    }
}

pub fn z_pdf(m: usize, x: f64) -> Result<f64> {
    let c = z_norm_const(m)?;
    if !(x.abs() <= 1.0) {
        return Err(Error::InvalidArgument(format!("density support is [−1,1], got {x}")));
    }
    Ok(pdf_unchecked(c, (m as f64 - 3.0) / 2.0, x))
}

/// `f, f′, …, f^{(order)}` at `x`, `|x| < 1`, from the recurrence
/// `(1−x²) f^{(n+1)} = 2(n−a)·x·f^{(n)} + (n(n−1) − 2an)·f^{(n−1)}`,
/// `a = (m−3)/2`, obtained by differentiating `(1−x²) f′ = −2a·x·f`.
pub fn z_pdf_derivatives(m: usize, x: f64, order: usize) -> Result<Vec<f64>> {
    let c = z_norm_const(m)?;
    if !(x.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("derivatives need |x| < 1, got {x}")));
    }
    let a = (m as f64 - 3.0) / 2.0;
    let s = 1.0 - x * x;
    let mut d = Vec::with_capacity(order + 1);
    d.push(pdf_unchecked(c, a, x));
    if order >= 1 {
        d.push(-2.0 * a * x * d[0] / s);
    }
    for n in 1..order {
        let nf = n as f64;
        let next = (2.0 * (nf - a) * x * d[n] + (nf * (nf - 1.0) - 2.0 * a * nf) * d[n - 1]) / s;
        d.push(next);
    }
    Ok(d)
}

/// CDF, clamped to 0 and 1 outside `[−1, 1]`.
pub fn z_cdf(m: usize, x: f64) -> Result<f64> {
    let c = z_norm_const(m)?;
    if x.is_nan() {
        return Err(Error::InvalidArgument("CDF at NaN".into()));
    }
    if x <= -1.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(0.5);
    }
    let a = (m as f64 - 3.0) / 2.0;
    let half = integrate(|t| pdf_unchecked(c, a, t), 0.0, x.abs(), CDF_TOL)?.value;
    let v = if x > 0.0 { 0.5 + half } else { 0.5 - half };
    Ok(v.clamp(0.0, 1.0))
}

pub fn z_quantile(m: usize, p: f64) -> Result<f64> {
    check_dim(m)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability out of range: {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Evaluation errors cannot occur for m ≥ 3 and finite x.
    Ok(bisect(|x| z_cdf(m, x).unwrap_or(f64::NAN), p, -1.0, 1.0, QUANTILE_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuantile {
    /// `0.995^{√m}`.
    pub delta: f64,
    /// `F⁻¹(1 − δ)`.
    pub quantile: f64,
}

pub fn z_tail_quantile(m: usize) -> Result<TailQuantile> {
    let delta = 0.995f64.powf((m as f64).sqrt());
    Ok(TailQuantile {
        delta,
        quantile: z_quantile(m, 1.0 - delta)?,
    })
}

/// `c_m·10^q·q!/|x|^q`.
pub fn z_derivative_bound(m: usize, q: usize, x: f64) -> Result<f64> {
    let c = z_norm_const(m)?;
    if !(x != 0.0 && x.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("derivative bound needs 0 < |x| < 1, got {x}")));
    }
    let log = (q as f64) * 10f64.ln() + ln_gamma(q as f64 + 1.0) - (q as f64) * x.abs().ln();
    Ok(c * log.exp())
}

/// `max_{ℓ ≤ order} sup_{z ∈ [lo, hi]} |F^{(ℓ)}(z)|`, with `F^{(0)} = F`,
/// estimated on a grid of `grid` points refined around the maximiser.
/// Outside `(−1, 1)` every derivative of order ≥ 1 vanishes.
pub fn cdf_derivative_sup(m: usize, order: usize, lo: f64, hi: f64, grid: usize) -> Result<f64> {
    check_dim(m)?;
    if !(lo <= hi) {
        return Err(Error::InvalidArgument("empty derivative interval".into()));
    }
    let grid = grid.max(2);
    let eval = |z: f64| -> Result<f64> {
        let mut best = z_cdf(m, z)?.abs();
        if order >= 1 && z.abs() < 1.0 {
            let d = z_pdf_derivatives(m, z, order - 1)?;
            best = d.iter().fold(best, |acc, v| acc.max(v.abs()));
        }
        Ok(best)
    };
    let step = (hi - lo) / (grid - 1) as f64;
    let mut best = 0.0f64;
    let mut arg = lo;
    for i in 0..grid {
        let z = lo + step * i as f64;
        let v = eval(z)?;
        if v > best {
            best = v;
            arg = z;
        }
    }
    if step > 0.0 {
        let (a, b) = ((arg - step).max(lo), (arg + step).min(hi));
        for i in 0..=64 {
            best = best.max(eval(a + (b - a) * i as f64 / 64.0)?);
        }
    }
    Ok(best)
}
