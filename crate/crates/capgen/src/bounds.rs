//! Tables of the moment-to-CDF distance bound for the projection-length law.

use serde::Serialize;

use capgen_core::moments::{
    beta_moments, cdf_derivative_sup, derivative_bracket, uniform_cdf_bound, z_quantile, Branch,
    CdfBoundInputs,
};
use capgen_core::{Error, Result};

const DERIV_GRID: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub k: usize,
    pub delta: f64,
    pub eps_mom: f64,
    pub bound: f64,
    pub branch: Branch,
}

/// Inputs for `X ~ Beta(m̃/2, (m−m̃)/2)` rescaled to mean 1, paired with the
/// coordinate law of the `m̃`-sphere.
pub fn beta_bound_inputs(m: usize, m_tilde: usize, k: usize, delta: f64, eps_mom: f64) -> Result<CdfBoundInputs> {
    if m_tilde < 3 {
        return Err(Error::InvalidArgument(format!("m̃ must be at least 3, got {m_tilde}")));
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidArgument(format!("δ must lie in (0, 1/2], got {delta}")));
    }
    let profile = beta_moments(m, m_tilde, 2 * k)?
        .profile
        .scaled(m as f64 / m_tilde as f64);
    let quantile = z_quantile(m_tilde, 1.0 - delta)?;
    let (lo, hi) = derivative_bracket(quantile);
    let deriv_bound = cdf_derivative_sup(m_tilde, k, lo, hi, DERIV_GRID)?;
    let inputs = CdfBoundInputs {
        k,
        delta,
        eps_mom,
        profile,
        quantile,
        deriv_bound,
    };
    inputs.validate()?;
    Ok(inputs)
}

/// One row per `(k, δ, ε_mom)`, in input order.
pub fn bound_table(k_list: &[usize], delta_list: &[f64], eps_list: &[f64], m: usize, m_tilde: usize) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for &k in k_list {
        for &delta in delta_list {
            for &eps_mom in eps_list {
                let b = uniform_cdf_bound(&beta_bound_inputs(m, m_tilde, k, delta, eps_mom)?)?;
                rows.push(BoundRow {
                    k,
                    delta,
                    eps_mom,
                    bound: b.value,
                    branch: b.branch,
                });
            }
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from("k,delta,eps_mom,bound,branch\n");
    for r in rows {
        let branch = match r.branch {
            Branch::Trivial => "trivial",
            Branch::SmallT => "small_t",
            Branch::LargeT => "large_t",
        };
        out.push_str(&format!("{},{:e},{:e},{:e},{}\n", r.k, r.delta, r.eps_mom, r.bound, branch));
    }
    out
}
