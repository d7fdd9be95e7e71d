//! Discrete moment-matched laws for auditing the moment-to-CDF bound.
//!
//! Gauss rules for a Beta law come from the eigen-decomposition of its
//! Jacobi matrix: an `r`-node rule matches moments `0..2r`.

use nalgebra::{DMatrix, SymmetricEigen};

use serde::Serialize;

use capgen_core::moments::{
    cdf_bound, cdf_derivative_sup, derivative_bracket, uniform_cdf_bound, z_quantile, CdfBoundInputs, DiscreteLaw,
    MomentProfile,
};
use capgen_core::special::beta_inc;
use capgen_core::{Error, Result};

/// Monic three-term recurrence of the Jacobi polynomials with weight
/// `(1−y)^α (1+y)^β` on `[−1, 1]`: diagonal `a_j`, squared off-diagonal `b_j`.
fn jacobi_recurrence(alpha: f64, beta: f64, r: usize) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let a = (0..r)
        .map(|j| {
            let s = 2.0 * j as f64 + ab;
            if j == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                (beta * beta - alpha * alpha) / (s * (s + 2.0))
            }
        })
        .collect();
    let b = (1..r)
        .map(|j| {
            let jf = j as f64;
            let s = 2.0 * jf + ab;
            if j == 1 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0).powi(2) * (ab + 3.0))
            } else {
                4.0 * jf * (jf + alpha) * (jf + beta) * (jf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            }
        })
        .collect();
    (a, b)
}

/// `r`-node Gauss rule for `Beta(p, q)` on `[0, 1]`.
pub fn beta_gauss_rule(p: f64, q: f64, r: usize) -> Result<DiscreteLaw> {
    if !(p > 0.0 && q > 0.0) || r == 0 {
        return Err(Error::InvalidArgument(format!("bad Gauss rule request Beta({p}, {q}), r={r}")));
    }
    // x = (1+y)/2 turns x^{p−1}(1−x)^{q−1} into (1−y)^{q−1}(1+y)^{p−1}.
    let (a, b) = jacobi_recurrence(q - 1.0, p - 1.0, r);
    let mut j = DMatrix::zeros(r, r);
    for i in 0..r {
        j[(i, i)] = a[i];
        if i + 1 < r {
            let s = b[i].sqrt();
            j[(i, i + 1)] = s;
            j[(i + 1, i)] = s;
        }
    }
    let eig = SymmetricEigen::new(j);
    let atoms: Vec<f64> = eig.eigenvalues.iter().map(|y| (0.5 * (1.0 + y)).clamp(0.0, 1.0)).collect();
    let weights: Vec<f64> = (0..r).map(|c| eig.eigenvectors[(0, c)].powi(2)).collect();
    DiscreteLaw::new(atoms, weights)
}

/// CDF of the first coordinate of a uniform point on `S^{m−1}`, from the
/// regularized incomplete beta function.
pub fn sphere_coordinate_cdf(m: usize, x: f64) -> f64 {
    if x <= -1.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let half = 0.5 * beta_inc(0.5, 0.5 * (m as f64 - 1.0), x * x);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// `P[√V·Z ≤ t]` for a discrete `V ≥ 0`.
pub fn mixture_cdf(v: &DiscreteLaw, cdf: impl Fn(f64) -> f64, t: f64) -> f64 {
    v.atoms()
        .iter()
        .zip(v.weights())
        .map(|(&a, &w)| {
            let s = a.sqrt();
            w * if s > 0.0 {
                cdf(t / s)
            } else if t >= 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .sum()
}

/// `sup_t |P[√X·Z ≤ t] − P[√Y·Z ≤ t]|` for symmetric `Z`, scanned on
/// `grid` points of `[0, t_max]` and refined around the best cell.
pub fn mixture_ks(x: &DiscreteLaw, y: &DiscreteLaw, cdf: impl Fn(f64) -> f64, t_max: f64, grid: usize) -> f64 {
    let gap = |t: f64| (mixture_cdf(x, &cdf, t) - mixture_cdf(y, &cdf, t)).abs();
    let grid = grid.max(2);
    let step = t_max / (grid - 1) as f64;
    let (mut best, mut arg) = (0.0f64, 0.0);
    for i in 0..grid {
        let t = step * i as f64;
        let g = gap(t);
        if g > best {
            best = g;
            arg = t;
        }
    }
    let (lo, hi) = ((arg - step).max(0.0), arg + step);
    for i in 0..=256 {
        best = best.max(gap(lo + (hi - lo) * i as f64 / 256.0));
    }
    best
}

/// `max_{j ≤ p} |E[Xʲ] − E[Yʲ]|`: the smallest `ε` with
/// `|E p(X) − E p(Y)| ≤ ε‖p‖₁` for every `p` of degree `≤ p`.
pub fn moment_gap(x: &DiscreteLaw, y: &DiscreteLaw, p: usize) -> f64 {
    (1..=p as i32)
        .map(|j| (x.moment(j) - y.moment(j)).abs())
        .fold(0.0, f64::max)
}

/// Nodes standing in for the continuous Beta law of `X`; the rule is exact
/// for polynomials of degree below 128.
pub const REFERENCE_NODES: usize = 64;
const T_GRID: usize = 2000;

/// One soundness instance: `X ~ Beta(m̃/2, (m−m̃)/2)` and its `(k+1)`-node
/// Gauss rule `Y`, optionally mixed with mass `eta` at the mean, both
/// rescaled to mean 1; `Z` is the coordinate law of `S^{m_z − 1}`.
#[derive(Debug, Clone, Serialize)]
pub struct SoundnessCase {
    pub k: usize,
    pub m: usize,
    pub m_tilde: usize,
    pub m_z: usize,
    pub delta: f64,
    pub eta: f64,
    pub eps_mom: f64,
    /// Bound valid for every threshold.
    pub bound: f64,
    /// Exact `sup_t` distance between the two mixtures.
    pub observed: f64,
    /// Thresholds where the pointwise bound is below 1.
    pub informative_points: usize,
    /// Thresholds where the observed gap exceeds the pointwise bound.
    pub pointwise_violations: usize,
}

impl SoundnessCase {
    pub fn holds(&self) -> bool {
        self.pointwise_violations == 0 && (self.bound >= 1.0 || self.observed <= self.bound)
    }
}

pub fn run_soundness_case(k: usize, m: usize, m_tilde: usize, m_z: usize, delta: f64, eta: f64) -> Result<SoundnessCase> {
    if !(m_tilde < m) || !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidArgument("need m̃ < m and 0 ≤ η < 1".into()));
    }
    let (p, q) = (0.5 * m_tilde as f64, 0.5 * (m - m_tilde) as f64);
    let scale = m as f64 / m_tilde as f64;
    let rescale = |law: DiscreteLaw, extra: Option<f64>| -> Result<DiscreteLaw> {
        let mut atoms: Vec<f64> = law.atoms().iter().map(|a| a * scale).collect();
        let mut weights: Vec<f64> = law.weights().iter().map(|w| w * (1.0 - eta)).collect();
        if let Some(eta) = extra {
            atoms.push(1.0);
            weights.push(eta);
        }
        DiscreteLaw::new(atoms, weights)
    };
    let x = {
        let l = beta_gauss_rule(p, q, REFERENCE_NODES)?;
        DiscreteLaw::new(l.atoms().iter().map(|a| a * scale).collect(), l.weights().to_vec())?
    };
    let y = rescale(beta_gauss_rule(p, q, k + 1)?, (eta > 0.0).then_some(eta))?;
    let eps_mom = moment_gap(&x, &y, 2 * k);

    let profile = MomentProfile::from_discrete(x.atoms(), x.weights(), 2 * k)?;
    let quantile = z_quantile(m_z, 1.0 - delta)?;
    let (lo, hi) = derivative_bracket(quantile);
    let inputs = CdfBoundInputs {
        k,
        delta,
        eps_mom,
        profile,
        quantile,
        deriv_bound: cdf_derivative_sup(m_z, k, lo, hi, 256)?,
    };
    let bound = uniform_cdf_bound(&inputs)?.value;
    let mu = inputs.profile.mu_sq.sqrt();

    let cdf = |t: f64| sphere_coordinate_cdf(m_z, t);
    let t_max = x.atoms().iter().chain(y.atoms()).fold(0.0f64, |a, &b| a.max(b)).sqrt() * 1.01;
    let observed = mixture_ks(&x, &y, cdf, t_max, T_GRID);
    let (mut informative_points, mut pointwise_violations) = (0, 0);
    for i in 0..T_GRID {
        let t = t_max * i as f64 / (T_GRID - 1) as f64;
        let b = cdf_bound(&inputs, t / mu)?.value;
        if b < 1.0 {
            informative_points += 1;
            let gap = (mixture_cdf(&x, cdf, t) - mixture_cdf(&y, cdf, t)).abs();
            pointwise_violations += usize::from(gap > b);
        }
    }
    Ok(SoundnessCase {
        k,
        m,
        m_tilde,
        m_z,
        delta,
        eta,
        eps_mom,
        bound,
        observed,
        informative_points,
        pointwise_violations,
    })
}
