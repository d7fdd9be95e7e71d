//! Pseudorandom projections `R^m → R^m̃`: the top `m̃` rows of a design sample.

use rand::Rng;

use crate::error::{Error, Result};
use crate::haar::haar_rows;
use crate::matrix::{norm, ProjectionMatrix};
use crate::orth_design::{DesignConfig, GeneratorSet, Walk};
use crate::seed::SeedStream;

/// Constant in the moment-order rule `(k/m̃)^{c_k·k} ≤ ε`.
pub const DEFAULT_MOMENT_CONSTANT: f64 = 1.0;

/// `⌈√m⌉`.
pub fn default_out_dim(m: usize) -> usize {
    let r = (m as f64).sqrt() as usize;
    (r.saturating_sub(1)..=r + 1)
        .find(|&c| c * c >= m)
        .unwrap_or(r + 1)
}

/// Outcome of [`choose_moment_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentOrder {
    /// The order to use.
    pub k: usize,
    /// Smallest even order meeting the inequality before clamping, if any
    /// order below `m̃` does.
    pub raw: Option<usize>,
    /// True when `k` differs from `raw`.
    pub clamped: bool,
}

/// Smallest even `k` with `(k/m̃)^{c_k·k} ≤ ε`, clamped to `[2, ⌊m̃/80⌋]` when
/// that interval is nonempty and to 2 otherwise.
pub fn choose_moment_order(m_tilde: usize, eps: f64, c_k: f64) -> MomentOrder {
    let raw = if eps >= 1.0 {
        Some(2)
    } else {
        (2..m_tilde)
            .step_by(2)
            .find(|&k| c_k * k as f64 * (k as f64 / m_tilde as f64).ln() <= eps.ln())
    };
    let hi = m_tilde / 80;
    let k = if hi >= 2 {
        raw.unwrap_or(hi).clamp(2, hi)
    } else {
        2
    };
    // Keep the order even after clamping to an odd upper end.
    let k = if k % 2 == 1 { k - 1 } else { k };
    MomentOrder {
        k,
        raw,
        clamped: raw != Some(k),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrpConfig {
    pub in_dim: usize,
    pub out_dim: usize,
    pub moment_order: MomentOrder,
    pub design: DesignConfig,
    pub eps: f64,
}

impl PrpConfig {
    /// Output dimension `⌈√m⌉`, moment order from [`choose_moment_order`] at
    /// that dimension, and a design of degree `4·k_mom`.
    pub fn new(in_dim: usize, eps: f64, generators: GeneratorSet, c_q: f64, c_k: f64) -> Result<Self> {
        Self::with_out_dim(in_dim, default_out_dim(in_dim), eps, generators, c_q, c_k)
    }

    pub fn with_out_dim(
        in_dim: usize,
        out_dim: usize,
        eps: f64,
        generators: GeneratorSet,
        c_q: f64,
        c_k: f64,
    ) -> Result<Self> {
        if generators.dim() != in_dim {
            return Err(Error::DimensionMismatch {
                expected: in_dim,
                actual: generators.dim(),
            });
        }
        let moment_order = choose_moment_order(out_dim, eps, c_k);
        let design = DesignConfig::new(generators, 4 * moment_order.k, eps, c_q)?;
        Self::from_design(in_dim, out_dim, moment_order, design, eps)
    }

    pub fn from_design(
        in_dim: usize,
        out_dim: usize,
        moment_order: MomentOrder,
        design: DesignConfig,
        eps: f64,
    ) -> Result<Self> {
        if out_dim == 0 || out_dim > in_dim {
            return Err(Error::InvalidArgument(format!(
                "projection {in_dim} → {out_dim} is not a reduction"
            )));
        }
        if moment_order.k < 2 || moment_order.k % 2 != 0 {
            return Err(Error::InvalidArgument("moment order must be even and ≥ 2".into()));
        }
        if design.dim() != in_dim {
            return Err(Error::DimensionMismatch {
                expected: in_dim,
                actual: design.dim(),
            });
        }
        Ok(Self {
            in_dim,
            out_dim,
            moment_order,
            design,
            eps,
        })
    }

    pub fn seed_bits(&self) -> usize {
        self.design.seed_bits()
    }
}

/// A sampled projection, kept as its walk so it applies in `O(q)` time.
#[derive(Debug, Clone, PartialEq)]
pub struct Prp {
    walk: Walk,
    out_dim: usize,
}

impl Prp {
    pub fn sample(config: &PrpConfig, stream: &mut SeedStream) -> Result<Self> {
        Ok(Self {
            walk: Walk::sample(&config.design, stream)?,
            out_dim: config.out_dim,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.walk.dim()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn walk(&self) -> &Walk {
        &self.walk
    }

    /// `P·w`.
    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        let mut x = w.to_vec();
        self.walk.apply(&mut x)?;
        x.truncate(self.out_dim);
        Ok(x)
    }

    /// `Pᵀ·x`: zero-pad to `m` and apply the transposed walk.
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.out_dim {
            return Err(Error::DimensionMismatch {
                expected: self.out_dim,
                actual: x.len(),
            });
        }
        let mut y = vec![0.0; self.in_dim()];
        y[..self.out_dim].copy_from_slice(x);
        self.walk.apply_transpose(&mut y)?;
        Ok(y)
    }

    pub fn to_matrix(&self) -> Result<ProjectionMatrix> {
        self.walk.to_matrix()?.truncate(self.out_dim)
    }
}

/// `P·w` for a freshly sampled projection; consumes the design's walk bits.
pub fn prp_project(w: &[f64], config: &PrpConfig, stream: &mut SeedStream) -> Result<Vec<f64>> {
    if w.len() != config.in_dim {
        return Err(Error::DimensionMismatch {
            expected: config.in_dim,
            actual: w.len(),
        });
    }
    if norm(w) == 0.0 {
        return Err(Error::InvalidArgument("cannot project the zero vector".into()));
    }
    Prp::sample(config, stream)?.apply(w)
}

/// `Q·w` with `Q` the top `m̃` rows of a Haar rotation.
pub fn uniform_project<R: Rng + ?Sized>(w: &[f64], out_dim: usize, rng: &mut R) -> Result<Vec<f64>> {
    if norm(w) == 0.0 {
        return Err(Error::InvalidArgument("cannot project the zero vector".into()));
    }
    haar_rows(out_dim, w.len(), rng)?.apply(w)
}
