//! Kolmogorov distances between empirical, finite and continuous laws.

use crate::error::{Error, Result};

fn check_sorted(xs: &[f64], name: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} is empty")));
    }
    if xs.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument(format!("{name} is not sorted")));
    }
    Ok(())
}

/// Two-sample statistic `sup_x |F̂_a(x) − F̂_b(x)|` for sorted samples.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_sorted(a, "first sample")?;
    check_sorted(b, "second sample")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// One-sample statistic against a continuous CDF, for a sorted sample.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    check_sorted(sample, "sample")?;
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// Rejection threshold at level `alpha` from the
/// Dvoretzky–Kiefer–Wolfowitz inequality:
/// `√(ln(2/α)/2)·√(1/n + 1/m)`, or `√(ln(2/α)/(2n))` when `m` is `None`.
pub fn ks_critical_value(alpha: f64, n: usize, m: Option<usize>) -> f64 {
    let c = ((2.0 / alpha).ln() / 2.0).sqrt();
    let scale = match m {
        Some(m) => (1.0 / n as f64 + 1.0 / m as f64).sqrt(),
        None => (1.0 / n as f64).sqrt(),
    };
    c * scale
}

/// A finite law on the real line, kept with sorted, merged atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteLaw {
    /// Normalizes the weights and merges equal atoms.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidArgument("atoms and weights must be nonempty and aligned".into()));
        }
        if atoms.iter().any(|a| !a.is_finite()) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument("atoms must be finite and weights ≥ 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("total weight must be positive".into()));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(weights).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (a, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == a => last.1 += w,
                _ => merged.push((a, w)),
            }
        }
        Ok(Self {
            atoms: merged.iter().map(|p| p.0).collect(),
            weights: merged.iter().map(|p| p.1 / total).collect(),
        })
    }

    pub fn uniform(atoms: Vec<f64>) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0; n])
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.atoms.partition_point(|&a| a <= x);
        self.weights[..idx].iter().sum::<f64>().min(1.0)
    }

    /// Running CDF values at each atom.
    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.weights
            .iter()
            .map(|w| {
                acc += w;
                acc.min(1.0)
            })
            .collect()
    }

    /// Law of `U·V` for independent `U`, `V`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        let mut weights = Vec::with_capacity(atoms.capacity());
        for (a, wa) in self.atoms.iter().zip(&self.weights) {
            for (b, wb) in other.atoms.iter().zip(&other.weights) {
                atoms.push(a * b);
                weights.push(wa * wb);
            }
        }
        Self::new(atoms, weights)
    }

    pub fn moment(&self, j: i32) -> f64 {
        self.atoms.iter().zip(&self.weights).map(|(a, w)| w * a.powi(j)).sum()
    }
}

/// Exact Kolmogorov distance between two finite laws. Both CDFs are
/// constant between merged atoms, so checking every atom suffices.
pub fn discrete_dcdf(a: &DiscreteLaw, b: &DiscreteLaw) -> f64 {
    let mut pts: Vec<f64> = a.atoms.iter().chain(&b.atoms).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let (ca, cb) = (a.cumulative(), b.cumulative());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    for x in pts {
        while i < a.atoms.len() && a.atoms[i] <= x {
            i += 1;
        }
        while j < b.atoms.len() && b.atoms[j] <= x {
            j += 1;
        }
        let fa = if i == 0 { 0.0 } else { ca[i - 1] };
        let fb = if j == 0 { 0.0 } else { cb[j - 1] };
        d = d.max((fa - fb).abs());
    }
    d
}

/// Exact Kolmogorov distance between a finite law and a continuous CDF:
/// the supremum is approached at an atom, from the left or at the atom.
pub fn dcdf_against(law: &DiscreteLaw, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut below = 0.0;
    let mut d = 0.0f64;
    for (a, w) in law.atoms.iter().zip(&law.weights) {
        let f = cdf(*a);
        let above = (below + w).min(1.0);
        d = d.max((f - below).abs()).max((above - f).abs());
        below = above;
    }
    d
}

/// `G(t) = E_V[F(t/V)]`, the CDF of `V·Z` for a positive finite `V`
/// independent of `Z ~ F`.
pub fn product_cdf(cdf: impl Fn(f64) -> f64, v: &DiscreteLaw, t: f64) -> Result<f64> {
    if v.atoms.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("scale variable must be positive".into()));
    }
    Ok(v.atoms.iter().zip(&v.weights).map(|(a, w)| w * cdf(t / a)).sum())
}
