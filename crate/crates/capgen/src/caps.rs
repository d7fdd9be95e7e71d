//! Cap-discrepancy campaigns: how far the generator's cap probabilities sit
//! from the uniform measure on the sphere.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use capgen_core::haar::uniform_sphere;
use capgen_core::moments::{z_cdf, z_quantile};
use capgen_core::orth_design::MAX_EXHAUSTIVE_BITS;
use capgen_core::pipeline::{Params, SphereGenerator};
use capgen_core::{Error, Result, SeedStream};

/// Two-sided tail mass beyond one standard deviation of a normal law.
const ONE_SIGMA_TAIL: f64 = 0.317_310_507_862_914_1;
const CHUNK: u64 = 1 << 12;

/// The cap `{x : ⟨w, x⟩ ≥ c}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapSpec {
    pub direction: Vec<f64>,
    pub threshold: f64,
}

impl CapSpec {
    pub fn new(direction: Vec<f64>, threshold: f64) -> Result<Self> {
        let r = capgen_core::matrix::norm(&direction);
        if !((r - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidArgument(format!("cap direction has norm {r}, expected 1")));
        }
        Ok(Self { direction, threshold })
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        capgen_core::matrix::dot(&self.direction, x) >= self.threshold
    }

    /// Exact uniform measure `1 − F(c) = F(−c)`, independent of the direction.
    pub fn sphere_measure(&self) -> Result<f64> {
        z_cdf(self.direction.len(), -self.threshold)
    }
}

/// `count` caps with uniform directions and thresholds at uniform quantiles
/// of the coordinate law, so cap masses spread over (0, 1).
pub fn random_caps(n: usize, count: usize, seed: u64) -> Result<Vec<CapSpec>> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let w = uniform_sphere(n, &mut rng);
            let u: f64 = rng.random_range(0.0..1.0);
            CapSpec::new(w, z_quantile(n, u)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "count")]
pub enum SeedMode {
    Exhaustive,
    Sampled(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "count")]
pub enum Reference {
    Exact,
    MonteCarlo(usize),
}

impl std::str::FromStr for SeedMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_mode(s, "sampled").map(|m| m.map_or(SeedMode::Exhaustive, SeedMode::Sampled))
            .and_then(|m| match (s, &m) {
                ("exhaustive", _) | (_, SeedMode::Sampled(_)) => Ok(m),
                _ => Err(Error::InvalidArgument(format!("unknown seed mode {s:?}"))),
            })
    }
}

impl std::str::FromStr for Reference {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(Reference::Exact);
        }
        match parse_mode(s, "mc")? {
            Some(n) => Ok(Reference::MonteCarlo(n)),
            None => Err(Error::InvalidArgument(format!("unknown reference {s:?}"))),
        }
    }
}

/// Parses `prefix:N`; `None` when the prefix does not match.
fn parse_mode(s: &str, prefix: &str) -> Result<Option<usize>> {
    match s.split_once(':') {
        Some((p, n)) if p == prefix => {
            let n: usize = n
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad count in {s:?}")))?;
            if n == 0 {
                return Err(Error::InvalidArgument(format!("count must be positive in {s:?}")));
            }
            Ok(Some(n))
        }
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapResult {
    pub threshold: f64,
    pub p_gen: f64,
    pub p_ref: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub dim: usize,
    pub eps: f64,
    pub seed_length: usize,
    pub seed_mode: SeedMode,
    pub reference_mode: Reference,
    pub seeds_used: u64,
    pub per_cap: Vec<CapResult>,
    pub max_discrepancy: f64,
    /// One-standard-deviation-equivalent sampling noise: zero for
    /// exhaustive seeds against the exact reference, otherwise the DKW
    /// deviation at the one-sigma tail mass, combined in quadrature.
    pub sigma_est: f64,
}

fn dkw_sigma(samples: u64) -> f64 {
    ((2.0 / ONE_SIGMA_TAIL).ln() / (2.0 * samples as f64)).sqrt()
}

/// Counts, for each cap, how many points from `point(seed_index)` fall in it.
/// Chunks are reduced in index order, so the result does not depend on
/// scheduling.
pub fn count_hits<F>(caps: &[CapSpec], seeds: u64, point: F) -> Result<Vec<u64>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let chunks = seeds.div_ceil(CHUNK);
    let partial: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hits = vec![0u64; caps.len()];
            for i in c * CHUNK..((c + 1) * CHUNK).min(seeds) {
                let x = point(i)?;
                for (h, cap) in hits.iter_mut().zip(caps) {
                    *h += u64::from(cap.contains(&x));
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0u64; caps.len()];
    for p in partial {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok(total)
}

/// Runs a campaign against an explicit generator, caps and seed source.
/// `master` seeds the sampled mode and the Monte-Carlo reference.
pub fn cap_discrepancy_with(
    gen: &SphereGenerator,
    eps: f64,
    caps: &[CapSpec],
    seed_mode: &SeedMode,
    reference: &Reference,
    master: &[u8],
) -> Result<DiscrepancyReport> {
    let n = gen.dim();
    let bits = gen.seed_length();
    let seeds = match seed_mode {
        SeedMode::Exhaustive => {
            if bits > MAX_EXHAUSTIVE_BITS {
                return Err(Error::CapExceeded {
                    what: "exhaustive seed bits",
                    required: bits as u128,
                    cap: MAX_EXHAUSTIVE_BITS as u128,
                });
            }
            1u64 << bits
        }
        SeedMode::Sampled(m) => *m as u64,
    };
    if caps.iter().any(|c| c.direction.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: caps.iter().map(|c| c.direction.len()).find(|&l| l != n).unwrap_or(0),
        });
    }
    let hits = count_hits(caps, seeds, |i| {
        let mut s = match seed_mode {
            SeedMode::Exhaustive => SeedStream::from_bits(i, bits),
            SeedMode::Sampled(_) => SeedStream::derived(master, i),
        };
        gen.generate(&mut s)
    })?;
    let (p_ref, ref_sigma): (Vec<f64>, f64) = match reference {
        Reference::Exact => (caps.iter().map(CapSpec::sphere_measure).collect::<Result<_>>()?, 0.0),
        Reference::MonteCarlo(m) => {
            let mut seed = [0u8; 8];
            for (i, b) in master.iter().enumerate() {
                seed[i % 8] ^= b;
            }
            let base = u64::from_le_bytes(seed) ^ 0x6d63_7265_6600_0000;
            let ref_hits = count_hits(caps, *m as u64, |i| {
                let mut rng = StdRng::seed_from_u64(base.wrapping_add(i));
                Ok(uniform_sphere(n, &mut rng))
            })?;
            (
                ref_hits.iter().map(|&h| h as f64 / *m as f64).collect(),
                dkw_sigma(*m as u64),
            )
        }
    };
    let gen_sigma = match seed_mode {
        SeedMode::Exhaustive => 0.0,
        SeedMode::Sampled(m) => dkw_sigma(*m as u64),
    };
    let per_cap: Vec<CapResult> = caps
        .iter()
        .zip(hits)
        .zip(p_ref)
        .map(|((cap, h), p_ref)| {
            let p_gen = h as f64 / seeds as f64;
            CapResult {
                threshold: cap.threshold,
                p_gen,
                p_ref,
                discrepancy: (p_gen - p_ref).abs(),
            }
        })
        .collect();
    let max_discrepancy = per_cap.iter().map(|c| c.discrepancy).fold(0.0, f64::max);
    Ok(DiscrepancyReport {
        dim: n,
        eps,
        seed_length: bits,
        seed_mode: seed_mode.clone(),
        reference_mode: reference.clone(),
        seeds_used: seeds,
        per_cap,
        max_discrepancy,
        sigma_est: (gen_sigma * gen_sigma + ref_sigma * ref_sigma).sqrt(),
    })
}

/// Builds the generator for `(n, ε)` and runs `num_caps` random caps.
#[allow(clippy::too_many_arguments)]
pub fn cap_discrepancy(
    n: usize,
    eps: f64,
    params: &Params,
    num_caps: usize,
    seed_mode: &SeedMode,
    reference: &Reference,
    cap_seed: u64,
    master: &[u8],
) -> Result<DiscrepancyReport> {
    let gen = SphereGenerator::new(n, eps, params)?;
    let caps = random_caps(n, num_caps, cap_seed)?;
    cap_discrepancy_with(&gen, eps, &caps, seed_mode, reference, master)
}
