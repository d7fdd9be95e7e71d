//! Low-dimensional base generator: an INW-style recursive expansion of a
//! short seed into `d` blocks, each mapped to a discretized Gaussian, then
//! normalized onto the sphere.
//!
//! Layout of the `s` seed bits: a `b`-bit root block followed by one key per
//! level. With `L = ⌈log₂ d⌉` levels, block `i` (bits `i_L … i_1`) is the root
//! passed through `h_L` if `i_L = 1`, then `h_{L−1}` if `i_{L−1} = 1`, and so
//! on down to `h_1`. Each `h_ℓ(x) = a_ℓ·x ⊕ c_ℓ` over GF(2^b) with `a_ℓ ≠ 0`,
//! so every merge is a bijection and each block is individually uniform.
//! The `s − b` key bits are split as evenly as possible across levels,
//! earlier levels taking the remainder; within a key the first
//! `min(b, width)` bits give `c_ℓ` and the rest are xor-folded into `a_ℓ`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf2::Gf2m;
use crate::seed::SeedStream;
use crate::special::normal_quantile;

/// Constant in `s = c_inw·⌈log₂ d⌉·⌈log₂(1/ε)⌉`.
pub const DEFAULT_INW_CONSTANT: f64 = 6.0;
/// Precision at or below which Gaussian quantiles are tabulated up front.
const TABLE_MAX_BITS: u32 = 20;
const MAX_RETRIES: u64 = 3;
/// Widest coordinate block the GF(2^b) hashes support.
pub const MAX_PRECISION_BITS: u32 = 63;

fn ceil_log2_f(x: f64) -> usize {
    let l = x.log2();
    // Exact powers of two must not round up.
    let r = l.round();
    if (l - r).abs() < 1e-12 {
        r.max(0.0) as usize
    } else {
        l.ceil().max(0.0) as usize
    }
}

/// `⌈c_inw·⌈log₂ d⌉·⌈log₂(1/ε)⌉⌉`.
pub fn inw_seed_length(d: usize, eps: f64, c_inw: f64) -> usize {
    let prod = (ceil_log2_f(d as f64) * ceil_log2_f(1.0 / eps)) as f64;
    (c_inw * prod - 1e-9).ceil().max(0.0) as usize
}

/// `⌈log₂(d/ε)⌉ + 2`.
pub fn precision_bits(d: usize, eps: f64) -> u32 {
    ceil_log2_f(d as f64 / eps) as u32 + 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseGenConfig {
    pub dim: usize,
    pub eps: f64,
    pub precision_bits: u32,
    pub seed_len: usize,
    key_bits: Vec<usize>,
    field: Gf2m,
    table: Option<Arc<Vec<f64>>>,
}

impl BaseGenConfig {
    pub fn new(dim: usize, eps: f64, c_inw: f64) -> Result<Self> {
        Self::with_lengths(dim, eps, precision_bits(dim, eps), inw_seed_length(dim, eps, c_inw))
    }

    pub fn with_lengths(dim: usize, eps: f64, precision_bits: u32, seed_len: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("base generator needs d ≥ 2, got {dim}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!("ε must lie in (0,1), got {eps}")));
        }
        let b = precision_bits as usize;
        if precision_bits > MAX_PRECISION_BITS {
            return Err(Error::CapExceeded {
                what: "coordinate precision bits",
                required: b as u128,
                cap: MAX_PRECISION_BITS as u128,
            });
        }
        if seed_len < b {
            return Err(Error::InvalidArgument(format!(
                "seed length {seed_len} cannot hold the {b}-bit root block"
            )));
        }
        let field = Gf2m::new(precision_bits)?;
        let levels = ceil_log2_f(dim as f64);
        let spare = seed_len - b;
        let key_bits = (0..levels)
            .map(|l| spare / levels + usize::from(l < spare % levels))
            .collect();
        let table = (precision_bits <= TABLE_MAX_BITS).then(|| {
            let n = 1usize << precision_bits;
            Arc::new((0..n).map(|j| midpoint_quantile(j as u64, precision_bits)).collect())
        });
        Ok(Self {
            dim,
            eps,
            precision_bits,
            seed_len,
            key_bits,
            field,
            table,
        })
    }

    pub fn levels(&self) -> usize {
        self.key_bits.len()
    }

    /// Key widths for levels `1..=L`.
    pub fn key_bits(&self) -> &[usize] {
        &self.key_bits
    }

    fn gaussian(&self, block: u64) -> f64 {
        match &self.table {
            Some(t) => t[block as usize],
            None => midpoint_quantile(block, self.precision_bits),
        }
    }
}

/// `Φ⁻¹((j + ½)/2^b)`.
fn midpoint_quantile(j: u64, b: u32) -> f64 {
    let p = (j as f64 + 0.5) / (1u64 << b) as f64;
    normal_quantile(p).expect("midpoints lie strictly inside (0,1)")
}

struct Merge {
    a: u64,
    c: u64,
}

fn read_key(stream: &mut SeedStream, width: usize, field: &Gf2m) -> Result<Merge> {
    let b = field.bits() as usize;
    let c_bits = width.min(b);
    let c = stream.read_bits(c_bits)?;
    let mut fold = 0u64;
    let mut left = width - c_bits;
    while left > 0 {
        let take = left.min(b);
        fold ^= stream.read_bits(take)?;
        left -= take;
    }
    // Force a ≠ 0 so the merge is a bijection.
    let a = if b == 1 { 1 } else { 1 + fold % field.mask() };
    Ok(Merge { a, c })
}

/// The `d` blocks before Gaussian mapping.
fn expand_blocks(config: &BaseGenConfig, root: u64, merges: &[Merge]) -> Vec<u64> {
    (0..config.dim)
        .map(|i| {
            let mut x = root;
            for l in (0..merges.len()).rev() {
                if (i >> l) & 1 == 1 {
                    x = config.field.mul(merges[l].a, x) ^ merges[l].c;
                }
            }
            x
        })
        .collect()
}

/// The discretized Gaussian coordinates before normalization; consumes
/// exactly `s` bits.
pub fn inw_coordinates(config: &BaseGenConfig, stream: &mut SeedStream) -> Result<Vec<f64>> {
    coordinates_with_retry(config, stream, 0)
}

fn coordinates_with_retry(config: &BaseGenConfig, stream: &mut SeedStream, retry: u64) -> Result<Vec<f64>> {
    if let Some(rem) = stream.remaining() {
        if rem < config.seed_len {
            return Err(Error::StreamExhausted {
                requested: config.seed_len,
                consumed: stream.bits_consumed(),
                budget: stream.bit_budget().unwrap_or(0),
            });
        }
    }
    let root = stream.read_bits(config.precision_bits as usize)?;
    let merges = config
        .key_bits
        .iter()
        .map(|&w| read_key(stream, w, &config.field))
        .collect::<Result<Vec<_>>>()?;
    // Domain separation for retries flips low root bits; no extra seed is read.
    let root = (root ^ retry) & config.field.mask();
    Ok(expand_blocks(config, root, &merges)
        .into_iter()
        .map(|blk| config.gaussian(blk))
        .collect())
}

/// A unit vector in R^d.
pub fn inw_generate(config: &BaseGenConfig, stream: &mut SeedStream) -> Result<Vec<f64>> {
    let start = stream.clone();
    for retry in 0..=MAX_RETRIES {
        let mut s = start.clone();
        let v = coordinates_with_retry(config, &mut s, retry)?;
        let r = crate::matrix::norm(&v);
        if r > 0.0 && r.is_finite() {
            *stream = s;
            return Ok(v.into_iter().map(|x| x / r).collect());
        }
    }
    Err(Error::Degenerate("base generator produced the zero vector".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_length_formula() {
        assert_eq!(inw_seed_length(16, 1.0 / 16.0, 6.0), 96);
        assert_eq!(inw_seed_length(2, 0.25, 6.0), 12);
        assert_eq!(inw_seed_length(2, 0.01, 6.0), 6 * 7);
        assert_eq!(inw_seed_length(5, 0.5, 6.0), 18);
    }

    #[test]
    fn precision() {
        assert_eq!(precision_bits(4, 0.25), 6);
        assert_eq!(precision_bits(64, 0.05), 13);
    }

    #[test]
    fn keys_fill_budget() {
        let c = BaseGenConfig::new(5, 0.1, 6.0).unwrap();
        assert_eq!(c.levels(), 3);
        assert_eq!(c.precision_bits as usize + c.key_bits().iter().sum::<usize>(), c.seed_len);
        let max = *c.key_bits().iter().max().unwrap();
        let min = *c.key_bits().iter().min().unwrap();
        assert!(max - min <= 1);
    }

    #[test]
    fn consumes_exactly_s_bits_and_normalizes() {
        let c = BaseGenConfig::new(10, 0.05, 6.0).unwrap();
        let mut s = SeedStream::from_hex("deadbeef", None).unwrap();
        let v = inw_generate(&c, &mut s).unwrap();
        assert_eq!(s.bits_consumed(), c.seed_len);
        assert_eq!(v.len(), 10);
        assert!((crate::matrix::norm(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_stream_errors() {
        let c = BaseGenConfig::new(4, 0.25, 6.0).unwrap();
        let mut s = SeedStream::from_hex("ff", Some(10)).unwrap();
        assert!(inw_generate(&c, &mut s).unwrap_err().is_resource_limit());
    }

    #[test]
    fn first_block_is_root() {
        let c = BaseGenConfig::new(4, 0.25, 6.0).unwrap();
        // Root bits 101010 select the 42nd of 64 midpoints.
        let mut s = SeedStream::from_bits(0b101010 << 18, 24);
        let v = inw_coordinates(&c, &mut s).unwrap();
        assert!((v[0] - normal_quantile(42.5 / 64.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn too_short_seed_rejected() {
        assert!(BaseGenConfig::with_lengths(4, 0.25, 6, 5).is_err());
        assert!(BaseGenConfig::new(1, 0.25, 6.0).is_err());
    }
}
