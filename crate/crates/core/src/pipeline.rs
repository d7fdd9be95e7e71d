//! The full generators: a dimension ladder of pseudorandom projections over
//! the base generator, and the Gaussian variant that rescales by a
//! discretized χ_n radius.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::base_gen::{inw_generate, BaseGenConfig, DEFAULT_INW_CONSTANT};
use crate::error::{Error, Result};
use crate::orth_design::{default_generator_set, GeneratorSet, DEFAULT_WALK_CONSTANT};
use crate::prp::{default_out_dim, Prp, PrpConfig, DEFAULT_MOMENT_CONSTANT};
use crate::seed::SeedStream;
use crate::special::chi_quantile;

const MAX_SCHEDULE_ROUNDS: usize = 5;
const CHI_TOL: f64 = 1e-12;

/// Where the dimension ladder stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorPolicy {
    /// `max(64, 4·⌈log₂(1/ε′)⌉²)`.
    Default,
    /// A fixed floor, for forcing ladders at small `n`.
    Fixed(usize),
}

impl FloorPolicy {
    pub fn floor(&self, eps_prime: f64) -> usize {
        match *self {
            FloorPolicy::Default => {
                let l = (1.0 / eps_prime).log2().ceil().max(0.0) as usize;
                64usize.max(4 * l * l)
            }
            FloorPolicy::Fixed(f) => f,
        }
    }
}

/// Tunable constants and overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub c_q: f64,
    pub c_k: f64,
    pub c_inw: f64,
    pub floor: FloorPolicy,
    /// Generator sets to use instead of the default, keyed by dimension.
    pub generator_overrides: BTreeMap<usize, GeneratorSet>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            c_q: DEFAULT_WALK_CONSTANT,
            c_k: DEFAULT_MOMENT_CONSTANT,
            c_inw: DEFAULT_INW_CONSTANT,
            floor: FloorPolicy::Default,
            generator_overrides: BTreeMap::new(),
        }
    }
}

impl Params {
    pub fn generators(&self, dim: usize) -> Result<GeneratorSet> {
        match self.generator_overrides.get(&dim) {
            Some(g) => Ok(g.clone()),
            None => default_generator_set(dim),
        }
    }

    pub fn with_override(mut self, set: GeneratorSet) -> Self {
        self.generator_overrides.insert(set.dim(), set);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    /// `n₀ > n₁ > … > n_t`.
    pub levels: Vec<usize>,
    pub eps_prime: f64,
    /// Number of projection levels `t`.
    pub level_count: usize,
    pub floor: usize,
}

impl Schedule {
    pub fn base_dim(&self) -> usize {
        *self.levels.last().expect("ladder is nonempty")
    }
}

fn ladder(n: usize, floor: usize) -> Vec<usize> {
    let mut levels = vec![n];
    while let Some(&last) = levels.last() {
        if last <= floor {
            break;
        }
        let next = default_out_dim(last);
        if next >= last {
            break;
        }
        levels.push(next);
    }
    levels
}

/// Ladder `n_{i+1} = ⌈√n_i⌉`, stopping at the first level at or below the
/// floor, with `ε′ = ε/(2(t+1))`.
///
/// `t` depends on the floor, which depends on `ε′`, which depends on `t`; the
/// pair is iterated to a fixed point. If that takes more than a few rounds
/// the largest `t` seen fixes `ε′`, which keeps `(t+1)·ε′ ≤ ε` for the final
/// ladder since a smaller `ε′` can only raise the floor.
pub fn make_schedule(n: usize, eps: f64, params: &Params) -> Result<Schedule> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 4, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0,1), got {eps}")));
    }
    let mut t = 0usize;
    let mut t_max = 0usize;
    let mut converged = false;
    for _ in 0..MAX_SCHEDULE_ROUNDS {
        let eps_prime = eps / (2.0 * (t + 1) as f64);
        let next = ladder(n, params.floor.floor(eps_prime)).len() - 1;
        t_max = t_max.max(next);
        if next == t {
            converged = true;
            break;
        }
        t = next;
    }
    let t_final = if converged { t } else { t_max };
    let eps_prime = eps / (2.0 * (t_final + 1) as f64);
    let floor = params.floor.floor(eps_prime);
    let levels = ladder(n, floor);
    Ok(Schedule {
        level_count: levels.len() - 1,
        levels,
        eps_prime,
        floor,
    })
}

/// The sphere generator for one `(n, ε)`: a schedule with a projection
/// config per level and the base generator config.
#[derive(Debug, Clone)]
pub struct SphereGenerator {
    pub schedule: Schedule,
    pub prps: Vec<PrpConfig>,
    pub base: BaseGenConfig,
}

impl SphereGenerator {
    pub fn new(n: usize, eps: f64, params: &Params) -> Result<Self> {
        let schedule = make_schedule(n, eps, params)?;
        let ep = schedule.eps_prime;
        let prps = schedule
            .levels
            .windows(2)
            .map(|w| PrpConfig::with_out_dim(w[0], w[1], ep, params.generators(w[0])?, params.c_q, params.c_k))
            .collect::<Result<Vec<_>>>()?;
        let base = BaseGenConfig::new(schedule.base_dim(), ep, params.c_inw)?;
        Ok(Self { schedule, prps, base })
    }

    pub fn dim(&self) -> usize {
        self.schedule.levels[0]
    }

    /// Walk bits for each level followed by the base generator's bits.
    pub fn seed_length(&self) -> usize {
        self.prps.iter().map(PrpConfig::seed_bits).sum::<usize>() + self.base.seed_len
    }

    /// Reads the projections `P₀ … P_{t−1}` in order, then the base seed, and
    /// returns `P₀ᵀ ⋯ P_{t−1}ᵀ X_t`.
    pub fn generate(&self, stream: &mut SeedStream) -> Result<Vec<f64>> {
        self.check_budget(stream, self.seed_length())?;
        let prps = self
            .prps
            .iter()
            .map(|cfg| Prp::sample(cfg, stream))
            .collect::<Result<Vec<_>>>()?;
        let mut x = inw_generate(&self.base, stream)?;
        for p in prps.iter().rev() {
            x = p.apply_transpose(&x)?;
        }
        Ok(x)
    }

    fn check_budget(&self, stream: &SeedStream, need: usize) -> Result<()> {
        match stream.remaining() {
            Some(rem) if rem < need => Err(Error::StreamExhausted {
                requested: need,
                consumed: stream.bits_consumed(),
                budget: stream.bit_budget().unwrap_or(0),
            }),
            _ => Ok(()),
        }
    }
}

pub fn seed_length(n: usize, eps: f64, params: &Params) -> Result<usize> {
    Ok(SphereGenerator::new(n, eps, params)?.seed_length())
}

/// A unit vector in R^n.
pub fn generate(n: usize, eps: f64, params: &Params, stream: &mut SeedStream) -> Result<Vec<f64>> {
    SphereGenerator::new(n, eps, params)?.generate(stream)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiConfig {
    pub n: usize,
    pub delta: f64,
    pub grid_bits: u32,
}

impl ChiConfig {
    /// Grid of `⌈log₂(1/δ)⌉` bits, the fewest with `2^{−b} ≤ δ`.
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!("δ must lie in (0,1), got {delta}")));
        }
        let mut b = (1.0 / delta).log2().ceil().max(1.0) as u32;
        while b > 1 && 2f64.powi(-(b as i32 - 1)) <= delta {
            b -= 1;
        }
        Self::with_bits(n, delta, b)
    }

    pub fn with_bits(n: usize, delta: f64, grid_bits: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("χ_n needs n ≥ 1".into()));
        }
        if grid_bits == 0 || grid_bits > 52 {
            return Err(Error::InvalidArgument(format!("grid bits must be in 1..=52, got {grid_bits}")));
        }
        if 2f64.powi(-(grid_bits as i32)) > delta {
            return Err(Error::InvalidArgument(format!("2^-{grid_bits} exceeds δ = {delta}")));
        }
        Ok(Self { n, delta, grid_bits })
    }

    /// Atom `j` of the discretized law: the χ_n quantile at `(j + ½)/2^b`.
    pub fn atom(&self, j: u64) -> Result<f64> {
        let p = (j as f64 + 0.5) / 2f64.powi(self.grid_bits as i32);
        chi_quantile(self.n, p, CHI_TOL)
    }

    pub fn atoms(&self) -> Result<Vec<f64>> {
        (0..1u64 << self.grid_bits).map(|j| self.atom(j)).collect()
    }
}

/// Reads `b` bits as an index and returns that atom.
pub fn chi_discretize(config: &ChiConfig, stream: &mut SeedStream) -> Result<f64> {
    let j = stream.read_bits(config.grid_bits as usize)?;
    config.atom(j)
}

/// The Gaussian generator: a sphere point at error `ε/2` scaled by a χ_n
/// radius discretized at `δ = ε/2`.
#[derive(Debug, Clone)]
pub struct GaussianGenerator {
    pub sphere: SphereGenerator,
    pub chi: ChiConfig,
}

impl GaussianGenerator {
    pub fn new(n: usize, eps: f64, params: &Params) -> Result<Self> {
        Ok(Self {
            sphere: SphereGenerator::new(n, eps / 2.0, params)?,
            chi: ChiConfig::new(n, eps / 2.0)?,
        })
    }

    pub fn seed_length(&self) -> usize {
        self.sphere.seed_length() + self.chi.grid_bits as usize
    }

    /// Sphere bits first, then the radius bits.
    pub fn generate(&self, stream: &mut SeedStream) -> Result<Vec<f64>> {
        self.sphere.check_budget(stream, self.seed_length())?;
        let x = self.sphere.generate(stream)?;
        let r = chi_discretize(&self.chi, stream)?;
        Ok(x.into_iter().map(|v| v * r).collect())
    }
}

pub fn gaussian_seed_length(n: usize, eps: f64, params: &Params) -> Result<usize> {
    Ok(GaussianGenerator::new(n, eps, params)?.seed_length())
}

pub fn gaussian_generate(n: usize, eps: f64, params: &Params, stream: &mut SeedStream) -> Result<Vec<f64>> {
    GaussianGenerator::new(n, eps, params)?.generate(stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_gen::inw_seed_length;

    #[test]
    fn small_n_has_no_ladder() {
        let p = Params::default();
        for eps in [0.5, 0.1, 1e-6] {
            let s = make_schedule(16, eps, &p).unwrap();
            assert_eq!(s.level_count, 0);
            assert_eq!(s.levels, vec![16]);
            assert_eq!(seed_length(16, eps, &p).unwrap(), inw_seed_length(16, s.eps_prime, DEFAULT_INW_CONSTANT));
        }
    }

    #[test]
    fn ladder_for_two_to_the_32() {
        let s = make_schedule(1 << 32, 2f64.powi(-10), &Params::default()).unwrap();
        assert_eq!(s.levels, vec![1 << 32, 65536, 256]);
        assert_eq!(s.level_count, 2);
        assert!((s.level_count + 1) as f64 * s.eps_prime <= 2f64.powi(-10));
    }

    #[test]
    fn forced_floor() {
        let p = Params {
            floor: FloorPolicy::Fixed(4),
            ..Params::default()
        };
        let s = make_schedule(16, 0.25, &p).unwrap();
        assert_eq!(s.levels, vec![16, 4]);
        assert_eq!(s.eps_prime, 0.25 / 4.0);
        let s = make_schedule(17, 0.25, &p).unwrap();
        assert_eq!(s.levels, vec![17, 5, 3]);
    }

    #[test]
    fn generate_consumes_seed_length() {
        let p = Params::default();
        let g = SphereGenerator::new(300, 0.2, &p).unwrap();
        assert_eq!(g.schedule.level_count, 1);
        let mut s = SeedStream::from_hex("0123", None).unwrap();
        let x = g.generate(&mut s).unwrap();
        assert_eq!(x.len(), 300);
        assert_eq!(s.bits_consumed(), g.seed_length());
        assert!((crate::matrix::norm(&x) - 1.0).abs() < 1e-12);
        let mut short = SeedStream::from_hex("0123", Some(g.seed_length() - 1)).unwrap();
        assert!(g.generate(&mut short).unwrap_err().is_resource_limit());
    }

    #[test]
    fn chi_grid() {
        let c = ChiConfig::new(64, 0.1).unwrap();
        assert_eq!(c.grid_bits, 4);
        assert_eq!(ChiConfig::new(64, 0.125).unwrap().grid_bits, 3);
        let one = ChiConfig::with_bits(5, 0.5, 1).unwrap();
        let atoms = one.atoms().unwrap();
        assert!((crate::special::chi_cdf(5, atoms[0]) - 0.25).abs() < 1e-10);
        assert!((crate::special::chi_cdf(5, atoms[1]) - 0.75).abs() < 1e-10);
        assert!(ChiConfig::with_bits(5, 0.1, 2).is_err());
    }

    #[test]
    fn gaussian_norm_is_radius() {
        let g = GaussianGenerator::new(20, 0.3, &Params::default()).unwrap();
        let mut s = SeedStream::from_hex("77", None).unwrap();
        let x = g.generate(&mut s).unwrap();
        assert_eq!(s.bits_consumed(), g.seed_length());
        let r = crate::matrix::norm(&x);
        let atoms = g.chi.atoms().unwrap();
        assert!(atoms.iter().any(|a| (a - r).abs() < 1e-12 * a));
    }
}
