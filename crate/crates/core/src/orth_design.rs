//! Approximate orthogonal designs sampled as random walks over a fixed,
//! inverse-closed set of rotations.

use std::sync::{Arc, OnceLock};

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::haar::haar_rotation;
use crate::kron::{kron_power_capped, kron_side, DEFAULT_KRON_CAP};
use crate::matrix::{Mat, MatrixJson, RotationMatrix, ORTHONORMAL_TOL};
use crate::seed::{index_bits, SeedStream};
use crate::spectral::spectral_norm;

/// Walk-length constant in `q = ⌈c_q·(t·log₂ dim + log₂(1/ε))⌉`.
pub const DEFAULT_WALK_CONSTANT: f64 = 4.0;
/// Products of more factors than this are re-orthonormalized once.
pub const REORTHONORMALIZE_AFTER: usize = 8;
/// Default number of Haar draws when the exact Haar moment is unavailable.
pub const DEFAULT_HAAR_SAMPLES: usize = 1_000_000;

// cos θ = 3/5, sin θ = 4/5, and the double angle.
const COS: f64 = 0.6;
const SIN: f64 = 0.8;
const COS2: f64 = -0.28;
const SIN2: f64 = 0.96;

/// A rotation by angle `φ` in the `(i, j)` coordinate plane:
/// `x_i ← c·x_i − s·x_j`, `x_j ← s·x_i + c·x_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Givens {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub s: f64,
}

impl Givens {
    #[inline]
    pub fn apply(&self, x: &mut [f64]) {
        let (a, b) = (x[self.i], x[self.j]);
        x[self.i] = self.c * a - self.s * b;
        x[self.j] = self.s * a + self.c * b;
    }

    #[inline]
    pub fn apply_transpose(&self, x: &mut [f64]) {
        let (a, b) = (x[self.i], x[self.j]);
        x[self.i] = self.c * a + self.s * b;
        x[self.j] = -self.s * a + self.c * b;
    }

    /// `m ← m · G`, touching columns `i` and `j` only.
    fn right_multiply(&self, m: &mut Mat<f64>) {
        for r in 0..m.rows() {
            let (a, b) = (m[(r, self.i)], m[(r, self.j)]);
            m[(r, self.i)] = a * self.c + b * self.s;
            m[(r, self.j)] = -a * self.s + b * self.c;
        }
    }

    pub fn to_matrix(&self, dim: usize) -> Mat<f64> {
        let mut m = Mat::identity(dim);
        m[(self.i, self.i)] = self.c;
        m[(self.i, self.j)] = -self.s;
        m[(self.j, self.i)] = self.s;
        m[(self.j, self.j)] = self.c;
        m
    }
}

/// `B·S`: a signed permutation `S` followed by a butterfly `B` of
/// rotations by `θ`, one layer per bit, pairing `i` with `i + 2^ℓ` for every
/// `i` whose bit `ℓ` is clear.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterfly {
    /// `(S x)_i = sign_i · x_{perm_i}`.
    perm: Vec<u32>,
    sign: Vec<f64>,
}

impl Butterfly {
    /// A signed permutation with determinant +1 drawn from `stream`.
    fn sample(dim: usize, stream: &mut SeedStream) -> Result<Self> {
        if dim > u32::MAX as usize {
            return Err(Error::Overflow(format!("dimension {dim} too large for a permutation table")));
        }
        let mut perm: Vec<u32> = (0..dim as u32).collect();
        for i in (1..dim).rev() {
            let j = uniform_below(i as u64 + 1, stream)? as usize;
            perm.swap(i, j);
        }
        let mut sign = (0..dim)
            .map(|_| Ok(if stream.read_bits(1)? == 1 { -1.0 } else { 1.0 }))
            .collect::<Result<Vec<f64>>>()?;
        let negative = sign.iter().filter(|&&s| s < 0.0).count() % 2 == 1;
        if negative != (permutation_parity(&perm) == 1) {
            sign[0] = -sign[0];
        }
        Ok(Self { perm, sign })
    }

    fn layers(n: usize) -> impl DoubleEndedIterator<Item = usize> {
        (0..usize::BITS - (n.max(2) - 1).leading_zeros()).map(|l| 1usize << l)
    }

    fn apply(&self, x: &mut [f64]) {
        let y: Vec<f64> = self.perm.iter().zip(&self.sign).map(|(&p, s)| s * x[p as usize]).collect();
        x.copy_from_slice(&y);
        let n = x.len();
        for h in Self::layers(n) {
            for i in (0..n).filter(|i| i & h == 0 && i + h < n) {
                let (a, b) = (x[i], x[i + h]);
                x[i] = COS * a - SIN * b;
                x[i + h] = SIN * a + COS * b;
            }
        }
    }

    fn apply_transpose(&self, x: &mut [f64]) {
        let n = x.len();
        for h in Self::layers(n).rev() {
            for i in (0..n).filter(|i| i & h == 0 && i + h < n) {
                let (a, b) = (x[i], x[i + h]);
                x[i] = COS * a + SIN * b;
                x[i + h] = -SIN * a + COS * b;
            }
        }
        let mut y = vec![0.0; n];
        for ((&p, s), v) in self.perm.iter().zip(&self.sign).zip(x.iter()) {
            y[p as usize] = s * v;
        }
        x.copy_from_slice(&y);
    }
}

/// Uniform integer in `[0, bound)` by rejection on `⌈log₂ bound⌉`-bit reads.
fn uniform_below(bound: u64, stream: &mut SeedStream) -> Result<u64> {
    let bits = index_bits(bound as usize);
    loop {
        let v = stream.read_bits(bits)?;
        if v < bound {
            return Ok(v);
        }
    }
}

/// 0 for even permutations, 1 for odd.
fn permutation_parity(perm: &[u32]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut cycles = 0;
    for start in 0..perm.len() {
        if !seen[start] {
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = perm[i] as usize;
            }
        }
    }
    (perm.len() - cycles) % 2
}

/// Distinct butterflies in the default set for `dim ≥ 3`; with inverses the
/// set has `2·LAYERED_BASE` elements.
pub const LAYERED_BASE: usize = 4;
const LAYERED_DOMAIN: &[u8] = b"capgen default generator set";

#[derive(Debug, Clone)]
enum Kind {
    Planar,
    /// Tables are built on first use, so sizing a walk at huge `dim` stays cheap.
    Layered(Arc<OnceLock<Vec<Butterfly>>>),
    Explicit(Arc<Vec<RotationMatrix>>),
}

impl PartialEq for Kind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Kind::Planar, Kind::Planar) | (Kind::Layered(_), Kind::Layered(_)) => true,
            (Kind::Explicit(a), Kind::Explicit(b)) => a == b,
            _ => false,
        }
    }
}

/// An inverse-closed list of `k ≥ 2` rotations (k even) of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    dim: usize,
    len: usize,
    kind: Kind,
}

/// One generator: a plane rotation, a layered butterfly (or its inverse), or
/// a dense matrix.
#[derive(Debug, Clone, Copy)]
pub enum Generator<'a> {
    Givens(Givens),
    Layered { map: &'a Butterfly, inverse: bool },
    Dense(&'a RotationMatrix),
}

impl Generator<'_> {
    pub fn apply(&self, x: &mut [f64]) {
        match self {
            Generator::Givens(g) => g.apply(x),
            Generator::Layered { map, inverse: false } => map.apply(x),
            Generator::Layered { map, inverse: true } => map.apply_transpose(x),
            Generator::Dense(m) => {
                let y = m.matrix().matvec(x).expect("dimension checked by caller");
                x.copy_from_slice(&y);
            }
        }
    }

    pub fn apply_transpose(&self, x: &mut [f64]) {
        match self {
            Generator::Givens(g) => g.apply_transpose(x),
            Generator::Layered { map, inverse: false } => map.apply_transpose(x),
            Generator::Layered { map, inverse: true } => map.apply(x),
            Generator::Dense(m) => {
                let y = m.matrix().tr_matvec(x).expect("dimension checked by caller");
                x.copy_from_slice(&y);
            }
        }
    }

    pub fn to_matrix(&self, dim: usize) -> Mat<f64> {
        match self {
            Generator::Givens(g) => g.to_matrix(dim),
            Generator::Dense(m) => m.matrix().clone(),
            Generator::Layered { .. } => {
                // Column j is the image of e_j.
                let mut m = Mat::zeros(dim, dim);
                for j in 0..dim {
                    let mut e = vec![0.0; dim];
                    e[j] = 1.0;
                    self.apply(&mut e);
                    for (i, v) in e.into_iter().enumerate() {
                        m[(i, j)] = v;
                    }
                }
                m
            }
        }
    }
}

/// The built-in generator set for `dim ≥ 2`.
///
/// In the plane: rotations by `±θ` and `±2θ` with `cos θ = 3/5`. In higher
/// dimension: [`LAYERED_BASE`] maps `B·S_a` and their inverses, where `S_a`
/// is a fixed signed permutation of determinant +1 drawn from a SHA-256
/// stream and `B` rotates by `θ` in every plane `(i, i + 2^ℓ)` with bit `ℓ`
/// of `i` clear. Every generator moves every coordinate, so the set is
/// constant-size and a walk step costs 3 bits whatever the dimension.
pub fn default_generator_set(dim: usize) -> Result<GeneratorSet> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("generator set needs dim ≥ 2, got {dim}")));
    }
    Ok(if dim == 2 {
        GeneratorSet {
            dim,
            len: 4,
            kind: Kind::Planar,
        }
    } else {
        GeneratorSet {
            dim,
            len: 2 * LAYERED_BASE,
            kind: Kind::Layered(Arc::new(OnceLock::new())),
        }
    })
}

impl GeneratorSet {
    /// Validates and wraps an explicit list.
    pub fn explicit(generators: Vec<RotationMatrix>) -> Result<Self> {
        let k = generators.len();
        if k < 2 || k % 2 != 0 {
            return Err(Error::InvalidGeneratorSet(format!("need an even count ≥ 2, got {k}")));
        }
        let dim = generators[0].dim();
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::InvalidGeneratorSet(format!(
                "mixed dimensions {dim} and {}",
                g.dim()
            )));
        }
        if dim < 2 {
            return Err(Error::InvalidGeneratorSet("dimension must be at least 2".into()));
        }
        for (idx, g) in generators.iter().enumerate() {
            let inv = g.matrix().transpose();
            let closed = generators.iter().any(|h| {
                h.matrix()
                    .sub(&inv)
                    .map(|d| d.max_abs() <= ORTHONORMAL_TOL)
                    .unwrap_or(false)
            });
            if !closed {
                return Err(Error::InvalidGeneratorSet(format!(
                    "generator {idx} has no inverse in the set"
                )));
            }
        }
        Ok(Self {
            dim,
            len: k,
            kind: Kind::Explicit(Arc::new(generators)),
        })
    }

    /// Parses the JSON override format: `{"dim": n, "generators": [...]}` with
    /// each generator a flat row-major list, a list of rows, or a matrix object.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GeneratorFile =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let mut gens = Vec::with_capacity(file.generators.len());
        for (idx, g) in file.generators.into_iter().enumerate() {
            let m = g.into_matrix(file.dim).map_err(|e| {
                Error::InvalidGeneratorSet(format!("generator {idx}: {e}"))
            })?;
            gens.push(
                RotationMatrix::new(m)
                    .map_err(|e| Error::InvalidGeneratorSet(format!("generator {idx}: {e}")))?,
            );
        }
        let set = Self::explicit(gens)?;
        if set.dim != file.dim {
            return Err(Error::InvalidGeneratorSet("declared dim disagrees with matrices".into()));
        }
        Ok(set)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gens: Vec<Vec<f64>> = (0..self.len)
            .map(|i| self.get(i).to_matrix(self.dim).into_vec())
            .collect();
        serde_json::json!({ "dim": self.dim, "generators": gens })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators `k`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_default(&self) -> bool {
        !matches!(self.kind, Kind::Explicit(_))
    }

    fn tables<'a>(&self, cell: &'a OnceLock<Vec<Butterfly>>) -> &'a [Butterfly] {
        cell.get_or_init(|| {
            (0..LAYERED_BASE as u64)
                .map(|a| Butterfly::sample(self.dim, &mut SeedStream::derived(LAYERED_DOMAIN, a)))
                .collect::<Result<_>>()
                .expect("unbudgeted streams do not run out")
        })
    }

    /// Seed bits per walk step, `⌈log₂ k⌉`.
    pub fn bits_per_step(&self) -> usize {
        index_bits(self.len)
    }

    /// Generator `idx`, reduced modulo `k`.
    pub fn get(&self, idx: usize) -> Generator<'_> {
        let idx = idx % self.len;
        match &self.kind {
            Kind::Explicit(list) => Generator::Dense(&list[idx]),
            Kind::Planar => {
                let (c, s) = [(COS, SIN), (COS, -SIN), (COS2, SIN2), (COS2, -SIN2)][idx];
                Generator::Givens(Givens { i: 0, j: 1, c, s })
            }
            Kind::Layered(cell) => Generator::Layered {
                map: &self.tables(cell)[idx / 2],
                inverse: idx % 2 == 1,
            },
        }
    }

    /// Index of the inverse of generator `idx`.
    pub fn inverse_index(&self, idx: usize) -> usize {
        match &self.kind {
            Kind::Planar | Kind::Layered(_) => idx ^ 1,
            Kind::Explicit(list) => {
                let inv = list[idx].matrix().transpose();
                list.iter()
                    .position(|h| {
                        h.matrix()
                            .sub(&inv)
                            .map(|d| d.max_abs() <= ORTHONORMAL_TOL)
                            .unwrap_or(false)
                    })
                    .expect("inverse closure validated at construction")
            }
        }
    }
}

#[derive(Deserialize)]
struct GeneratorFile {
    dim: usize,
    generators: Vec<GeneratorEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GeneratorEntry {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
    Object(MatrixJson),
}

impl GeneratorEntry {
    fn into_matrix(self, dim: usize) -> Result<Mat<f64>> {
        let m = match self {
            GeneratorEntry::Flat(v) => Mat::from_vec(dim, dim, v)?,
            GeneratorEntry::Rows(rows) => {
                if rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: rows.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0),
                    });
                }
                Mat::from_vec(rows.len(), dim, rows.concat())?
            }
            GeneratorEntry::Object(j) => Mat::try_from(j)?,
        };
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: m.rows(),
            });
        }
        Ok(m)
    }
}

/// `⌈c_q·(t·log₂ dim + log₂(1/ε))⌉`, at least 1.
pub fn required_walk_length(t: usize, dim: usize, eps: f64, c_q: f64) -> usize {
    let raw = c_q * (t as f64 * (dim as f64).log2() + (1.0 / eps).log2());
    // Shave rounding noise so exact integers are not pushed up by one.
    let q = (raw - 1e-9 * raw.abs().max(1.0)).ceil();
    (q.max(1.0)) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub generators: GeneratorSet,
    pub walk_length: usize,
    pub degree: usize,
    pub eps: f64,
    /// Permits `walk_length = 0` (the identity design); testing only.
    pub allow_empty_walk: bool,
}

impl DesignConfig {
    /// Walk length from [`required_walk_length`].
    pub fn new(generators: GeneratorSet, degree: usize, eps: f64, c_q: f64) -> Result<Self> {
        let q = required_walk_length(degree, generators.dim(), eps, c_q);
        Self::with_walk_length(generators, q, degree, eps)
    }

    pub fn with_walk_length(
        generators: GeneratorSet,
        walk_length: usize,
        degree: usize,
        eps: f64,
    ) -> Result<Self> {
        let cfg = Self {
            generators,
            walk_length,
            degree,
            eps,
            allow_empty_walk: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// A config with `q = 0`, whose only sample is the identity.
    pub fn empty_walk_for_testing(generators: GeneratorSet, degree: usize, eps: f64) -> Self {
        Self {
            generators,
            walk_length: 0,
            degree,
            eps,
            allow_empty_walk: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.walk_length == 0 && !self.allow_empty_walk {
            return Err(Error::InvalidArgument("walk length must be at least 1".into()));
        }
        if self.degree == 0 {
            return Err(Error::InvalidArgument("design degree must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidArgument(format!("ε must lie in (0,1), got {}", self.eps)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.generators.dim()
    }

    /// Seed bits per sample, `q·⌈log₂ k⌉`.
    pub fn seed_bits(&self) -> usize {
        self.walk_length * self.generators.bits_per_step()
    }
}

/// A word `g_{i₁}·g_{i₂}⋯g_{i_q}` in the generators; `i₁` is read first.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    generators: GeneratorSet,
    indices: Vec<usize>,
}

impl Walk {
    pub fn new(generators: GeneratorSet, indices: Vec<usize>) -> Self {
        Self { generators, indices }
    }

    /// Reads `q` indices of `⌈log₂ k⌉` bits each.
    pub fn sample(config: &DesignConfig, stream: &mut SeedStream) -> Result<Self> {
        config.validate()?;
        let bits = config.generators.bits_per_step();
        if let Some(rem) = stream.remaining() {
            let need = config.seed_bits();
            if rem < need {
                return Err(Error::StreamExhausted {
                    requested: need,
                    consumed: stream.bits_consumed(),
                    budget: stream.bit_budget().unwrap_or(0),
                });
            }
        }
        let k = config.generators.len() as u64;
        let indices = (0..config.walk_length)
            .map(|_| stream.read_bits(bits).map(|b| (b % k) as usize))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(config.generators.clone(), indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.generators.dim()
    }

    /// `W·x` in place.
    pub fn apply(&self, x: &mut [f64]) -> Result<()> {
        self.check_len(x.len())?;
        for &i in self.indices.iter().rev() {
            self.generators.get(i).apply(x);
        }
        Ok(())
    }

    /// `Wᵀ·x` in place.
    pub fn apply_transpose(&self, x: &mut [f64]) -> Result<()> {
        self.check_len(x.len())?;
        for &i in &self.indices {
            self.generators.get(i).apply_transpose(x);
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: len,
            });
        }
        Ok(())
    }

    /// The dense product.
    pub fn to_matrix(&self) -> Result<RotationMatrix> {
        let n = self.dim();
        let mut m = Mat::identity(n);
        for &i in &self.indices {
            match self.generators.get(i) {
                Generator::Givens(g) => g.right_multiply(&mut m),
                Generator::Dense(g) => m = m.matmul(g.matrix())?,
                // Row r of m·g is gᵀ applied to row r.
                g @ Generator::Layered { .. } => {
                    for r in 0..n {
                        g.apply_transpose(m.row_mut(r));
                    }
                }
            }
        }
        if self.indices.len() > REORTHONORMALIZE_AFTER {
            m.orthonormalize_rows()?;
        }
        RotationMatrix::new(m)
    }
}

/// One design sample: the product of `q` seed-indexed generators.
pub fn walk_sample(config: &DesignConfig, stream: &mut SeedStream) -> Result<RotationMatrix> {
    Walk::sample(config, stream)?.to_matrix()
}

/// Where design samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum WalkSource {
    /// Every word of length `q`; needs `q·⌈log₂ k⌉ ≤ 24`.
    Exhaustive,
    /// `count` independent streams derived from `master`.
    Derived { master: Vec<u8>, count: usize },
}

/// Largest exhaustive enumeration, in seed bits.
pub const MAX_EXHAUSTIVE_BITS: usize = 24;

impl WalkSource {
    pub fn streams(&self, seed_bits: usize) -> Result<Box<dyn Iterator<Item = SeedStream> + '_>> {
        match self {
            WalkSource::Exhaustive => {
                if seed_bits > MAX_EXHAUSTIVE_BITS {
                    return Err(Error::CapExceeded {
                        what: "exhaustive seed bits",
                        required: seed_bits as u128,
                        cap: MAX_EXHAUSTIVE_BITS as u128,
                    });
                }
                Ok(Box::new(
                    (0..1u64 << seed_bits).map(move |i| SeedStream::from_bits(i, seed_bits)),
                ))
            }
            WalkSource::Derived { master, count } => Ok(Box::new(
                (0..*count as u64).map(move |i| SeedStream::derived(master, i)),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    /// `‖mean of g^{⊗d} − E_Haar[g^{⊗d}]‖`.
    pub deviation: f64,
    /// Monte-Carlo standard error: root of the summed per-entry variances of
    /// both means.
    pub std_err: f64,
    pub samples: usize,
    pub haar_samples: usize,
}

/// Spectral-norm distance between the design's and Haar's degree-`d` moment
/// operators. Degree 1 uses the exact Haar value 0.
pub fn design_deviation(
    config: &DesignConfig,
    degree: usize,
    source: &WalkSource,
    haar_samples: usize,
    haar_seed: u64,
) -> Result<DeviationReport> {
    if degree == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let side = kron_side(config.dim(), degree as u32, DEFAULT_KRON_CAP)?;
    let mut walk = MeanAccumulator::new(side);
    for mut stream in source.streams(config.seed_bits())? {
        let g = walk_sample(config, &mut stream)?;
        walk.add(&kron_power_capped(g.matrix(), degree as u32, DEFAULT_KRON_CAP)?);
    }
    if walk.count == 0 {
        return Err(Error::InvalidArgument("zero design samples".into()));
    }
    let (haar_mean, haar_var, haar_count) = if degree == 1 {
        (Mat::zeros(side, side), 0.0, 0)
    } else {
        if haar_samples == 0 {
            return Err(Error::InvalidArgument("zero Haar samples".into()));
        }
        let (mean, var) = haar_moment(config.dim(), degree, haar_samples, haar_seed)?;
        (mean, var, haar_samples)
    };
    let diff = walk.mean().sub(&haar_mean)?;
    let deviation = spectral_norm(&diff, 1e-10)?;
    Ok(DeviationReport {
        deviation,
        std_err: (walk.total_variance() / walk.count as f64 + haar_var).sqrt(),
        samples: walk.count,
        haar_samples: haar_count,
    })
}

/// Monte-Carlo `E_Haar[g^{⊗d}]` with the variance of the estimate summed over
/// entries.
pub fn haar_moment(dim: usize, degree: usize, samples: usize, seed: u64) -> Result<(Mat<f64>, f64)> {
    let side = kron_side(dim, degree as u32, DEFAULT_KRON_CAP)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut acc = MeanAccumulator::new(side);
    for _ in 0..samples {
        let g = haar_rotation(dim, &mut rng)?;
        acc.add(&kron_power_capped(g.matrix(), degree as u32, DEFAULT_KRON_CAP)?);
    }
    let var = acc.total_variance() / samples.max(1) as f64;
    Ok((acc.mean(), var))
}

struct MeanAccumulator {
    sum: Mat<f64>,
    sum_sq: Mat<f64>,
    count: usize,
}

impl MeanAccumulator {
    fn new(side: usize) -> Self {
        Self {
            sum: Mat::zeros(side, side),
            sum_sq: Mat::zeros(side, side),
            count: 0,
        }
    }

    fn add(&mut self, m: &Mat<f64>) {
        for ((s, q), &x) in self
            .sum
            .as_mut_slice()
            .iter_mut()
            .zip(self.sum_sq.as_mut_slice())
            .zip(m.as_slice())
        {
            *s += x;
            *q += x * x;
        }
        self.count += 1;
    }

    fn mean(&self) -> Mat<f64> {
        self.sum.scale(1.0 / self.count.max(1) as f64)
    }

    /// Sum over entries of the sample variance.
    fn total_variance(&self) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return 0.0;
        }
        self.sum
            .as_slice()
            .iter()
            .zip(self.sum_sq.as_slice())
            .map(|(&s, &q)| ((q - s * s / n) / (n - 1.0)).max(0.0))
            .sum()
    }
}

/// A fitted geometric decay `deviation ≈ C·λ^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub lambda: f64,
    pub method: DecayFitMethod,
    /// Walk lengths whose deviation cleared the noise threshold.
    pub points_used: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayFitMethod {
    /// Least squares on `ln deviation` against `q`.
    LeastSquares,
    /// Fewer than two points cleared the noise threshold, so `λ` is bounded
    /// by `min_q (deviation_q + 2σ_q)^{1/q}`.
    NoiseLimited,
}

/// Fits the decay rate from `(q, deviation, std_err)` triples, using only
/// points above twice their standard error.
pub fn fit_decay_rate(points: &[(usize, f64, f64)]) -> Result<DecayFit> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points to fit".into()));
    }
    let used: Vec<_> = points
        .iter()
        .filter(|(q, d, se)| *q > 0 && *d > 2.0 * se && *d > 0.0)
        .collect();
    if used.len() >= 2 {
        let n = used.len() as f64;
        let mx = used.iter().map(|p| p.0 as f64).sum::<f64>() / n;
        let my = used.iter().map(|p| p.1.ln()).sum::<f64>() / n;
        let sxy: f64 = used.iter().map(|p| (p.0 as f64 - mx) * (p.1.ln() - my)).sum();
        let sxx: f64 = used.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
        if sxx > 0.0 {
            return Ok(DecayFit {
                lambda: (sxy / sxx).exp(),
                method: DecayFitMethod::LeastSquares,
                points_used: used.iter().map(|p| p.0).collect(),
            });
        }
    }
    let lambda = points
        .iter()
        .filter(|p| p.0 > 0)
        .map(|&(q, d, se)| (d + 2.0 * se).powf(1.0 / q as f64))
        .fold(f64::INFINITY, f64::min);
    Ok(DecayFit {
        lambda,
        method: DecayFitMethod::NoiseLimited,
        points_used: used.iter().map(|p| p.0).collect(),
    })
}
