//! Moment audits of the pseudorandom projection and design-quality reports.

use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use capgen_core::haar::uniform_sphere;
use capgen_core::moments::beta_moments;
use capgen_core::orth_design::{
    design_deviation, required_walk_length, DesignConfig, WalkSource, DEFAULT_HAAR_SAMPLES,
};
use capgen_core::pipeline::Params;
use capgen_core::prp::{MomentOrder, Prp, PrpConfig};
use capgen_core::{Error, Result, SeedStream};

#[derive(Debug, Clone, Serialize)]
pub struct AuditRow {
    pub j: usize,
    /// `E[Xʲ]` for `X ~ Beta(m̃/2, (m−m̃)/2)`.
    pub oracle: f64,
    /// Empirical `E[‖Pw‖^{2j}]` over sampled projections.
    pub design: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentAudit {
    pub m: usize,
    pub m_tilde: usize,
    pub k_mom: usize,
    pub walk_length: usize,
    pub samples: usize,
    pub rows: Vec<AuditRow>,
}

#[derive(Debug, Clone)]
pub struct AuditSpec {
    pub m: usize,
    pub m_tilde: usize,
    pub k_mom: usize,
    pub eps: f64,
    /// Overrides the walk length derived from `(4·k_mom, m, ε, c_q)`.
    pub walk_length: Option<usize>,
    pub samples: usize,
    pub master: Vec<u8>,
    /// Seeds the fixed test direction `w`.
    pub direction_seed: u64,
}

/// Compares moments `j = 1..=2·k_mom` of `‖Pw‖²` under the design-driven
/// projection with the Beta law of a uniform projection.
pub fn moment_audit(spec: &AuditSpec, params: &Params) -> Result<MomentAudit> {
    if spec.samples == 0 {
        return Err(Error::InvalidArgument("zero design samples".into()));
    }
    let gens = params.generators(spec.m)?;
    let degree = 4 * spec.k_mom;
    let q = spec
        .walk_length
        .unwrap_or_else(|| required_walk_length(degree, spec.m, spec.eps, params.c_q));
    let design = DesignConfig::with_walk_length(gens, q, degree, spec.eps)?;
    let order = MomentOrder {
        k: spec.k_mom,
        raw: None,
        clamped: false,
    };
    let cfg = PrpConfig::from_design(spec.m, spec.m_tilde, order, design, spec.eps)?;
    let p = 2 * spec.k_mom;
    let oracle = beta_moments(spec.m, spec.m_tilde, p)?.raw;

    let w = uniform_sphere(spec.m, &mut StdRng::seed_from_u64(spec.direction_seed));
    let per_sample: Vec<f64> = (0..spec.samples as u64)
        .into_par_iter()
        .map(|i| {
            let prp = Prp::sample(&cfg, &mut SeedStream::derived(&spec.master, i))?;
            let y = prp.apply(&w)?;
            Ok(y.iter().map(|v| v * v).sum::<f64>())
        })
        .collect::<Result<_>>()?;
    let rows = (1..=p)
        .map(|j| {
            let design = per_sample.iter().map(|x| x.powi(j as i32)).sum::<f64>() / spec.samples as f64;
            AuditRow {
                j,
                oracle: oracle[j],
                design,
                diff: (design - oracle[j]).abs(),
            }
        })
        .collect();
    Ok(MomentAudit {
        m: spec.m,
        m_tilde: spec.m_tilde,
        k_mom: spec.k_mom,
        walk_length: q,
        samples: spec.samples,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignAudit {
    pub dim: usize,
    pub degree: usize,
    pub walk_length: usize,
    pub generators: usize,
    pub deviation: f64,
    pub std_err: f64,
    pub samples: usize,
    pub haar_samples: usize,
}

/// Deviation of the walk design from Haar in degree `degree`.
pub fn design_report(
    dim: usize,
    degree: usize,
    walk_length: usize,
    samples: usize,
    params: &Params,
    master: &[u8],
) -> Result<DesignAudit> {
    let gens = params.generators(dim)?;
    let k = gens.len();
    // The design's own ε only feeds the default walk length, overridden here.
    let cfg = DesignConfig::with_walk_length(gens, walk_length, degree, 0.5)?;
    let source = WalkSource::Derived {
        master: master.to_vec(),
        count: samples,
    };
    let haar = DEFAULT_HAAR_SAMPLES.min(samples.max(1) * 16);
    let r = design_deviation(&cfg, degree, &source, haar, 0x4841_4152)?;
    Ok(DesignAudit {
        dim,
        degree,
        walk_length,
        generators: k,
        deviation: r.deviation,
        std_err: r.std_err,
        samples: r.samples,
        haar_samples: r.haar_samples,
    })
}
