//! Distributions and bounds behind the projection analysis: the law of one
//! coordinate of a uniform sphere point, Beta-law moments of squared
//! projection lengths, the explicit moment-to-CDF distance bound, and
//! Kolmogorov distances.

mod beta;
mod bound;
mod dist;
mod zlaw;

pub use beta::{
    beta_moments, beta_raw_moments, central_moment_decay_check, central_moments_exact,
    beta_variance_exact, central_moment_decay_check_with_dim, BetaMoments, DecayCheck,
    MomentProfile,
};
pub use bound::{
    cdf_bound, derivative_bracket, km_bound, uniform_cdf_bound, zeta, Branch, CdfBound,
    CdfBoundInputs,
};
pub use dist::{
    dcdf_against, discrete_dcdf, ks_critical_value, ks_distance, ks_one_sample, product_cdf,
    DiscreteLaw,
};
pub use zlaw::{
    cdf_derivative_sup, z_cdf, z_derivative_bound, z_norm_const, z_pdf, z_pdf_derivatives,
    z_quantile, z_tail_quantile, TailQuantile,
};
