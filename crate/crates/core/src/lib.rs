//! Seeded pseudorandom generators for spherical caps and Gaussian halfspaces.
//!
//! The sphere generator composes pseudorandom projections: a short seed drives
//! random walks over a fixed set of rotations, the top rows of each walk
//! product project a vector down to roughly the square root of its
//! dimension, and a small base generator supplies the point at the bottom of
//! the ladder. Mapping that point back up through the transposed projections
//! yields a unit vector in the full dimension.

pub mod base_gen;
pub mod error;
pub mod gf2;
pub mod haar;
pub mod kron;
pub mod matrix;
pub mod moments;
pub mod pipeline;
pub mod orth_design;
pub mod prp;
pub mod quad;
pub mod scalar;
pub mod seed;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::{Mat, ProjectionMatrix, RotationMatrix};
pub use scalar::{Real, Scalar};
pub use seed::SeedStream;

/// Double-precision dense matrix.
pub type Matrix = Mat<f64>;
/// Single-precision dense matrix.
pub type Matrix32 = Mat<f32>;
