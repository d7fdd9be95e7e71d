//! Verification harness for the capgen generators: cap-discrepancy
//! campaigns, moment and design audits, bound tables, a max-cut rounding
//! demo, and the JSON run configuration.

pub mod audit;
pub mod bounds;
pub mod caps;
pub mod config;
pub mod error;
pub mod gw;
pub mod soundness;

pub use error::{HarnessError, EXIT_RESOURCE, EXIT_VALIDATION};
