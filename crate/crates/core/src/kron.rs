//! Kronecker products and powers.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Real;

/// Default bound on the side length of a Kronecker power.
pub const DEFAULT_KRON_CAP: usize = 4096;

pub fn kron<T: Real>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let (br, bc) = (b.rows(), b.cols());
    Mat::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Side length `dimᵗ`, or an error when it exceeds `cap`.
pub fn kron_side(dim: usize, t: u32, cap: usize) -> Result<usize> {
    let side = (dim as u128).checked_pow(t);
    match side {
        Some(s) if s <= cap as u128 => Ok(s as usize),
        _ => Err(Error::CapExceeded {
            what: "Kronecker power side",
            required: side.unwrap_or(u128::MAX),
            cap: cap as u128,
        }),
    }
}

/// `M^{⊗t}` under the default cap. `t = 0` yields `[1]`.
pub fn kron_power<T: Real>(m: &Mat<T>, t: u32) -> Result<Mat<T>> {
    kron_power_capped(m, t, DEFAULT_KRON_CAP)
}

pub fn kron_power_capped<T: Real>(m: &Mat<T>, t: u32, cap: usize) -> Result<Mat<T>> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("Kronecker power of non-square matrix".into()));
    }
    kron_side(m.rows(), t, cap)?;
    let mut out = Mat::identity(1);
    for _ in 0..t {
        out = kron(&out, m);
    }
    Ok(out)
}
