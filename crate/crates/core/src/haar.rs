//! Haar-distributed rotations and projections, used as testing oracles.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{Mat, ProjectionMatrix, RotationMatrix};

fn gaussian_mat<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// A Haar-random element of SO(dim).
///
/// Gram–Schmidt on the rows of a Gaussian matrix gives Haar measure on O(dim)
/// because the implied triangular factor has a positive diagonal. Negating the
/// first row of the orientation-reversing half maps it onto SO(dim) while
/// keeping invariance.
pub fn haar_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<RotationMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    loop {
        let mut g = gaussian_mat(dim, dim, rng);
        if g.orthonormalize_rows().is_err() {
            continue;
        }
        if g.det()? < 0.0 {
            for x in g.row_mut(0) {
                *x = -*x;
            }
        }
        return RotationMatrix::new(g);
    }
}

/// The first `m` rows of a Haar rotation of R^n.
pub fn haar_rows<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<ProjectionMatrix> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("cannot take {m} rows in dimension {n}")));
    }
    loop {
        let mut g = gaussian_mat(m, n, rng);
        if g.orthonormalize_rows().is_ok() {
            return ProjectionMatrix::new(g);
        }
    }
}

/// A uniform point on the unit sphere of R^n.
pub fn uniform_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    assert!(n > 0, "sphere dimension must be positive");
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let r = crate::matrix::norm(&v);
        if r > 1e-300 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn dim_one_is_trivial() {
        let mut rng = StdRng::seed_from_u64(1);
        let r = haar_rotation(1, &mut rng).unwrap();
        assert_eq!(r.matrix().as_slice(), &[1.0]);
        assert!(haar_rotation(0, &mut rng).is_err());
    }

    #[test]
    fn rows_are_orthonormal() {
        let mut rng = StdRng::seed_from_u64(2);
        let p = haar_rows(3, 7, &mut rng).unwrap();
        assert!(p.matrix().gram_deviation() < 1e-12);
        assert!(haar_rows(8, 7, &mut rng).is_err());
    }

    #[test]
    fn sphere_points_have_unit_norm() {
        let mut rng = StdRng::seed_from_u64(3);
        for n in [1, 2, 9] {
            let v = uniform_sphere(n, &mut rng);
            assert!((crate::matrix::norm(&v) - 1.0).abs() < 1e-14);
        }
    }
}
