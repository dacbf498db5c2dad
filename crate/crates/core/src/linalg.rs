//! Dense complex linear algebra helpers built on `nalgebra`'s SVD.

use nalgebra::{DMatrix, DVector, SVD};

use crate::scalar::{Cplx, Real};

/// Spectral norm (largest singular value).
pub fn spectral_norm<R: Real>(m: &DMatrix<Cplx<R>>) -> R {
    if m.is_empty() || m.iter().all(|v| v.re == R::zero() && v.im == R::zero()) {
        return R::zero();
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .fold(R::zero(), |a, b| a.max(*b))
}

/// Singular values (descending) together with a full set of right singular
/// vectors, also for wide matrices.
#[derive(Debug, Clone)]
pub struct Decomposition<R: Real> {
    svd: SVD<Cplx<R>, nalgebra::Dyn, nalgebra::Dyn>,
    rows: usize,
    cols: usize,
    singular_values: Vec<R>,
}

impl<R: Real> Decomposition<R> {
    pub fn new(m: &DMatrix<Cplx<R>>) -> Self {
        let (rows, cols) = m.shape();
        // Zero rows leave the singular values unchanged and make V square.
        let padded = if rows < cols {
            let mut p = DMatrix::zeros(cols, cols);
            p.view_mut((0, 0), (rows, cols)).copy_from(m);
            p
        } else {
            m.clone()
        };
        let svd = SVD::new(padded, true, true);
        let mut singular_values: Vec<R> = svd.singular_values.iter().copied().collect();
        singular_values.truncate(rows.min(cols));
        Self {
            svd,
            rows,
            cols,
            singular_values,
        }
    }

    /// The `min(rows, cols)` singular values, largest first.
    pub fn singular_values(&self) -> &[R] {
        &self.singular_values
    }

    pub fn sigma_max(&self) -> R {
        self.singular_values.first().copied().unwrap_or_else(R::zero)
    }

    pub fn sigma_min(&self) -> R {
        self.singular_values.last().copied().unwrap_or_else(R::zero)
    }

    /// `max(relative·σ_max, floor)`.
    pub fn threshold(&self, relative: R, floor: R) -> R {
        (relative * self.sigma_max()).max(floor)
    }

    pub fn rank(&self, threshold: R) -> usize {
        self.singular_values.iter().filter(|s| **s > threshold).count()
    }

    /// Orthonormal basis of the numerical null space, ordered by singular value.
    pub fn null_space(&self, threshold: R) -> Vec<DVector<Cplx<R>>> {
        let rank = self.rank(threshold);
        let v_t = self.svd.v_t.as_ref().expect("V computed");
        (rank..self.cols).map(|i| v_t.row(i).adjoint().into_owned()).collect()
    }

    /// Minimum-norm least-squares solution, treating singular values at or
    /// below `threshold` as zero.
    pub fn solve(&self, rhs: &DVector<Cplx<R>>, threshold: R) -> DVector<Cplx<R>> {
        let mut padded = DVector::zeros(self.rows.max(self.cols));
        padded.rows_mut(0, self.rows).copy_from(rhs);
        self.svd
            .solve(&padded, threshold)
            .expect("U and V computed, threshold non-negative")
    }
}
