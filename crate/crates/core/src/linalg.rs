//! Right pseudo-inverse and null-space projector for wide matrices.

use nalgebra::{Cholesky, DMatrix, Matrix6, SMatrix, SVector, Vector6, U6};

/// Smallest-to-largest singular value ratio below which the matrix is
/// treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-9;
/// Damping used once the matrix is rank deficient.
pub const DAMPING: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoInverse {
    pub matrix: DMatrix<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Set when the damped least-squares fallback was taken.
    pub rank_deficient: bool,
}

/// `Mᵀ(MMᵀ)⁻¹` for a full-row-rank `M`, otherwise `Mᵀ(MMᵀ + λ²I)⁻¹`.
pub fn right_pseudoinverse(m: &DMatrix<f64>) -> PseudoInverse {
    let rows = m.nrows();
    let gram = m * m.transpose();
    let eig = gram.clone().symmetric_eigen();
    let sigma_max = eig.eigenvalues.max().max(0.0).sqrt();
    let sigma_min = eig.eigenvalues.min().max(0.0).sqrt();
    let rank_deficient = !(sigma_min >= RANK_TOLERANCE * sigma_max) || sigma_max == 0.0;

    let system = if rank_deficient {
        gram + DMatrix::identity(rows, rows) * (DAMPING * DAMPING)
    } else {
        gram
    };
    // The Gram matrix is symmetric positive (semi)definite; damping makes it
    // definite, so Cholesky only fails on non-finite input.
    let inv = match system.clone().cholesky() {
        Some(c) => c.inverse(),
        None => system.try_inverse().unwrap_or_else(|| DMatrix::from_element(rows, rows, f64::NAN)),
    };
    PseudoInverse {
        matrix: m.transpose() * inv,
        sigma_min,
        sigma_max,
        rank_deficient,
    }
}

/// Orthogonal projector onto the null space of `m`, `I − M†M`, together with
/// the pseudo-inverse it was built from.
pub fn null_projector(m: &DMatrix<f64>) -> (DMatrix<f64>, PseudoInverse) {
    let pinv = right_pseudoinverse(m);
    let n = m.ncols();
    (DMatrix::identity(n, n) - &pinv.matrix * m, pinv)
}

/// Factorization of `MMᵀ` for a fixed-size `6 × N` matrix, applying `M†` and
/// `I − M†M` without forming either. Same tolerance and damping rules as
/// [`right_pseudoinverse`].
#[derive(Debug, Clone)]
pub struct GramFactor<const N: usize> {
    m: SMatrix<f64, 6, N>,
    chol: Option<Cholesky<f64, U6>>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank_deficient: bool,
}

impl<const N: usize> GramFactor<N> {
    pub fn new(m: &SMatrix<f64, 6, N>) -> Self {
        let gram: Matrix6<f64> = m * m.transpose();
        let eig = gram.symmetric_eigenvalues();
        let sigma_max = eig.max().max(0.0).sqrt();
        let sigma_min = eig.min().max(0.0).sqrt();
        let rank_deficient = !(sigma_min >= RANK_TOLERANCE * sigma_max) || sigma_max == 0.0;
        let system = if rank_deficient { gram + Matrix6::identity() * (DAMPING * DAMPING) } else { gram };
        Self { m: *m, chol: system.cholesky(), sigma_min, sigma_max, rank_deficient }
    }

    /// `M† v`.
    pub fn pinv_apply(&self, v: &Vector6<f64>) -> SVector<f64, N> {
        match &self.chol {
            Some(c) => self.m.transpose() * c.solve(v),
            None => SVector::from_element(f64::NAN),
        }
    }

    /// `(I − M†M) v`.
    pub fn project(&self, v: &SVector<f64, N>) -> SVector<f64, N> {
        v - self.pinv_apply(&(self.m * v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn wide(entries: Vec<f64>) -> DMatrix<f64> {
        DMatrix::from_row_slice(6, 18, &entries)
    }

    #[test]
    fn selector_matrix() {
        let mut m = DMatrix::zeros(3, 6);
        m.view_mut((0, 0), (3, 3)).fill_with_identity();
        let p = right_pseudoinverse(&m);
        let mut expected = DMatrix::zeros(6, 3);
        expected.view_mut((0, 0), (3, 3)).fill_with_identity();
        assert_relative_eq!(p.matrix, expected, epsilon = 1e-15);
        assert!(!p.rank_deficient);
    }

    #[test]
    fn zeroed_row_takes_damped_path() {
        let mut m = DMatrix::from_fn(6, 18, |i, j| ((i * 18 + j) as f64 * 0.37).sin());
        m.row_mut(4).fill(0.0);
        let p = right_pseudoinverse(&m);
        assert!(p.rank_deficient);
        assert!(p.matrix.iter().all(|v| v.is_finite()));
    }

    proptest! {
        #[test]
        fn pseudo_inverse_and_projector(
            entries in proptest::collection::vec(-1.0..1.0f64, 108),
            v in proptest::collection::vec(-10.0..10.0f64, 18),
        ) {
            let m = wide(entries);
            let (p, pinv) = null_projector(&m);
            prop_assume!(pinv.sigma_min > 1e-3);
            let ident = &m * &pinv.matrix;
            prop_assert!((ident - DMatrix::<f64>::identity(6, 6)).abs().max() < 1e-9);

            let v = nalgebra::DVector::from_vec(v);
            prop_assert!((&m * &p * &v).norm() <= 1e-9 * v.norm());
            prop_assert!((&p * &p - &p).abs().max() < 1e-9);
            prop_assert!((&p - p.transpose()).abs().max() < 1e-9);
            prop_assert!((p.trace() - 12.0).abs() < 1e-6);
        }

        #[test]
        fn gram_factor_matches_dense_path(
            entries in proptest::collection::vec(-1.0..1.0f64, 108),
            v in proptest::collection::vec(-10.0..10.0f64, 18),
            e in proptest::collection::vec(-10.0..10.0f64, 6),
        ) {
            let m = wide(entries);
            let (p, pinv) = null_projector(&m);
            prop_assume!(pinv.sigma_min > 1e-3);
            let fixed = SMatrix::<f64, 6, 18>::from_iterator(m.iter().copied());
            let g = GramFactor::new(&fixed);
            prop_assert!((g.sigma_min - pinv.sigma_min).abs() < 1e-12);
            prop_assert!(!g.rank_deficient);

            let v18 = SVector::<f64, 18>::from_vec(v.clone());
            let dense = &p * nalgebra::DVector::from_vec(v);
            prop_assert!(g.project(&v18).iter().zip(dense.iter()).all(|(a, b)| (a - b).abs() < 1e-9));

            let e6 = Vector6::from_vec(e.clone());
            let dense = &pinv.matrix * nalgebra::DVector::from_vec(e);
            prop_assert!(g.pinv_apply(&e6).iter().zip(dense.iter()).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn gram_factor_zero_matrix_is_finite() {
        let g = GramFactor::new(&SMatrix::<f64, 6, 18>::zeros());
        assert!(g.rank_deficient);
        assert!(g.pinv_apply(&Vector6::repeat(1.0)).iter().all(|x| *x == 0.0));
    }
}
