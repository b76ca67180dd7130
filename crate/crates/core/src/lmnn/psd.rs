//! Symmetric eigendecomposition (cyclic Jacobi) and projection onto the
//! positive semidefinite cone.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues and column eigenvectors of a symmetric matrix, so that
/// `A = V diag(values) Vᵀ`. Eigenvalues are not sorted.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `V diag(f(λ)) Vᵀ`, symmetrised.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (mut col, &lambda) in scaled.column_iter_mut().zip(self.values.iter()) {
            col *= f(lambda);
        }
        symmetrize(&(scaled * self.vectors.transpose()))
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += a[(p, q)] * a[(p, q)];
            }
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi eigendecomposition. The input is symmetrised first.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// `1e-15 · ‖A‖_F`.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::Shape {
            expected: n,
            got: matrix.ncols(),
        });
    }
    if let Some(index) = matrix.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let mut a = symmetrize(matrix);
    let mut v = DMatrix::<f64>::identity(n, n);
    let tol = 1e-15 * a.norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            return Ok(EigenDecomposition {
                values: a.diagonal(),
                vectors: v,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- Jᵀ A J, columns then rows.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let off_norm = off_diagonal_norm(&a);
    if off_norm <= tol {
        return Ok(EigenDecomposition {
            values: a.diagonal(),
            vectors: v,
        });
    }
    Err(Error::NoConvergence {
        sweeps: MAX_SWEEPS,
        off_norm,
    })
}

/// Frobenius-nearest positive semidefinite matrix: eigendecompose, clamp
/// negative eigenvalues to zero, reconstruct.
pub fn psd_project(matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(symmetric_eigen(matrix)?.reconstruct_with(|l| l.max(0.0)))
}

/// Smallest eigenvalue of the symmetric part of `matrix`.
pub fn min_eigenvalue(matrix: &DMatrix<f64>) -> Result<f64> {
    Ok(symmetric_eigen(matrix)?.min_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-3.0..3.0));
        symmetrize(&m)
    }

    #[test]
    fn clamps_negative_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0]);
        let p = psd_project(&m).unwrap();
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn identity_is_fixed() {
        let id = DMatrix::<f64>::identity(4, 4);
        assert!((psd_project(&id).unwrap() - &id).norm() < 1e-15);
    }

    #[test]
    fn decomposition_reconstructs_and_is_orthonormal() {
        for seed in 0..20 {
            let n = 1 + (seed as usize % 9);
            let m = random_symmetric(n, seed);
            let eig = symmetric_eigen(&m).unwrap();
            let back = eig.reconstruct_with(|l| l);
            assert!((back - &m).norm() < 1e-12 * (1.0 + m.norm()));
            let vtv = eig.vectors.transpose() * &eig.vectors;
            assert!((vtv - DMatrix::identity(n, n)).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_match_nalgebra() {
        for seed in 100..110 {
            let m = random_symmetric(5, seed);
            let mut ours: Vec<f64> = symmetric_eigen(&m)
                .unwrap()
                .values
                .iter()
                .copied()
                .collect();
            let mut oracle: Vec<f64> = m
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            ours.sort_by(f64::total_cmp);
            oracle.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_non_square_and_nan() {
        assert!(symmetric_eigen(&DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(symmetric_eigen(&m), Err(Error::NonFinite { .. })));
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_psd(seed in any::<u64>(), n in 1usize..10) {
            let m = random_symmetric(n, seed);
            let p = psd_project(&m).unwrap();
            prop_assert!(min_eigenvalue(&p).unwrap() >= -1e-10);
            let pp = psd_project(&p).unwrap();
            prop_assert!((&pp - &p).norm() <= 1e-10 * (1.0 + p.norm()));
        }
    }
}
