use nalgebra::{DMatrix, DVector};

use super::psd::min_eigenvalue;
use crate::error::{Error, Result};

/// Largest tolerated asymmetry |M_ab − M_ba|.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Smallest tolerated eigenvalue, scaled by max(1, ‖M‖_F).
pub const PSD_TOL: f64 = 1e-8;

/// A symmetric positive semidefinite matrix defining the squared distance
/// `d²(a, b) = (a − b)ᵀ M (a − b)` over named features.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    matrix: DMatrix<f64>,
    feature_names: Vec<String>,
}

impl Metric {
    /// Validates shape, symmetry and semidefiniteness.
    pub fn new(matrix: DMatrix<f64>, feature_names: Vec<String>) -> Result<Self> {
        let n = feature_names.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Shape {
                expected: n,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        if let Some(index) = matrix.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        for a in 0..n {
            for b in a + 1..n {
                if (matrix[(a, b)] - matrix[(b, a)]).abs() > SYMMETRY_TOL {
                    return Err(Error::Parameter(format!(
                        "metric is not symmetric at ({a}, {b})"
                    )));
                }
            }
        }
        if n > 0 {
            let min = min_eigenvalue(&matrix)?;
            if min < -PSD_TOL * matrix.norm().max(1.0) {
                return Err(Error::Parameter(format!(
                    "metric is not positive semidefinite (min eigenvalue {min:e})"
                )));
            }
        }
        Ok(Metric {
            matrix,
            feature_names,
        })
    }

    /// For matrices already known to satisfy the invariants.
    pub(crate) fn from_trusted(matrix: DMatrix<f64>, feature_names: Vec<String>) -> Self {
        debug_assert_eq!(matrix.nrows(), feature_names.len());
        Metric {
            matrix,
            feature_names,
        }
    }

    pub fn identity(feature_names: Vec<String>) -> Self {
        let n = feature_names.len();
        Metric {
            matrix: DMatrix::identity(n, n),
            feature_names,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    /// Same metric with every entry multiplied by `factor` (≥ 0).
    pub fn scaled(&self, factor: f64) -> Result<Metric> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::Parameter(format!("invalid scale factor {factor}")));
        }
        Ok(Metric::from_trusted(
            &self.matrix * factor,
            self.feature_names.clone(),
        ))
    }

    /// Squared distance without dimension checks.
    pub(crate) fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        quadratic_form(&self.matrix, a, b)
    }
}

pub(crate) fn quadratic_form(m: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut total = 0.0;
    for r in 0..n {
        let dr = a[r] - b[r];
        if dr == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for c in 0..n {
            row += m[(r, c)] * (a[c] - b[c]);
        }
        total += dr * row;
    }
    total
}

fn check_dims(expected: usize, a: &[f64], b: &[f64]) -> Result<()> {
    for v in [a, b] {
        if v.len() != expected {
            return Err(Error::Shape {
                expected,
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// `(a − b)ᵀ M (a − b)`.
pub fn squared_distance(metric: &Metric, a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(metric.dim(), a, b)?;
    Ok(metric.distance_unchecked(a, b))
}

/// `(a − b)(a − b)ᵀ`, the rank-one matrix with `trace(C M) = d²_M(a, b)`.
pub fn outer_difference(a: &[f64], b: &[f64]) -> Result<DMatrix<f64>> {
    check_dims(a.len(), a, b)?;
    let d = DVector::from_iterator(a.len(), a.iter().zip(b).map(|(x, y)| x - y));
    Ok(&d * d.transpose())
}
