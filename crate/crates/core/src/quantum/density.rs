use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_eigen, CMatrix, C64};

use super::RegisterId;

pub const DENSITY_TOLERANCE: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace matrix on a list of registers.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    subsystem: Vec<RegisterId>,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, trace one and eigenvalues
    /// `>= -1e-10`, all within [`DENSITY_TOLERANCE`].
    pub fn new(matrix: CMatrix, subsystem: Vec<RegisterId>) -> Result<DensityMatrix> {
        let dim = 1usize << subsystem.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows().max(matrix.ncols()) });
        }
        let asym = frobenius(&(&matrix - matrix.adjoint()));
        if asym > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {asym:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}")));
        }
        let (values, _) = hermitian_eigen(&matrix);
        if let Some(min) = values.last() {
            if *min < -DENSITY_TOLERANCE {
                return Err(Error::InvalidDensityMatrix(format!("eigenvalue {min:.3e} is negative")));
            }
        }
        Ok(DensityMatrix { matrix, subsystem })
    }

    /// Projector onto a normalized vector.
    pub fn pure(vector: &[C64], subsystem: Vec<RegisterId>) -> Result<DensityMatrix> {
        let v = nalgebra::DVector::from_column_slice(vector);
        DensityMatrix::new(&v * v.adjoint(), subsystem)
    }

    /// For matrices that are PSD with unit trace by construction.
    pub(crate) fn from_trusted(matrix: CMatrix, subsystem: Vec<RegisterId>) -> DensityMatrix {
        DensityMatrix { matrix, subsystem }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn subsystem(&self) -> &[RegisterId] {
        &self.subsystem
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in nonincreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Convex combination `sum w_i rho_i`; weights are renormalized.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
        let first = parts.first().ok_or_else(|| Error::InvalidDensityMatrix("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let mut acc = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in parts {
            if rho.subsystem != first.1.subsystem {
                return Err(Error::InvalidDensityMatrix("mixture over different subsystems".into()));
            }
            acc += &rho.matrix * C64::new(*w / total, 0.0);
        }
        Ok(DensityMatrix { matrix: acc, subsystem: first.1.subsystem.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_matrices() {
        let sub = vec![RegisterId(0)];
        let not_herm = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
        );
        assert!(DensityMatrix::new(not_herm, sub.clone()).is_err());
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(bad_trace, sub.clone()).is_err());
        let negative = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.5, 0.0)],
        );
        assert!(DensityMatrix::new(negative, sub).is_err());
    }

    #[test]
    fn maximally_mixed_has_half_purity() {
        let rho = DensityMatrix::new(CMatrix::identity(2, 2) * C64::new(0.5, 0.0), vec![RegisterId(0)]).unwrap();
        assert!((rho.purity() - 0.5).abs() < 1e-12);
    }
}
