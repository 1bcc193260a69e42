use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_op_norm, CMatrix, C64, ONE, ZERO};

use super::RegisterId;

/// Allowed deviation of `U^dag U` from the identity, in operator norm.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// A unitary acting on an ordered list of target registers. The first target
/// is the most significant qubit of the matrix index.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    matrix: CMatrix,
    targets: Vec<RegisterId>,
}

impl Unitary {
    pub fn new(matrix: CMatrix, targets: Vec<RegisterId>) -> Result<Unitary> {
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows().max(matrix.ncols()) });
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::DuplicateRegister(*t));
            }
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Unitary { matrix, targets })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn targets(&self) -> &[RegisterId] {
        &self.targets
    }

    /// Distance to the nearest `e^{i phi} I`, in Frobenius norm (an upper
    /// bound on the operator-norm distance).
    pub fn distance_to_phase_identity(&self) -> f64 {
        let tr = self.matrix.trace();
        let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { ONE };
        let n = self.matrix.nrows();
        frobenius(&(&self.matrix - CMatrix::identity(n, n) * phase))
    }
}

/// `||U^dag U - I||` in operator norm, or a Frobenius upper bound on it when
/// that bound is already within [`UNITARITY_TOLERANCE`].
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    // Frobenius bounds the operator norm from above; skip the eigensolve
    // when it already certifies unitarity
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut acc = if i == j { -ONE } else { ZERO };
            for k in 0..n {
                acc += m[(k, i)].conj() * m[(k, j)];
            }
            sum += acc.norm_sqr();
        }
    }
    let upper = sum.sqrt();
    if upper <= UNITARITY_TOLERANCE {
        return upper;
    }
    let gram = m.adjoint() * m - CMatrix::identity(n, n);
    hermitian_op_norm(&gram)
}

/// Standard single- and two-qubit gate matrices.
pub mod gates {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    pub fn identity(qubits: usize) -> CMatrix {
        let d = 1 << qubits;
        CMatrix::identity(d, d)
    }

    pub fn hadamard() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[r(h), r(h), r(h), r(-h)])
    }

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, r(-1.0)])
    }

    /// `exp(-i theta Y / 2)`: maps |0> to cos(theta/2)|0> + sin(theta/2)|1>.
    pub fn ry(theta: f64) -> CMatrix {
        let (s, c) = (theta / 2.0).sin_cos();
        CMatrix::from_row_slice(2, 2, &[r(c), r(-s), r(s), r(c)])
    }

    pub fn phase(phi: f64) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, C64::from_polar(1.0, phi)])
    }

    pub fn cnot() -> CMatrix {
        controlled(&pauli_x())
    }

    /// Controlled version of `gate`, with the control as the most significant
    /// qubit, firing on control |1>.
    pub fn controlled(gate: &CMatrix) -> CMatrix {
        let d = gate.nrows();
        let mut m = CMatrix::identity(2 * d, 2 * d);
        m.view_mut((d, d), (d, d)).copy_from(gate);
        m
    }
}
