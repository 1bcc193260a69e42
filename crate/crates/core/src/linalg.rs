//! Dense complex linear algebra used by the spectral routines.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Hermitian
//! eigendecompositions always hermitize their input first, and all spectra are
//! returned in nonincreasing order so callers get a deterministic basis order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Eigenvalues below this magnitude are treated as numerical noise when
/// taking square roots of PSD matrices.
pub const EIGEN_NOISE_FLOOR: f64 = 1e-13;

/// Negative eigenvalues above `-PSD_TOLERANCE` are clamped to zero; anything
/// more negative is rejected.
pub const PSD_TOLERANCE: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues (nonincreasing) and matching eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = nalgebra::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Square root of a positive semidefinite matrix, plus its spectrum after
/// clamping.
pub fn psd_sqrt(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let (values, vectors) = hermitian_eigen(m);
    let mut clamped = Vec::with_capacity(values.len());
    for &v in &values {
        if v < -PSD_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("eigenvalue {v:.3e} is below -{PSD_TOLERANCE:e}")));
        }
        clamped.push(if v < EIGEN_NOISE_FLOOR { 0.0 } else { v });
    }
    let roots = DVector::from_iterator(clamped.len(), clamped.iter().map(|v| C64::new(v.sqrt(), 0.0)));
    let sqrt = &vectors * CMatrix::from_diagonal(&roots) * vectors.adjoint();
    Ok((sqrt, clamped, vectors))
}

/// Thin SVD with singular values sorted nonincreasing: `m = u * diag(s) * v^dag`.
pub fn svd_sorted(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (CMatrix::zeros(rows, 0), Vec::new(), CMatrix::zeros(cols, 0));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = CMatrix::from_fn(rows, k, |r, c| u[(r, order[c])]);
    let v_sorted = CMatrix::from_fn(cols, k, |r, c| v_t[(order[c], r)].conj());
    (u_sorted, s, v_sorted)
}

pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().sum()
}

/// Closest isometry to `m` (columns orthonormal), from its polar decomposition.
pub fn polar_isometry(m: &CMatrix) -> CMatrix {
    let (u, _, v) = svd_sorted(m);
    u * v.adjoint()
}

/// Orthonormal basis of the complement of the column span of `basis` in
/// `C^dim`, built by Gram-Schmidt over the standard basis vectors in order.
pub fn orthonormal_complement(basis: &CMatrix, dim: usize) -> CMatrix {
    let have = basis.ncols();
    let mut columns: Vec<DVector<C64>> = (0..have).map(|c| basis.column(c).into_owned()).collect();
    let mut extra = Vec::new();
    for k in 0..dim {
        if columns.len() == dim {
            break;
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[k] = ONE;
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for c in &columns {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= C64::new(norm, 0.0);
            columns.push(v.clone());
            extra.push(v);
        }
    }
    if extra.is_empty() {
        CMatrix::zeros(dim, 0)
    } else {
        CMatrix::from_columns(&extra)
    }
}

/// Orthonormalize the columns of `m`, dropping columns that are (numerically)
/// in the span of earlier ones.
pub fn orthonormalize(m: &CMatrix, tol: f64) -> CMatrix {
    let mut out: Vec<DVector<C64>> = Vec::new();
    for c in 0..m.ncols() {
        let mut v = m.column(c).into_owned();
        for _ in 0..2 {
            for q in &out {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm > tol {
            out.push(v / C64::new(norm, 0.0));
        }
    }
    if out.is_empty() {
        CMatrix::zeros(m.nrows(), 0)
    } else {
        CMatrix::from_columns(&out)
    }
}

/// Operator norm of a Hermitian matrix (largest absolute eigenvalue).
pub fn hermitian_op_norm(m: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_is_sorted_descending() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(1.0, 0.0)]);
        let (values, _) = hermitian_eigen(&m);
        assert!((values[0] - 3.0).abs() < 1e-12);
        assert!((values[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_sqrt_rejects_negative() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-0.5, 0.0)]));
        assert!(psd_sqrt(&m).is_err());
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.25, 0.1), c(0.25, -0.1), c(0.5, 0.0)]);
        let (s, _, _) = psd_sqrt(&m).unwrap();
        assert!(frobenius(&(&s * &s - &m)) < 1e-12);
    }

    #[test]
    fn complement_spans_the_rest() {
        let v = CMatrix::from_column_slice(3, 1, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]) * c(0.5f64.sqrt(), 0.0);
        let k = orthonormal_complement(&v, 3);
        assert_eq!(k.ncols(), 2);
        let full =
            CMatrix::from_columns(&[v.column(0).into_owned(), k.column(0).into_owned(), k.column(1).into_owned()]);
        let gram = full.adjoint() * &full;
        assert!(frobenius(&(gram - CMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn svd_sorted_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            3,
            &[c(0.1, 0.0), c(2.0, 1.0), c(0.0, 0.0), c(0.3, -0.2), c(0.0, 0.0), c(1.0, 0.0)],
        );
        let (u, s, v) = svd_sorted(&m);
        assert!(s[0] >= s[1]);
        let sd = CMatrix::from_diagonal(&DVector::from_iterator(2, s.iter().map(|x| c(*x, 0.0))));
        assert!(frobenius(&(u * sd * v.adjoint() - m)) < 1e-12);
    }
}
