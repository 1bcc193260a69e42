//! Schmidt decomposition, fidelity, trace distance, Uhlmann purification
//! partners and synthesis of one-sided steering unitaries.
//!
//! Fidelity uses the square-root convention `F(rho, sigma) = Tr sqrt(sqrt(rho)
//! sigma sqrt(rho))`, evaluated as the trace norm `||sqrt(rho) sqrt(sigma)||_1`
//! which is the same quantity but avoids a second square root of a nearly
//! singular matrix.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius, hermitian_eigen, orthonormal_complement, orthonormalize, polar_isometry, psd_sqrt, svd_sorted,
    trace_norm, CMatrix, C64, EIGEN_NOISE_FLOOR,
};
use crate::quantum::{DensityMatrix, OwnerSet, PureState, RegisterId, Split, Unitary};

/// Singular values below this are treated as zero when pairing Schmidt vectors.
pub const SCHMIDT_CUTOFF: f64 = 1e-10;

/// Default tolerance for steering: both the reduced-state equality
/// precondition and the residual `||U psi_from - psi_to||`.
pub const STEERING_TOLERANCE: f64 = 1e-8;

/// A split of the owners into two disjoint sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bipartition {
    left: OwnerSet,
    right: OwnerSet,
}

impl Bipartition {
    pub fn new(left: OwnerSet, right: OwnerSet) -> Result<Bipartition> {
        if left.intersects(right) {
            return Err(Error::InvalidBipartition("sides share an owner".into()));
        }
        Ok(Bipartition { left, right })
    }

    /// Alice's side (lab, records, store) against Bob's.
    pub fn alice_bob() -> Bipartition {
        Bipartition { left: OwnerSet::ALICE_SIDE, right: OwnerSet::BOB_SIDE }
    }

    pub fn left(&self) -> OwnerSet {
        self.left
    }

    pub fn right(&self) -> OwnerSet {
        self.right
    }

    /// Registers of `state` on each side; fails if a register is on neither.
    pub fn split(&self, state: &PureState) -> Result<(Vec<RegisterId>, Vec<RegisterId>)> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (id, owner) in state.layout() {
            if self.left.contains(owner) {
                left.push(id);
            } else if self.right.contains(owner) {
                right.push(id);
            } else {
                return Err(Error::InvalidBipartition(format!("register {id} (owner {owner}) is on neither side")));
            }
        }
        Ok((left, right))
    }
}

/// `psi = sum_i sqrt(lambda_i) e_i ⊗ f_i` across a bipartition.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// `sqrt(lambda_i)`, nonincreasing.
    pub coefficients: Vec<f64>,
    /// Columns are the `e_i` on the left registers.
    pub left_basis: CMatrix,
    /// Columns are the `f_i` on the right registers.
    pub right_basis: CMatrix,
    pub left_registers: Vec<RegisterId>,
    pub right_registers: Vec<RegisterId>,
    source_layout: Vec<(RegisterId, crate::quantum::Owner)>,
}

impl SchmidtDecomposition {
    /// `lambda_i = coefficient_i^2`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }

    /// Number of coefficients above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|c| **c > tol).count()
    }

    /// Rebuild `sum_i sqrt(lambda_i) e_i ⊗ f_i` in the source register order.
    pub fn reconstruct(&self) -> Result<PureState> {
        let mut m = CMatrix::zeros(self.left_basis.nrows(), self.right_basis.nrows());
        for (i, c) in self.coefficients.iter().enumerate() {
            m += self.left_basis.column(i) * self.right_basis.column(i).transpose() * C64::new(*c, 0.0);
        }
        let registers: Vec<RegisterId> = self.source_layout.iter().map(|r| r.0).collect();
        let split = Split::new(&registers, &self.left_registers)?;
        PureState::new(split.scatter(&m), &self.source_layout)
    }
}

pub fn schmidt(state: &PureState, bipartition: &Bipartition) -> Result<SchmidtDecomposition> {
    let (left, right) = bipartition.split(state)?;
    let split = Split::new(state.registers(), &left)?;
    let m = split.matrix(state.amplitudes());
    let (mut u, s, v) = svd_sorted(&m);
    // psi[a, j] = sum_i s_i u[a, i] conj(v[j, i]), so f_i = conj(v_i)
    let mut f = v.map(|z| z.conj());
    for i in 0..s.len() {
        // fixed phase convention: first non-negligible entry of e_i real positive
        if let Some(first) = u.column(i).iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = first / first.norm();
            u.column_mut(i).iter_mut().for_each(|z| *z /= phase);
            f.column_mut(i).iter_mut().for_each(|z| *z *= phase);
        }
    }
    Ok(SchmidtDecomposition {
        coefficients: s,
        left_basis: u,
        right_basis: f,
        left_registers: left,
        right_registers: right,
        source_layout: state.layout(),
    })
}

/// A fidelity value in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FidelityValue(f64);

impl FidelityValue {
    pub fn new(value: f64) -> Result<FidelityValue> {
        if !(0.0..=1.0 + 1e-12).contains(&value) {
            return Err(Error::OutOfRange { what: "fidelity", detail: format!("{value}") });
        }
        Ok(FidelityValue(value.min(1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn clamped(value: f64) -> FidelityValue {
        FidelityValue(value.clamp(0.0, 1.0))
    }
}

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    Ok(())
}

/// Square-root fidelity between two density matrices.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<FidelityValue> {
    check_dims(rho, sigma)?;
    let (sqrt_rho, _, _) = psd_sqrt(rho.matrix())?;
    let (sqrt_sigma, _, _) = psd_sqrt(sigma.matrix())?;
    Ok(FidelityValue::clamped(trace_norm(&(sqrt_rho * sqrt_sigma))))
}

/// `(1/2) sum |eigenvalues(rho - sigma)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let (values, _) = hermitian_eigen(&(rho.matrix() - sigma.matrix()));
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Fidelity between the reductions of two pure states onto `keep`, computed
/// from whichever side is smaller. When the traced side is smaller this uses
/// `F = ||Psi1 Psi0^dag||_1` with `Psi` indexed (traced, kept).
pub fn reduced_fidelity(psi0: &PureState, psi1: &PureState, keep: OwnerSet) -> Result<FidelityValue> {
    let kept0 = psi0.registers_in(keep);
    let kept1 = psi1.registers_in(keep);
    if kept0 != kept1 {
        return Err(Error::InvalidBipartition("kept registers differ between states".into()));
    }
    let traced0: Vec<RegisterId> = psi0.registers().iter().copied().filter(|r| !kept0.contains(r)).collect();
    let traced1: Vec<RegisterId> = psi1.registers().iter().copied().filter(|r| !kept1.contains(r)).collect();
    if traced0.len() < kept0.len() && traced0 == traced1 {
        let m0 = Split::new(psi0.registers(), &traced0)?.matrix(psi0.amplitudes());
        let m1 = Split::new(psi1.registers(), &traced1)?.matrix(psi1.amplitudes());
        return Ok(FidelityValue::clamped(trace_norm(&(m1 * m0.adjoint()))));
    }
    let rho0 = crate::quantum::partial_trace(psi0, keep)?;
    let rho1 = crate::quantum::partial_trace(psi1, keep)?;
    fidelity(&rho0, &rho1)
}

/// Purification of `rho0` with maximal overlap against `psi1`.
#[derive(Clone, Debug)]
pub struct UhlmannPartner {
    pub state: PureState,
    /// `<partner|psi1>`, real and nonnegative; equals `F(rho0, rho_B(psi1))`.
    pub overlap: f64,
}

/// Purify `rho0` on the left side of `bipartition` so that the overlap with
/// `psi1` is maximal. `rho0` must live on exactly the right-side registers of
/// `psi1`, in the same order.
pub fn uhlmann_partner(rho0: &DensityMatrix, psi1: &PureState, bipartition: &Bipartition) -> Result<UhlmannPartner> {
    let (left, right) = bipartition.split(psi1)?;
    if rho0.subsystem() != right.as_slice() {
        return Err(Error::InvalidBipartition(format!(
            "rho0 lives on {:?} but the right side of psi1 is {:?}",
            rho0.subsystem(),
            right
        )));
    }
    let d_left = 1usize << left.len();
    let d_right = 1usize << right.len();
    // X1[j, a]: rows on the kept (right) side, so rho1 = X1 X1^dag
    let split = Split::new(psi1.registers(), &right)?;
    let x1 = split.matrix(psi1.amplitudes());
    let (sqrt_rho0, spectrum, eigvecs) = psd_sqrt(rho0.matrix())?;
    let rank = spectrum.iter().filter(|v| **v > EIGEN_NOISE_FLOOR).count();
    if rank > d_left {
        return Err(Error::PurificationTooSmall { rank, dim: d_left });
    }
    let cross = &sqrt_rho0 * &x1;
    let (w, s, z) = svd_sorted(&cross);
    let top = s.first().copied().unwrap_or(0.0);
    let kept = s.iter().filter(|v| **v > SCHMIDT_CUTOFF * top.max(1.0)).count();
    let w_s = w.columns(0, kept).into_owned();
    let z_s = z.columns(0, kept).into_owned();
    // Complete the right-side frame so it covers supp(rho0): the remaining
    // directions carry no overlap, so any pairing with unused left vectors works.
    let support = eigvecs.columns(0, rank).into_owned();
    let residual = &support - &w_s * (w_s.adjoint() * &support);
    let w_extra = orthonormalize(&residual, 1e-8);
    let extra = w_extra.ncols();
    let z_extra = orthonormal_complement(&z_s, d_left).columns(0, extra).into_owned();
    let mut v = &w_s * z_s.adjoint();
    if extra > 0 {
        v += &w_extra * z_extra.adjoint();
    }
    let x0 = &sqrt_rho0 * v;
    debug_assert_eq!(x0.shape(), (d_right, d_left));
    let overlap = s.iter().take(kept).fold(0.0, |acc, v| acc + v);
    let state = PureState::normalized(split.scatter(&x0), &psi1.layout())?;
    Ok(UhlmannPartner { state, overlap: overlap.min(1.0) })
}

/// Unitary on the `side` registers mapping `psi_from` to `psi_to`, which
/// must have equal reductions on the complement of `side`.
pub fn steering_unitary(psi_from: &PureState, psi_to: &PureState, side: OwnerSet) -> Result<Unitary> {
    steering_unitary_with_tolerance(psi_from, psi_to, side, STEERING_TOLERANCE)
}

pub fn steering_unitary_with_tolerance(
    psi_from: &PureState,
    psi_to: &PureState,
    side: OwnerSet,
    tolerance: f64,
) -> Result<Unitary> {
    psi_from.check_same_layout(psi_to)?;
    let side_regs = psi_from.registers_in(side);
    if side_regs != psi_to.registers_in(side) {
        return Err(Error::InvalidBipartition("owners of the steering side differ".into()));
    }
    let d_side = 1usize << side_regs.len();
    let split = Split::new(psi_from.registers(), &side_regs)?;
    // rows: side (Alice), columns: rest (Bob)
    let m_from = split.matrix(psi_from.amplitudes());
    let m_to = split.matrix(psi_to.amplitudes());

    // reductions on the rest: (M^dag M)^T
    let rest_from = m_from.adjoint() * &m_from;
    let rest_to = m_to.adjoint() * &m_to;
    let distance = frobenius(&(rest_from - rest_to));
    if distance > tolerance {
        return Err(Error::ReductionsDiffer { distance });
    }

    let (e, s, f) = svd_sorted(&m_from);
    let r = s.iter().filter(|v| **v > SCHMIDT_CUTOFF).count();
    let e_r = e.columns(0, r).into_owned();
    // relative states of psi_to against the shared right vectors
    let inv = DVector::from_iterator(r, s.iter().take(r).map(|v| C64::new(1.0 / v, 0.0)));
    let e_to = &m_to * f.columns(0, r) * CMatrix::from_diagonal(&inv);
    let q = if r > 0 { polar_isometry(&e_to) } else { CMatrix::zeros(d_side, 0) };

    let mut u = &q * e_r.adjoint();
    let k_from = orthonormal_complement(&e_r, d_side);
    let k_to = orthonormal_complement(&q, d_side);
    if k_from.ncols() > 0 {
        let rotation = polar_isometry(&(k_to.adjoint() * &k_from));
        u += &k_to * rotation * k_from.adjoint();
    }

    let steered = m_from.clone();
    let residual = frobenius(&(&u * steered - &m_to));
    if residual > tolerance {
        return Err(Error::SteeringPrecision { residual, tolerance });
    }
    Unitary::new(u, side_regs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};
    use crate::quantum::{apply_unitary, gates, partial_trace, Owner};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn two_qubit(amps: [C64; 4]) -> PureState {
        PureState::normalized(amps.to_vec(), &[(RegisterId(0), Owner::A), (RegisterId(1), Owner::B)]).unwrap()
    }

    fn single(amps: [C64; 2]) -> DensityMatrix {
        DensityMatrix::pure(&amps, vec![RegisterId(0)]).unwrap()
    }

    #[test]
    fn schmidt_of_bell_pair() {
        let bell = two_qubit([r(1.0), ZERO, ZERO, r(1.0)]);
        let sd = schmidt(&bell, &Bipartition::alice_bob()).unwrap();
        assert!((sd.coefficients[0] - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((sd.coefficients[1] - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(sd.reconstruct().unwrap().distance(&bell).unwrap() < 1e-12);
    }

    #[test]
    fn schmidt_of_product_state() {
        let s = two_qubit([ZERO, r(1.0), ZERO, ZERO]);
        let sd = schmidt(&s, &Bipartition::alice_bob()).unwrap();
        assert!((sd.coefficients[0] - 1.0).abs() < 1e-12);
        assert_eq!(sd.rank(1e-12), 1);
    }

    #[test]
    fn schmidt_rejects_uncovered_register() {
        let s = two_qubit([ZERO, r(1.0), ZERO, ZERO]);
        let bad = Bipartition::new(Owner::A.into(), Owner::EnvB.into()).unwrap();
        assert!(matches!(schmidt(&s, &bad), Err(Error::InvalidBipartition(_))));
        assert!(Bipartition::new(Owner::A.into(), OwnerSet::of(&[Owner::A, Owner::B])).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let zero = single([ONE, ZERO]);
        let one = single([ZERO, ONE]);
        let plus = single([r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]);
        assert!((fidelity(&zero, &zero).unwrap().value() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().value() < 1e-12);
        assert!((fidelity(&zero, &plus).unwrap().value() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = single([ONE, ZERO]);
        let b = DensityMatrix::new(CMatrix::identity(4, 4) * r(0.25), vec![RegisterId(0), RegisterId(1)]).unwrap();
        assert!(matches!(fidelity(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(trace_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn trace_distance_examples() {
        let zero = single([ONE, ZERO]);
        let one = single([ZERO, ONE]);
        let mixed = DensityMatrix::new(CMatrix::identity(2, 2) * r(0.5), vec![RegisterId(0)]).unwrap();
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_distance(&mixed, &zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uhlmann_partner_cases() {
        // F = 1 case: partner is psi1 itself
        let psi1 = two_qubit([r(0.6), r(0.1), C64::new(0.0, 0.3), r(0.7)]);
        let rho1 = partial_trace(&psi1, Owner::B.into()).unwrap();
        let p = uhlmann_partner(&rho1, &psi1, &Bipartition::alice_bob()).unwrap();
        assert!((p.overlap - 1.0).abs() < 1e-9);
        assert!((p.state.inner(&psi1).unwrap().norm() - 1.0).abs() < 1e-9);

        // rho0 = |0><0|, psi1 = |0>(cos a|0> + sin a|1>)
        let a = 0.4f64;
        let psi1 = two_qubit([r(a.cos()), r(a.sin()), ZERO, ZERO]);
        let rho0 = single([ONE, ZERO]);
        let rho0 = DensityMatrix::new(rho0.matrix().clone(), vec![RegisterId(1)]).unwrap();
        let p = uhlmann_partner(&rho0, &psi1, &Bipartition::alice_bob()).unwrap();
        assert!((p.overlap - a.cos()).abs() < 1e-12);
        let back = partial_trace(&p.state, Owner::B.into()).unwrap();
        assert!(frobenius(&(back.matrix() - rho0.matrix())) < 1e-9);

        // orthogonal supports
        let psi1 = two_qubit([ZERO, ONE, ZERO, ZERO]);
        let p = uhlmann_partner(&rho0, &psi1, &Bipartition::alice_bob()).unwrap();
        assert!(p.overlap < 1e-12);
        let back = partial_trace(&p.state, Owner::B.into()).unwrap();
        assert!(frobenius(&(back.matrix() - rho0.matrix())) < 1e-9);
    }

    #[test]
    fn uhlmann_partner_needs_room() {
        // rho0 = I/2 on two B qubits has rank 4 but A is one qubit
        let psi1 = PureState::normalized(
            vec![ONE; 8],
            &[(RegisterId(0), Owner::A), (RegisterId(1), Owner::B), (RegisterId(2), Owner::B)],
        )
        .unwrap();
        let rho0 = DensityMatrix::new(CMatrix::identity(4, 4) * r(0.25), vec![RegisterId(1), RegisterId(2)]).unwrap();
        assert!(matches!(
            uhlmann_partner(&rho0, &psi1, &Bipartition::alice_bob()),
            Err(Error::PurificationTooSmall { rank: 4, dim: 2 })
        ));
    }

    #[test]
    fn steering_examples() {
        let bell = two_qubit([r(1.0), ZERO, ZERO, r(1.0)]);
        let u = steering_unitary(&bell, &bell, Owner::A.into()).unwrap();
        assert!(u.distance_to_phase_identity() < 1e-8);

        let flipped = two_qubit([ZERO, r(1.0), r(1.0), ZERO]);
        let u = steering_unitary(&bell, &flipped, Owner::A.into()).unwrap();
        assert_eq!(u.targets(), &[RegisterId(0)]);
        let out = apply_unitary(&bell, &u).unwrap();
        assert!(out.distance(&flipped).unwrap() < 1e-8);
        let x = gates::pauli_x();
        assert!(frobenius(&(u.matrix() - x)) < 1e-8);

        let (c, s) = (FRAC_PI_4 / 2.0).sin_cos();
        let from = two_qubit([r(c), r(s), ZERO, ZERO]);
        let to = two_qubit([ZERO, ZERO, r(c), r(s)]);
        let u = steering_unitary(&from, &to, Owner::A.into()).unwrap();
        assert!(apply_unitary(&from, &u).unwrap().distance(&to).unwrap() < 1e-8);
    }

    #[test]
    fn steering_rejects_different_reductions() {
        let a = two_qubit([r(1.0), ZERO, ZERO, ZERO]);
        let b = two_qubit([ZERO, r(1.0), ZERO, ZERO]);
        assert!(matches!(steering_unitary(&a, &b, Owner::A.into()), Err(Error::ReductionsDiffer { .. })));
    }

    #[test]
    fn reduced_fidelity_matches_density_route() {
        let psi0 = two_qubit([r(0.6), r(0.1), C64::new(0.0, 0.3), r(0.7)]);
        let psi1 = two_qubit([r(0.2), r(0.5), r(0.5), C64::new(0.1, -0.4)]);
        let f_cross = reduced_fidelity(&psi0, &psi1, Owner::B.into()).unwrap().value();
        let f_dense =
            fidelity(&partial_trace(&psi0, Owner::B.into()).unwrap(), &partial_trace(&psi1, Owner::B.into()).unwrap())
                .unwrap()
                .value();
        assert!((f_cross - f_dense).abs() < 1e-10);
    }
}
