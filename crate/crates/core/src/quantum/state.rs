use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};

use super::{Bit, DensityMatrix, Owner, OwnerSet, RegisterId, SystemPartition, Unitary};

/// Default cap on simultaneously live registers (2^20 amplitudes).
pub const DEFAULT_REGISTER_CAP: usize = 20;

/// Norm tolerance accepted when constructing a state from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Outcome probabilities below this are treated as exactly zero.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

/// Pure state over an ordered list of qubit registers.
///
/// Amplitude index bit order follows `registers`: the first register is the
/// most significant bit. Measured registers stay in the list (collapsed to a
/// basis state) until [`PureState::release_consumed`] factors them out; their
/// outcomes are remembered either way so a second measurement is rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    registers: Vec<RegisterId>,
    partition: SystemPartition,
    consumed: BTreeMap<RegisterId, Bit>,
}

impl PureState {
    /// Build a state from raw amplitudes. The amplitudes are renormalized if
    /// their norm is within [`NORM_TOLERANCE`] of one.
    pub fn new(amplitudes: Vec<C64>, registers: &[(RegisterId, Owner)]) -> Result<PureState> {
        let expected = 1usize << registers.len();
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: amplitudes.len() });
        }
        let mut partition = SystemPartition::new();
        for &(id, owner) in registers {
            if partition.insert(id, owner).is_some() {
                return Err(Error::DuplicateRegister(id));
            }
        }
        let norm = norm_of(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(PureState {
            amplitudes,
            registers: registers.iter().map(|r| r.0).collect(),
            partition,
            consumed: BTreeMap::new(),
        })
    }

    /// Like [`PureState::new`] but normalizes any nonzero vector.
    pub fn normalized(amplitudes: Vec<C64>, registers: &[(RegisterId, Owner)]) -> Result<PureState> {
        let norm = norm_of(&amplitudes);
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        PureState::new(amplitudes.into_iter().map(|a| a / norm).collect(), registers)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn registers(&self) -> &[RegisterId] {
        &self.registers
    }

    pub fn partition(&self) -> &SystemPartition {
        &self.partition
    }

    pub fn num_registers(&self) -> usize {
        self.registers.len()
    }

    pub fn owner(&self, id: RegisterId) -> Option<Owner> {
        self.partition.owner(id)
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amplitudes)
    }

    /// Registers measured so far, with their outcomes.
    pub fn consumed(&self) -> &BTreeMap<RegisterId, Bit> {
        &self.consumed
    }

    pub fn is_consumed(&self, id: RegisterId) -> bool {
        self.consumed.contains_key(&id)
    }

    pub fn position(&self, id: RegisterId) -> Option<usize> {
        self.registers.iter().position(|r| *r == id)
    }

    /// Register list paired with owners, in amplitude order.
    pub fn layout(&self) -> Vec<(RegisterId, Owner)> {
        self.registers.iter().map(|r| (*r, self.partition.owner(*r).expect("partition covers registers"))).collect()
    }

    /// Live registers whose owner is in `set`, in amplitude order.
    pub fn registers_in(&self, set: OwnerSet) -> Vec<RegisterId> {
        self.registers
            .iter()
            .copied()
            .filter(|r| set.contains(self.partition.owner(*r).expect("partition covers registers")))
            .collect()
    }

    /// Inner product `<self|other>`; both states must share a register layout.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.check_same_layout(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &PureState) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    pub(crate) fn check_same_layout(&self, other: &PureState) -> Result<()> {
        if self.registers != other.registers {
            return Err(Error::InvalidBipartition(format!(
                "register layouts differ: {:?} vs {:?}",
                self.registers, other.registers
            )));
        }
        Ok(())
    }

    /// Reassign a register to a new owner.
    pub fn with_owner(&self, id: RegisterId, owner: Owner) -> Result<PureState> {
        let mut next = self.clone();
        next.set_owner(id, owner)?;
        Ok(next)
    }

    /// In-place form of [`PureState::with_owner`].
    pub fn set_owner(&mut self, id: RegisterId, owner: Owner) -> Result<()> {
        if self.partition.owner(id).is_none() {
            return Err(Error::UnknownRegister(id));
        }
        self.partition.insert(id, owner);
        Ok(())
    }

    /// Append a fresh register in |0> as the least significant qubit.
    pub fn allocate(&self, id: RegisterId, owner: Owner, cap: usize) -> Result<PureState> {
        let mut next = self.clone();
        next.push_register(id, owner, cap)?;
        Ok(next)
    }

    /// In-place form of [`PureState::allocate`].
    pub fn push_register(&mut self, id: RegisterId, owner: Owner, cap: usize) -> Result<()> {
        if self.partition.owner(id).is_some() || self.consumed.contains_key(&id) {
            return Err(Error::DuplicateRegister(id));
        }
        let requested = self.registers.len() + 1;
        if requested > cap {
            return Err(Error::RegisterCap { requested, cap });
        }
        let len = self.amplitudes.len();
        self.amplitudes.resize(len * 2, ZERO);
        for i in (0..len).rev() {
            self.amplitudes[2 * i] = self.amplitudes[i];
            self.amplitudes[2 * i + 1] = ZERO;
        }
        self.registers.push(id);
        self.partition.insert(id, owner);
        Ok(())
    }

    /// Factor consumed registers out of the amplitude vector. Exact, since a
    /// measured register sits in a computational basis state.
    pub fn release_consumed(&self) -> PureState {
        let mut next = self.clone();
        next.release();
        next
    }

    /// In-place form of [`PureState::release_consumed`].
    pub fn release(&mut self) {
        let drop: Vec<(usize, Bit)> =
            self.registers.iter().enumerate().filter_map(|(i, r)| self.consumed.get(r).map(|b| (i, *b))).collect();
        if drop.is_empty() {
            return;
        }
        let n = self.registers.len();
        let keep: Vec<usize> = (0..n).filter(|i| !drop.iter().any(|(d, _)| d == i)).collect();
        let mut fixed = 0usize;
        for (pos, bit) in &drop {
            if bit.is_one() {
                fixed |= 1 << (n - 1 - pos);
            }
        }
        let k = keep.len();
        // source indices never fall below their destination, so compact in place
        for j in 0..1usize << k {
            let mut idx = fixed;
            for (t, pos) in keep.iter().enumerate() {
                if (j >> (k - 1 - t)) & 1 == 1 {
                    idx |= 1 << (n - 1 - pos);
                }
            }
            self.amplitudes[j] = self.amplitudes[idx];
        }
        self.amplitudes.truncate(1 << k);
        for (pos, _) in &drop {
            self.partition.remove(self.registers[*pos]);
        }
        self.registers = keep.iter().map(|i| self.registers[*i]).collect();
    }

    /// In-place form of [`apply_unitary`].
    pub fn apply(&mut self, u: &Unitary) -> Result<()> {
        let n = self.registers.len();
        let shifts: Vec<usize> =
            u.targets().iter().map(|t| live_position(self, *t).map(|p| n - 1 - p)).collect::<Result<_>>()?;
        let matrix = u.matrix();
        if let [shift] = shifts[..] {
            let bit = 1usize << shift;
            let (m00, m01, m10, m11) = (matrix[(0, 0)], matrix[(0, 1)], matrix[(1, 0)], matrix[(1, 1)]);
            for base in 0..self.amplitudes.len() {
                if base & bit != 0 {
                    continue;
                }
                let (x, y) = (self.amplitudes[base], self.amplitudes[base | bit]);
                self.amplitudes[base] = m00 * x + m01 * y;
                self.amplitudes[base | bit] = m10 * x + m11 * y;
            }
            return Ok(());
        }
        let k = shifts.len();
        let dim = 1usize << k;
        let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
        let offsets: Vec<usize> = (0..dim)
            .map(|m| (0..k).filter(|t| (m >> (k - 1 - t)) & 1 == 1).map(|t| 1usize << shifts[t]).sum())
            .collect();
        let mut scratch = vec![ZERO; dim];
        for base in 0..self.amplitudes.len() {
            if base & mask != 0 {
                continue;
            }
            for (m, off) in offsets.iter().enumerate() {
                scratch[m] = self.amplitudes[base | off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (col, v) in scratch.iter().enumerate() {
                    acc += matrix[(row, col)] * v;
                }
                self.amplitudes[base | off] = acc;
            }
        }
        Ok(())
    }

    /// In-place form of [`measure`]; returns the outcome and its probability.
    pub fn measure(&mut self, id: RegisterId, draw: f64) -> Result<(Bit, f64)> {
        if !(0.0..1.0).contains(&draw) {
            return Err(Error::OutOfRange { what: "draw", detail: format!("{draw} not in [0,1)") });
        }
        let p0 = prob_zero(self, id)?;
        let outcome = Bit::from_bool(draw >= p0);
        let probability = if outcome == Bit::Zero { p0 } else { 1.0 - p0 };
        let pos = self.position(id).expect("checked by prob_zero");
        let shift = self.registers.len() - 1 - pos;
        let scale = 1.0 / probability.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a = if (i >> shift) & 1 == outcome.index() { *a * scale } else { ZERO };
        }
        let owner = self.partition.owner(id).expect("live register has owner");
        self.partition.insert(id, owner.environment());
        self.consumed.insert(id, outcome);
        Ok((outcome, probability))
    }

    /// Tensor product `self ⊗ other` (other's registers become less significant).
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut layout = self.layout();
        layout.extend(other.layout());
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        PureState::new(amps, &layout)
    }
}

fn norm_of(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// All-|0> product state with registers `r0, r1, ...` owned as given.
pub fn zero_state(owners: &[Owner]) -> Result<PureState> {
    zero_state_with_cap(owners, DEFAULT_REGISTER_CAP)
}

pub fn zero_state_with_cap(owners: &[Owner], cap: usize) -> Result<PureState> {
    if owners.len() > cap {
        return Err(Error::RegisterCap { requested: owners.len(), cap });
    }
    let mut amplitudes = vec![ZERO; 1 << owners.len()];
    amplitudes[0] = ONE;
    let layout: Vec<(RegisterId, Owner)> = owners.iter().enumerate().map(|(i, o)| (RegisterId(i as u32), *o)).collect();
    PureState::new(amplitudes, &layout)
}

fn live_position(state: &PureState, id: RegisterId) -> Result<usize> {
    if state.consumed.contains_key(&id) {
        return Err(Error::AlreadyConsumed(id));
    }
    state.position(id).ok_or(Error::UnknownRegister(id))
}

/// Apply `u` to its target registers, identity elsewhere.
pub fn apply_unitary(state: &PureState, u: &Unitary) -> Result<PureState> {
    let mut next = state.clone();
    next.apply(u)?;
    Ok(next)
}

/// Probability of outcome 0 when measuring `id` in the computational basis,
/// snapped to exactly 0 or 1 within [`PROBABILITY_FLOOR`].
pub fn prob_zero(state: &PureState, id: RegisterId) -> Result<f64> {
    let pos = live_position(state, id)?;
    let shift = state.registers.len() - 1 - pos;
    let p0: f64 =
        state.amplitudes.iter().enumerate().filter(|(i, _)| (i >> shift) & 1 == 0).map(|(_, a)| a.norm_sqr()).sum();
    let total = state.norm().powi(2);
    let p0 = (p0 / total).clamp(0.0, 1.0);
    Ok(if p0 < PROBABILITY_FLOOR {
        0.0
    } else if 1.0 - p0 < PROBABILITY_FLOOR {
        1.0
    } else {
        p0
    })
}

/// Result of a computational-basis measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: Bit,
    pub probability: f64,
    pub post_state: PureState,
}

/// Measure `id` in the computational basis. The outcome is 0 iff
/// `draw < Pr[0]`. The register is collapsed, moved into its side's
/// environment and marked consumed.
pub fn measure(state: &PureState, id: RegisterId, draw: f64) -> Result<MeasurementRecord> {
    let mut post = state.clone();
    let (outcome, probability) = post.measure(id, draw)?;
    Ok(MeasurementRecord { outcome, probability, post_state: post })
}

/// Reduced density matrix of the registers whose owner is in `keep`.
pub fn partial_trace(state: &PureState, keep: OwnerSet) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let kept = state.registers_in(keep);
    let split = Split::new(state.registers(), &kept)?;
    let m = split.matrix(state.amplitudes());
    let rho = &m * m.adjoint();
    Ok(DensityMatrix::from_trusted(rho, kept))
}

/// Index bookkeeping for viewing a state vector as a `d_left x d_right` matrix.
pub(crate) struct Split {
    row_of: Vec<usize>,
    col_of: Vec<usize>,
    rows: usize,
    cols: usize,
}

impl Split {
    /// Rows are indexed by `left` (in the given order), columns by the
    /// remaining registers in state order.
    pub(crate) fn new(registers: &[RegisterId], left: &[RegisterId]) -> Result<Split> {
        let n = registers.len();
        let mut seen = BTreeSet::new();
        let mut left_pos = Vec::with_capacity(left.len());
        for id in left {
            if !seen.insert(*id) {
                return Err(Error::DuplicateRegister(*id));
            }
            left_pos.push(registers.iter().position(|r| r == id).ok_or(Error::UnknownRegister(*id))?);
        }
        let right_pos: Vec<usize> = (0..n).filter(|p| !left_pos.contains(p)).collect();
        let total = 1usize << n;
        let mut row_of = vec![0usize; total];
        let mut col_of = vec![0usize; total];
        for k in 0..total {
            let mut a = 0;
            for p in &left_pos {
                a = (a << 1) | ((k >> (n - 1 - p)) & 1);
            }
            let mut j = 0;
            for p in &right_pos {
                j = (j << 1) | ((k >> (n - 1 - p)) & 1);
            }
            row_of[k] = a;
            col_of[k] = j;
        }
        Ok(Split { row_of, col_of, rows: 1 << left_pos.len(), cols: 1 << right_pos.len() })
    }

    pub(crate) fn matrix(&self, amps: &[C64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for (k, a) in amps.iter().enumerate() {
            m[(self.row_of[k], self.col_of[k])] = *a;
        }
        m
    }

    pub(crate) fn scatter(&self, m: &CMatrix) -> Vec<C64> {
        (0..self.row_of.len()).map(|k| m[(self.row_of[k], self.col_of[k])]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::gates;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn bell() -> PureState {
        let s = zero_state(&[Owner::A, Owner::B]).unwrap();
        let s = apply_unitary(&s, &Unitary::new(gates::hadamard(), vec![RegisterId(0)]).unwrap()).unwrap();
        apply_unitary(&s, &Unitary::new(gates::cnot(), vec![RegisterId(0), RegisterId(1)]).unwrap()).unwrap()
    }

    #[test]
    fn zero_state_examples() {
        let s0 = zero_state(&[]).unwrap();
        assert_eq!(s0.amplitudes(), &[ONE]);
        let s2 = zero_state(&[Owner::A, Owner::B]).unwrap();
        assert_eq!(s2.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let s1 = zero_state(&[Owner::B]).unwrap();
        let rho = partial_trace(&s1, Owner::B.into()).unwrap();
        assert_eq!(rho.matrix()[(0, 0)], ONE);
        assert_eq!(rho.matrix()[(1, 1)], ZERO);
    }

    #[test]
    fn zero_state_respects_cap() {
        let err = zero_state_with_cap(&[Owner::A; 5], 4).unwrap_err();
        assert!(matches!(err, Error::RegisterCap { requested: 5, cap: 4 }));
        assert!(err.to_string().contains("cap is 4"));
    }

    #[test]
    fn hadamard_gives_plus() {
        let s = zero_state(&[Owner::A]).unwrap();
        let s = apply_unitary(&s, &Unitary::new(gates::hadamard(), vec![RegisterId(0)]).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - r(h)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - r(h)).norm() < 1e-15);
    }

    #[test]
    fn bell_from_h_and_cnot() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = bell();
        let expected = [r(h), ZERO, ZERO, r(h)];
        for (a, e) in b.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn msb_convention() {
        // X on the second register of |00> gives index 1
        let s = zero_state(&[Owner::A, Owner::B]).unwrap();
        let s = apply_unitary(&s, &Unitary::new(gates::pauli_x(), vec![RegisterId(1)]).unwrap()).unwrap();
        assert_eq!(s.amplitudes()[1], ONE);
    }

    #[test]
    fn unknown_register_rejected() {
        let s = zero_state(&[Owner::A]).unwrap();
        let u = Unitary::new(gates::pauli_x(), vec![RegisterId(7)]).unwrap();
        assert!(matches!(apply_unitary(&s, &u), Err(Error::UnknownRegister(_))));
    }

    #[test]
    fn measure_bell_branch() {
        let rec = measure(&bell(), RegisterId(0), 0.3).unwrap();
        assert_eq!(rec.outcome, Bit::Zero);
        assert!((rec.probability - 0.5).abs() < 1e-12);
        assert!((rec.post_state.amplitudes()[0] - ONE).norm() < 1e-12);
        assert_eq!(rec.post_state.owner(RegisterId(0)), Some(Owner::EnvA));
        assert!(matches!(measure(&rec.post_state, RegisterId(0), 0.1), Err(Error::AlreadyConsumed(_))));
    }

    #[test]
    fn measure_one_is_deterministic() {
        let s = zero_state(&[Owner::B]).unwrap();
        let s = apply_unitary(&s, &Unitary::new(gates::pauli_x(), vec![RegisterId(0)]).unwrap()).unwrap();
        for draw in [0.0, 0.5, 0.999] {
            let rec = measure(&s, RegisterId(0), draw).unwrap();
            assert_eq!(rec.outcome, Bit::One);
            assert_eq!(rec.probability, 1.0);
        }
    }

    #[test]
    fn measure_plus_in_diagonal_basis() {
        let h = Unitary::new(gates::hadamard(), vec![RegisterId(0)]).unwrap();
        let plus = apply_unitary(&zero_state(&[Owner::B]).unwrap(), &h).unwrap();
        let rotated = apply_unitary(&plus, &h).unwrap();
        let rec = measure(&rotated, RegisterId(0), 0.999_999).unwrap();
        assert_eq!(rec.outcome, Bit::Zero);
        assert_eq!(rec.probability, 1.0);
    }

    #[test]
    fn release_consumed_factors_out() {
        let rec = measure(&bell(), RegisterId(0), 0.9).unwrap();
        let released = rec.post_state.release_consumed();
        assert_eq!(released.registers(), &[RegisterId(1)]);
        assert!((released.amplitudes()[1] - ONE).norm() < 1e-12);
        assert!(matches!(measure(&released, RegisterId(0), 0.1), Err(Error::AlreadyConsumed(_))));
    }

    #[test]
    fn partial_trace_examples() {
        let rho = partial_trace(&bell(), Owner::B.into()).unwrap();
        assert!((rho.matrix()[(0, 0)] - r(0.5)).norm() < 1e-12);
        assert!((rho.matrix()[(1, 1)] - r(0.5)).norm() < 1e-12);
        assert!(rho.matrix()[(0, 1)].norm() < 1e-12);

        let s = zero_state(&[Owner::A, Owner::B]).unwrap();
        let s = apply_unitary(&s, &Unitary::new(gates::pauli_x(), vec![RegisterId(1)]).unwrap()).unwrap();
        let rho = partial_trace(&s, Owner::B.into()).unwrap();
        assert_eq!(rho.matrix()[(1, 1)], ONE);
        assert_eq!(rho.matrix()[(0, 0)], ZERO);

        assert!(matches!(partial_trace(&s, OwnerSet::EMPTY), Err(Error::EmptyKeepSet)));
    }

    #[test]
    fn constructor_checks() {
        assert!(matches!(
            PureState::new(vec![ONE, ONE], &[(RegisterId(0), Owner::A)]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            PureState::new(vec![ONE, ZERO, ZERO, ZERO], &[(RegisterId(0), Owner::A), (RegisterId(0), Owner::B)]),
            Err(Error::DuplicateRegister(_))
        ));
    }
}
