//! Test-side helpers: random states and unitaries, and oracles that do not
//! go through the library's spectral code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;

use qbc_core::linalg::{CMatrix, C64};
use qbc_core::quantum::{Owner, PureState, RegisterId};

pub fn layout(qa: usize, qb: usize) -> Vec<(RegisterId, Owner)> {
    (0..qa + qb).map(|i| (RegisterId(i as u32), if i < qa { Owner::A } else { Owner::B })).collect()
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen::<f64>().max(1e-300);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn random_vector(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-random state on `qa` qubits of A (most significant) and `qb` of B.
pub fn random_state(rng: &mut impl Rng, qa: usize, qb: usize) -> PureState {
    PureState::new(random_vector(rng, 1 << (qa + qb)), &layout(qa, qb)).unwrap()
}

/// Haar-random unitary via QR with the phase fix on R's diagonal.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// `<a|b>`, summed by hand.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Amplitudes as a matrix with rows indexed by the top `qa` qubits.
pub fn as_matrix(amps: &[C64], qa: usize) -> CMatrix {
    let cols = amps.len() >> qa;
    DMatrix::from_fn(1 << qa, cols, |i, j| amps[i * cols + j])
}

/// `rho_B[j, k] = sum_a psi[a, j] conj(psi[a, k])`, entry by entry.
pub fn reduce_to_b(amps: &[C64], qa: usize) -> CMatrix {
    let m = as_matrix(amps, qa);
    let d = m.ncols();
    DMatrix::from_fn(d, d, |j, k| (0..m.nrows()).map(|a| m[(a, j)] * m[(a, k)].conj()).sum())
}

/// `max_U |<psi1|(U ⊗ I)|psi0>|` over one-qubit U on the top register, by
/// a grid over SU(2) followed by a shrinking pattern search. The global
/// phase does not change the modulus.
pub fn brute_force_overlap(psi0: &[C64], psi1: &[C64]) -> f64 {
    let m0 = as_matrix(psi0, 1);
    let m1 = as_matrix(psi1, 1);
    // <psi1|(U⊗I)psi0> = Tr(M1^dag U M0) = sum_{a,b} U[a,b] K[b,a], K = M0 M1^dag
    let k = &m0 * m1.adjoint();
    let value = |x: &[f64; 3]| {
        let (t, p, c) = (x[0], x[1], x[2]);
        let a = C64::from_polar(t.cos(), p);
        let b = C64::from_polar(t.sin(), c);
        let u = [[a, -b.conj()], [b, a.conj()]];
        let mut s = C64::new(0.0, 0.0);
        for (r, row) in u.iter().enumerate() {
            for (col, entry) in row.iter().enumerate() {
                s += entry * k[(col, r)];
            }
        }
        s.norm()
    };
    let steps = 36;
    let mut best = ([0.0; 3], f64::NEG_INFINITY);
    for i in 0..=steps {
        for j in 0..steps {
            for l in 0..steps {
                let x = [
                    i as f64 * std::f64::consts::FRAC_PI_2 / steps as f64,
                    j as f64 * std::f64::consts::TAU / steps as f64,
                    l as f64 * std::f64::consts::TAU / steps as f64,
                ];
                let v = value(&x);
                if v > best.1 {
                    best = (x, v);
                }
            }
        }
    }
    let mut h = 0.1;
    while h > 1e-10 {
        let mut improved = false;
        for d in 0..3 {
            for sign in [1.0, -1.0] {
                let mut x = best.0;
                x[d] += sign * h;
                let v = value(&x);
                if v > best.1 {
                    best = (x, v);
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best.1
}

/// Closed-form fidelity of qubit states with Bloch vectors `r`, `s`:
/// `F^2 = Tr(rho sigma) + 2 sqrt(det rho det sigma)`.
pub fn qubit_fidelity(r: [f64; 3], s: [f64; 3]) -> f64 {
    let dot: f64 = r.iter().zip(&s).map(|(a, b)| a * b).sum();
    let rr: f64 = r.iter().map(|a| a * a).sum();
    let ss: f64 = s.iter().map(|a| a * a).sum();
    let det_r = ((1.0 - rr) / 4.0).max(0.0);
    let det_s = ((1.0 - ss) / 4.0).max(0.0);
    ((1.0 + dot) / 2.0 + 2.0 * (det_r * det_s).sqrt()).sqrt()
}

pub fn bloch_matrix(r: [f64; 3]) -> CMatrix {
    let h = 0.5;
    DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(h * (1.0 + r[2]), 0.0),
            C64::new(h * r[0], -h * r[1]),
            C64::new(h * r[0], h * r[1]),
            C64::new(h * (1.0 - r[2]), 0.0),
        ],
    )
}
