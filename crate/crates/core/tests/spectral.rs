mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qbc_core::linalg::{frobenius, C64};
use qbc_core::quantum::{apply_unitary, partial_trace, DensityMatrix, Owner, OwnerSet, PureState, RegisterId, Unitary};
use qbc_core::spectral::{fidelity, schmidt, steering_unitary, trace_distance, uhlmann_partner, Bipartition};

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schmidt_reconstructs_and_spectra_agree(seed in any::<u64>(), qa in 1usize..4, qb in 1usize..4) {
        let psi = random_state(&mut rng(seed), qa, qb);
        let d = schmidt(&psi, &Bipartition::alice_bob()).unwrap();
        let back = d.reconstruct().unwrap();
        prop_assert!(psi.distance(&back).unwrap() <= 1e-10);

        let lambdas = d.lambdas();
        prop_assert!((lambdas.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        // purity of rho_B from the amplitudes directly
        let rho_b = reduce_to_b(psi.amplitudes(), qa);
        let purity: f64 = rho_b.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((lambdas.iter().map(|l| l * l).sum::<f64>() - purity).abs() < 1e-10);

        let mut ea = sorted_desc(partial_trace(&psi, Owner::A.into()).unwrap().eigenvalues());
        let mut eb = sorted_desc(partial_trace(&psi, Owner::B.into()).unwrap().eigenvalues());
        let len = ea.len().max(eb.len());
        ea.resize(len, 0.0);
        eb.resize(len, 0.0);
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn pure_state_fidelity_is_overlap(seed in any::<u64>(), k in 1usize..4) {
        let mut r = rng(seed);
        let a = random_vector(&mut r, 1 << k);
        let b = random_vector(&mut r, 1 << k);
        let regs: Vec<RegisterId> = (0..k as u32).map(RegisterId).collect();
        let ra = DensityMatrix::pure(&a, regs.clone()).unwrap();
        let rb = DensityMatrix::pure(&b, regs).unwrap();
        let ov = inner(&a, &b).norm();
        prop_assert!((fidelity(&ra, &rb).unwrap().value() - ov).abs() <= 1e-9);
        prop_assert!((trace_distance(&ra, &rb).unwrap() - (1.0 - ov * ov).max(0.0).sqrt()).abs() <= 1e-9);
    }

    #[test]
    fn qubit_fidelity_closed_form(
        r in prop::array::uniform3(-1.0f64..1.0),
        s in prop::array::uniform3(-1.0f64..1.0),
        lr in 0.0f64..0.99,
        ls in 0.0f64..0.99,
    ) {
        let scale = |v: [f64; 3], len: f64| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            [v[0] * len / n, v[1] * len / n, v[2] * len / n]
        };
        let (r, s) = (scale(r, lr), scale(s, ls));
        let rho = DensityMatrix::new(bloch_matrix(r), vec![RegisterId(0)]).unwrap();
        let sigma = DensityMatrix::new(bloch_matrix(s), vec![RegisterId(0)]).unwrap();
        let f = fidelity(&rho, &sigma).unwrap().value();
        prop_assert!((f - qubit_fidelity(r, s)).abs() <= 1e-9, "{} vs {}", f, qubit_fidelity(r, s));
        // symmetric
        prop_assert!((f - fidelity(&sigma, &rho).unwrap().value()).abs() <= 1e-12);
    }

    #[test]
    fn measures_are_unitarily_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p0 = random_state(&mut r, 1, 2);
        let p1 = random_state(&mut r, 2, 2);
        let rho = partial_trace(&p0, Owner::B.into()).unwrap();
        let sigma = partial_trace(&p1, Owner::B.into()).unwrap();
        let u = random_unitary(&mut r, 4);
        let conj = |m: &DensityMatrix| {
            DensityMatrix::new(&u * m.matrix() * u.adjoint(), m.subsystem().to_vec()).unwrap()
        };
        let (rho2, sigma2) = (conj(&rho), conj(&sigma));
        let f = fidelity(&rho, &sigma).unwrap().value();
        prop_assert!((f - fidelity(&rho2, &sigma2).unwrap().value()).abs() <= 1e-9);
        let t = trace_distance(&rho, &sigma).unwrap();
        prop_assert!((t - trace_distance(&rho2, &sigma2).unwrap()).abs() <= 1e-9);
        // Fuchs-van de Graaf
        prop_assert!(1.0 - f <= t + 1e-12);
        prop_assert!(t <= (1.0 - f * f).max(0.0).sqrt() + 1e-9);
    }

    #[test]
    fn uhlmann_partner_is_optimal(seed in any::<u64>(), qb in 1usize..3) {
        let mut r = rng(seed);
        let psi0 = random_state(&mut r, 1, qb);
        let psi1 = random_state(&mut r, 1, qb);
        let rho0 = partial_trace(&psi0, Owner::B.into()).unwrap();
        let partner = uhlmann_partner(&rho0, &psi1, &Bipartition::alice_bob()).unwrap();

        let brute = brute_force_overlap(psi0.amplitudes(), psi1.amplitudes());
        prop_assert!((partner.overlap - brute).abs() <= 1e-6, "{} vs {}", partner.overlap, brute);
        let actual = inner(partner.state.amplitudes(), psi1.amplitudes());
        prop_assert!((actual.re - partner.overlap).abs() <= 1e-9 && actual.im.abs() <= 1e-9);
        // it is a purification of rho0
        let back = reduce_to_b(partner.state.amplitudes(), 1);
        prop_assert!(frobenius(&(back - rho0.matrix())) <= 1e-9);
        // and the overlap is the fidelity of the reductions
        let rho1 = partial_trace(&psi1, Owner::B.into()).unwrap();
        prop_assert!((fidelity(&rho0, &rho1).unwrap().value() - partner.overlap).abs() <= 1e-9);
    }

    #[test]
    fn steering_recovers_a_local_unitary(seed in any::<u64>(), qa in 1usize..3, qb in 1usize..3) {
        let mut r = rng(seed);
        let from = random_state(&mut r, qa, qb);
        let v = random_unitary(&mut r, 1 << qa);
        let alice: Vec<RegisterId> = (0..qa as u32).map(RegisterId).collect();
        let to = apply_unitary(&from, &Unitary::new(v, alice).unwrap()).unwrap();
        let u = steering_unitary(&from, &to, Owner::A.into()).unwrap();
        let steered = apply_unitary(&from, &u).unwrap();
        prop_assert!(steered.distance(&to).unwrap() <= 1e-8);
    }
}

#[test]
fn steering_between_equal_states_is_trivial() {
    let mut r = rng(5);
    for _ in 0..20 {
        let psi = random_state(&mut r, 2, 2);
        let u = steering_unitary(&psi, &psi, Owner::A.into()).unwrap();
        assert!(u.distance_to_phase_identity() <= 1e-8);
    }
}

#[test]
fn steering_rejects_different_reductions() {
    let mut r = rng(6);
    let a = random_state(&mut r, 1, 1);
    let b = random_state(&mut r, 1, 1);
    assert!(steering_unitary(&a, &b, Owner::A.into()).is_err());
}

#[test]
fn uhlmann_needs_room_to_purify() {
    // rank-4 rho on two qubits cannot be purified by one qubit
    let mut r = rng(8);
    let big = random_state(&mut r, 2, 2);
    let rho = partial_trace(&big, Owner::B.into()).unwrap();
    let layout = [(RegisterId(0), Owner::A), (RegisterId(2), Owner::B), (RegisterId(3), Owner::B)];
    let small = PureState::new(random_vector(&mut r, 8), &layout).unwrap();
    let err = uhlmann_partner(&rho, &small, &Bipartition::alice_bob()).unwrap_err();
    assert!(matches!(err, qbc_core::Error::PurificationTooSmall { .. }));
}

#[test]
fn bipartition_must_cover_every_register() {
    let psi = PureState::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &[(RegisterId(0), Owner::EnvA)]).unwrap();
    let cut = Bipartition::new(OwnerSet::of(&[Owner::A]), OwnerSet::of(&[Owner::B])).unwrap();
    assert!(schmidt(&psi, &cut).is_err());
}
