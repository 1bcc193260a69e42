use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, C64};
use crate::quantum::{partial_trace, Bit, DensityMatrix, Owner, RegisterId};
use crate::spectral::fidelity;

use super::engine::{run_commit, ProtocolSpec, RunConfig, Strategy};
use super::source::for_each_branch;
use super::transcript::EtaKey;

/// Tolerance on the eta-marginal comparison.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// Concealment of a commitment against a given Bob, by exact enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcealmentAudit {
    /// `E_eta[F(eta)]` with `eta` weighted by `(p0 + p1) / 2`.
    pub expected_fidelity: f64,
    /// Trace distance between Bob's classical-quantum states for b = 0, 1.
    pub trace_distance: f64,
    /// `max_eta |p0(eta) - p1(eta)|`.
    pub marginal_deviation: f64,
    /// Whether the eta-marginals agree within [`MARGINAL_TOLERANCE`].
    pub no_information: bool,
    pub eta_count: usize,
    pub branch_count: [usize; 2],
}

struct EtaGroup {
    probability: f64,
    rho: DensityMatrix,
}

fn group_by_eta(
    spec: &ProtocolSpec,
    alice: &dyn Strategy,
    bob: &dyn Strategy,
    b: Bit,
    config: &RunConfig,
    branch_cap: usize,
) -> Result<(BTreeMap<EtaKey, EtaGroup>, usize)> {
    // unnormalized sums of p * rho_B per eta
    let mut sums: BTreeMap<EtaKey, (f64, CMatrix, Vec<RegisterId>)> = BTreeMap::new();
    let count = for_each_branch(
        branch_cap,
        |s| run_commit(spec, alice, bob, b, s, config),
        |p, exec| {
            let rho = partial_trace(exec.state(), Owner::B.into())?;
            let weighted = rho.matrix() * C64::new(p, 0.0);
            match sums.entry(exec.transcript().eta()) {
                Entry::Vacant(e) => {
                    e.insert((p, weighted, rho.subsystem().to_vec()));
                }
                Entry::Occupied(mut e) => {
                    let acc = e.get_mut();
                    if acc.1.shape() != weighted.shape() {
                        return Err(Error::DimensionMismatch { expected: acc.1.nrows(), found: weighted.nrows() });
                    }
                    acc.0 += p;
                    acc.1 += weighted;
                }
            }
            Ok(())
        },
    )?;
    let mut groups = BTreeMap::new();
    for (eta, (probability, sum, subsystem)) in sums {
        let rho = DensityMatrix::new(sum / C64::new(probability, 0.0), subsystem)?;
        groups.insert(eta, EtaGroup { probability, rho });
    }
    Ok((groups, count))
}

/// Enumerate commit with `b = 0` and `b = 1`, group branches by Bob's
/// knowledge `eta`, and compare Bob's reduced states on `B` per group. An
/// `eta` reachable under only one bit contributes fidelity 0.
pub fn audit_concealment(
    spec: &ProtocolSpec,
    alice: &dyn Strategy,
    bob: &dyn Strategy,
    config: &RunConfig,
    branch_cap: usize,
) -> Result<ConcealmentAudit> {
    let (g0, c0) = group_by_eta(spec, alice, bob, Bit::Zero, config, branch_cap)?;
    let (g1, c1) = group_by_eta(spec, alice, bob, Bit::One, config, branch_cap)?;
    let mut keys: Vec<&EtaKey> = g0.keys().chain(g1.keys()).collect();
    keys.sort();
    keys.dedup();

    let mut expected = 0.0;
    let mut distance = 0.0;
    let mut deviation: f64 = 0.0;
    for key in &keys {
        let p0 = g0.get(*key).map_or(0.0, |g| g.probability);
        let p1 = g1.get(*key).map_or(0.0, |g| g.probability);
        deviation = deviation.max((p0 - p1).abs());
        match (g0.get(*key), g1.get(*key)) {
            (Some(a), Some(b)) => {
                let f = fidelity(&a.rho, &b.rho)?.value();
                expected += 0.5 * (p0 + p1) * f;
                let diff = a.rho.matrix() * C64::new(p0, 0.0) - b.rho.matrix() * C64::new(p1, 0.0);
                let (values, _) = hermitian_eigen(&diff);
                distance += 0.5 * values.iter().map(|v| v.abs()).sum::<f64>();
            }
            _ => distance += 0.5 * (p0 + p1),
        }
    }
    Ok(ConcealmentAudit {
        expected_fidelity: expected,
        trace_distance: distance,
        marginal_deviation: deviation,
        no_information: deviation <= MARGINAL_TOLERANCE,
        eta_count: keys.len(),
        branch_count: [c0, c1],
    })
}
