use std::fmt::Write;

use crate::attack::commit_prime_for;
use crate::error::Result;
use crate::linalg::C64;
use crate::protocol::{enumerate_branches, Party, PassiveBob, RunConfig, DEFAULT_BRANCH_CAP};
use crate::protocols::bb84::{bb84_protocol, W_LABEL};
use crate::quantum::{partial_trace, Bit, Owner, PureState};
use crate::spectral::fidelity;

fn ket(state: &PureState) -> String {
    let k = state.num_registers();
    let mut terms = Vec::new();
    for (i, a) in state.amplitudes().iter().enumerate() {
        if a.norm() < 1e-12 {
            continue;
        }
        let bits: String = (0..k).rev().map(|s| if (i >> s) & 1 == 1 { '1' } else { '0' }).collect();
        terms.push(format!("{}|{bits}>", amp(*a)));
    }
    terms.join(" ")
}

fn amp(a: C64) -> String {
    if a.im.abs() < 1e-12 {
        format!("{:+.6}", a.re)
    } else {
        format!("({:+.6}{:+.6}i)", a.re, a.im)
    }
}

fn layout(state: &PureState) -> String {
    state.layout().iter().map(|(r, o)| format!("{r}:{o}")).collect::<Vec<_>>().join(" ")
}

fn matrix(m: &crate::linalg::CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| amp(m[(i, j)])).collect();
        let _ = writeln!(out, "    [{}]", row.join(", "));
    }
    out
}

/// A text walkthrough of the one-position BB84 commitment: the honest
/// states Bob receives, and the purified states when Alice keeps her
/// halves of the Bell pairs, which do not depend on the committed bit.
pub fn bb84_walkthrough() -> Result<String> {
    let spec = bb84_protocol(1)?;
    let passive = PassiveBob;
    let mut out = String::new();

    let _ = writeln!(out, "Honest commit, n = 1. Alice measures her half of a Bell pair in the basis of b;");
    let _ = writeln!(out, "Bob holds the other half.");
    for b in [Bit::Zero, Bit::One] {
        let branches = enumerate_branches(&spec, spec.alice.as_ref(), &passive, b, &RunConfig::classical(), 16)?;
        for (t, exec) in &branches {
            let w = t.private_values(Party::Alice, W_LABEL);
            let _ = writeln!(
                out,
                "  b = {b}, w = {}, Pr = {:.3}: {}   [{}]",
                w.first().map_or("?".into(), |x| x.to_string()),
                t.branch_probability,
                ket(exec.state()),
                layout(exec.state())
            );
        }
    }

    let _ = writeln!(out);
    let _ = writeln!(out, "Purified commit: Alice keeps her half (registers in order r, q).");
    let mut states = Vec::new();
    for b in [Bit::Zero, Bit::One] {
        let alice = commit_prime_for(&spec, b);
        let branches = enumerate_branches(&spec, &alice, &passive, b, &RunConfig::coherent(), DEFAULT_BRANCH_CAP)?;
        let (_, exec) = branches.into_iter().next().expect("a run has at least one branch");
        let state = exec.state().clone();
        let _ = writeln!(out, "  b = {b}: {}   [{}]", ket(&state), layout(&state));
        states.push(state);
    }
    let overlap = states[0].inner(&states[1])?.norm();
    let _ = writeln!(out, "  |<psi_0|psi_1>| = {overlap:.12}");

    let _ = writeln!(out);
    let _ = writeln!(out, "Bob's reduced state:");
    let mut rhos = Vec::new();
    for (b, s) in states.iter().enumerate() {
        let rho = partial_trace(s, Owner::B.into())?;
        let _ = write!(out, "  rho_B(b = {b}) =\n{}", matrix(rho.matrix()));
        rhos.push(rho);
    }
    let f = fidelity(&rhos[0], &rhos[1])?.value();
    let _ = writeln!(out, "  F(rho_B(0), rho_B(1)) = {f:.12}");
    let _ = writeln!(out, "The two purified states are the same state, so Alice can postpone her choice");
    let _ = writeln!(out, "of basis, and hence of b, until the unveil.");
    Ok(out)
}
