//! The BB84 bit commitment: Alice encodes a random string `w` in the basis
//! `+` (for 0) or `x` (for 1) and sends the qubits; Bob measures each in a
//! random basis. To unveil, Alice announces `w`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::protocol::{
    verdict_distribution, Basis, BobView, Party, PartyContext, Phase, ProtocolSpec, RunConfig, Strategy, UnveilResult,
};
use crate::quantum::{gates, Bit};

pub const W_LABEL: &str = "w";
pub const QUBIT_LABEL: &str = "q";
pub const THETA_HAT_LABEL: &str = "theta_hat";
pub const W_HAT_LABEL: &str = "w_hat";
pub const CHEAT_LABEL: &str = "c";

/// Largest supported number of positions.
pub const MAX_POSITIONS: usize = 16;

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_POSITIONS {
        return Err(Error::OutOfRange { what: "n", detail: format!("{n} not in 1..={MAX_POSITIONS}") });
    }
    Ok(())
}

/// Bell pair on `w[i]`, `q[i]`; then `w[i]` goes to the environment in the
/// committed basis (producing `w_i`) and `q[i]` goes to Bob.
fn encode_positions(n: usize, ctx: &mut PartyContext<'_>, discard: bool) -> Result<()> {
    let theta = Basis::for_bit(ctx.committed_bit()?);
    for i in 0..n {
        let r = ctx.alloc(W_LABEL, i)?;
        let q = ctx.alloc(QUBIT_LABEL, i)?;
        ctx.gate("H", gates::hadamard(), &[r])?;
        ctx.gate("CNOT", gates::cnot(), &[r, q])?;
        if discard {
            ctx.discard(r, theta, W_LABEL)?;
        }
        ctx.send_quantum(q)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct HonestAlice {
    n: usize,
}

impl Strategy for HonestAlice {
    fn party(&self) -> Party {
        Party::Alice
    }

    fn name(&self) -> &str {
        "bb84-honest-alice"
    }

    fn commit_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        encode_positions(self.n, ctx, true)
    }

    fn unveil_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        for i in 0..self.n {
            let rec = ctx.find_record(W_LABEL, i)?;
            ctx.send_classical(rec)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct HonestBob {
    n: usize,
}

impl Strategy for HonestBob {
    fn party(&self) -> Party {
        Party::Bob
    }

    fn name(&self) -> &str {
        "bb84-honest-bob"
    }

    fn commit_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        for i in 0..self.n {
            let t = ctx.alloc(THETA_HAT_LABEL, i)?;
            ctx.gate("H", gates::hadamard(), &[t])?;
            let theta_hat = ctx.discard(t, Basis::Plus, THETA_HAT_LABEL)?;
            let q = ctx.find(QUBIT_LABEL, i)?;
            ctx.gate_if(theta_hat, Bit::One, "H", gates::hadamard(), &[q])?;
            ctx.discard(q, Basis::Plus, W_HAT_LABEL)?;
        }
        Ok(())
    }

    fn unveil_step(&self, _step: usize, _ctx: &mut PartyContext<'_>) -> Result<()> {
        Ok(())
    }
}

/// Bob's verdict from Alice's announced `w`, his outcomes `w_hat` and his
/// bases `theta_hat`. Each disagreement `w_i != w_hat_i` shows the committed
/// basis differs from `theta_hat_i`. No disagreement, or disagreements
/// pointing at different bases, give ⊥.
pub fn bb84_decode(w: &[Bit], w_hat: &[Bit], theta_hat: &[Basis]) -> Result<UnveilResult> {
    if w.len() != w_hat.len() || w.len() != theta_hat.len() {
        return Err(Error::LengthMismatch(format!(
            "w has {}, w_hat {}, theta_hat {} entries",
            w.len(),
            w_hat.len(),
            theta_hat.len()
        )));
    }
    let mut inferred: Option<Bit> = None;
    for i in 0..w.len() {
        if w[i] == w_hat[i] {
            continue;
        }
        // theta != theta_hat_i, so the committed bit is the other basis' bit
        let bit = theta_hat[i].bit().flip();
        match inferred {
            None => inferred = Some(bit),
            Some(b) if b != bit => return Ok(UnveilResult::Inconclusive),
            Some(_) => {}
        }
    }
    Ok(inferred.map_or(UnveilResult::Inconclusive, UnveilResult::Revealed))
}

fn decode_view(view: &BobView<'_>) -> UnveilResult {
    let t = view.transcript;
    let w = t.public_values(Party::Alice, Phase::Unveil, W_LABEL);
    let w_hat = t.private_values(Party::Bob, W_HAT_LABEL);
    let theta_hat: Vec<Basis> = t.private_values(Party::Bob, THETA_HAT_LABEL).into_iter().map(Basis::for_bit).collect();
    if w.len() != view.n {
        return UnveilResult::Inconclusive;
    }
    bb84_decode(&w, &w_hat, &theta_hat).unwrap_or(UnveilResult::Inconclusive)
}

pub fn bb84_protocol(n: usize) -> Result<ProtocolSpec> {
    check_n(n)?;
    Ok(ProtocolSpec {
        name: "bb84".into(),
        n,
        commit_schedule: vec![Party::Alice, Party::Bob],
        unveil_schedule: vec![Party::Alice],
        alice: Arc::new(HonestAlice { n }),
        bob: Arc::new(HonestBob { n }),
        decode: Arc::new(decode_view),
    })
}

/// Alice keeps her halves of the Bell pairs and only measures them, in the
/// basis of `reveal`, at unveil time.
#[derive(Clone, Debug)]
pub struct EprAttack {
    n: usize,
    reveal: Bit,
}

impl EprAttack {
    pub fn reveal(&self) -> Bit {
        self.reveal
    }
}

pub fn epr_attack_strategy(n: usize, reveal: Bit) -> Result<EprAttack> {
    check_n(n)?;
    Ok(EprAttack { n, reveal })
}

impl Strategy for EprAttack {
    fn party(&self) -> Party {
        Party::Alice
    }

    fn name(&self) -> &str {
        "bb84-epr-attack"
    }

    fn effective_bit(&self, _requested: Bit) -> Bit {
        self.reveal
    }

    fn commit_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        encode_positions(self.n, ctx, false)
    }

    fn unveil_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        let theta = Basis::for_bit(self.reveal);
        for i in 0..self.n {
            let r = ctx.find(W_LABEL, i)?;
            let rec = ctx.discard(r, theta, W_LABEL)?;
            ctx.send_classical(rec)?;
        }
        Ok(())
    }
}

/// Commits honestly to 0, then announces `w` with the positions in `mask`
/// flipped, hoping Bob reads a 1.
#[derive(Clone, Debug)]
pub struct FlipCheater {
    n: usize,
    mask: Vec<bool>,
}

impl FlipCheater {
    pub fn new(mask: Vec<bool>) -> Result<FlipCheater> {
        check_n(mask.len())?;
        if !mask.iter().any(|m| *m) {
            return Err(Error::OutOfRange { what: "flip mask", detail: "no position flipped".into() });
        }
        Ok(FlipCheater { n: mask.len(), mask })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

/// The baseline classical cheater: flip the first position only.
pub fn classical_guess_strategy(n: usize) -> Result<FlipCheater> {
    check_n(n)?;
    FlipCheater::new((0..n).map(|i| i == 0).collect())
}

impl Strategy for FlipCheater {
    fn party(&self) -> Party {
        Party::Alice
    }

    fn name(&self) -> &str {
        "bb84-flip-cheater"
    }

    fn effective_bit(&self, _requested: Bit) -> Bit {
        Bit::Zero
    }

    fn commit_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        encode_positions(self.n, ctx, true)
    }

    fn unveil_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        for i in 0..self.n {
            let rec = ctx.find_record(W_LABEL, i)?;
            if self.mask[i] {
                // c = NOT w_i, generated locally so it can be announced
                let c = ctx.alloc(CHEAT_LABEL, i)?;
                ctx.gate_if(rec, Bit::Zero, "X", gates::pauli_x(), &[c])?;
                let flipped = ctx.discard(c, Basis::Plus, W_LABEL)?;
                ctx.send_classical(flipped)?;
            } else {
                ctx.send_classical(rec)?;
            }
        }
        Ok(())
    }
}

/// Best success of any flip pattern at announcing 1 after committing to 0,
/// by exact enumeration over all `2^n - 1` patterns.
pub fn optimal_classical_cheat(n: usize, config: &RunConfig, branch_cap: usize) -> Result<(f64, Vec<bool>)> {
    let spec = bb84_protocol(n)?;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for bits in 1u32..(1 << n) {
        let mask: Vec<bool> = (0..n).map(|i| (bits >> i) & 1 == 1).collect();
        let cheater = FlipCheater::new(mask.clone())?;
        let success = verdict_distribution(&spec, &cheater, spec.bob.as_ref(), Bit::Zero, config, branch_cap)?[1];
        if success > best.0 + 1e-15 {
            best = (success, mask);
        }
    }
    Ok(best)
}
