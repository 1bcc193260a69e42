//! A one-qubit commitment with tunable concealment: `b = 0` sends `|0>`,
//! `b = 1` sends `cos a |0> + sin a |1>`. Alice unveils by announcing `b`
//! and Bob checks the qubit against the announced encoding.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::protocol::{
    Basis, BobView, Party, PartyContext, Phase, ProtocolSpec, Strategy, UnveilResult, COMMITTED_BIT_LABEL,
};
use crate::quantum::{gates, Bit};

pub const ANCILLA_LABEL: &str = "a";
pub const QUBIT_LABEL: &str = "q";
pub const VERIFY_LABEL: &str = "verify";

#[derive(Clone, Debug)]
pub struct ToyAlice {
    alpha: f64,
}

impl Strategy for ToyAlice {
    fn party(&self) -> Party {
        Party::Alice
    }

    fn name(&self) -> &str {
        "toy-honest-alice"
    }

    fn commit_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        // the ancilla stays in Alice's lab; it gives purifications room
        ctx.alloc(ANCILLA_LABEL, 0)?;
        let q = ctx.alloc(QUBIT_LABEL, 0)?;
        if ctx.committed_bit()?.is_one() {
            ctx.gate("Ry", gates::ry(2.0 * self.alpha), &[q])?;
        }
        ctx.send_quantum(q)
    }

    fn unveil_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        ctx.send_committed_bit()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ToyBob {
    alpha: f64,
}

impl Strategy for ToyBob {
    fn party(&self) -> Party {
        Party::Bob
    }

    fn name(&self) -> &str {
        "toy-honest-bob"
    }

    fn commit_step(&self, _step: usize, _ctx: &mut PartyContext<'_>) -> Result<()> {
        Ok(())
    }

    fn unveil_step(&self, _step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        let announced = ctx.transcript().public_values(Party::Alice, Phase::Unveil, COMMITTED_BIT_LABEL);
        let q = ctx.find(QUBIT_LABEL, 0)?;
        if announced == [Bit::One] {
            ctx.gate("Ry", gates::ry(-2.0 * self.alpha), &[q])?;
        }
        ctx.discard(q, Basis::Plus, VERIFY_LABEL)?;
        Ok(())
    }
}

fn decode_view(view: &BobView<'_>) -> UnveilResult {
    let t = view.transcript;
    let announced = t.public_values(Party::Alice, Phase::Unveil, COMMITTED_BIT_LABEL);
    let verify = t.private_values(Party::Bob, VERIFY_LABEL);
    match (announced.as_slice(), verify.as_slice()) {
        ([b], [Bit::Zero]) => UnveilResult::Revealed(*b),
        _ => UnveilResult::Inconclusive,
    }
}

pub fn toy_protocol(alpha: f64) -> Result<ProtocolSpec> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&alpha) {
        return Err(Error::OutOfRange { what: "alpha", detail: format!("{alpha} not in [0, pi/2]") });
    }
    Ok(ProtocolSpec {
        name: "toy".into(),
        n: 1,
        commit_schedule: vec![Party::Alice],
        unveil_schedule: vec![Party::Alice, Party::Bob],
        alice: Arc::new(ToyAlice { alpha }),
        bob: Arc::new(ToyBob { alpha }),
        decode: Arc::new(decode_view),
    })
}
