use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{Bit, RegisterId};

use super::{Party, Phase};

/// A bit copied into the public store.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicBit {
    pub sender: Party,
    pub phase: Phase,
    pub label: String,
    pub value: Bit,
}

/// A measurement outcome held in a party's environment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivateBit {
    pub label: String,
    pub register: RegisterId,
    pub value: Bit,
}

/// Classical record of one branch: the public string `xi_s`, the private
/// strings `xi_a`, `xi_b`, and the probability of the branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTranscript {
    pub xi_s: Vec<PublicBit>,
    pub xi_a: Vec<PrivateBit>,
    pub xi_b: Vec<PrivateBit>,
    pub branch_probability: f64,
}

/// Public bits as `(sender, label, value)`, in order. Equal keys mean equal
/// strings at equal positions.
pub type GammaKey = Vec<(Party, String, Bit)>;

/// Bob's knowledge after commit: the public string and his private string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EtaKey {
    pub public: GammaKey,
    pub private: Vec<(String, Bit)>,
}

impl Default for ClassicalTranscript {
    fn default() -> Self {
        ClassicalTranscript { xi_s: Vec::new(), xi_a: Vec::new(), xi_b: Vec::new(), branch_probability: 1.0 }
    }
}

impl ClassicalTranscript {
    pub fn new() -> ClassicalTranscript {
        ClassicalTranscript::default()
    }

    pub fn private(&self, party: Party) -> &[PrivateBit] {
        match party {
            Party::Alice => &self.xi_a,
            Party::Bob => &self.xi_b,
        }
    }

    pub(crate) fn private_mut(&mut self, party: Party) -> &mut Vec<PrivateBit> {
        match party {
            Party::Alice => &mut self.xi_a,
            Party::Bob => &mut self.xi_b,
        }
    }

    /// Public bits sent during `phase`.
    pub fn public_in(&self, phase: Phase) -> impl Iterator<Item = &PublicBit> {
        self.xi_s.iter().filter(move |p| p.phase == phase)
    }

    /// `gamma`: the public string restricted to the commit phase.
    pub fn gamma(&self) -> GammaKey {
        self.public_in(Phase::Commit).map(|p| (p.sender, p.label.clone(), p.value)).collect()
    }

    /// `eta = (xi_s, xi_b)` over the commit phase.
    pub fn eta(&self) -> EtaKey {
        EtaKey { public: self.gamma(), private: self.xi_b.iter().map(|p| (p.label.clone(), p.value)).collect() }
    }

    /// Values of `party`'s private bits with `label`, in order.
    pub fn private_values(&self, party: Party, label: &str) -> Vec<Bit> {
        self.private(party).iter().filter(|p| p.label == label).map(|p| p.value).collect()
    }

    /// Values of public bits from `sender` in `phase` with `label`, in order.
    pub fn public_values(&self, sender: Party, phase: Phase, label: &str) -> Vec<Bit> {
        self.xi_s
            .iter()
            .filter(|p| p.sender == sender && p.phase == phase && p.label == label)
            .map(|p| p.value)
            .collect()
    }

    /// The public string as text, e.g. `"100"`.
    pub fn public_string(&self) -> String {
        self.xi_s.iter().map(|p| p.value.to_string()).collect()
    }
}

/// Render a gamma key for reports, e.g. `"Alice:c=1 Bob:x=0"` or `"-"`.
pub fn gamma_label(gamma: &GammaKey) -> String {
    if gamma.is_empty() {
        return "-".into();
    }
    gamma.iter().map(|(p, l, v)| format!("{p}:{l}={v}")).collect::<Vec<_>>().join(" ")
}

/// Copy the sender's private bit held in `register` into the public string.
pub fn transmit_classical(
    transcript: &ClassicalTranscript,
    sender: Party,
    phase: Phase,
    register: RegisterId,
) -> Result<ClassicalTranscript> {
    let bit = transcript
        .private(sender)
        .iter()
        .rev()
        .find(|p| p.register == register)
        .ok_or(Error::UngeneratedBit { party: sender, register })?;
    let mut next = transcript.clone();
    next.xi_s.push(PublicBit { sender, phase, label: bit.label.clone(), value: bit.value });
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_private(party: Party, bits: &[(u32, Bit)]) -> ClassicalTranscript {
        let mut t = ClassicalTranscript::new();
        for (r, v) in bits {
            t.private_mut(party).push(PrivateBit { label: "x".into(), register: RegisterId(*r), value: *v });
        }
        t
    }

    #[test]
    fn transmit_appends_in_order() {
        let t = with_private(Party::Alice, &[(0, Bit::One)]);
        let t = transmit_classical(&t, Party::Alice, Phase::Commit, RegisterId(0)).unwrap();
        assert_eq!(t.public_string(), "1");

        let mut t = t;
        t.xi_s.push(PublicBit { sender: Party::Alice, phase: Phase::Commit, label: "x".into(), value: Bit::Zero });
        t.xi_b.push(PrivateBit { label: "y".into(), register: RegisterId(5), value: Bit::Zero });
        let t = transmit_classical(&t, Party::Bob, Phase::Commit, RegisterId(5)).unwrap();
        assert_eq!(t.public_string(), "100");
    }

    #[test]
    fn transmit_rejects_foreign_bits() {
        let t = with_private(Party::Alice, &[(0, Bit::One)]);
        assert!(matches!(
            transmit_classical(&t, Party::Bob, Phase::Commit, RegisterId(0)),
            Err(Error::UngeneratedBit { party: Party::Bob, .. })
        ));
        assert!(transmit_classical(&t, Party::Alice, Phase::Commit, RegisterId(9)).is_err());
    }

    #[test]
    fn eta_ignores_unveil_and_alice_private() {
        let mut t = with_private(Party::Alice, &[(0, Bit::One)]);
        t.xi_s.push(PublicBit { sender: Party::Alice, phase: Phase::Unveil, label: "w".into(), value: Bit::One });
        assert_eq!(t.eta(), EtaKey::default_empty());
    }

    impl EtaKey {
        fn default_empty() -> EtaKey {
            EtaKey { public: Vec::new(), private: Vec::new() }
        }
    }
}
