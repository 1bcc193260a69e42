use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::quantum::{gates, Bit, Owner, OwnerSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    /// The party's laboratory.
    pub fn lab(self) -> Owner {
        match self {
            Party::Alice => Owner::A,
            Party::Bob => Owner::B,
        }
    }

    /// Where the party's measurement records go.
    pub fn environment(self) -> Owner {
        match self {
            Party::Alice => Owner::EnvA,
            Party::Bob => Owner::EnvB,
        }
    }

    pub fn side(self) -> OwnerSet {
        match self {
            Party::Alice => OwnerSet::ALICE_SIDE,
            Party::Bob => OwnerSet::BOB_SIDE,
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Commit,
    Unveil,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Commit => "commit",
            Phase::Unveil => "unveil",
        }
    }
}

/// Where an execution stands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecutionPhase {
    PostCommit,
    PostUnveil,
}

impl ExecutionPhase {
    pub fn name(self) -> &'static str {
        match self {
            ExecutionPhase::PostCommit => "post-commit",
            ExecutionPhase::PostUnveil => "post-unveil",
        }
    }
}

/// Single-qubit measurement basis: rectilinear or diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Plus,
    Times,
}

impl Basis {
    /// The BB84 basis used to encode `b`: `+` for 0, `×` for 1.
    pub fn for_bit(b: Bit) -> Basis {
        match b {
            Bit::Zero => Basis::Plus,
            Bit::One => Basis::Times,
        }
    }

    pub fn bit(self) -> Bit {
        match self {
            Basis::Plus => Bit::Zero,
            Basis::Times => Bit::One,
        }
    }

    /// Unitary taking this basis to the computational one (self-inverse).
    pub fn rotation(self) -> Option<CMatrix> {
        match self {
            Basis::Plus => None,
            Basis::Times => Some(gates::hadamard()),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Plus => "+",
            Basis::Times => "x",
        })
    }
}

/// How discards of non-withholding parties are simulated.
///
/// `Classical` measures and factors the register out of the state, branching
/// on the outcome. `Coherent` leaves the register unmeasured in the party's
/// environment area, so no branching happens and the global state stays pure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvironmentMode {
    Classical,
    Coherent,
}

/// Bob's verdict after unveil.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnveilResult {
    Revealed(Bit),
    Inconclusive,
}

impl UnveilResult {
    pub fn bit(self) -> Option<Bit> {
        match self {
            UnveilResult::Revealed(b) => Some(b),
            UnveilResult::Inconclusive => None,
        }
    }

    pub fn is_inconclusive(self) -> bool {
        self == UnveilResult::Inconclusive
    }
}

impl fmt::Display for UnveilResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnveilResult::Revealed(b) => write!(f, "{b}"),
            UnveilResult::Inconclusive => f.write_str("⊥"),
        }
    }
}
