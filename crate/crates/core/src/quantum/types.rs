use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A classical bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn from_bool(b: bool) -> Bit {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }

    pub fn is_one(self) -> bool {
        self == Bit::One
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl From<Bit> for u8 {
    fn from(b: Bit) -> u8 {
        b as u8
    }
}

impl TryFrom<u8> for Bit {
    type Error = Error;

    fn try_from(v: u8) -> Result<Bit> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            _ => Err(Error::OutOfRange { what: "bit", detail: format!("{v} is not 0 or 1") }),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegisterId(pub u32);

impl fmt::Display for RegisterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// The area of the global system a register lives in.
///
/// `A` and `B` are the parties' laboratories, `EnvA`/`EnvB` the parts of the
/// environment holding their private records, and `StoreA`/`StoreB` the two
/// halves of the store for transmitted classical bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Owner {
    A,
    B,
    EnvA,
    EnvB,
    StoreA,
    StoreB,
}

impl Owner {
    pub const ALL: [Owner; 6] = [Owner::A, Owner::B, Owner::EnvA, Owner::EnvB, Owner::StoreA, Owner::StoreB];

    fn mask(self) -> u8 {
        1 << (self as u8)
    }

    /// Environment area that absorbs a measurement made on this side.
    pub fn environment(self) -> Owner {
        match self {
            Owner::A | Owner::EnvA | Owner::StoreA => Owner::EnvA,
            Owner::B | Owner::EnvB | Owner::StoreB => Owner::EnvB,
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Owner::A => "A",
            Owner::B => "B",
            Owner::EnvA => "E_A",
            Owner::EnvB => "E_B",
            Owner::StoreA => "S_A",
            Owner::StoreB => "S_B",
        };
        f.write_str(s)
    }
}

/// A set of owners, e.g. the kept side of a partial trace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct OwnerSet(u8);

impl OwnerSet {
    pub const EMPTY: OwnerSet = OwnerSet(0);
    /// Everything on Alice's side: her lab, her records and her store.
    pub const ALICE_SIDE: OwnerSet = OwnerSet(0b01_0101);
    /// Everything on Bob's side.
    pub const BOB_SIDE: OwnerSet = OwnerSet(0b10_1010);

    pub fn of(owners: &[Owner]) -> OwnerSet {
        OwnerSet(owners.iter().fold(0, |m, o| m | o.mask()))
    }

    pub fn contains(self, owner: Owner) -> bool {
        self.0 & owner.mask() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: OwnerSet) -> OwnerSet {
        OwnerSet(self.0 | other.0)
    }

    pub fn intersects(self, other: OwnerSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn complement(self) -> OwnerSet {
        OwnerSet(!self.0 & 0b11_1111)
    }

    pub fn iter(self) -> impl Iterator<Item = Owner> {
        Owner::ALL.into_iter().filter(move |o| self.contains(*o))
    }
}

impl From<Owner> for OwnerSet {
    fn from(o: Owner) -> OwnerSet {
        OwnerSet(o.mask())
    }
}

/// Owner map for every register of a state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SystemPartition(BTreeMap<RegisterId, Owner>);

impl SystemPartition {
    pub fn new() -> SystemPartition {
        SystemPartition(BTreeMap::new())
    }

    pub fn owner(&self, id: RegisterId) -> Option<Owner> {
        self.0.get(&id).copied()
    }

    pub(crate) fn insert(&mut self, id: RegisterId, owner: Owner) -> Option<Owner> {
        self.0.insert(id, owner)
    }

    pub(crate) fn remove(&mut self, id: RegisterId) -> Option<Owner> {
        self.0.remove(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RegisterId, Owner)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}
