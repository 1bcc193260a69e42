//! Fixture protocols.

pub mod bb84;
pub mod toy;

use crate::error::{Error, Result};
use crate::protocol::ProtocolSpec;

pub use bb84::{bb84_decode, bb84_protocol, classical_guess_strategy, epr_attack_strategy, optimal_classical_cheat};
pub use toy::toy_protocol;

/// Fixtures addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixture {
    Bb84,
    Toy,
}

impl Fixture {
    pub fn name(self) -> &'static str {
        match self {
            Fixture::Bb84 => "bb84",
            Fixture::Toy => "toy",
        }
    }

    /// The fixture's protocol at parameter `n` (bb84) or `alpha` (toy).
    pub fn protocol(self, n: usize, alpha: f64) -> Result<ProtocolSpec> {
        match self {
            Fixture::Bb84 => bb84_protocol(n),
            Fixture::Toy => toy_protocol(alpha),
        }
    }
}

impl std::str::FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Fixture> {
        match s {
            "bb84" => Ok(Fixture::Bb84),
            "toy" => Ok(Fixture::Toy),
            other => Err(Error::UnknownFixture(other.to_string())),
        }
    }
}
