//! Exact pure-state simulation of labeled qubit registers.
//!
//! States are immutable values; every operation returns a new state.

mod density;
mod state;
mod types;
mod unitary;

pub use density::{DensityMatrix, DENSITY_TOLERANCE};
pub(crate) use state::Split;
pub use state::{
    apply_unitary, measure, partial_trace, prob_zero, zero_state, zero_state_with_cap, MeasurementRecord, PureState,
    DEFAULT_REGISTER_CAP, NORM_TOLERANCE, PROBABILITY_FLOOR,
};
pub use types::{Bit, Owner, OwnerSet, RegisterId, SystemPartition};
pub use unitary::{gates, unitarity_deviation, Unitary, UNITARITY_TOLERANCE};
