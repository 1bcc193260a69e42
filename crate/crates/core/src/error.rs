use std::path::PathBuf;

use crate::protocol::Party;
use crate::quantum::RegisterId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("register cap exceeded: {requested} registers requested, cap is {cap}")]
    RegisterCap { requested: usize, cap: usize },

    #[error("branch cap exceeded: more than {cap} branches (try --mode montecarlo)")]
    BranchCap { cap: usize },

    #[error("unknown register {0}")]
    UnknownRegister(RegisterId),

    #[error("register {0} appears more than once")]
    DuplicateRegister(RegisterId),

    #[error("register {0} was already measured and consumed")]
    AlreadyConsumed(RegisterId),

    #[error("matrix is not unitary: ||U^dag U - I|| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("state is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("partial trace needs a nonempty keep set")]
    EmptyKeepSet,

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("purifying side too small: rank {rank} exceeds dimension {dim}")]
    PurificationTooSmall { rank: usize, dim: usize },

    #[error("reduced states differ by {distance:.3e}; compute an Uhlmann partner before steering")]
    ReductionsDiffer { distance: f64 },

    #[error("steering residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    SteeringPrecision { residual: f64, tolerance: f64 },

    #[error("protocol violation by {party}: {detail}")]
    ProtocolViolation { party: Party, detail: String },

    #[error("{party} tried to transmit a bit it never generated (register {register})")]
    UngeneratedBit { party: Party, register: RegisterId },

    #[error("phase misuse: expected {expected}, found {found}")]
    PhaseMisuse { expected: &'static str, found: &'static str },

    #[error("forced outcome has zero probability")]
    ImpossibleBranch,

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("unknown fixture '{0}' (expected 'bb84' or 'toy')")]
    UnknownFixture(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// True for errors caused by a configured resource limit.
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::RegisterCap { .. } | Error::BranchCap { .. })
    }
}
