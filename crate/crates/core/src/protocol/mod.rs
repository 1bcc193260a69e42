//! Two-party protocol model: strategies acting on their own registers,
//! transcript bookkeeping, commit/unveil execution, branch enumeration and
//! the concealment audit.

mod audit;
mod engine;
mod source;
mod transcript;
mod types;

pub use audit::{audit_concealment, ConcealmentAudit, MARGINAL_TOLERANCE};
pub use engine::{
    enumerate_branches, enumerate_runs, formal_log_diff, outcome_distribution, run_commit, run_protocol, run_unveil,
    verdict_distribution, ActionKind, ActionLogEntry, BobView, DecodeRule, Execution, PartyContext, PassiveBob,
    ProtocolSpec, Record, RecordId, RunConfig, Strategy, COMMITTED_BIT_LABEL,
};
pub use source::{enumerate_with, for_each_branch, ForcedSource, OutcomeSource, RngSource, DEFAULT_BRANCH_CAP};
pub use transcript::{gamma_label, transmit_classical, ClassicalTranscript, EtaKey, GammaKey, PrivateBit, PublicBit};
pub use types::{Basis, EnvironmentMode, ExecutionPhase, Party, Phase, UnveilResult};
