use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quantum::{prob_zero, zero_state, Bit, PureState, RegisterId, Unitary, DEFAULT_REGISTER_CAP};

use super::source::{enumerate_with, for_each_branch, OutcomeSource};
use super::transcript::{transmit_classical, ClassicalTranscript, PrivateBit, PublicBit};
use super::{Basis, EnvironmentMode, ExecutionPhase, Party, Phase, UnveilResult};

/// Label of the public bit carrying an announced commitment.
pub const COMMITTED_BIT_LABEL: &str = "b";

/// Index into an execution's record list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordId(usize);

/// A discarded register: either measured (classical value known) or pending,
/// i.e. kept unmeasured by a withholding party or by a coherent environment.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub party: Party,
    pub label: String,
    pub index: usize,
    pub register: RegisterId,
    pub basis: Basis,
    pub value: Option<Bit>,
    pub withheld: bool,
}

impl Record {
    pub fn is_pending(&self) -> bool {
        self.value.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionKind {
    Allocate,
    Gate,
    GateIf(Bit),
    Discard,
    SendClassical,
    SendCommittedBit,
    SendQuantum,
    Reinterpret,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionLogEntry {
    pub party: Party,
    pub phase: Phase,
    pub kind: ActionKind,
    pub label: String,
    pub registers: Vec<RegisterId>,
    pub basis: Option<Basis>,
    /// Whether a discard was withheld instead of sent to the environment.
    pub withheld: bool,
}

impl ActionLogEntry {
    /// Whether two entries describe the same action up to withholding.
    pub fn formally_equal(&self, other: &ActionLogEntry) -> bool {
        self.party == other.party
            && self.phase == other.phase
            && self.kind == other.kind
            && self.label == other.label
            && self.registers == other.registers
            && self.basis == other.basis
    }
}

/// Entries of two logs that differ other than by withholding, as
/// `(position, left, right)`. Empty iff the logs are formally identical.
pub fn formal_log_diff(
    left: &[ActionLogEntry],
    right: &[ActionLogEntry],
) -> Vec<(usize, Option<ActionLogEntry>, Option<ActionLogEntry>)> {
    let mut diff = Vec::new();
    for i in 0..left.len().max(right.len()) {
        match (left.get(i), right.get(i)) {
            (Some(a), Some(b)) if a.formally_equal(b) => {}
            (a, b) => diff.push((i, a.cloned(), b.cloned())),
        }
    }
    diff
}

/// Simulation settings for one run. The environment mode is per party so
/// that, e.g., Alice's private randomness can stay coherent (and be traced
/// out) while Bob's outcomes are branched on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub alice_mode: EnvironmentMode,
    pub bob_mode: EnvironmentMode,
    pub register_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::classical()
    }
}

impl RunConfig {
    pub fn classical() -> RunConfig {
        RunConfig {
            alice_mode: EnvironmentMode::Classical,
            bob_mode: EnvironmentMode::Classical,
            register_cap: DEFAULT_REGISTER_CAP,
        }
    }

    pub fn coherent() -> RunConfig {
        RunConfig {
            alice_mode: EnvironmentMode::Coherent,
            bob_mode: EnvironmentMode::Coherent,
            register_cap: DEFAULT_REGISTER_CAP,
        }
    }

    pub fn mode(&self, party: Party) -> EnvironmentMode {
        match party {
            Party::Alice => self.alice_mode,
            Party::Bob => self.bob_mode,
        }
    }

    pub fn with_cap(self, register_cap: usize) -> RunConfig {
        RunConfig { register_cap, ..self }
    }
}

/// Snapshot of a protocol run.
#[derive(Clone, Debug)]
pub struct Execution {
    state: PureState,
    transcript: ClassicalTranscript,
    records: Vec<Record>,
    labels: BTreeMap<(String, usize), RegisterId>,
    next_register: u32,
    log: Vec<ActionLogEntry>,
    phase: ExecutionPhase,
    committed_bit: Bit,
    config: RunConfig,
}

impl Execution {
    fn new(committed_bit: Bit, config: RunConfig) -> Result<Execution> {
        Ok(Execution {
            state: zero_state(&[])?,
            transcript: ClassicalTranscript::new(),
            records: Vec::new(),
            labels: BTreeMap::new(),
            next_register: 0,
            log: Vec::new(),
            phase: ExecutionPhase::PostCommit,
            committed_bit,
            config,
        })
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn transcript(&self) -> &ClassicalTranscript {
        &self.transcript
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn log(&self) -> &[ActionLogEntry] {
        &self.log
    }

    pub fn phase(&self) -> ExecutionPhase {
        self.phase
    }

    /// The bit Alice's strategy committed to (or was reinterpreted to).
    pub fn committed_bit(&self) -> Bit {
        self.committed_bit
    }

    pub fn mode(&self, party: Party) -> EnvironmentMode {
        self.config.mode(party)
    }

    /// Live registers on `party`'s side, in amplitude order.
    pub fn retained(&self, party: Party) -> Vec<RegisterId> {
        self.state.registers_in(party.side())
    }

    /// Register allocated under `(label, index)`, if it is still live.
    pub fn register(&self, label: &str, index: usize) -> Option<RegisterId> {
        self.labels.get(&(label.to_string(), index)).copied().filter(|r| self.state.owner(*r).is_some())
    }

    pub fn record(&self, party: Party, label: &str, index: usize) -> Option<&Record> {
        self.records.iter().find(|r| r.party == party && r.label == label && r.index == index)
    }
}

/// The handle a strategy acts through. Every action is checked against the
/// acting party's ownership and logged.
pub struct PartyContext<'a> {
    exec: &'a mut Execution,
    source: &'a mut dyn OutcomeSource,
    party: Party,
    phase: Phase,
    withholds: bool,
}

impl<'a> PartyContext<'a> {
    pub fn party(&self) -> Party {
        self.party
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn transcript(&self) -> &ClassicalTranscript {
        &self.exec.transcript
    }

    pub fn state(&self) -> &PureState {
        &self.exec.state
    }

    pub fn mode(&self) -> EnvironmentMode {
        self.exec.config.mode(self.party)
    }

    /// Alice's committed bit; Bob has no access to it.
    pub fn committed_bit(&self) -> Result<Bit> {
        match self.party {
            Party::Alice => Ok(self.exec.committed_bit),
            Party::Bob => Err(self.violation("read Alice's committed bit".into())),
        }
    }

    fn violation(&self, detail: String) -> Error {
        Error::ProtocolViolation { party: self.party, detail }
    }

    fn log(&mut self, kind: ActionKind, label: &str, registers: Vec<RegisterId>, basis: Option<Basis>, withheld: bool) {
        self.exec.log.push(ActionLogEntry {
            party: self.party,
            phase: self.phase,
            kind,
            label: label.to_string(),
            registers,
            basis,
            withheld,
        });
    }

    fn check_lab(&self, reg: RegisterId) -> Result<()> {
        match self.exec.state.owner(reg) {
            Some(o) if o == self.party.lab() => Ok(()),
            Some(o) => Err(self.violation(format!("register {reg} is owned by {o}"))),
            None => Err(Error::UnknownRegister(reg)),
        }
    }

    fn own_record(&self, id: RecordId) -> Result<&Record> {
        let rec = self.exec.records.get(id.0).ok_or_else(|| self.violation(format!("no record #{}", id.0)))?;
        if rec.party != self.party {
            return Err(Error::UngeneratedBit { party: self.party, register: rec.register });
        }
        Ok(rec)
    }

    /// Fresh register in |0>, owned by the party's lab.
    pub fn alloc(&mut self, label: &str, index: usize) -> Result<RegisterId> {
        let key = (label.to_string(), index);
        if self.exec.labels.contains_key(&key) {
            return Err(self.violation(format!("label {label}[{index}] allocated twice")));
        }
        let id = RegisterId(self.exec.next_register);
        self.exec.state.push_register(id, self.party.lab(), self.exec.config.register_cap)?;
        self.exec.next_register += 1;
        self.exec.labels.insert(key, id);
        self.log(ActionKind::Allocate, label, vec![id], None, false);
        Ok(id)
    }

    /// Look up a register by its allocation label. Finding is public; acting
    /// on the register still requires owning it.
    pub fn find(&self, label: &str, index: usize) -> Result<RegisterId> {
        self.exec
            .register(label, index)
            .ok_or_else(|| self.violation(format!("no live register labelled {label}[{index}]")))
    }

    /// The party's own record `(label, index)`.
    pub fn find_record(&self, label: &str, index: usize) -> Result<RecordId> {
        self.exec
            .records
            .iter()
            .position(|r| r.party == self.party && r.label == label && r.index == index)
            .map(RecordId)
            .ok_or_else(|| self.violation(format!("no record {label}[{index}]")))
    }

    pub fn gate(&mut self, label: &str, matrix: CMatrix, targets: &[RegisterId]) -> Result<()> {
        let u = Unitary::new(matrix, targets.to_vec())?;
        self.apply(label, &u)
    }

    /// Apply a prepared unitary to registers in the party's lab.
    pub fn apply(&mut self, label: &str, u: &Unitary) -> Result<()> {
        for t in u.targets() {
            self.check_lab(*t)?;
        }
        self.exec.state.apply(u)?;
        self.log(ActionKind::Gate, label, u.targets().to_vec(), None, false);
        Ok(())
    }

    /// Apply `matrix` to `targets` iff the record holds `value`. A pending
    /// record is used as a quantum control in its own basis instead.
    pub fn gate_if(
        &mut self,
        record: RecordId,
        value: Bit,
        label: &str,
        matrix: CMatrix,
        targets: &[RegisterId],
    ) -> Result<()> {
        let rec = self.own_record(record)?.clone();
        for t in targets {
            self.check_lab(*t)?;
        }
        let mut registers = vec![rec.register];
        registers.extend_from_slice(targets);
        match rec.value {
            Some(v) => {
                if v == value {
                    self.exec.state.apply(&Unitary::new(matrix, targets.to_vec())?)?;
                }
            }
            None => {
                match self.exec.state.owner(rec.register) {
                    Some(o) if self.party.side().contains(o) => {}
                    _ => return Err(self.violation(format!("pending record {} left the party's side", rec.register))),
                }
                let rotation = rec.basis.rotation().map(|m| Unitary::new(m, vec![rec.register])).transpose()?;
                let controlled = Unitary::new(controlled_on(&matrix, value), registers.clone())?;
                let state = &mut self.exec.state;
                if let Some(r) = &rotation {
                    state.apply(r)?;
                }
                state.apply(&controlled)?;
                if let Some(r) = &rotation {
                    state.apply(r)?;
                }
            }
        }
        self.log(ActionKind::GateIf(value), label, registers, None, false);
        Ok(())
    }

    fn measure_register(&mut self, reg: RegisterId, basis: Basis, label: &str) -> Result<Bit> {
        if let Some(m) = basis.rotation() {
            self.exec.state.apply(&Unitary::new(m, vec![reg])?)?;
        }
        let p0 = prob_zero(&self.exec.state, reg)?;
        let draw = self.source.draw(p0)?;
        let (outcome, probability) = self.exec.state.measure(reg, draw)?;
        self.exec.transcript.branch_probability *= probability;
        self.exec.state.release();
        self.exec.transcript.private_mut(self.party).push(PrivateBit {
            label: label.to_string(),
            register: reg,
            value: outcome,
        });
        Ok(outcome)
    }

    /// Send a register "to the environment": measure it in `basis`, or keep
    /// it unmeasured if the party withholds or the environment is coherent.
    pub fn discard(&mut self, reg: RegisterId, basis: Basis, label: &str) -> Result<RecordId> {
        self.check_lab(reg)?;
        let index = self.exec.records.iter().filter(|r| r.party == self.party && r.label == label).count();
        let (value, withheld) = if self.withholds {
            (None, true)
        } else {
            match self.exec.config.mode(self.party) {
                EnvironmentMode::Classical => (Some(self.measure_register(reg, basis, label)?), false),
                EnvironmentMode::Coherent => {
                    self.exec.state.set_owner(reg, self.party.environment())?;
                    (None, false)
                }
            }
        };
        self.exec.records.push(Record {
            party: self.party,
            label: label.to_string(),
            index,
            register: reg,
            basis,
            value,
            withheld,
        });
        self.log(ActionKind::Discard, label, vec![reg], Some(basis), withheld);
        Ok(RecordId(self.exec.records.len() - 1))
    }

    /// Announce a record publicly, measuring it first if it is pending.
    pub fn send_classical(&mut self, record: RecordId) -> Result<Bit> {
        let rec = self.own_record(record)?.clone();
        let value = match rec.value {
            Some(v) => v,
            None => {
                let v = self.measure_register(rec.register, rec.basis, &rec.label)?;
                self.exec.records[record.0].value = Some(v);
                v
            }
        };
        self.exec.transcript = transmit_classical(&self.exec.transcript, self.party, self.phase, rec.register)?;
        self.log(ActionKind::SendClassical, &rec.label, vec![rec.register], Some(rec.basis), false);
        Ok(value)
    }

    /// Announce the committed bit (Alice only).
    pub fn send_committed_bit(&mut self) -> Result<Bit> {
        let bit = self.committed_bit()?;
        self.exec.transcript.xi_s.push(PublicBit {
            sender: self.party,
            phase: self.phase,
            label: COMMITTED_BIT_LABEL.to_string(),
            value: bit,
        });
        self.log(ActionKind::SendCommittedBit, COMMITTED_BIT_LABEL, Vec::new(), None, false);
        Ok(bit)
    }

    /// Hand a register to the other party.
    pub fn send_quantum(&mut self, reg: RegisterId) -> Result<()> {
        self.check_lab(reg)?;
        self.exec.state.set_owner(reg, self.party.other().lab())?;
        let label = self.exec.labels.iter().find(|(_, r)| **r == reg).map(|((l, _), _)| l.clone()).unwrap_or_default();
        self.log(ActionKind::SendQuantum, &label, vec![reg], None, false);
        Ok(())
    }

    /// Adopt the pending-record bases and committed bit of `template` (a
    /// run of the same strategy with `bit` in mind), so the honest unveil
    /// continues as if `bit` had been committed.
    pub fn reinterpret_records(&mut self, template: &Execution, bit: Bit) -> Result<()> {
        if self.party != Party::Alice {
            return Err(self.violation("only the committer can reinterpret its records".into()));
        }
        let mut touched = Vec::new();
        for rec in self.exec.records.iter_mut().filter(|r| r.party == Party::Alice && r.is_pending()) {
            let t = template.record(Party::Alice, &rec.label, rec.index).ok_or_else(|| Error::ProtocolViolation {
                party: Party::Alice,
                detail: format!("template has no record {}[{}]", rec.label, rec.index),
            })?;
            rec.basis = t.basis;
            touched.push(rec.register);
        }
        self.exec.committed_bit = bit;
        self.log(ActionKind::Reinterpret, "records", touched, None, false);
        Ok(())
    }
}

/// Block-diagonal controlled gate firing when the control (most significant)
/// holds `value`.
fn controlled_on(gate: &CMatrix, value: Bit) -> CMatrix {
    let d = gate.nrows();
    let mut m = CMatrix::identity(2 * d, 2 * d);
    let off = value.index() * d;
    m.view_mut((off, off), (d, d)).copy_from(gate);
    m
}

/// A party's program. Steps are called in the order given by the protocol
/// schedules, with a per-party step counter.
pub trait Strategy: Send + Sync {
    fn party(&self) -> Party;

    fn name(&self) -> &str;

    /// Keep discarded registers instead of sending them to the environment.
    fn withholds(&self) -> bool {
        false
    }

    /// The bit this strategy actually commits to when asked for `requested`.
    fn effective_bit(&self, requested: Bit) -> Bit {
        requested
    }

    fn commit_step(&self, step: usize, ctx: &mut PartyContext<'_>) -> Result<()>;

    fn unveil_step(&self, step: usize, ctx: &mut PartyContext<'_>) -> Result<()>;
}

/// What Bob's decode rule sees: the classical transcript only.
pub struct BobView<'a> {
    pub transcript: &'a ClassicalTranscript,
    pub n: usize,
}

pub type DecodeRule = Arc<dyn Fn(&BobView<'_>) -> UnveilResult + Send + Sync>;

/// A two-party commitment protocol with its honest strategies.
#[derive(Clone)]
pub struct ProtocolSpec {
    pub name: String,
    pub n: usize,
    pub commit_schedule: Vec<Party>,
    pub unveil_schedule: Vec<Party>,
    pub alice: Arc<dyn Strategy>,
    pub bob: Arc<dyn Strategy>,
    pub decode: DecodeRule,
}

impl std::fmt::Debug for ProtocolSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProtocolSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("alice", &self.alice.name())
            .field("bob", &self.bob.name())
            .finish()
    }
}

/// A Bob who does nothing at all.
#[derive(Clone, Copy, Debug, Default)]
pub struct PassiveBob;

impl Strategy for PassiveBob {
    fn party(&self) -> Party {
        Party::Bob
    }

    fn name(&self) -> &str {
        "passive-bob"
    }

    fn commit_step(&self, _step: usize, _ctx: &mut PartyContext<'_>) -> Result<()> {
        Ok(())
    }

    fn unveil_step(&self, _step: usize, _ctx: &mut PartyContext<'_>) -> Result<()> {
        Ok(())
    }
}

fn check_roles(alice: &dyn Strategy, bob: &dyn Strategy) -> Result<()> {
    if alice.party() != Party::Alice {
        return Err(Error::Config(format!("strategy '{}' is not an Alice strategy", alice.name())));
    }
    if bob.party() != Party::Bob {
        return Err(Error::Config(format!("strategy '{}' is not a Bob strategy", bob.name())));
    }
    Ok(())
}

fn run_schedule(
    schedule: &[Party],
    phase: Phase,
    exec: &mut Execution,
    alice: &dyn Strategy,
    bob: &dyn Strategy,
    source: &mut dyn OutcomeSource,
) -> Result<()> {
    let mut steps = [0usize; 2];
    for party in schedule {
        let strategy = match party {
            Party::Alice => alice,
            Party::Bob => bob,
        };
        let slot = *party as usize;
        let step = steps[slot];
        steps[slot] += 1;
        let mut ctx = PartyContext {
            exec: &mut *exec,
            source: &mut *source,
            party: *party,
            phase,
            withholds: strategy.withholds(),
        };
        match phase {
            Phase::Commit => strategy.commit_step(step, &mut ctx)?,
            Phase::Unveil => strategy.unveil_step(step, &mut ctx)?,
        }
    }
    Ok(())
}

/// Run the commit phase with Alice intending `b`.
pub fn run_commit(
    spec: &ProtocolSpec,
    alice: &dyn Strategy,
    bob: &dyn Strategy,
    b: Bit,
    source: &mut dyn OutcomeSource,
    config: &RunConfig,
) -> Result<Execution> {
    check_roles(alice, bob)?;
    let mut exec = Execution::new(alice.effective_bit(b), *config)?;
    run_schedule(&spec.commit_schedule, Phase::Commit, &mut exec, alice, bob, source)?;
    exec.phase = ExecutionPhase::PostCommit;
    Ok(exec)
}

/// Run the unveil phase on a committed execution and apply Bob's decode rule.
pub fn run_unveil(
    spec: &ProtocolSpec,
    mut exec: Execution,
    alice: &dyn Strategy,
    bob: &dyn Strategy,
    source: &mut dyn OutcomeSource,
) -> Result<(UnveilResult, Execution)> {
    check_roles(alice, bob)?;
    if exec.phase != ExecutionPhase::PostCommit {
        return Err(Error::PhaseMisuse { expected: ExecutionPhase::PostCommit.name(), found: exec.phase.name() });
    }
    run_schedule(&spec.unveil_schedule, Phase::Unveil, &mut exec, alice, bob, source)?;
    exec.phase = ExecutionPhase::PostUnveil;
    let result = (spec.decode)(&BobView { transcript: &exec.transcript, n: spec.n });
    Ok((result, exec))
}

/// Commit then unveil in one go.
pub fn run_protocol(
    spec: &ProtocolSpec,
    alice: &dyn Strategy,
    bob: &dyn Strategy,
    b: Bit,
    source: &mut dyn OutcomeSource,
    config: &RunConfig,
) -> Result<(UnveilResult, Execution)> {
    let exec = run_commit(spec, alice, bob, b, source, config)?;
    run_unveil(spec, exec, alice, bob, source)
}

/// Every branch of the commit phase with its transcript.
pub fn enumerate_branches(
    spec: &ProtocolSpec,
    alice: &dyn Strategy,
    bob: &dyn Strategy,
    b: Bit,
    config: &RunConfig,
    branch_cap: usize,
) -> Result<Vec<(ClassicalTranscript, Execution)>> {
    let branches = enumerate_with(branch_cap, |s| run_commit(spec, alice, bob, b, s, config))?;
    Ok(branches.into_iter().map(|(_, e)| (e.transcript.clone(), e)).collect())
}

/// Every branch of a full commit/unveil run, with its probability.
pub fn enumerate_runs(
    spec: &ProtocolSpec,
    alice: &dyn Strategy,
    bob: &dyn Strategy,
    b: Bit,
    config: &RunConfig,
    branch_cap: usize,
) -> Result<Vec<(f64, UnveilResult, Execution)>> {
    let branches = enumerate_with(branch_cap, |s| run_protocol(spec, alice, bob, b, s, config))?;
    Ok(branches.into_iter().map(|(p, (r, e))| (p, r, e)).collect())
}

/// Exact distribution of Bob's verdict, `[Pr[0], Pr[1], Pr[⊥]]`, without
/// keeping the branches around.
pub fn verdict_distribution(
    spec: &ProtocolSpec,
    alice: &dyn Strategy,
    bob: &dyn Strategy,
    b: Bit,
    config: &RunConfig,
    branch_cap: usize,
) -> Result<[f64; 3]> {
    let mut d = [0.0; 3];
    for_each_branch(
        branch_cap,
        |s| run_protocol(spec, alice, bob, b, s, config).map(|(r, _)| r),
        |p, r| {
            d[verdict_slot(r)] += p;
            Ok(())
        },
    )?;
    Ok(d)
}

fn verdict_slot(r: UnveilResult) -> usize {
    match r {
        UnveilResult::Revealed(b) => b.index(),
        UnveilResult::Inconclusive => 2,
    }
}

/// Distribution of Bob's verdict: `[Pr[0], Pr[1], Pr[⊥]]`.
pub fn outcome_distribution(runs: &[(f64, UnveilResult, Execution)]) -> [f64; 3] {
    let mut d = [0.0; 3];
    for (p, r, _) in runs {
        d[verdict_slot(*r)] += p;
    }
    d
}
