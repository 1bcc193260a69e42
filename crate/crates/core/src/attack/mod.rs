//! The generic cheating strategy against a concealing commitment.
//!
//! Alice runs the honest commit for 0 but keeps every register she would
//! have sent to the environment (`commit'`). After commit she knows the
//! public string `gamma`, so she can re-simulate `commit'` for the target
//! bit, find the purification of her current Bob-side state closest to it
//! (an Uhlmann partner) and steer to that purification with a unitary on her
//! own registers. She then unveils honestly as if she had committed to the
//! target.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{
    enumerate_branches, enumerate_runs, gamma_label, outcome_distribution, run_commit, verdict_distribution, Execution,
    ForcedSource, GammaKey, Party, PartyContext, ProtocolSpec, RunConfig, Strategy, UnveilResult, DEFAULT_BRANCH_CAP,
};
use crate::quantum::{partial_trace, Bit, DensityMatrix, OwnerSet, PureState, Unitary, DEFAULT_REGISTER_CAP};
use crate::spectral::{
    fidelity, reduced_fidelity, steering_unitary_with_tolerance, uhlmann_partner, Bipartition, STEERING_TOLERANCE,
};

/// A strategy with every environment-bound discard kept by the party.
/// The actions are otherwise exactly those of `base`.
#[derive(Clone)]
pub struct WithholdingPlan {
    base: Arc<dyn Strategy>,
    fixed_bit: Option<Bit>,
    name: String,
}

impl WithholdingPlan {
    pub fn new(base: Arc<dyn Strategy>, fixed_bit: Option<Bit>) -> WithholdingPlan {
        let name = format!("withholding({})", base.name());
        WithholdingPlan { base, fixed_bit, name }
    }

    pub fn base(&self) -> &Arc<dyn Strategy> {
        &self.base
    }
}

impl std::fmt::Debug for WithholdingPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WithholdingPlan").field("base", &self.base.name()).field("fixed_bit", &self.fixed_bit).finish()
    }
}

impl Strategy for WithholdingPlan {
    fn party(&self) -> Party {
        self.base.party()
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn withholds(&self) -> bool {
        true
    }

    fn effective_bit(&self, requested: Bit) -> Bit {
        self.base.effective_bit(self.fixed_bit.unwrap_or(requested))
    }

    fn commit_step(&self, step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        self.base.commit_step(step, ctx)
    }

    fn unveil_step(&self, step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        self.base.unveil_step(step, ctx)
    }
}

/// Alice's `commit'`: honest commit to 0, withholding.
pub fn commit_prime(spec: &ProtocolSpec) -> WithholdingPlan {
    WithholdingPlan::new(spec.alice.clone(), Some(Bit::Zero))
}

/// Alice's `commit'` with `b` in mind.
pub fn commit_prime_for(spec: &ProtocolSpec, b: Bit) -> WithholdingPlan {
    WithholdingPlan::new(spec.alice.clone(), Some(b))
}

/// Bob's `commit''`: the honest Bob, withholding.
pub fn commit_double_prime(spec: &ProtocolSpec) -> WithholdingPlan {
    WithholdingPlan::new(spec.bob.clone(), None)
}

/// `f(F) = F^2`, the guaranteed acceptance when the honest unveil of the
/// target is always accepted.
pub fn success_lower_bound(fidelity: f64) -> f64 {
    let f = fidelity.clamp(0.0, 1.0);
    f * f
}

/// Acceptance bound when the honest unveil of the target succeeds with
/// probability `q`: the steered state is within angle `acos F` of the
/// target state, which is within angle `acos sqrt(q)` of the accepting
/// subspace. Reduces to [`success_lower_bound`] at `q = 1`.
pub fn effective_lower_bound(fidelity: f64, q: f64) -> f64 {
    let angle = fidelity.clamp(0.0, 1.0).acos() + q.clamp(0.0, 1.0).sqrt().acos();
    if angle >= std::f64::consts::FRAC_PI_2 {
        0.0
    } else {
        angle.cos().powi(2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackConfig {
    pub register_cap: usize,
    pub branch_cap: usize,
    pub steering_tolerance: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            register_cap: DEFAULT_REGISTER_CAP,
            branch_cap: DEFAULT_BRANCH_CAP,
            steering_tolerance: STEERING_TOLERANCE,
        }
    }
}

impl AttackConfig {
    fn coherent(&self) -> RunConfig {
        RunConfig::coherent().with_cap(self.register_cap)
    }
}

/// Bob's side in the audit: his lab and his environment.
fn bob_side() -> OwnerSet {
    OwnerSet::BOB_SIDE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaFidelity {
    pub gamma: String,
    pub p0: f64,
    pub p1: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityAudit {
    /// `E_gamma[F'(gamma)]` under `commit'(0)`.
    pub expected: f64,
    pub per_gamma: Vec<GammaFidelity>,
}

type GammaStates = BTreeMap<GammaKey, Vec<(f64, PureState)>>;

fn commit_prime_states(spec: &ProtocolSpec, b: Bit, config: &AttackConfig) -> Result<GammaStates> {
    let alice = commit_prime_for(spec, b);
    let branches = enumerate_branches(spec, &alice, spec.bob.as_ref(), b, &config.coherent(), config.branch_cap)?;
    let mut out: GammaStates = BTreeMap::new();
    for (t, exec) in branches {
        out.entry(t.gamma()).or_default().push((t.branch_probability, exec.state().clone()));
    }
    Ok(out)
}

fn group_fidelity(a: &[(f64, PureState)], b: &[(f64, PureState)]) -> Result<f64> {
    if let ([(_, x)], [(_, y)]) = (a, b) {
        return Ok(reduced_fidelity(x, y, bob_side())?.value());
    }
    let mix = |list: &[(f64, PureState)]| -> Result<DensityMatrix> {
        let parts = list.iter().map(|(p, s)| Ok((*p, partial_trace(s, bob_side())?))).collect::<Result<Vec<_>>>()?;
        DensityMatrix::mixture(&parts)
    };
    Ok(fidelity(&mix(a)?, &mix(b)?)?.value())
}

/// `E_gamma[F(rho_B(psi'_{0,gamma}), rho_B(psi'_{1,gamma}))]`, where the
/// states come from `commit'` with honest Bob and a coherent environment
/// and `rho_B` keeps Bob's lab and environment.
pub fn fidelity_audit(spec: &ProtocolSpec, config: &AttackConfig) -> Result<FidelityAudit> {
    let s0 = commit_prime_states(spec, Bit::Zero, config)?;
    let s1 = commit_prime_states(spec, Bit::One, config)?;
    let mut keys: Vec<&GammaKey> = s0.keys().chain(s1.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut expected = 0.0;
    let mut per_gamma = Vec::with_capacity(keys.len());
    for key in keys {
        let p0: f64 = s0.get(key).map_or(0.0, |l| l.iter().map(|x| x.0).sum());
        let p1: f64 = s1.get(key).map_or(0.0, |l| l.iter().map(|x| x.0).sum());
        let f = match (s0.get(key), s1.get(key)) {
            (Some(a), Some(b)) => group_fidelity(a, b)?,
            _ => 0.0,
        };
        expected += p0 * f;
        per_gamma.push(GammaFidelity { gamma: gamma_label(key), p0, p1, fidelity: f });
    }
    Ok(FidelityAudit { expected, per_gamma })
}

/// What Alice does after observing `gamma`.
#[derive(Clone, Debug)]
pub struct SteeringPlan {
    pub gamma: GammaKey,
    /// Probability of `gamma` under `commit'(0)` and under `commit'(target)`.
    pub p0: f64,
    pub p_target: f64,
    /// `F'(gamma)`.
    pub fidelity: f64,
    /// `<psi_01|psi'_{target,gamma}>`.
    pub partner_overlap: f64,
    /// Steering unitary on Alice's registers; `None` when `gamma` cannot
    /// occur under the target and Alice falls back to unveiling 0.
    pub unitary: Option<Unitary>,
    template: Option<Execution>,
}

impl SteeringPlan {
    /// Distance of the steering unitary to the nearest `e^{i phi} I`.
    pub fn identity_distance(&self) -> Option<f64> {
        self.unitary.as_ref().map(|u| u.distance_to_phase_identity())
    }
}

/// Alice's `unveil'`: steer the withheld `commit'(0)` state toward
/// `commit'(target)`, then unveil honestly as if `target` had been committed.
pub struct MayersAttack {
    spec: ProtocolSpec,
    target: Bit,
    config: AttackConfig,
    plans: Mutex<BTreeMap<GammaKey, Arc<SteeringPlan>>>,
}

impl std::fmt::Debug for MayersAttack {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MayersAttack").field("spec", &self.spec).field("target", &self.target).finish()
    }
}

/// Build the cheating Alice for `spec` aiming at `target`.
pub fn synthesize_unveil_prime(spec: &ProtocolSpec, target: Bit, config: AttackConfig) -> MayersAttack {
    MayersAttack { spec: spec.clone(), target, config, plans: Mutex::new(BTreeMap::new()) }
}

impl MayersAttack {
    pub fn target(&self) -> Bit {
        self.target
    }

    /// Re-simulate `commit'(b)` forcing the public string to be `gamma`.
    fn conditioned(&self, b: Bit, gamma: &GammaKey) -> Result<Option<(f64, Execution)>> {
        let alice = commit_prime_for(&self.spec, b);
        let mut source = ForcedSource::new(gamma.iter().map(|g| g.2).collect());
        match run_commit(&self.spec, &alice, self.spec.bob.as_ref(), b, &mut source, &self.config.coherent()) {
            Ok(exec) if exec.transcript().gamma() == *gamma && source.remaining() == 0 => {
                Ok(Some((source.probability(), exec)))
            }
            Ok(_) | Err(Error::ImpossibleBranch) | Err(Error::OutOfRange { what: "forced outcomes", .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn build_plan(&self, gamma: &GammaKey) -> Result<SteeringPlan> {
        let (p0, e0) = self.conditioned(Bit::Zero, gamma)?.ok_or(Error::ImpossibleBranch)?;
        let Some((p_target, et)) = self.conditioned(self.target, gamma)? else {
            return Ok(SteeringPlan {
                gamma: gamma.clone(),
                p0,
                p_target: 0.0,
                fidelity: 0.0,
                partner_overlap: 0.0,
                unitary: None,
                template: None,
            });
        };
        let psi0 = e0.state();
        let psi_t = et.state();
        let fid = reduced_fidelity(psi0, psi_t, bob_side())?.value();
        let rho0 = partial_trace(psi0, bob_side())?;
        let partner = uhlmann_partner(&rho0, psi_t, &Bipartition::alice_bob())?;
        let unitary = steering_unitary_with_tolerance(
            psi0,
            &partner.state,
            OwnerSet::ALICE_SIDE,
            self.config.steering_tolerance,
        )?;
        Ok(SteeringPlan {
            gamma: gamma.clone(),
            p0,
            p_target,
            fidelity: fid,
            partner_overlap: partner.overlap,
            unitary: Some(unitary),
            template: Some(et),
        })
    }

    /// The plan for `gamma`, computed once and cached.
    pub fn plan(&self, gamma: &GammaKey) -> Result<Arc<SteeringPlan>> {
        if let Some(p) = self.plans.lock().expect("plan cache poisoned").get(gamma) {
            return Ok(p.clone());
        }
        let plan = Arc::new(self.build_plan(gamma)?);
        self.plans.lock().expect("plan cache poisoned").entry(gamma.clone()).or_insert(plan.clone());
        Ok(plan)
    }
}

impl Strategy for MayersAttack {
    fn party(&self) -> Party {
        Party::Alice
    }

    fn name(&self) -> &str {
        "mayers-attack"
    }

    fn withholds(&self) -> bool {
        true
    }

    fn effective_bit(&self, _requested: Bit) -> Bit {
        self.spec.alice.effective_bit(Bit::Zero)
    }

    fn commit_step(&self, step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        self.spec.alice.commit_step(step, ctx)
    }

    fn unveil_step(&self, step: usize, ctx: &mut PartyContext<'_>) -> Result<()> {
        if step == 0 {
            let plan = self.plan(&ctx.transcript().gamma())?;
            if let (Some(u), Some(template)) = (&plan.unitary, &plan.template) {
                ctx.apply("steer", u)?;
                ctx.reinterpret_records(template, self.target)?;
            }
        }
        self.spec.alice.unveil_step(step, ctx)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaAttack {
    pub gamma: String,
    pub probability: f64,
    pub fidelity: f64,
    pub partner_overlap: f64,
    pub success: f64,
    pub inconclusive: f64,
    pub bound: f64,
    pub effective_bound: f64,
    pub steering_identity_distance: Option<f64>,
}

/// Exact outcome of the attack by enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub target: Bit,
    pub expected_fidelity: f64,
    /// Pr[Bob decodes the target].
    pub success: f64,
    /// Pr[Bob decodes the target | not ⊥].
    pub conditional_success: f64,
    pub inconclusive: f64,
    /// Pr[Bob decodes the other bit].
    pub wrong: f64,
    /// Pr[honest unveil of the target is accepted].
    pub honest_success: f64,
    /// `E_gamma[f(F'(gamma))]`.
    pub bound: f64,
    pub effective_bound: f64,
    /// Every gamma meets its effective bound.
    pub bound_satisfied: bool,
    pub max_steering_identity_distance: f64,
    pub min_partner_overlap_gap: f64,
    pub per_gamma: Vec<GammaAttack>,
}

/// Slack for comparing exact probabilities.
const EXACT_SLACK: f64 = 1e-9;

/// Enumerate the attack against honest Bob and compare with the bounds.
pub fn analyze_attack(spec: &ProtocolSpec, target: Bit, config: AttackConfig) -> Result<AttackReport> {
    let audit = fidelity_audit(spec, &config)?;
    let classical = RunConfig::default().with_cap(config.register_cap);
    let q = verdict_distribution(spec, spec.alice.as_ref(), spec.bob.as_ref(), target, &classical, config.branch_cap)?
        [target.index()];

    let attack = synthesize_unveil_prime(spec, target, config);
    let runs = enumerate_runs(spec, &attack, spec.bob.as_ref(), Bit::Zero, &classical, config.branch_cap)?;
    let dist = outcome_distribution(&runs);

    let mut by_gamma: BTreeMap<GammaKey, [f64; 3]> = BTreeMap::new();
    for (p, r, exec) in &runs {
        let slot = by_gamma.entry(exec.transcript().gamma()).or_insert([0.0; 3]);
        slot[0] += p;
        match r {
            UnveilResult::Revealed(b) if *b == target => slot[1] += p,
            UnveilResult::Inconclusive => slot[2] += p,
            _ => {}
        }
    }

    let mut per_gamma = Vec::with_capacity(by_gamma.len());
    let mut bound = 0.0;
    let mut effective = 0.0;
    let mut satisfied = true;
    let mut max_distance: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for (gamma, [p, s, bot]) in by_gamma {
        let plan = attack.plan(&gamma)?;
        let success = s / p;
        let f_bound = success_lower_bound(plan.fidelity);
        let e_bound = effective_lower_bound(plan.fidelity, q);
        satisfied &= success >= e_bound - EXACT_SLACK;
        bound += p * f_bound;
        effective += p * e_bound;
        if let Some(d) = plan.identity_distance() {
            max_distance = max_distance.max(d);
        }
        min_gap = min_gap.min(plan.partner_overlap - plan.fidelity);
        per_gamma.push(GammaAttack {
            gamma: gamma_label(&gamma),
            probability: p,
            fidelity: plan.fidelity,
            partner_overlap: plan.partner_overlap,
            success,
            inconclusive: bot / p,
            bound: f_bound,
            effective_bound: e_bound,
            steering_identity_distance: plan.identity_distance(),
        });
    }
    let decided = 1.0 - dist[2];
    Ok(AttackReport {
        target,
        expected_fidelity: audit.expected,
        success: dist[target.index()],
        conditional_success: if decided > 0.0 { dist[target.index()] / decided } else { 0.0 },
        inconclusive: dist[2],
        wrong: dist[target.flip().index()],
        honest_success: q,
        bound,
        effective_bound: effective,
        bound_satisfied: satisfied && dist[target.index()] >= effective - EXACT_SLACK,
        max_steering_identity_distance: max_distance,
        min_partner_overlap_gap: if min_gap.is_finite() { min_gap } else { 0.0 },
        per_gamma,
    })
}
