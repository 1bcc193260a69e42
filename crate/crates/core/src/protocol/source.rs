//! Sources of measurement outcomes.
//!
//! Every measurement asks its source for a draw in `[0, 1)` given `Pr[0]`;
//! outcome 0 happens iff the draw is below `Pr[0]`. Sampling uses a seeded
//! stream, enumeration forces each outcome in turn, and conditioning forces a
//! fixed outcome sequence.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum::Bit;

/// Default cap on the number of enumerated branches.
pub const DEFAULT_BRANCH_CAP: usize = 1 << 20;

pub trait OutcomeSource {
    /// A draw for a measurement whose outcome 0 has probability `p0`.
    fn draw(&mut self, p0: f64) -> Result<f64>;
}

/// Draws from a random stream.
pub struct RngSource<R> {
    rng: R,
}

impl<R: RngCore> RngSource<R> {
    pub fn new(rng: R) -> RngSource<R> {
        RngSource { rng }
    }
}

impl RngSource<ChaCha8Rng> {
    pub fn seeded(seed: u64) -> RngSource<ChaCha8Rng> {
        RngSource::new(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl<R: RngCore> OutcomeSource for RngSource<R> {
    fn draw(&mut self, _p0: f64) -> Result<f64> {
        Ok(self.rng.gen::<f64>())
    }
}

fn forced_draw(p0: f64, outcome: Bit) -> f64 {
    match outcome {
        Bit::Zero => 0.0,
        Bit::One => p0,
    }
}

fn is_branch_point(p0: f64) -> bool {
    p0 > 0.0 && p0 < 1.0
}

/// Forces a fixed outcome sequence, one entry per measurement, and tracks
/// the probability of the forced branch.
pub struct ForcedSource {
    outcomes: Vec<Bit>,
    position: usize,
    probability: f64,
}

impl ForcedSource {
    pub fn new(outcomes: Vec<Bit>) -> ForcedSource {
        ForcedSource { outcomes, position: 0, probability: 1.0 }
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }

    /// Number of forced outcomes not consumed yet.
    pub fn remaining(&self) -> usize {
        self.outcomes.len() - self.position
    }
}

impl OutcomeSource for ForcedSource {
    fn draw(&mut self, p0: f64) -> Result<f64> {
        let outcome = *self.outcomes.get(self.position).ok_or_else(|| Error::OutOfRange {
            what: "forced outcomes",
            detail: format!(
                "measurement {} requested but only {} outcomes given",
                self.position + 1,
                self.outcomes.len()
            ),
        })?;
        self.position += 1;
        let p = if outcome == Bit::Zero { p0 } else { 1.0 - p0 };
        if p <= 0.0 {
            return Err(Error::ImpossibleBranch);
        }
        self.probability *= p;
        Ok(forced_draw(p0, outcome))
    }
}

/// One depth-first pass of branch enumeration.
struct Enumerator {
    prefix: Vec<Bit>,
    depth: usize,
    probability: f64,
}

impl OutcomeSource for Enumerator {
    fn draw(&mut self, p0: f64) -> Result<f64> {
        if !is_branch_point(p0) {
            return Ok(0.0);
        }
        let outcome = match self.prefix.get(self.depth) {
            Some(b) => *b,
            None => {
                self.prefix.push(Bit::Zero);
                Bit::Zero
            }
        };
        self.depth += 1;
        self.probability *= if outcome == Bit::Zero { p0 } else { 1.0 - p0 };
        Ok(forced_draw(p0, outcome))
    }
}

/// Run `f` once per branch of its measurement tree, returning each result
/// with the probability of its branch. `f` must be deterministic given its
/// outcomes; it is re-executed from scratch for every branch.
pub fn enumerate_with<T, F>(cap: usize, f: F) -> Result<Vec<(f64, T)>>
where
    F: FnMut(&mut dyn OutcomeSource) -> Result<T>,
{
    let mut out = Vec::new();
    for_each_branch(cap, f, |p, value| {
        out.push((p, value));
        Ok(())
    })?;
    Ok(out)
}

/// Streaming form of [`enumerate_with`]: hands each branch to `visit` in
/// order instead of collecting. Returns the number of branches.
pub fn for_each_branch<T, F, V>(cap: usize, mut f: F, mut visit: V) -> Result<usize>
where
    F: FnMut(&mut dyn OutcomeSource) -> Result<T>,
    V: FnMut(f64, T) -> Result<()>,
{
    let mut count = 0;
    let mut prefix: Vec<Bit> = Vec::new();
    loop {
        let mut source = Enumerator { prefix, depth: 0, probability: 1.0 };
        let value = f(&mut source)?;
        count += 1;
        if count > cap {
            return Err(Error::BranchCap { cap });
        }
        visit(source.probability, value)?;
        prefix = source.prefix;
        prefix.truncate(source.depth);
        while prefix.last() == Some(&Bit::One) {
            prefix.pop();
        }
        match prefix.last_mut() {
            Some(last) => *last = Bit::One,
            None => return Ok(count),
        }
    }
}
