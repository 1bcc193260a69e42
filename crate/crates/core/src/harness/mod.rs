//! Batch experiments: sweeps over `n` or `alpha`, exact enumeration and
//! seeded Monte Carlo, and JSON/CSV reports.

mod demo;
mod emit;
mod experiment;
pub mod streams;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::DEFAULT_BRANCH_CAP;
use crate::protocols::Fixture;
use crate::quantum::DEFAULT_REGISTER_CAP;

pub use demo::bb84_walkthrough;
pub use emit::{csv_header, emit_report, render_csv, render_json, round_sig, OutputFormat};
pub use experiment::run_experiment;

/// Bumped whenever the report layout or the CSV header changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits kept in every reported number.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0;

/// Largest register cap a config may ask for: 2^26 amplitudes take 1 GiB.
pub const MAX_REGISTER_CAP: usize = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Concealment: what Bob learns after commit.
    Audit,
    /// Binding: classical cheating, the EPR attack and the generic attack.
    Attack,
    /// Enumeration against closed forms and sampling.
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Audit => "audit",
            Command::Attack => "attack",
            Command::Oracle => "oracle",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Command> {
        match s {
            "audit" => Ok(Command::Audit),
            "attack" => Ok(Command::Attack),
            "oracle" => Ok(Command::Oracle),
            other => Err(Error::Config(format!("unknown command '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Enumerate,
    MonteCarlo,
    Both,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Enumerate => "enumerate",
            Mode::MonteCarlo => "montecarlo",
            Mode::Both => "both",
        }
    }

    pub fn enumerates(self) -> bool {
        self != Mode::MonteCarlo
    }

    pub fn samples(self) -> bool {
        self != Mode::Enumerate
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "enumerate" => Ok(Mode::Enumerate),
            "montecarlo" => Ok(Mode::MonteCarlo),
            "both" => Ok(Mode::Both),
            other => Err(Error::Config(format!("unknown mode '{other}' (expected enumerate, montecarlo or both)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed |exact - closed form|.
    pub exact: f64,
    /// Width of the Monte Carlo band, in binomial standard deviations.
    pub sigmas: f64,
    pub steering: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { exact: 1e-9, sigmas: 4.0, steering: crate::spectral::STEERING_TOLERANCE }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub fixture: Fixture,
    /// Sweep for bb84.
    pub ns: Vec<usize>,
    /// Sweep for toy.
    pub alphas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    /// In `both` mode, points with `n` above this are only sampled.
    /// `enumerate` mode enumerates every point regardless.
    pub enumerate_max_n: usize,
    /// The generic attack is only synthesized up to this `n`.
    pub attack_max_n: usize,
    /// The EPR attack keeps `2n` qubits alive; it is skipped above this `n`.
    pub epr_max_n: usize,
    pub branch_cap: usize,
    pub register_cap: usize,
    pub tolerances: Tolerances,
    /// Wall-clock fields make reports differ between runs; off by default.
    pub record_timing: bool,
}

impl ExperimentConfig {
    /// Defaults for `command` on `fixture`.
    pub fn new(command: Command, fixture: Fixture) -> ExperimentConfig {
        let ns = match command {
            Command::Audit => (1..=6).collect(),
            Command::Oracle => (1..=4).collect(),
            Command::Attack => (1..=8).collect(),
        };
        ExperimentConfig {
            command,
            fixture,
            ns,
            alphas: (0..=4).map(|k| k as f64 * PI / 8.0).collect(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            mode: Mode::Both,
            enumerate_max_n: if command == Command::Audit { 6 } else { 4 },
            attack_max_n: 4,
            epr_max_n: 6,
            branch_cap: DEFAULT_BRANCH_CAP,
            register_cap: DEFAULT_REGISTER_CAP,
            tolerances: Tolerances::default(),
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.fixture == Fixture::Bb84 {
            if let Some(n) = self.ns.iter().find(|n| **n == 0 || **n > crate::protocols::bb84::MAX_POSITIONS) {
                return Err(Error::Config(format!(
                    "n = {n} out of range 1..={}",
                    crate::protocols::bb84::MAX_POSITIONS
                )));
            }
        } else if let Some(a) = self.alphas.iter().find(|a| !(0.0..=PI / 2.0 + 1e-12).contains(*a)) {
            return Err(Error::Config(format!("alpha = {a} out of range [0, pi/2]")));
        }
        if self.branch_cap == 0 {
            return Err(Error::Config("branch cap must be at least 1".into()));
        }
        if !(1..=MAX_REGISTER_CAP).contains(&self.register_cap) {
            return Err(Error::Config(format!("register cap must be in 1..={MAX_REGISTER_CAP}")));
        }
        if !(self.tolerances.sigmas > 0.0 && self.tolerances.exact >= 0.0 && self.tolerances.steering > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// The sweep points, in report order.
    pub fn points(&self) -> Vec<(usize, Option<f64>)> {
        match self.fixture {
            Fixture::Bb84 => self.ns.iter().map(|n| (*n, None)).collect(),
            Fixture::Toy => self.alphas.iter().map(|a| (1, Some(*a))).collect(),
        }
    }
}

/// One reported quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Binomial standard error; absent for exact values.
    pub std_error: Option<f64>,
    /// True when computed by exhaustive enumeration or in closed form.
    pub exact: bool,
    /// Reference value the estimate is checked against.
    pub oracle: Option<f64>,
    pub within_tolerance: Option<bool>,
}

impl Estimate {
    pub fn exact(value: f64) -> Estimate {
        Estimate { value: round_sig(value), std_error: None, exact: true, oracle: None, within_tolerance: None }
    }

    /// An exact value checked against `oracle` within `tol`.
    pub fn exact_vs(value: f64, oracle: f64, tol: f64) -> Estimate {
        Estimate {
            value: round_sig(value),
            std_error: None,
            exact: true,
            oracle: Some(round_sig(oracle)),
            within_tolerance: Some((value - oracle).abs() <= tol),
        }
    }

    /// A frequency of `hits` in `trials`, checked against `oracle` within
    /// `sigmas` binomial standard deviations of the oracle probability.
    pub fn sampled(hits: usize, trials: usize, oracle: Option<f64>, sigmas: f64) -> Estimate {
        let (value, se) = if trials == 0 {
            (0.0, 0.0)
        } else {
            let p = hits as f64 / trials as f64;
            (p, (p * (1.0 - p) / trials as f64).sqrt())
        };
        let within = oracle.filter(|_| trials > 0).map(|q| {
            let sigma = (q.clamp(0.0, 1.0) * (1.0 - q.clamp(0.0, 1.0)) / trials as f64).sqrt();
            (value - q).abs() <= sigmas * sigma + 1e-12
        });
        Estimate {
            value: round_sig(value),
            std_error: Some(round_sig(se)),
            exact: false,
            oracle: oracle.map(round_sig),
            within_tolerance: within,
        }
    }

    pub fn passes(&self) -> bool {
        self.within_tolerance != Some(false)
    }
}

/// Everything measured at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub n: usize,
    pub alpha: Option<f64>,
    pub metrics: BTreeMap<String, Estimate>,
    pub flags: BTreeMap<String, bool>,
    /// Sample counts behind the Monte Carlo metrics.
    pub counts: BTreeMap<String, usize>,
    pub wall_clock_ms: Option<f64>,
}

impl PointRecord {
    pub fn metric(&self, name: &str) -> Option<&Estimate> {
        self.metrics.get(name)
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.flags.get(name).copied()
    }

    /// Every checked metric is within tolerance and no flag reports failure.
    pub fn passes(&self) -> bool {
        self.metrics.values().all(Estimate::passes) && self.flags.iter().all(|(k, v)| *v || k.ends_with("_skipped"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub records: Vec<PointRecord>,
}

impl Report {
    pub fn passes(&self) -> bool {
        self.records.iter().all(PointRecord::passes)
    }
}
