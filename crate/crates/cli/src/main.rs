use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qbc_core::harness::{bb84_walkthrough, emit_report, run_experiment, Command, ExperimentConfig, Mode, OutputFormat};
use qbc_core::protocols::Fixture;
use qbc_core::Error;

#[derive(Parser, Debug)]
#[command(name = "qbc", version, about = "Quantum bit commitment simulator and attack lab")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Concealment audit: what Bob learns about b after commit.
    Audit(RunArgs),
    /// Binding: classical cheating, the EPR attack and the generic attack.
    Attack(RunArgs),
    /// Enumeration against closed forms, cross-checked by sampling.
    Oracle(RunArgs),
    /// Print the one-position BB84 walkthrough.
    DemoBb84,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// bb84 or toy.
    #[arg(long, default_value = "bb84")]
    fixture: String,
    /// Positions for bb84: a list like 1,2,4 or a range like 1..6.
    #[arg(long)]
    n: Option<String>,
    /// Angles for toy: a list of radians; `pi`, `pi/8` and `3pi/8` are accepted.
    #[arg(long)]
    alpha: Option<String>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// enumerate, montecarlo or both.
    #[arg(long)]
    mode: Option<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// json, csv or both.
    #[arg(long, default_value = "both")]
    format: String,
    /// Record wall-clock time per point (reports then differ between runs).
    #[arg(long)]
    timing: bool,
    /// Maximum number of enumerated branches per distribution.
    #[arg(long)]
    branch_cap: Option<usize>,
    /// Maximum number of live qubits in a simulated state.
    #[arg(long)]
    register_cap: Option<usize>,
}

fn parse_ns(s: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::Config(format!("cannot parse --n '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn parse_angle(t: &str) -> Option<f64> {
    let t = t.trim();
    if let Ok(x) = t.parse::<f64>() {
        return Some(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()?),
        None => (t, 1.0),
    };
    let k = match num.strip_suffix("pi")?.trim().trim_end_matches('*') {
        "" => 1.0,
        k => k.parse::<f64>().ok()?,
    };
    Some(k * std::f64::consts::PI / den)
}

fn parse_alphas(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_angle(t).ok_or_else(|| Error::Config(format!("cannot parse angle '{t}'"))))
        .collect()
}

fn config(command: Command, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let fixture: Fixture = args.fixture.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
    let mut cfg = ExperimentConfig::new(command, fixture);
    if let Some(n) = &args.n {
        cfg.ns = parse_ns(n)?;
    }
    if let Some(a) = &args.alpha {
        cfg.alphas = parse_alphas(a)?;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = &args.mode {
        cfg.mode = m.parse::<Mode>()?;
    }
    cfg.record_timing = args.timing;
    if let Some(c) = args.branch_cap {
        cfg.branch_cap = c;
    }
    if let Some(c) = args.register_cap {
        cfg.register_cap = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(command: Command, args: &RunArgs) -> Result<(), Error> {
    let cfg = config(command, args)?;
    let format: OutputFormat = args.format.parse()?;
    let report = run_experiment(&cfg)?;
    for path in emit_report(&report, &args.out, format)? {
        println!("wrote {}", path.display());
    }
    for rec in &report.records {
        let at = match rec.alpha {
            Some(a) => format!("alpha={a}"),
            None => format!("n={}", rec.n),
        };
        println!("{} {} {at}: {}", command.name(), cfg.fixture.name(), if rec.passes() { "ok" } else { "FAIL" });
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_resource_cap() {
        3
    } else {
        match e {
            Error::Config(_) | Error::UnknownFixture(_) | Error::OutOfRange { .. } => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Sub::Audit(a) => run(Command::Audit, a),
        Sub::Attack(a) => run(Command::Attack, a),
        Sub::Oracle(a) => run(Command::Oracle, a),
        Sub::DemoBb84 => bb84_walkthrough().map(|text| print!("{text}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
